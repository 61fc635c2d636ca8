"""Counter-based random streams for reproducible parallel Monte Carlo."""
from __future__ import annotations

import hashlib

import numpy as np

_TAG = b"lil-lab-stream-v1"

# Purpose tags so that pilot, main, and auxiliary draws never share a stream.
PILOT = 1
MAIN = 2
MOMENT = 3
CURVE = 4


def substream(seed: int, *path: int) -> np.random.Generator:
    """Independent generator keyed by (seed, *path).

    Streams are Philox counter-based: the key is a SHA-256 hash of the
    seed and the path integers, so any worker can recreate trial k's
    stream without coordinating with the others, and results do not
    depend on how trials are partitioned across workers.
    """
    h = hashlib.sha256(_TAG)
    h.update(_u64(seed).tobytes())
    for part in path:
        h.update(_u64(part).tobytes())
    key = int.from_bytes(h.digest()[:16], "little")
    return np.random.Generator(np.random.Philox(key=key))


def _u64(x: int) -> np.uint64:
    return np.uint64(int(x) & 0xFFFFFFFFFFFFFFFF)
