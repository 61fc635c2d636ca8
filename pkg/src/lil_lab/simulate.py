"""Monte Carlo paths of normalized partial sums.

Paths stream in blocks with O(d) carried state, so N in the millions is
fine.  Every trial owns a counter-based RNG substream keyed by
(seed, purpose, trial): results are independent of worker count and of
the order in which trials execute.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng as _rng
from ._pool import chunk_ranges, map_chunks
from .slowvary import NormalizerSeq, SlowVaryFn
from .spaces import SpaceSpec, norm, norms

#: Steps generated per streaming block.
BLOCK = 65536


def geometric_checkpoints(N: int, ratio: float = 1.3) -> tuple[int, ...]:
    """Strictly increasing checkpoint grid 1, 2, ... up to and including N."""
    if N < 1:
        raise ValueError("N must be at least 1")
    if ratio <= 1:
        raise ValueError("ratio must exceed 1")
    out = [1]
    while out[-1] < N:
        out.append(min(N, max(out[-1] + 1, math.ceil(ratio * out[-1]))))
    return tuple(out)


@dataclass(frozen=True)
class PathConfig:
    N: int
    checkpoints: tuple[int, ...] = ()
    seed: int = 0
    trials: int = 1

    def __post_init__(self) -> None:
        if self.N < 1 or self.trials < 1:
            raise ValueError("N and trials must be positive")
        cps = self.checkpoints or geometric_checkpoints(self.N)
        cps = tuple(int(c) for c in cps)
        if any(c < 1 or c > self.N for c in cps) or any(b <= a for a, b in zip(cps, cps[1:])):
            raise ValueError("checkpoints must be strictly increasing within [1, N]")
        object.__setattr__(self, "checkpoints", cps)


def _walk_norms(dist, space, points, gen) -> np.ndarray:
    """||S_n|| at the given sorted checkpoints, streaming in blocks."""
    d = dist.dim
    carry = np.zeros(d)
    out = np.empty(len(points))
    idx = 0
    N = points[-1]
    for lo in range(0, N, BLOCK):
        hi = min(lo + BLOCK, N)
        csum = np.cumsum(dist.sample(gen, hi - lo), axis=0)
        csum += carry
        carry = csum[-1].copy()
        if not np.all(np.isfinite(carry)):
            raise ArithmeticError(f"partial sum overflowed near step {hi}")
        while idx < len(points) and points[idx] <= hi:
            out[idx] = norm(csum[points[idx] - lo - 1], space)
            idx += 1
    return out


def _path_chunk(dist, space, points, seed, purpose, lo, hi):
    rows = np.empty((hi - lo, len(points)))
    for k, trial in enumerate(range(lo, hi)):
        rows[k] = _walk_norms(dist, space, points, _rng.substream(seed, purpose, trial))
    return rows


@dataclass(frozen=True)
class PathResult:
    """Normalized checkpoint ratios ||S_n||/a_n, one row per trial."""

    checkpoints: tuple[int, ...]
    ratios: np.ndarray
    a_values: np.ndarray
    seed: int

    def to_csv_text(self) -> str:
        lines = [f"# seed={self.seed}", "trial,n,ratio"]
        for t in range(self.ratios.shape[0]):
            for j, n in enumerate(self.checkpoints):
                lines.append(f"{t},{n},{self.ratios[t, j]:.10g}")
        return "\n".join(lines) + "\n"


def run_path(dist, space: SpaceSpec, h: SlowVaryFn, config: PathConfig, workers: int = 1) -> PathResult:
    """Simulate trials of S_n and record ||S_n||/a_n at the checkpoints."""
    points = config.checkpoints
    a_vals = NormalizerSeq(h).values(np.asarray(points, dtype=float))
    parts = map_chunks(
        _path_chunk,
        [(dist, space, points, config.seed, _rng.MAIN, lo, hi) for lo, hi in chunk_ranges(config.trials)],
        workers,
    )
    norms_mat = np.vstack(parts)
    # a_n = sqrt(n h(n)) is strictly positive for n >= 1
    return PathResult(points, norms_mat / a_vals, a_vals, config.seed)


# ---------------------------------------------------------------------------
# Coupled plain/truncated paths.
# ---------------------------------------------------------------------------


def _trunc_chunk(dist, space, c_seq, points, seed, lo, hi):
    K = len(points)
    gaps = np.empty((hi - lo, K))
    last_steps = np.zeros(hi - lo, dtype=np.int64)
    counts = np.zeros(hi - lo, dtype=np.int64)
    gap_sups = np.empty(hi - lo)
    c_at_points = np.asarray(c_seq.values(np.asarray(points, dtype=float)))
    N = points[-1]
    for k, trial in enumerate(range(lo, hi)):
        gen = _rng.substream(seed, _rng.MAIN, trial)
        carry = np.zeros(dist.dim)
        carry_t = np.zeros(dist.dim)
        idx = 0
        for blo in range(0, N, BLOCK):
            bhi = min(blo + BLOCK, N)
            draws = dist.sample(gen, bhi - blo)
            steps = np.arange(blo + 1, bhi + 1, dtype=float)
            keep = norms(draws, space) <= c_seq.values(steps)
            cut = np.nonzero(~keep)[0]
            if cut.size:
                counts[k] += cut.size
                last_steps[k] = blo + cut[-1] + 1
            csum = np.cumsum(draws, axis=0)
            csum += carry
            carry = csum[-1].copy()
            csum_t = np.cumsum(draws * keep[:, None], axis=0)
            csum_t += carry_t
            carry_t = csum_t[-1].copy()
            if not (np.all(np.isfinite(carry)) and np.all(np.isfinite(carry_t))):
                raise ArithmeticError(f"partial sum overflowed near step {bhi}")
            while idx < K and points[idx] <= bhi:
                j = points[idx] - blo - 1
                gaps[k, idx] = norm(csum[j] - csum_t[j], space)
                idx += 1
        delta = norm(carry - carry_t, space)
        c_next = float(c_seq.values(np.array([float(last_steps[k] + 1)]))[0])
        gap_sups[k] = delta / c_next if c_next > 0 else (0.0 if delta == 0 else math.inf)
    gaps /= c_at_points
    return gaps, last_steps, counts, gap_sups


@dataclass(frozen=True)
class TruncResult:
    """Coupled plain/truncated paths on shared draws.

    gap_curve holds ||S_n - S'_n||/c_n at the checkpoints; last_trunc is
    the last step whose draw was truncated (0 when none were), and
    gap_sup the supremum of the normalized gap beyond that step, which
    for a nondecreasing c_n is the gap at last_trunc + 1.
    """

    checkpoints: tuple[int, ...]
    gap_curve: np.ndarray
    last_trunc: np.ndarray
    trunc_count: np.ndarray
    gap_sup: np.ndarray
    seed: int


def truncated_path(dist, space: SpaceSpec, c_seq, config: PathConfig, workers: int = 1) -> TruncResult:
    """Run S_n against its truncated twin S'_n (draws of norm above c_n dropped)."""
    points = config.checkpoints
    parts = map_chunks(
        _trunc_chunk,
        [(dist, space, c_seq, points, config.seed, lo, hi) for lo, hi in chunk_ranges(config.trials)],
        workers,
    )
    return TruncResult(
        checkpoints=points,
        gap_curve=np.vstack([p[0] for p in parts]),
        last_trunc=np.concatenate([p[1] for p in parts]),
        trunc_count=np.concatenate([p[2] for p in parts]),
        gap_sup=np.concatenate([p[3] for p in parts]),
        seed=config.seed,
    )


# ---------------------------------------------------------------------------
# Mean-norm curves and tail-window limsup estimates.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MeanNormCurve:
    n_grid: tuple[int, ...]
    mean: np.ndarray
    se: np.ndarray
    ci_lo: np.ndarray
    ci_hi: np.ndarray
    trials: int
    seed: int

    def to_csv_text(self) -> str:
        lines = [f"# seed={self.seed} trials={self.trials}", "n,mean,ci_lo,ci_hi"]
        for j, n in enumerate(self.n_grid):
            lines.append(f"{n},{self.mean[j]:.10g},{self.ci_lo[j]:.10g},{self.ci_hi[j]:.10g}")
        return "\n".join(lines) + "\n"


def mean_norm_curve(dist, space: SpaceSpec, c_seq, n_grid, trials: int, seed: int = 0, workers: int = 1) -> MeanNormCurve:
    """Estimate E||S_n||/c_n on a grid of n, one streamed pass per trial."""
    if trials < 30:
        raise ValueError("need at least 30 trials for a CI")
    points = tuple(int(n) for n in np.asarray(n_grid))
    if len(points) == 0 or any(b <= a for a, b in zip(points, points[1:])) or points[0] < 1:
        raise ValueError("n_grid must be strictly increasing positive integers")
    parts = map_chunks(
        _path_chunk,
        [(dist, space, points, seed, _rng.CURVE, lo, hi) for lo, hi in chunk_ranges(trials)],
        workers,
    )
    norms_mat = np.vstack(parts)
    c_vals = np.asarray(c_seq.values(np.asarray(points, dtype=float)))
    ratios = norms_mat / c_vals
    mean = ratios.mean(axis=0)
    se = ratios.std(axis=0, ddof=1) / math.sqrt(trials)
    return MeanNormCurve(
        n_grid=points, mean=mean, se=se,
        ci_lo=mean - 1.96 * se, ci_hi=mean + 1.96 * se,
        trials=trials, seed=seed,
    )


@dataclass(frozen=True)
class LimsupEstimate:
    per_trial: np.ndarray
    median: float
    q10: float
    q90: float
    tail_fraction: float


def limsup_estimate(paths: PathResult, tail_fraction: float = 0.5) -> LimsupEstimate:
    """Per-trial maximum of the checkpoint ratios over the tail window.

    The window is the last ceil(tail_fraction * K) checkpoints; the
    aggregate numbers are the median and the [10%, 90%] quantiles of the
    per-trial maxima.
    """
    if not (0 < tail_fraction <= 1):
        raise ValueError("tail_fraction must lie in (0, 1]")
    K = paths.ratios.shape[1]
    w = max(1, math.ceil(tail_fraction * K))
    per_trial = paths.ratios[:, K - w :].max(axis=1)
    return LimsupEstimate(
        per_trial=per_trial,
        median=float(np.median(per_trial)),
        q10=float(np.quantile(per_trial, 0.1)),
        q90=float(np.quantile(per_trial, 0.9)),
        tail_fraction=tail_fraction,
    )
