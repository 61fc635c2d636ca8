"""Finite-dimensional normed-space primitives.

Spaces are R^d under an l^p norm with p in {1, 2, inf}.  The quantity
everything else consumes is the truncated weak second moment

    tsm(t) = sup_{f in dual unit ball} E f(X)^2 1{||X|| <= t},

i.e. the supremum of a quadratic form over the dual unit ball.  For the
three supported norms the supremum is exactly computable:

    p = 2:   dual ball is the l^2 ball, supremum = largest eigenvalue;
    p = inf: dual ball is the l^1 ball, extreme points +-e_i, so the
             supremum is the largest diagonal entry;
    p = 1:   dual ball is the l^inf ball (hypercube), maximised over
             the 2^d sign vertices (guarded to d <= 20).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

#: Eigenvalue slack accepted when validating positive semidefiniteness.
PSD_TOL = 1e-10

#: Largest dimension for which the 2^d vertex enumeration (p = 1) is allowed.
VERTEX_ENUM_LIMIT = 20

_VALID_P = (1.0, 2.0, math.inf)


@dataclass(frozen=True)
class SpaceSpec:
    """Ambient space: dimension and the exponent of the l^p norm."""

    dim: int
    norm_p: float

    def __post_init__(self) -> None:
        if not isinstance(self.dim, (int, np.integer)) or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim!r}")
        object.__setattr__(self, "norm_p", float(self.norm_p))
        if self.norm_p not in _VALID_P:
            raise ValueError(f"norm_p must be 1, 2 or inf, got {self.norm_p!r}")

    def describe(self) -> str:
        p = "inf" if math.isinf(self.norm_p) else f"{self.norm_p:g}"
        return f"R^{self.dim} with l^{p}"


def norm(v: np.ndarray, space: SpaceSpec) -> float:
    """l^p norm of a single vector in the given space."""
    arr = np.asarray(v, dtype=float)
    if arr.shape != (space.dim,):
        raise ValueError(f"vector shape {arr.shape} does not match dim {space.dim}")
    return float(np.linalg.norm(arr, ord=space.norm_p))


def norms(rows: np.ndarray, space: SpaceSpec) -> np.ndarray:
    """Row-wise l^p norms of an (N, dim) array."""
    arr = np.asarray(rows, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != space.dim:
        raise ValueError(f"expected (N, {space.dim}) array, got shape {arr.shape}")
    p = space.norm_p
    if p == 2.0:
        return np.sqrt(np.einsum("ij,ij->i", arr, arr))
    if p == 1.0:
        return np.abs(arr).sum(axis=1)
    return np.abs(arr).max(axis=1)


def _validated_sym(matrix: np.ndarray, what: str) -> np.ndarray:
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{what} must be a square matrix, got shape {m.shape}")
    scale = max(1.0, float(np.abs(m).max(initial=0.0)))
    if np.abs(m - m.T).max(initial=0.0) > 1e-9 * scale:
        raise ValueError(f"{what} is not symmetric")
    return 0.5 * (m + m.T)


def _check_psd(sym: np.ndarray, what: str) -> np.ndarray:
    """Eigenvalues of a symmetric matrix, rejecting non-PSD input."""
    eig = np.linalg.eigvalsh(sym)
    tol = PSD_TOL * max(1.0, float(eig[-1]) if eig.size else 1.0)
    if eig.size and eig[0] < -tol:
        raise ValueError(f"{what} is not positive semidefinite (min eigenvalue {eig[0]:.3e})")
    return eig


@dataclass(frozen=True, eq=False)
class TruncatedCov:
    """Second-moment matrix of samples kept at truncation level `threshold`.

    Not centered: entry (i, j) is the average of x_i x_j over samples with
    ||x|| <= threshold (zero rows excluded count toward the average).
    """

    matrix: np.ndarray
    threshold: float
    sample_count: int = 0

    def __post_init__(self) -> None:
        sym = _validated_sym(self.matrix, "truncated covariance")
        _check_psd(sym, "truncated covariance")
        object.__setattr__(self, "matrix", sym)
        if not (self.threshold >= 0):
            raise ValueError("threshold must be nonnegative")
        if self.sample_count < 0:
            raise ValueError("sample_count must be nonnegative")


def trunc_cov_empirical(samples: np.ndarray, t: float, space: SpaceSpec) -> TruncatedCov:
    """Empirical truncated second moment (1/N) sum x x^T 1{||x|| <= t}."""
    arr = np.asarray(samples, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.shape[1] != space.dim:
        raise ValueError(f"samples have dim {arr.shape[1]}, space has dim {space.dim}")
    n = arr.shape[0]
    if n == 0:
        raise ValueError("need at least one sample")
    kept = arr[norms(arr, space) <= t]
    m = kept.T @ kept / n if kept.size else np.zeros((space.dim, space.dim))
    return TruncatedCov(matrix=0.5 * (m + m.T), threshold=float(t), sample_count=n)


def dual_ball_sup(cov: TruncatedCov | np.ndarray, space: SpaceSpec) -> float:
    """sup of the quadratic form f^T M f over the dual unit ball of the space."""
    m = cov.matrix if isinstance(cov, TruncatedCov) else _validated_sym(cov, "matrix")
    if m.shape[0] != space.dim:
        raise ValueError(f"matrix dim {m.shape[0]} does not match space dim {space.dim}")
    eig = _check_psd(m, "matrix")
    p = space.norm_p
    if p == 2.0:
        return float(eig[-1])
    if p == math.inf:
        return float(np.diag(m).max())
    if space.dim > VERTEX_ENUM_LIMIT:
        raise ValueError(
            f"p=1 vertex enumeration limited to dim <= {VERTEX_ENUM_LIMIT}, got {space.dim}"
        )
    return _sign_vertex_max(m)


def _sign_vertex_max(sym: np.ndarray) -> float:
    """Maximum of f^T M f over f in {-1, +1}^d, enumerated in chunks.

    The form is invariant under f -> -f, so the first coordinate is pinned
    to +1 and only 2^(d-1) vertices are visited.
    """
    d = sym.shape[0]
    if d == 1:
        return float(sym[0, 0])
    count = 1 << (d - 1)
    best = -math.inf
    bits = np.arange(d - 1, dtype=np.uint64)
    chunk = 1 << 14
    for start in range(0, count, chunk):
        idx = np.arange(start, min(start + chunk, count), dtype=np.uint64)
        signs = ((idx[:, None] >> bits[None, :]) & 1).astype(float) * 2.0 - 1.0
        f = np.concatenate([np.ones((idx.size, 1)), signs], axis=1)
        vals = np.einsum("bi,ij,bj->b", f, sym, f)
        best = max(best, float(vals.max()))
    return best


def truncated_second_moment(source, t: float, space: SpaceSpec) -> float:
    """tsm(t) from either an analytic provider or a raw sample set.

    `source` may be an (N, dim) sample array, an object exposing
    `truncated_cov(t, space)` (a distribution with a closed form), or an
    `EmpiricalTSM`.  The analytic shortcut is used whenever available.
    """
    if isinstance(source, EmpiricalTSM):
        return source(t)
    tc = getattr(source, "truncated_cov", None)
    if callable(tc):
        m = tc(t, space)
        if m is None:
            raise ValueError(
                f"{source!r} has no analytic truncated second moment; "
                "build an EmpiricalTSM from samples instead"
            )
        return dual_ball_sup(np.asarray(m, dtype=float), space)
    cov = trunc_cov_empirical(np.asarray(source, dtype=float), t, space)
    return dual_ball_sup(cov, space)


class EmpiricalTSM:
    """Truncated weak second moment from a frozen sample set.

    Samples are sorted by norm once; each evaluation then costs a single
    dual-ball supremum over the prefix second-moment matrix.  Beyond the
    largest sample norm the function is frozen at its final value and
    `extrapolated(t)` reports True, so series probes that run past the
    observed range see a constant tail rather than silent garbage.
    """

    def __init__(self, samples: np.ndarray, space: SpaceSpec):
        arr = np.asarray(samples, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != space.dim:
            raise ValueError(f"expected (N, {space.dim}) samples, got shape {arr.shape}")
        if arr.shape[0] == 0:
            raise ValueError("need at least one sample")
        self.space = space
        order = np.argsort(norms(arr, space), kind="stable")
        self._sorted = arr[order]
        self._norms = norms(self._sorted, space)
        self.max_norm = float(self._norms[-1])
        self.n_samples = arr.shape[0]
        # Prefix sums of outer products; N * d^2 floats, fine at the sample
        # sizes this is used with (<= a few 1e4 samples, d <= 20).
        outer = np.einsum("ni,nj->nij", self._sorted, self._sorted)
        self._prefix = np.cumsum(outer, axis=0)

    def extrapolated(self, t: float) -> bool:
        return t > self.max_norm

    def __call__(self, t: float) -> float:
        k = int(np.searchsorted(self._norms, t, side="right"))
        if k == 0:
            return 0.0
        m = self._prefix[k - 1] / self.n_samples
        return dual_ball_sup(0.5 * (m + m.T), self.space)
