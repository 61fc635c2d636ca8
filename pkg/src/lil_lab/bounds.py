"""Concentration bounds for sums of independent bounded vectors, with the
constants assembled explicitly, plus a Monte Carlo falsification harness.

The chain: a Bernstein-type mgf bound for ||sum Y_i|| (Klein-Rio), a
maximal-inequality version via Doob, a split of that bound into a
Gaussian term and a linear-exponent term, and finally the mixed
exponential-plus-polynomial tail bound whose constant C is assembled
from the proof chain (K_s, C', C'', and the (1+9 eps)^s substitution
factor).  C is admissible, not claimed minimal.

`mc_verify` tries to falsify the bounds empirically: it estimates the
moment inputs from an independent pilot run, then compares empirical
tail frequencies (and the empirical mgf) against the evaluated bounds,
flagging any grid point where the estimate minus three standard errors
still exceeds the bound.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from . import rng as _rng
from ._pool import chunk_ranges as _chunk_ranges
from ._pool import map_chunks as _map_chunks
from .spaces import SpaceSpec, dual_ball_sup, norm, norms


@dataclass(frozen=True)
class MomentData:
    """Moment inputs of the bound evaluators.

    M is the a.s. bound on the increment norm (math.inf when unbounded),
    lambda_n the weak variance sup_f sum_j E f^2(Y_j), mean_norm the
    expected norm of the full sum, moment_s the summed s-th norm moments
    (None with s when unused).
    """

    n: int
    M: float
    lambda_n: float
    mean_norm: float
    moment_s: float | None = None
    s: float | None = None

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.M < 0 or self.lambda_n < 0 or self.mean_norm < 0:
            raise ValueError("M, lambda_n, mean_norm must be nonnegative")
        if not math.isfinite(self.lambda_n) or not math.isfinite(self.mean_norm):
            raise ValueError("lambda_n and mean_norm must be finite")
        if math.isfinite(self.M) and self.lambda_n > self.n * self.M**2 * (1 + 1e-9):
            raise ValueError("lambda_n cannot exceed n * M^2")
        if (self.moment_s is None) != (self.s is None):
            raise ValueError("moment_s and s come together")
        if self.s is not None and self.s <= 2:
            raise ValueError("moment exponent s must exceed 2")
        if self.moment_s is not None and self.moment_s < 0:
            raise ValueError("moment_s must be nonnegative")


def eps_from_delta(delta: float) -> float:
    """Largest eps with (2+eps)(1+9eps)^2 <= 2+delta, by bisection."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    target = 2.0 + delta

    def f(e: float) -> float:
        return (2.0 + e) * (1.0 + 9.0 * e) ** 2

    hi = 1.0
    while f(hi) <= target:
        hi *= 2.0
    lo = 0.0
    while hi - lo > 1e-13 * max(1.0, lo):
        mid = 0.5 * (lo + hi)
        if f(mid) <= target:
            lo = mid
        else:
            hi = mid
    return lo


def d_const(eps: float, eta: float) -> float:
    """D_{eps,eta} = (1 + 2/eps)(3 + 4/eta)."""
    if eps <= 0 or not (0 < eta <= 1):
        raise ValueError("need eps > 0 and eta in (0, 1]")
    return (1.0 + 2.0 / eps) * (3.0 + 4.0 / eta)


def k_const(s: float) -> float:
    """K_s = (2s/e)^{2s}, the maximum of (log a)^{2s}/a over a > 1."""
    if s <= 2:
        raise ValueError("s must exceed 2")
    return (2.0 * s / math.e) ** (2.0 * s)


@dataclass(frozen=True)
class BoundParams:
    """Free parameters (eta, delta, s) with eps derived when not given."""

    eta: float
    delta: float
    s: float
    epsilon: float | None = None

    def __post_init__(self) -> None:
        if not (0 < self.eta <= 1):
            raise ValueError("eta must lie in (0, 1]")
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.s <= 2:
            raise ValueError("s must exceed 2")
        if self.epsilon is None:
            object.__setattr__(self, "epsilon", eps_from_delta(self.delta))
        elif self.epsilon <= 0:
            raise ValueError("epsilon must be positive")


@dataclass(frozen=True)
class FnConstants:
    """The assembled constants of the mixed tail bound."""

    delta: float
    eta: float
    s: float
    epsilon: float
    D: float
    K_s: float
    C_prime: float
    C_dprime: float
    C: float
    rho_formula: str = "rho(beta) = min(1, 1 / (2 * eps * D * log(1/beta)))"

    def rho(self, beta: float) -> float:
        """Truncation-level factor for a given polynomial term beta < 1."""
        if not (0 < beta < 1):
            raise ValueError("rho is defined for beta in (0, 1)")
        return min(1.0, 1.0 / (2.0 * self.epsilon * self.D * math.log(1.0 / beta)))


def fn_constants(delta: float, eta: float, s: float) -> FnConstants:
    eps = eps_from_delta(delta)
    dd = d_const(eps, eta)
    ks = k_const(s)
    c_prime = ks * (2.0 * dd) ** (2.0 * s)
    c_dprime = 1.0 + c_prime + eps ** (-s)
    c_full = c_dprime * (1.0 + 9.0 * eps) ** s
    return FnConstants(
        delta=delta, eta=eta, s=s, epsilon=eps, D=dd, K_s=ks,
        C_prime=c_prime, C_dprime=c_dprime, C=c_full,
    )


# ---------------------------------------------------------------------------
# Bound evaluators.  All are pure, reentrant, and monotone nonincreasing
# in their tail argument.
# ---------------------------------------------------------------------------


def klein_rio_mgf_bound(s: float, data: MomentData) -> float:
    """Bernstein-type bound on E exp(s ||sum Y_i||) for 0 < s < 2/(3M)."""
    if s <= 0:
        raise ValueError("s must be positive")
    if math.isinf(data.M):
        raise ValueError("mgf bound needs a finite a.s. bound M")
    if data.M > 0 and s >= 2.0 / (3.0 * data.M):
        raise ValueError(f"s must stay below 2/(3M) = {2.0 / (3.0 * data.M):g}")
    beta_n = 2.0 * data.M * data.mean_norm + data.lambda_n
    return math.exp(s * data.mean_norm + beta_n * s * s / (2.0 - 3.0 * data.M * s))


def maximal_tail_bound(x: float, data: MomentData) -> float:
    """P{max_k ||S_k|| >= mean_norm + x} bound from Doob's inequality."""
    if x <= 0:
        raise ValueError("x must be positive")
    if math.isinf(data.M):
        return 1.0
    denom = 2.0 * data.lambda_n + (4.0 * data.mean_norm + 3.0 * x) * data.M
    if denom == 0.0:
        return 0.0
    return math.exp(-x * x / denom)


def split_tail_bound(y: float, params: BoundParams, data: MomentData) -> float:
    """Gaussian term plus linear-exponent term bounding the (1+eta)-shifted
    maximal tail."""
    if y <= 0:
        raise ValueError("y must be positive")
    eps = params.epsilon
    gauss = 0.0 if data.lambda_n == 0.0 else math.exp(-y * y / ((2.0 + eps) * data.lambda_n))
    if data.M == 0.0:
        linear = 0.0
    elif math.isinf(data.M):
        linear = 1.0
    else:
        linear = math.exp(-y / (d_const(eps, params.eta) * data.M))
    return gauss + linear


def fuk_nagaev_bound(t: float, params: BoundParams, data: MomentData) -> float:
    """Mixed exponential/polynomial tail bound, capped at 1.

    Needs moment data: P{max_k ||S_k|| >= (1+eta) mean_norm + t} is at
    most exp(-t^2/((2+delta) Lambda_n)) + C sum_i E||Z_i||^s / t^s.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    if data.moment_s is None:
        raise ValueError("fuk_nagaev_bound needs moment_s and s in MomentData")
    if not math.isfinite(data.moment_s):
        raise ValueError("moment_s must be finite")
    if abs(data.s - params.s) > 1e-12:
        raise ValueError("exponent s disagrees between params and data")
    consts = fn_constants(params.delta, params.eta, params.s)
    gauss = 0.0 if data.lambda_n == 0.0 else math.exp(-t * t / ((2.0 + params.delta) * data.lambda_n))
    poly = consts.C * data.moment_s / t**params.s
    return min(1.0, gauss + poly)


# ---------------------------------------------------------------------------
# Monte Carlo falsification harness.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VerifyRow:
    kind: str  # "fn" (tail vs mixed bound), "kr1" (tail vs maximal bound), "kr" (mgf)
    x: float
    p_hat: float
    se: float
    bound: float
    violation: bool

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "x": self.x,
            "p_hat": self.p_hat,
            "se": self.se,
            "bound": _json_real(self.bound),
            "violation": self.violation,
        }


def _json_real(x):
    xf = float(x)
    if math.isinf(xf):
        return "inf" if xf > 0 else "-inf"
    if math.isnan(xf):
        return "nan"
    return xf


@dataclass(frozen=True)
class VerifyReport:
    rows: tuple[VerifyRow, ...]
    data: MomentData
    params: BoundParams
    pilot: dict
    n: int
    trials: int
    seed: int
    notes: tuple[str, ...] = ()

    @property
    def any_violation(self) -> bool:
        return any(r.violation for r in self.rows)

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "trials": self.trials,
            "seed": self.seed,
            "params": {
                "eta": self.params.eta,
                "delta": self.params.delta,
                "s": self.params.s,
                "epsilon": self.params.epsilon,
            },
            "data": {
                "M": _json_real(self.data.M),
                "lambda_n": self.data.lambda_n,
                "mean_norm": self.data.mean_norm,
                "moment_s": self.data.moment_s,
                "s": self.data.s,
            },
            "pilot": self.pilot,
            "rows": [r.to_json_dict() for r in self.rows],
            "any_violation": self.any_violation,
            "notes": list(self.notes),
        }

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        buf.write(f"# seed={self.seed} n={self.n} trials={self.trials}\n")
        buf.write("kind,x,p_hat,se,bound,violation\n")
        for r in self.rows:
            buf.write(f"{r.kind},{r.x:.10g},{r.p_hat:.10g},{r.se:.10g},{r.bound:.10g},{int(r.violation)}\n")
        return buf.getvalue()


def _pilot_chunk(dist, space, n, seed, s, lo, hi):
    d = dist.dim
    coord_sum = np.zeros(d)
    coord_sumsq = np.zeros(d)
    m2 = np.zeros((d, d))
    moment_sum = 0.0
    final_sum = 0.0
    final_sumsq = 0.0
    for trial in range(lo, hi):
        gen = _rng.substream(seed, _rng.PILOT, trial)
        draws = dist.sample(gen, n)
        coord_sum += draws.sum(axis=0)
        coord_sumsq += (draws**2).sum(axis=0)
        m2 += draws.T @ draws
        moment_sum += float((norms(draws, space) ** s).sum())
        fn = norm(draws.sum(axis=0), space)
        final_sum += fn
        final_sumsq += fn * fn
    return coord_sum, coord_sumsq, m2, moment_sum, final_sum, final_sumsq, hi - lo


def _main_chunk(dist, space, n, seed, lo, hi):
    finals = np.empty(hi - lo)
    maxes = np.empty(hi - lo)
    for k, trial in enumerate(range(lo, hi)):
        gen = _rng.substream(seed, _rng.MAIN, trial)
        draws = dist.sample(gen, n)
        path = np.cumsum(draws, axis=0)
        pn = norms(path, space)
        finals[k] = pn[-1]
        maxes[k] = pn.max()
    return finals, maxes


def mc_verify(
    dist,
    space: SpaceSpec,
    n: int,
    trials: int,
    t_grid,
    params: BoundParams,
    seed: int = 0,
    kr_points: int = 10,
    workers: int = 1,
) -> VerifyReport:
    """Empirical falsification run against the bound evaluators.

    A pilot pass (same number of trials, independent streams) estimates
    mean_norm, the weak variance, and the s-th moment, and rejects a
    distribution whose sample mean sits further than 5 standard errors
    from 0 in any coordinate.  The main pass records ||S_n|| and
    max_k ||S_k|| per trial and compares tail frequencies and the
    empirical mgf against the bounds; `violation` means the estimate is
    above the bound by more than 3 standard errors.
    """
    if trials < 100:
        raise ValueError("trials too small for stable pilot estimates")
    if n < 1:
        raise ValueError("n must be positive")
    tg = np.asarray(t_grid, dtype=float)
    if tg.size == 0 or np.any(tg <= 0):
        raise ValueError("t_grid must be positive")
    if not getattr(dist, "is_centered", False):
        raise ValueError("mc_verify needs a centered distribution")

    # pilot pass
    parts = _map_chunks(
        _pilot_chunk,
        [(dist, space, n, seed, params.s, lo, hi) for lo, hi in _chunk_ranges(trials)],
        workers,
    )
    d = dist.dim
    coord_sum = sum(p[0] for p in parts)
    coord_sumsq = sum(p[1] for p in parts)
    m2 = sum(p[2] for p in parts)
    moment_sum = sum(p[3] for p in parts)
    final_sum = sum(p[4] for p in parts)
    final_sumsq = sum(p[5] for p in parts)
    n_draws = trials * n

    coord_mean = coord_sum / n_draws
    coord_var = np.maximum(coord_sumsq / n_draws - coord_mean**2, 0.0)
    coord_se = np.sqrt(coord_var / n_draws)
    off = np.abs(coord_mean) > 5.0 * coord_se
    if off.any():
        j = int(np.argmax(np.abs(coord_mean) - 5.0 * coord_se))
        raise ValueError(
            f"pilot sample mean is not centered: coordinate {j} has mean "
            f"{coord_mean[j]:.3g} with standard error {coord_se[j]:.3g}"
        )

    mean_norm = final_sum / trials
    mean_norm_se = math.sqrt(max(final_sumsq / trials - mean_norm**2, 0.0) / trials)
    lam_hat = n * dual_ball_sup(m2 / n_draws, space)
    # batch split for the weak-variance standard error
    n_batches = min(10, len(parts))
    batch_vals = []
    for b in range(n_batches):
        group = parts[b::n_batches]
        bm2 = sum(p[2] for p in group)
        bcount = sum(p[6] for p in group) * n
        batch_vals.append(n * dual_ball_sup(bm2 / bcount, space))
    lam_se = float(np.std(batch_vals, ddof=1) / math.sqrt(n_batches)) if n_batches > 1 else 0.0
    moment_hat = n * moment_sum / n_draws

    m_bound = dist.norm_bound(space)
    data = MomentData(
        n=n, M=m_bound, lambda_n=lam_hat, mean_norm=mean_norm,
        moment_s=moment_hat, s=params.s,
    )
    pilot = {
        "mean_norm": mean_norm,
        "mean_norm_se": mean_norm_se,
        "lambda_n": lam_hat,
        "lambda_n_se": lam_se,
        "moment_s": moment_hat,
        "M": _json_real(m_bound),
        "pilot_trials": trials,
    }

    # main pass
    main_parts = _map_chunks(
        _main_chunk,
        [(dist, space, n, seed, lo, hi) for lo, hi in _chunk_ranges(trials)],
        workers,
    )
    finals = np.concatenate([p[0] for p in main_parts])
    maxes = np.concatenate([p[1] for p in main_parts])

    rows: list[VerifyRow] = []
    notes: list[str] = []
    for t in tg:
        thresh = (1.0 + params.eta) * mean_norm + t
        p_hat = float(np.mean(maxes >= thresh))
        se = math.sqrt(p_hat * (1.0 - p_hat) / trials)
        bound = fuk_nagaev_bound(float(t), params, data)
        rows.append(VerifyRow("fn", float(t), p_hat, se, bound, p_hat - 3.0 * se > bound))

    if math.isfinite(m_bound):
        for x in tg:
            thresh = mean_norm + x
            p_hat = float(np.mean(maxes >= thresh))
            se = math.sqrt(p_hat * (1.0 - p_hat) / trials)
            bound = maximal_tail_bound(float(x), data)
            rows.append(VerifyRow("kr1", float(x), p_hat, se, bound, p_hat - 3.0 * se > bound))
        s_cap = 2.0 / (3.0 * m_bound) if m_bound > 0 else 1.0
        for i in range(1, kr_points + 1):
            sv = s_cap * i / (kr_points + 1)
            with np.errstate(over="ignore"):
                vals = np.exp(sv * finals)
            mgf_hat = float(vals.mean())
            mgf_se = float(vals.std(ddof=1) / math.sqrt(trials))
            bound = klein_rio_mgf_bound(sv, data)
            rows.append(VerifyRow("kr", sv, mgf_hat, mgf_se, bound, mgf_hat - 3.0 * mgf_se > bound))
    else:
        notes.append("increment norm is unbounded: mgf and maximal rows skipped")

    return VerifyReport(
        rows=tuple(rows), data=data, params=params, pilot=pilot,
        n=n, trials=trials, seed=seed, notes=tuple(notes),
    )
