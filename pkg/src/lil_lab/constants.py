"""Limit constants of normalized i.i.d. sums: series criterion and friends.

The central object is the series

    sum_n (1/n) exp(-c^2 h(n) / (2 H(a_n))),      a_n = psi(n),

whose convergence threshold in c is the limsup constant c0 of the
normalized sums.  Convergence of an infinite series cannot be decided
from finitely many terms, so `series_classify` is an explicit heuristic:
along a geometric subsequence n_j = ceil(rho^j) the block-summed series
behaves like sum_j exp(-x_j) with x_j = c^2 h(n_j)/(2 H(a_{n_j})), and
the classifier fits the growth of x_j against log j.  Slope >= 1 + margin
means terms decay faster than 1/j, slope <= 1 - margin slower; a clear
acceleration or deceleration of the slope between consecutive windows
overrides the level test (x_j growing like (log j)^2 converges for every
c > 0 even though any fixed window's slope may sit near 1).

All verdicts carry their diagnostics.  The bisection solvers return a
working bracket of the decision boundary together with the raw verdicts
at the endpoints; INCONCLUSIVE probes are surfaced, never hidden.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .slowvary import NormalizerSeq, SlowVaryFn, _ols_slope, log_psi, psi_inv_log
from .spaces import EmpiricalTSM, SpaceSpec, dual_ball_sup

CONVERGES = "CONVERGES"
DIVERGES = "DIVERGES"
INCONCLUSIVE = "INCONCLUSIVE"

#: Exponent cap corresponding to exp(709) ~ 8e307, just under the float max.
_LOG_FLOAT_MAX = 709.0


@dataclass(frozen=True)
class SeriesProbe:
    """Probe-subsequence settings for the series classifier."""

    rho: float = 2.0
    j_max: int = 120
    window_frac: float = 0.25
    margin: float = 0.1
    trend_tol: float = 0.05

    def __post_init__(self) -> None:
        if not (self.rho > 1 and self.j_max >= 16 and 0 < self.window_frac <= 0.5):
            raise ValueError("need rho > 1, j_max >= 16, window_frac in (0, 0.5]")


DEFAULT_PROBE = SeriesProbe()


@dataclass(frozen=True)
class SeriesVerdict:
    verdict: str
    slope: float
    accel: float
    c: float
    exponents: np.ndarray
    probe_n: np.ndarray
    note: str = ""

    def to_json_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "slope": _json_real(self.slope),
            "accel": _json_real(self.accel),
            "c": self.c,
            "note": self.note,
        }


def _window_slopes(x: np.ndarray, probe: SeriesProbe) -> tuple[float, float]:
    """OLS slopes of x_j vs log j over the last window and the one before."""
    j = np.arange(1, x.size + 1, dtype=float)
    w = max(4, int(math.ceil(probe.window_frac * x.size)))
    lo2, lo1 = x.size - w, x.size - 2 * w
    s2 = _ols_slope(np.log(j[lo2:]), x[lo2:])
    s1 = _ols_slope(np.log(j[max(lo1, 0) : lo2]), x[max(lo1, 0) : lo2])
    return s1, s2


def _classify_exponents(x: np.ndarray, probe: SeriesProbe, c: float, probe_n: np.ndarray) -> SeriesVerdict:
    finite = np.isfinite(x)
    w = max(4, int(math.ceil(probe.window_frac * x.size)))
    tail = x[-w:]
    if not np.isfinite(tail).any():
        return SeriesVerdict(CONVERGES, math.inf, 0.0, c, x, probe_n, "tail terms vanish (H = 0 there)")
    if not finite.all():
        # mixed inf/finite exponents: classify on the finite part
        x = np.where(finite, x, np.nan)
        keep = ~np.isnan(x)
        x = x[keep]
        probe_n = probe_n[keep]
    s1, s2 = _window_slopes(x, probe)
    accel = s2 / s1 - 1.0 if abs(s1) > 1e-12 else 0.0
    if accel >= probe.trend_tol:
        return SeriesVerdict(CONVERGES, s2, accel, c, x, probe_n, "exponent growth is super-logarithmic")
    if accel <= -probe.trend_tol:
        return SeriesVerdict(DIVERGES, s2, accel, c, x, probe_n, "exponent growth is sub-logarithmic")
    if s2 >= 1.0 + probe.margin - 1e-9:
        return SeriesVerdict(CONVERGES, s2, accel, c, x, probe_n, "")
    if s2 <= 1.0 - probe.margin + 1e-9:
        return SeriesVerdict(DIVERGES, s2, accel, c, x, probe_n, "")
    return SeriesVerdict(INCONCLUSIVE, s2, accel, c, x, probe_n, "slope inside the margin band")


def _probe_points(probe: SeriesProbe) -> np.ndarray:
    j = np.arange(1, probe.j_max + 1, dtype=float)
    return np.ceil(probe.rho**j)


def series_classify(c: float, h: SlowVaryFn, H_fn, probe: SeriesProbe = DEFAULT_PROBE) -> SeriesVerdict:
    """Classify sum_n (1/n) exp(-c^2 h(n)/(2 H(a_n))) for a_n = psi(n).

    c = 0 is DIVERGES by convention (the terms cannot decay).  Probe
    points with H(a_n) = 0 contribute nothing to the series; an entirely
    vanishing tail is CONVERGES.
    """
    if c < 0:
        raise ValueError("c must be nonnegative")
    n = _probe_points(probe)
    if c == 0.0:
        return SeriesVerdict(DIVERGES, 0.0, 0.0, 0.0, np.zeros_like(n), n, "c = 0: harmonic floor")
    log_a = log_psi(h, np.log(n))
    a = np.exp(np.minimum(log_a, _LOG_FLOAT_MAX))
    hv = np.asarray([H_fn(t) for t in a], dtype=float)
    if np.any(hv < 0):
        raise ValueError("H must be nonnegative")
    with np.errstate(divide="ignore"):
        x = c * c * h(n) / (2.0 * hv)
    return _classify_exponents(x, probe, c, n)


def _alpha_exponents(c_seq, H_fn, probe: SeriesProbe) -> tuple[np.ndarray, np.ndarray]:
    n = _probe_points(probe)
    cn = np.asarray(c_seq.values(n), dtype=float)
    hv = np.asarray([H_fn(t) for t in cn], dtype=float)
    if np.any(hv < 0):
        raise ValueError("H must be nonnegative")
    with np.errstate(divide="ignore", over="ignore"):
        base = cn * cn / (2.0 * n * hv)
    return base, n


def alpha_series_classify(alpha: float, c_seq, H_fn, probe: SeriesProbe = DEFAULT_PROBE) -> SeriesVerdict:
    """Same classifier for sum_n (1/n) exp(-alpha^2 c_n^2 / (2 n H(c_n)))."""
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    base, n = _alpha_exponents(c_seq, H_fn, probe)
    if alpha == 0.0:
        return SeriesVerdict(DIVERGES, 0.0, 0.0, 0.0, np.zeros_like(n), n, "alpha = 0: harmonic floor")
    return _classify_exponents(alpha * alpha * base, probe, alpha, n)


# ---------------------------------------------------------------------------
# Threshold brackets by bisection on the verdict.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Bracket:
    """Working bracket [lo, hi] for a series threshold constant.

    `lo_verdict` and `hi_verdict` are the raw classifier verdicts at the
    endpoints.  When the classifier's INCONCLUSIVE band is wider than the
    requested tolerance the bracket is driven by the decision rule
    (CONVERGES, or INCONCLUSIVE with slope >= 1, counts as the converging
    side) and the endpoint verdicts record what the classifier actually
    said.  `probes` lists every (c, verdict, slope) consulted.
    """

    lo: float
    hi: float
    lo_verdict: str
    hi_verdict: str
    probes: tuple = ()
    note: str = ""

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def to_json_dict(self) -> dict:
        return {
            "lo": _json_real(self.lo),
            "hi": _json_real(self.hi),
            "lo_verdict": self.lo_verdict,
            "hi_verdict": self.hi_verdict,
            "note": self.note,
            "probes": [
                {"c": c, "verdict": v, "slope": _json_real(s)} for (c, v, s) in self.probes
            ],
        }


_BISECT_CAP = 1e6


def _threshold_bracket(classify, tol: float) -> Bracket:
    """Bisection on c of the converging-side decision of `classify`."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    probes: list[tuple[float, str, float]] = []

    def side(cv: float) -> bool:
        v = classify(cv)
        probes.append((cv, v.verdict, v.slope))
        if v.verdict == CONVERGES:
            return True
        if v.verdict == INCONCLUSIVE and v.slope >= 1.0:
            return True
        return False

    lo, hi = 0.0, 1.0
    if side(1.0):
        hi = 1.0
        lo = 0.5
        while lo > 0.25 * tol and side(lo):
            hi = lo
            lo *= 0.5
        if lo <= 0.25 * tol and side(lo):
            return _finish_bracket(0.0, lo, classify, probes, "threshold is 0 within tolerance")
    else:
        lo = 1.0
        hi = 2.0
        while not side(hi):
            lo = hi
            hi *= 2.0
            if hi > _BISECT_CAP:
                return _finish_bracket(lo, math.inf, classify, probes, f"no converging c up to {_BISECT_CAP:g}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if side(mid):
            hi = mid
        else:
            lo = mid
    return _finish_bracket(lo, hi, classify, probes, "")


def _finish_bracket(lo, hi, classify, probes, note) -> Bracket:
    lo_v = classify(lo).verdict if math.isfinite(lo) else INCONCLUSIVE
    hi_v = classify(hi).verdict if math.isfinite(hi) else CONVERGES
    inconclusive = [p for p in probes if p[1] == INCONCLUSIVE]
    if inconclusive and not note:
        note = f"{len(inconclusive)} INCONCLUSIVE probes inside the search"
    return Bracket(float(lo), float(hi), lo_v, hi_v, tuple(probes), note)


def c0_compute(h: SlowVaryFn, H_fn, tol: float = 0.02, probe: SeriesProbe = DEFAULT_PROBE) -> Bracket:
    """Bracket the series threshold c0 = inf{c >= 0 : series converges}."""
    return _threshold_bracket(lambda c: series_classify(c, h, H_fn, probe), tol)


def alpha0_compute(c_seq, H_fn, tol: float = 0.02, probe: SeriesProbe = DEFAULT_PROBE) -> Bracket:
    """Bracket the divergence threshold alpha0 for a general c_n sequence."""
    return _threshold_bracket(lambda a: alpha_series_classify(a, c_seq, H_fn, probe), tol)


# ---------------------------------------------------------------------------
# The regular-variation limsup constant lambda.
# ---------------------------------------------------------------------------

DEFAULT_X_GRID = tuple(np.geomspace(1e4, 1e300, 241))

# Slack for the report's band-vs-bracket consistency flag.  At the end of
# any double-precision grid the limsup probe still sits below its limit by
# a few percent for loglog-type scenarios, so the flag tolerates that much.
_SANDWICH_MARGIN = 0.1


@dataclass(frozen=True)
class LambdaResult:
    lam: float
    lam2: float
    tail_max: float
    last_value: float
    grid: np.ndarray
    curve: np.ndarray
    diverging: bool
    note: str = ""


def lambda_compute(h: SlowVaryFn, H_fn, x_grid=None) -> LambdaResult:
    """Estimate lambda^2 = limsup_x 2 psi_inv(x LLx) H(x) / (x^2 LLx).

    Evaluation is log-domain throughout; psi_inv at arguments far above
    the float ceiling stays representable as a log.  The limsup estimate
    is the running maximum of the curve over the last quarter of the
    grid; `last_value` is reported next to it so a still-climbing curve
    is visible.  A tail that keeps growing like a power of LLx flags the
    constant as infinite.
    """
    grid = np.asarray(x_grid if x_grid is not None else DEFAULT_X_GRID, dtype=float)
    if grid.size < 8 or np.any(np.diff(grid) <= 0):
        raise ValueError("x_grid must be increasing with at least 8 points")
    log_x = np.log(grid)
    u = np.maximum(log_x, 1.0)
    llx = np.log(np.maximum(u, math.e))
    hv = np.asarray([H_fn(x) for x in grid], dtype=float)
    if np.any(hv < 0):
        raise ValueError("H must be nonnegative")
    log_g = np.full(grid.shape, -np.inf)
    pos = hv > 0
    for i in np.nonzero(pos)[0]:
        inv_log = psi_inv_log(h, log_x[i] + math.log(llx[i]))
        log_g[i] = math.log(2.0) + inv_log + math.log(hv[i]) - 2.0 * log_x[i] - math.log(llx[i])
    with np.errstate(over="ignore"):
        curve = np.exp(log_g)
    w = max(4, grid.size // 4)
    tail = curve[-w:]
    tail_max = float(np.max(tail))
    last = float(curve[-1])
    # Divergence heuristic: log g still climbing against log LLx.
    finite_tail = np.isfinite(log_g[-w:])
    diverging = False
    if finite_tail.sum() >= 4:
        gamma = _ols_slope(np.log(llx[-w:][finite_tail]), log_g[-w:][finite_tail])
        diverging = gamma >= 0.5
    lam2 = math.inf if diverging else tail_max
    lam = math.sqrt(lam2) if math.isfinite(lam2) else math.inf
    note = "tail of the curve is still growing; constant flagged infinite" if diverging else ""
    return LambdaResult(lam, lam2, tail_max, last, grid, curve, diverging, note)


@dataclass(frozen=True)
class RatioCurve:
    grid: np.ndarray
    values: np.ndarray
    tail_max: float
    last_value: float


def lil_ratio_check(h: SlowVaryFn, H_fn, n_grid=None) -> RatioCurve:
    """Cross-check curve LLn * H(a_n / LLn) / h(n), whose limsup is lambda^2/2."""
    grid = np.asarray(n_grid if n_grid is not None else DEFAULT_X_GRID, dtype=float)
    if grid.size < 8 or np.any(np.diff(grid) <= 0):
        raise ValueError("n_grid must be increasing with at least 8 points")
    log_n = np.log(grid)
    u = np.maximum(log_n, 1.0)
    lln = np.log(np.maximum(u, math.e))
    log_a = log_psi(h, log_n)
    t_arg = np.exp(np.minimum(log_a - np.log(lln), _LOG_FLOAT_MAX))
    hv = np.asarray([H_fn(t) for t in t_arg], dtype=float)
    values = lln * hv / h(grid)
    w = max(4, grid.size // 4)
    return RatioCurve(grid, values, float(np.max(values[-w:])), float(values[-1]))


def agreement_gap(a: float, b: float) -> float:
    """Relative disagreement |a - b| / max(|a|, |b|); 0 when both are 0."""
    scale = max(abs(a), abs(b))
    if scale == 0.0:
        return 0.0
    if math.isinf(a) or math.isinf(b):
        return 0.0 if a == b else math.inf
    return abs(a - b) / scale


def sandwich_bounds(q: float, lam: float) -> tuple[float, float]:
    """Two-sided band [(1-q)^{1/2} lam, lam] for the limsup constant."""
    if not (0 <= q <= 1):
        raise ValueError("q must lie in [0, 1]")
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    if q == 1.0:
        return (0.0, lam)
    return (math.sqrt(1.0 - q) * lam, lam)


# ---------------------------------------------------------------------------
# sigma^2 = sup_f E f^2(X) as the monotone limit of H.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SigmaResult:
    sigma2: float
    converged: bool
    cap_hit: bool
    t_stop: float
    note: str = ""


def sigma_compute(H_fn, t0: float = 1.0, rel_tol: float = 1e-6, t_cap: float = 1e30) -> SigmaResult:
    """Limit of H(t) along t = t0 * 2^k.

    Stops when the relative increment over one doubling falls below
    rel_tol.  If the cap is reached first, the value at the cap is
    compared against the value at sqrt(cap): growth above 5% across that
    half of the log range is taken as divergence and reported as +inf.
    """
    if t0 <= 0 or t_cap <= t0:
        raise ValueError("need 0 < t0 < t_cap")
    t = t0
    prev = float(H_fn(t))
    settled = 0
    doublings = 0
    while t < t_cap:
        t *= 2.0
        doublings += 1
        cur = float(H_fn(t))
        if cur < prev - 1e-12 * max(1.0, abs(prev)):
            raise ValueError("H must be nondecreasing")
        if abs(cur - prev) <= rel_tol * max(abs(cur), 1e-300):
            settled += 1
        else:
            settled = 0
        # A lone flat doubling is not convergence: clamped sources are
        # constant near the origin, so insist on a sustained plateau well
        # away from the start before stopping early.
        if settled >= 3 and doublings >= 40:
            return SigmaResult(cur, True, False, t)
        prev = cur
    mid = float(H_fn(math.sqrt(t_cap * t0)))
    if mid > 0 and prev / mid >= 1.05:
        return SigmaResult(math.inf, False, True, t, "still growing at the cap; reported infinite")
    return SigmaResult(prev, False, True, t, "cap reached before the increment test settled")


# ---------------------------------------------------------------------------
# Truncated-second-moment sources usable as H_fn.
# ---------------------------------------------------------------------------


class ConstTSM:
    """Model source H(t) = v for t > 0 (and 0 at t = 0).

    A modeling convenience, not a distribution-derived H; it ignores the
    constraint H(t) <= t^2 near 0 on purpose.
    """

    def __init__(self, v: float):
        if v < 0:
            raise ValueError("constant H must be nonnegative")
        self.v = float(v)
        self.text = f"const:{self.v:g}"

    def __call__(self, t: float) -> float:
        return self.v if t > 0 else 0.0


class LogLogPowTSM:
    """Model source H(t) = (LLt)^q."""

    def __init__(self, q: float):
        if q <= 0:
            raise ValueError("llpow exponent must be positive")
        self.q = float(q)
        self.text = f"llpow:{self.q:g}"

    def __call__(self, t: float) -> float:
        if t <= 0:
            return 0.0
        u = max(math.log(t), 1.0)
        return max(math.log(u), 1.0) ** self.q


class DistTSM:
    """H from a distribution: analytic truncated covariance when the
    family provides one, otherwise an empirical estimator on a frozen
    sample."""

    def __init__(self, dist, space: SpaceSpec, n_samples: int = 4096, rng=None):
        self.dist = dist
        self.space = space
        self._empirical = None
        if dist.truncated_cov(1.0, space) is None:
            gen = rng if rng is not None else np.random.default_rng(0)
            self._empirical = EmpiricalTSM(dist.sample(gen, n_samples), space)
        self.text = "dist"

    def __call__(self, t: float) -> float:
        if self._empirical is not None:
            return self._empirical(t)
        return dual_ball_sup(self.dist.truncated_cov(float(t), self.space), self.space)


class EmpiricalWrapTSM:
    """H from a fixed sample set."""

    def __init__(self, samples, space: SpaceSpec):
        self._inner = EmpiricalTSM(samples, space)
        self.space = space
        self.text = f"empirical:{self._inner.n_samples}"

    @property
    def max_norm(self) -> float:
        return self._inner.max_norm

    def extrapolated(self, t: float) -> bool:
        return self._inner.extrapolated(t)

    def __call__(self, t: float) -> float:
        return self._inner(t)


def parse_tsm(text: str, dist=None, space=None, n_samples: int = 4096, rng=None):
    """Parse an H-source spec: const:V | llpow:Q | dist | empirical[:N]."""
    squeezed = text.strip()
    if squeezed.startswith("const:"):
        return ConstTSM(float(squeezed[6:]))
    if squeezed.startswith("llpow:"):
        return LogLogPowTSM(float(squeezed[6:]))
    if squeezed == "dist":
        if dist is None or space is None:
            raise ValueError("H source 'dist' needs a distribution and a space")
        return DistTSM(dist, space, n_samples=n_samples, rng=rng)
    if squeezed == "empirical" or squeezed.startswith("empirical:"):
        if dist is None or space is None:
            raise ValueError("H source 'empirical' needs a distribution and a space")
        n = int(squeezed.partition(":")[2] or n_samples)
        gen = rng if rng is not None else np.random.default_rng(0)
        samples = dist.sample(gen, n)
        return EmpiricalWrapTSM(samples, space)
    raise ValueError(f"cannot parse H source {text!r}")


# ---------------------------------------------------------------------------
# beta0 and the assembled report.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Beta0Result:
    value: float
    ci: tuple[float, float]
    curve: object


def beta0_estimate(dist, c_seq, n_grid, trials: int, space: SpaceSpec, seed: int = 0, workers: int = 1) -> Beta0Result:
    """Tail-window estimate of limsup E||S_n||/c_n from Monte Carlo curves."""
    from . import simulate

    if trials < 30:
        raise ValueError("need at least 30 trials for a CI")
    curve = simulate.mean_norm_curve(dist, space, c_seq, n_grid, trials, seed=seed, workers=workers)
    w = max(1, len(curve.n_grid) // 4)
    idx = int(len(curve.n_grid) - w + np.argmax(curve.mean[-w:]))
    return Beta0Result(
        value=float(curve.mean[idx]),
        ci=(float(curve.ci_lo[idx]), float(curve.ci_hi[idx])),
        curve=curve,
    )


def _json_real(x):
    """JSON-safe real: inf and nan become strings, everything else floats."""
    if x is None:
        return None
    xf = float(x)
    if math.isnan(xf):
        return "nan"
    if math.isinf(xf):
        return "inf" if xf > 0 else "-inf"
    return xf


@dataclass(frozen=True)
class ConstantsReport:
    """Bundle of computed constants with fixed serialization field names."""

    c0: Bracket
    lam: float
    alpha0: Bracket | None
    sigma2: float
    beta0: Beta0Result | None
    q_used: float
    verdict_diagnostics: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        out = {
            "c0_lo": _json_real(self.c0.lo),
            "c0_hi": _json_real(self.c0.hi),
            "lambda": _json_real(self.lam),
            "alpha0_lo": _json_real(self.alpha0.lo) if self.alpha0 else None,
            "alpha0_hi": _json_real(self.alpha0.hi) if self.alpha0 else None,
            "sigma2": _json_real(self.sigma2),
            "beta0": _json_real(self.beta0.value) if self.beta0 else None,
            "beta0_ci": [_json_real(self.beta0.ci[0]), _json_real(self.beta0.ci[1])] if self.beta0 else None,
            "q_used": self.q_used,
            "verdict_diagnostics": self.verdict_diagnostics,
        }
        return out


def constants_report(
    h: SlowVaryFn,
    H_fn,
    *,
    c_seq=None,
    dist=None,
    space: SpaceSpec | None = None,
    tol: float = 0.02,
    probe: SeriesProbe = DEFAULT_PROBE,
    trials: int = 0,
    n_grid=None,
    seed: int = 0,
    workers: int = 1,
) -> ConstantsReport:
    """Compute every constant the inputs allow and assemble one report.

    alpha0 needs a c_n sequence; beta0 additionally needs a distribution,
    a space, and a trial budget.  q_used is the smallest grid q at which
    the membership classifier says MEMBER (1.0 when none does; the band
    is then vacuous on one side).
    """
    from .slowvary import MEMBER, hq_classify

    c0 = c0_compute(h, H_fn, tol=tol, probe=probe)
    lam_res = lambda_compute(h, H_fn)
    sigma = sigma_compute(H_fn)
    q_used = 1.0
    for q in [round(0.1 * k, 2) for k in range(0, 11)]:
        if hq_classify(h, q).verdict == MEMBER:
            q_used = q
            break
    alpha0 = alpha0_compute(c_seq, H_fn, tol=tol, probe=probe) if c_seq is not None else None
    beta0 = None
    if dist is not None and space is not None and trials >= 30:
        grid = n_grid if n_grid is not None else np.unique(np.geomspace(64, 65536, 11).astype(int))
        seq = c_seq if c_seq is not None else NormalizerSeq(h)
        beta0 = beta0_estimate(dist, seq, grid, trials, space, seed=seed, workers=workers)
    ratio = lil_ratio_check(h, H_fn)
    band = sandwich_bounds(q_used, lam_res.lam)
    diagnostics = {
        "c0": c0.to_json_dict(),
        "lambda_tail_max": _json_real(lam_res.tail_max),
        "lambda_last_value": _json_real(lam_res.last_value),
        "lambda_diverging": lam_res.diverging,
        "sigma_converged": sigma.converged,
        "sigma_note": sigma.note,
        "ratio_tail_max": _json_real(ratio.tail_max),
        "ratio_vs_half_lambda2": _json_real(
            agreement_gap(ratio.tail_max, 0.5 * lam_res.lam2) if math.isfinite(lam_res.lam2) else math.nan
        ),
        "sandwich_lo": _json_real(band[0]),
        "sandwich_hi": _json_real(band[1]),
        # The grid probe for the limsup constant is biased low (its curve
        # is still climbing at the largest representable abscissa), so the
        # consistency check gets a wider margin than the bracket tolerance.
        "sandwich_consistent": bool(
            not math.isfinite(lam_res.lam)
            or (band[0] <= c0.hi + _SANDWICH_MARGIN and c0.lo <= band[1] + _SANDWICH_MARGIN)
        ),
    }
    if alpha0 is not None:
        diagnostics["alpha0"] = alpha0.to_json_dict()
    return ConstantsReport(
        c0=c0,
        lam=lam_res.lam,
        alpha0=alpha0,
        sigma2=sigma.sigma2,
        beta0=beta0,
        q_used=q_used,
        verdict_diagnostics=diagnostics,
    )
