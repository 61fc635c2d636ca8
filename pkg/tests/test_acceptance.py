"""Acceptance gate: eight end-to-end checks with pinned tolerances.

Each check prints one line, ``ACCEPTANCE <n> PASS`` or ``ACCEPTANCE <n>
FAIL``, straight to the terminal (capture disabled) so any suite run
shows the gate status at a glance.  Tolerances are frozen here; loosen
them only with a written rationale in the commit.
"""

import itertools
import math
import time

import numpy as np
import pytest

from lil_lab.bounds import BoundParams, fn_constants, mc_verify
from lil_lab.constants import (
    CONVERGES,
    DIVERGES,
    ConstTSM,
    DistTSM,
    LogLogPowTSM,
    agreement_gap,
    alpha0_compute,
    c0_compute,
    lambda_compute,
    lil_ratio_check,
    series_classify,
)
from lil_lab.distributions import Gaussian, RademacherProduct
from lil_lab.simulate import PathConfig, limsup_estimate, mean_norm_curve, run_path
from lil_lab.slowvary import (
    MEMBER,
    NON_MEMBER,
    SlowVaryFn,
    hq_classify,
    parse_cseq,
    parse_slow_vary,
)
from lil_lab.spaces import SpaceSpec, TruncatedCov, dual_ball_sup


def _verdict(capsys, n: int, failures: list) -> None:
    with capsys.disabled():
        print(f"\nACCEPTANCE {n} {'FAIL' if failures else 'PASS'}")
    assert not failures, f"criterion {n}: " + "; ".join(failures)


def test_acceptance_1_series_oracle(capsys):
    # sum 1/(n (Ln)^a) converges exactly when a > 1; with H = 1 and
    # c = 1 the probed exponent is a LLn when h = 2a LL
    failures = []
    start = time.perf_counter()
    for a, expected in ((0.5, DIVERGES), (0.9, DIVERGES), (1.1, CONVERGES), (2.0, CONVERGES)):
        h = SlowVaryFn.constant(2.0 * a) * SlowVaryFn.loglog_power(1.0)
        got = series_classify(1.0, h, ConstTSM(1.0)).verdict
        if got != expected:
            failures.append(f"a={a}: classified {got}, analytic rule says {expected}")
    br = c0_compute(parse_slow_vary("2*(LL)^1"), ConstTSM(1.0))
    if not (0.9 <= br.lo and br.hi <= 1.1):
        failures.append(f"c0 bracket [{br.lo}, {br.hi}] escapes [0.9, 1.1]")
    elapsed = time.perf_counter() - start
    if elapsed >= 1.0:
        failures.append(f"runtime {elapsed:.2f}s is not under 1s")
    _verdict(capsys, 1, failures)


def test_acceptance_2_scalar_gaussian_limsup(capsys):
    failures = []
    h = parse_slow_vary("2*(LL)^1")
    space = SpaceSpec(1, 2.0)
    paths = run_path(Gaussian(1.0), space, h, PathConfig(N=10**6, seed=1, trials=50))
    est = limsup_estimate(paths, tail_fraction=0.5)
    if not (0.75 <= est.median <= 1.15):
        failures.append(f"limsup median {est.median:.4f} outside [0.75, 1.15]")
    worst = float(np.max(est.per_trial))
    if worst >= 1.6:
        failures.append(f"worst trial tail max {worst:.4f} reaches 1.6")
    br = alpha0_compute(parse_cseq("psi:2*(LL)^1"), DistTSM(Gaussian(1.0), space))
    if not (0.95 <= br.lo and br.hi <= 1.05):
        failures.append(f"alpha0 bracket [{br.lo}, {br.hi}] misses 1 by more than 0.05")
    _verdict(capsys, 2, failures)


def test_acceptance_3_tail_bound_unviolated(capsys):
    failures = []
    n = 200
    grid = np.geomspace(0.5 * math.sqrt(n), 5 * math.sqrt(n), 20)
    report = mc_verify(
        RademacherProduct(np.ones(5)), SpaceSpec(5, math.inf), n, 100_000, grid,
        BoundParams(eta=1.0, delta=1.0, s=3.0), seed=7, kr_points=10,
    )
    if len(report.rows) != 50:
        failures.append(f"expected 50 grid rows, got {len(report.rows)}")
    if {r.kind for r in report.rows} != {"fn", "kr1", "kr"}:
        failures.append("missing a bound family in the report")
    bad = [r for r in report.rows if r.violation]
    if bad:
        failures.append(f"{len(bad)} rows with p_hat - 3 se above the bound")
    _verdict(capsys, 3, failures)


def test_acceptance_4_constant_assembly(capsys):
    failures = []
    for delta in (0.1, 0.5, 1.0, 4.0):
        eps = fn_constants(delta, 1.0, 3.0).epsilon
        residual = (2 + eps) * (1 + 9 * eps) ** 2 - (2 + delta)
        if residual > 1e-10:
            failures.append(f"delta={delta}: epsilon infeasible, residual {residual:.3g}")
        bumped = eps * (1 + 1e-6)
        if (2 + bumped) * (1 + 9 * bumped) ** 2 <= 2 + delta:
            failures.append(f"delta={delta}: epsilon not the largest root")
    for s in (2.5, 3.0, 4.0):
        # K_s is the supremum of (log a)^{2s} / a; in y = log a the
        # objective y^{2s} e^{-y} peaks at y = 2s
        y = np.linspace(1e-4, 8 * s, 400_000)
        numerical = float(np.max(np.exp(2 * s * np.log(y) - y)))
        K_s = fn_constants(1.0, 1.0, s).K_s
        if abs(K_s - numerical) > 1e-9 * numerical:
            failures.append(f"s={s}: K_s {K_s:.12g} vs numerical {numerical:.12g}")
    _verdict(capsys, 4, failures)


def test_acceptance_5_dual_ball_oracle(capsys):
    failures = []
    rng = np.random.default_rng(42)
    for d, p in itertools.product(range(1, 9), (1.0, 2.0, math.inf)):
        for _ in range(3):
            root = rng.normal(size=(d, d))
            cov = root @ root.T
            mine = dual_ball_sup(TruncatedCov(cov, math.inf), SpaceSpec(d, p))
            ref = _brute_force_sup(cov, p)
            if abs(mine - ref) > 1e-8 * max(1.0, ref):
                failures.append(f"d={d} p={p}: {mine!r} vs brute force {ref!r}")
    _verdict(capsys, 5, failures)


def _brute_force_sup(cov: np.ndarray, p: float) -> float:
    d = cov.shape[0]
    if p == 1.0:
        # dual ball is the l-inf cube; a PSD quadratic peaks at a vertex
        return max(
            float(np.asarray(signs) @ cov @ np.asarray(signs))
            for signs in itertools.product((-1.0, 1.0), repeat=d)
        )
    if p == 2.0:
        return float(np.max(np.linalg.eigvalsh(cov)))
    return float(np.max(np.diag(cov)))


def test_acceptance_6_slow_variation_classes(capsys):
    failures = []
    cases = (
        (SlowVaryFn.loglog_power(2.0), 0.0, MEMBER),
        (SlowVaryFn.log_power(1.5), 0.0, MEMBER),
        (parse_slow_vary("exp((L)^0.5)"), 0.5, MEMBER),
        (parse_slow_vary("exp((L)^0.5)"), 0.2, NON_MEMBER),
    )
    for h, q, expected in cases:
        got = hq_classify(h, q).verdict
        if got != expected:
            failures.append(f"{h.to_text()} at q={q}: {got} != {expected}")
    _verdict(capsys, 6, failures)


def test_acceptance_7_sandwich_family(capsys):
    # h = 2 (LL)^p with model H = (LL)^{p-1} keeps the analytic pair at
    # q = 0, lambda = 1, so the bracket must sit inside [0.95, 1.05] and
    # the ratio curve must track lambda^2 / 2 within 10%
    failures = []
    for p in (1.0, 1.5, 2.0, 3.0):
        h = SlowVaryFn.loglog_power(p) * 2.0
        H = ConstTSM(1.0) if p == 1.0 else LogLogPowTSM(p - 1.0)
        br = c0_compute(h, H)
        if not (0.95 <= br.lo and br.hi <= 1.05):
            failures.append(f"p={p}: bracket [{br.lo}, {br.hi}] not inside [0.95, 1.05]")
        lam = lambda_compute(h, H)
        ratio = lil_ratio_check(h, H)
        gap = agreement_gap(ratio.tail_max, 0.5 * lam.lam2)
        if not gap < 0.10:
            failures.append(f"p={p}: ratio {ratio.tail_max:.4f} vs lambda^2/2 "
                            f"{0.5 * lam.lam2:.4f}, gap {gap:.2%}")
    _verdict(capsys, 7, failures)


def test_acceptance_8_mean_norm_analytics(capsys):
    failures = []
    space = SpaceSpec(1, 2.0)
    grid = np.array([100, 1000, 10000])
    sqrt_curve = mean_norm_curve(
        Gaussian(1.0), space, parse_cseq("pow:0.5"), grid, trials=400, seed=20260819,
    )
    target = math.sqrt(2.0 / math.pi)
    mean = float(sqrt_curve.mean[-1])
    width = float(sqrt_curve.ci_hi[-1] - sqrt_curve.ci_lo[-1])
    if abs(mean - target) > 3 * width:
        failures.append(f"mean {mean:.5f} at n=1e4 misses sqrt(2/pi) by over 3 CI widths")
    lil_curve = mean_norm_curve(
        Gaussian(1.0), space, parse_cseq("psi:2*(LL)^1"), grid, trials=400, seed=20260819,
    )
    if not np.all(np.diff(lil_curve.mean) < 0):
        failures.append(f"curve {list(lil_curve.mean)} is not decreasing")
    _verdict(capsys, 8, failures)
