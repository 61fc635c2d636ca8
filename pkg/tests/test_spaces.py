"""Norms, covariance containers, and dual-ball maximization."""

import itertools
import math

import numpy as np
import pytest

from lil_lab.spaces import (
    EmpiricalTSM,
    SpaceSpec,
    TruncatedCov,
    dual_ball_sup,
    norm,
    norms,
    trunc_cov_empirical,
    truncated_second_moment,
)


def brute_force_sup(cov: np.ndarray, p: float) -> float:
    """Reference maximization of f' cov f over the dual unit ball."""
    d = cov.shape[0]
    if p == 1.0:
        # dual ball is the l-inf cube; a PSD quadratic peaks at a vertex
        best = 0.0
        for signs in itertools.product((-1.0, 1.0), repeat=d):
            f = np.asarray(signs)
            best = max(best, float(f @ cov @ f))
        return best
    if p == 2.0:
        return float(np.max(np.linalg.eigvalsh(cov)))
    # dual ball is the l1 cross-polytope; extreme points are +-e_i
    return float(np.max(np.diag(cov)))


class TestNorms:
    def test_scalar_vector_agreement(self):
        space = SpaceSpec(3, 2.0)
        x = np.array([3.0, 4.0, 0.0])
        assert norm(x, space) == pytest.approx(5.0)
        batch = np.stack([x, 2 * x])
        np.testing.assert_allclose(norms(batch, space), [5.0, 10.0])

    @pytest.mark.parametrize("p,expected", [(1.0, 6.0), (2.0, math.sqrt(14.0)), (math.inf, 3.0)])
    def test_p_norms(self, p, expected):
        x = np.array([1.0, -2.0, 3.0])
        assert norm(x, SpaceSpec(3, p)) == pytest.approx(expected)

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            norm(np.ones(4), SpaceSpec(3, 2.0))

    def test_unsupported_exponent_rejected(self):
        with pytest.raises(ValueError):
            SpaceSpec(3, 1.5)


class TestTruncatedCov:
    def test_requires_symmetric_psd(self):
        with pytest.raises(ValueError):
            TruncatedCov(np.array([[1.0, 2.0], [0.0, 1.0]]), 1.0)
        with pytest.raises(ValueError):
            TruncatedCov(np.array([[1.0, 0.0], [0.0, -1.0]]), 1.0)

    def test_empirical_matches_hand_count(self):
        space = SpaceSpec(2, 2.0)
        draws = np.array([[1.0, 0.0], [0.0, 2.0], [3.0, 3.0]])
        cov = trunc_cov_empirical(draws, 2.5, space)
        # only the first two rows survive the norm cut
        kept = draws[:2]
        np.testing.assert_allclose(cov.matrix, kept.T @ kept / 3.0)
        assert cov.threshold == 2.5

    def test_empirical_threshold_monotone(self):
        rng = np.random.default_rng(314)
        draws = rng.normal(size=(500, 3))
        space = SpaceSpec(3, 2.0)
        small = trunc_cov_empirical(draws, 0.5, space).matrix
        large = trunc_cov_empirical(draws, 50.0, space).matrix
        # adding mass can only grow the quadratic form in the PSD order
        eigs = np.linalg.eigvalsh(large - small)
        assert eigs.min() >= -1e-12


class TestDualBallSup:
    @pytest.mark.parametrize("d", [1, 2, 3, 5, 8])
    @pytest.mark.parametrize("p", [1.0, 2.0, math.inf])
    def test_matches_brute_force(self, d, p):
        rng = np.random.default_rng(1000 + d)
        a = rng.normal(size=(d, d))
        cov = a @ a.T
        mine = dual_ball_sup(TruncatedCov(cov, math.inf), SpaceSpec(d, p))
        ref = brute_force_sup(cov, p)
        assert mine == pytest.approx(ref, abs=1e-8, rel=1e-8)

    def test_dominates_random_directions(self):
        rng = np.random.default_rng(77)
        d = 6
        a = rng.normal(size=(d, d))
        cov = a @ a.T
        top = dual_ball_sup(TruncatedCov(cov, math.inf), SpaceSpec(d, 2.0))
        f = rng.normal(size=(4000, d))
        f /= np.linalg.norm(f, axis=1, keepdims=True)
        rand = np.einsum("ij,jk,ik->i", f, cov, f)
        assert top >= rand.max() - 1e-12

    def test_identity_cov(self):
        cov = TruncatedCov(np.eye(4), math.inf)
        assert dual_ball_sup(cov, SpaceSpec(4, 2.0)) == pytest.approx(1.0)
        assert dual_ball_sup(cov, SpaceSpec(4, math.inf)) == pytest.approx(1.0)
        # l1 primal: the dual cube vertex sums all coordinates
        assert dual_ball_sup(cov, SpaceSpec(4, 1.0)) == pytest.approx(4.0)


class TestEmpiricalTSM:
    def test_monotone_and_flagged_extrapolation(self):
        rng = np.random.default_rng(9)
        draws = rng.normal(size=(800, 2))
        space = SpaceSpec(2, 2.0)
        tsm = EmpiricalTSM(draws, space)
        ts = np.array([0.1, 0.5, 1.0, 2.0, tsm.max_norm, 10 * tsm.max_norm])
        vals = [tsm(float(t)) for t in ts]
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
        assert not tsm.extrapolated(tsm.max_norm)
        assert tsm.extrapolated(10 * tsm.max_norm)
        # frozen at the last value beyond the sample range
        assert tsm(10 * tsm.max_norm) == pytest.approx(tsm(tsm.max_norm))

    def test_dispatcher_accepts_samples_and_analytic_sources(self):
        rng = np.random.default_rng(10)
        draws = rng.normal(size=(400, 2))
        space = SpaceSpec(2, 2.0)
        direct = truncated_second_moment(draws, 2.0, space)
        assert direct > 0
        via_tsm = truncated_second_moment(EmpiricalTSM(draws, space), 2.0, space)
        assert via_tsm == pytest.approx(direct)
