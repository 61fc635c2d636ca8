"""Slowly varying factors, the growth scale, and its inverse."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lil_lab.slowvary import (
    INCONCLUSIVE,
    MEMBER,
    NON_MEMBER,
    NormalizerSeq,
    PowerSeq,
    SlowVaryFn,
    check_normalizing_conditions,
    hq_classify,
    log_psi,
    parse_cseq,
    parse_slow_vary,
    psi,
    psi_inv,
    psi_inv_array,
    psi_inv_log,
    psi_inv_moment,
)


class TestParserAndAlgebra:
    @pytest.mark.parametrize(
        "text,t,expected",
        [
            ("2*(LL)^1", math.e**math.e, 2.0),
            ("(L)^2", math.e**3, 9.0),
            ("3", 50.0, 3.0),
            ("exp((L)^0.5)", math.e**4, math.exp(2.0)),
            ("2*(L)^1*(LL)^1", math.e**math.e, 2.0 * math.e),
        ],
    )
    def test_known_values(self, text, t, expected):
        assert parse_slow_vary(text)(t) == pytest.approx(expected, rel=1e-12)

    def test_text_round_trip(self):
        for text in ("2*(LL)^1", "0.5*(L)^2*(LL)^1", "exp((L)^0.5)", "2*exp(0.5*(L)^0.25)"):
            fn = parse_slow_vary(text)
            again = parse_slow_vary(fn.to_text())
            ts = np.geomspace(10, 1e12, 7)
            np.testing.assert_allclose(fn(ts), again(ts), rtol=1e-12)

    @pytest.mark.parametrize("bad", ["", "(L", "foo", "2**(LL)^1", "exp(L^)", "(LL)^x"])
    def test_rejects_malformed_text(self, bad):
        with pytest.raises(ValueError):
            parse_slow_vary(bad)

    def test_product_matches_pointwise(self):
        a = parse_slow_vary("2*(LL)^1")
        b = parse_slow_vary("(L)^0.5")
        ts = np.geomspace(5, 1e10, 9)
        np.testing.assert_allclose((a * b)(ts), a(ts) * b(ts), rtol=1e-12)

    def test_power_matches_pointwise(self):
        a = parse_slow_vary("2*(L)^1*(LL)^2")
        ts = np.geomspace(5, 1e10, 9)
        np.testing.assert_allclose((a**0.3)(ts), a(ts) ** 0.3, rtol=1e-12)

    @given(
        c=st.floats(0.25, 8.0),
        r=st.floats(0.1, 2.0),
        p=st.floats(0.1, 2.0),
        q=st.floats(0.1, 2.0),
    )
    @settings(max_examples=40, deadline=None)
    def test_pow_then_eval_agrees_with_eval_then_pow(self, c, r, p, q):
        fn = SlowVaryFn.constant(c) * SlowVaryFn.log_power(r) * SlowVaryFn.loglog_power(p)
        t = 1.0e8
        assert (fn**q)(t) == pytest.approx(fn(t) ** q, rel=1e-10)

    def test_nonpositive_scale_rejected(self):
        with pytest.raises(ValueError):
            SlowVaryFn.constant(0.0)
        with pytest.raises(ValueError):
            parse_slow_vary("-2*(LL)^1")


class TestPsiAndInverse:
    def test_round_trip_across_scales(self):
        h = parse_slow_vary("2*(LL)^1")
        for x in (10.0, 1e4, 1e10, 1e100, 1e250):
            y = psi(h, x)
            assert psi_inv(h, y) == pytest.approx(x, rel=1e-10)

    def test_vectorized_matches_scalar(self):
        h = parse_slow_vary("0.5*(L)^1*(LL)^2")
        ys = np.geomspace(10.0, 1e140, 13)
        np.testing.assert_allclose(
            psi_inv_array(h, ys), [psi_inv(h, float(y)) for y in ys], rtol=1e-10
        )

    def test_log_form_reaches_beyond_overflow(self):
        h = parse_slow_vary("2*(LL)^1")
        # the inverse of psi at y = 1e300 is far beyond double range;
        # its log must still be finite and consistent
        log_x = psi_inv_log(h, math.log(1e300) * 2.2)
        assert math.isfinite(log_x) and log_x > 709.0
        assert log_psi(h, log_x) == pytest.approx(math.log(1e300) * 2.2, abs=1e-9)

    def test_quadratic_growth_of_inverse(self):
        # psi grows like sqrt(x) times slow variation, so the inverse
        # doubles twice when the argument doubles once
        h = parse_slow_vary("2*(LL)^1")
        for y in (1e6, 1e10, 1e14):
            ratio = psi_inv(h, 2.0 * y) / psi_inv(h, y)
            assert ratio == pytest.approx(4.0, rel=0.03)

    def test_monotone(self):
        h = parse_slow_vary("(L)^1")
        ys = np.geomspace(1.0, 1e50, 40)
        xs = psi_inv_array(h, ys)
        assert np.all(np.diff(xs) > 0)


class TestSequences:
    def test_normalizer_matches_formula(self):
        h = parse_slow_vary("2*(LL)^1")
        seq = NormalizerSeq(h)
        ns = np.array([1.0, 2.0, 10.0, 1000.0])
        np.testing.assert_allclose(seq.values(ns), np.sqrt(ns * h(ns)), rtol=1e-12)

    def test_power_seq_and_text_forms(self):
        seq = parse_cseq("pow:0.6,2.0")
        np.testing.assert_allclose(seq.values(np.array([1.0, 32.0])), [2.0, 2.0 * 32.0**0.6])
        assert parse_cseq(seq.describe()).values(np.array([7.0]))[0] == pytest.approx(
            seq.values(np.array([7.0]))[0]
        )
        psi_seq = parse_cseq("psi:2*(LL)^1")
        assert psi_seq.describe() == "psi:2*(LL)^1"

    @pytest.mark.parametrize("bad", ["", "pow:", "psi:", "psi:junk(", "lin:2", "pow:a"])
    def test_bad_sequence_specs_rejected(self, bad):
        with pytest.raises(ValueError):
            parse_cseq(bad)

    def test_root_growth_check_separates_scales(self):
        # c_n = sqrt(2 n LLn): passes both conditions
        good = check_normalizing_conditions(NormalizerSeq(parse_slow_vary("2*(LL)^1")), n_max=10**5)
        assert good.re_pass and good.re_monotone
        assert all(r["pass"] for r in good.reg_results.values())
        # c_n = n^0.4: the ratio to sqrt(n) decreases
        sub = check_normalizing_conditions(parse_cseq("pow:0.4"), n_max=10**5)
        assert not sub.re_pass and not sub.re_monotone
        assert sub.re_witness is not None
        # c_n = sqrt(n) exactly: monotone but not divergent
        flat = check_normalizing_conditions(parse_cseq("pow:0.5"), n_max=10**5)
        assert flat.re_monotone and not flat.re_pass

    def test_ratio_regularity_reports_witnesses(self):
        # n^1.2 violates c_n/c_m <= (1+eps)(n/m) at every pair, with witnesses
        res = check_normalizing_conditions(parse_cseq("pow:1.2"), n_max=10**5)
        assert not res.reg_results[0.01]["pass"]
        assert len(res.reg_results[0.01]["witnesses"]) > 0


class TestHqClassification:
    def test_very_slow_examples_are_members_at_zero(self):
        for text in ("(LL)^1", "(LL)^2.5", "(L)^0.5", "(L)^2"):
            assert hq_classify(parse_slow_vary(text), 0.0).verdict == MEMBER

    def test_stretched_exponential_boundary(self):
        h = parse_slow_vary("exp((L)^0.5)")
        assert hq_classify(h, 0.5).verdict == MEMBER
        assert hq_classify(h, 0.2).verdict == NON_MEMBER

    def test_vacuous_at_q_one(self):
        rep = hq_classify(parse_slow_vary("exp((L)^0.9)"), 1.0)
        assert rep.verdict == MEMBER
        assert rep.per_tau == ()

    def test_q_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            hq_classify(parse_slow_vary("(LL)^1"), -0.1)
        with pytest.raises(ValueError):
            hq_classify(parse_slow_vary("(LL)^1"), 1.5)

    def test_json_shape(self):
        rep = hq_classify(parse_slow_vary("(LL)^1"), 0.0)
        d = rep.to_json_dict()
        assert d["verdict"] == MEMBER
        assert d["heuristic"] is True
        assert all({"tau", "verdict", "reason"} <= set(row) for row in d["per_tau"])


class TestMomentDiagnostic:
    def test_light_tail_not_flagged(self):
        from lil_lab.distributions import Gaussian
        from lil_lab.spaces import SpaceSpec

        h = parse_slow_vary("2*(LL)^1")
        est = psi_inv_moment(Gaussian(1.0), h, SpaceSpec(1, 2.0), rng=np.random.default_rng(7))
        assert not est.heavy
        assert est.mean > 0 and est.stderr > 0

    def test_heavy_tail_flagged(self):
        from lil_lab.distributions import RadialPareto
        from lil_lab.spaces import SpaceSpec

        h = parse_slow_vary("2*(LL)^1")
        # infinite second moment makes the growth-scale inverse non-integrable
        dist = RadialPareto(1.05, 2, 1.0)
        est = psi_inv_moment(dist, h, SpaceSpec(2, 2.0), rng=np.random.default_rng(3))
        assert est.heavy
