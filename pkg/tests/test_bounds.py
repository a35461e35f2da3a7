"""Deviation-bound evaluators against hand-computed plug-ins.

Every expected value below was evaluated by hand (or with a three-line
independent script) from the displayed formulas before the module was
written, so these tests pin the displays rather than the implementation.
"""

import math

import pytest

from pairfit.bounds import (
    FAST_TV_CONSTANT,
    birge_histogram_error,
    cj_constant,
    default_vbar,
    fast_bound_tv,
    l2_linear_bound,
    linf_bound,
    lj_histogram_bound,
    monotone_bound,
    monotone_iid_bound,
    optimize_monotone_bound,
    regression_bound,
    thm1_bound,
    thm2_bound,
    vc_bound_tv,
    vc_process_bound,
    wasserstein_dev_bound,
)
from pairfit.errors import ConfigError


class TestAggregateBounds:
    def test_thm1_integer_plugin(self):
        # (2*1.5/0.5)*2 - 1 + (10/0.5)*(2*0.5 + sqrt(1) + 1/10)
        #   = 12 - 1 + 20*2.1 = 53
        value = thm1_bound(1.5, 0.5, epsilon=1.0, xi=0.5, n=100, approx_loss=2.0,
                           vbar=0.5, loss_min=1.0)
        assert value == pytest.approx(53.0, abs=1e-12)

    def test_thm1_degenerate_zero(self):
        value = thm1_bound(1.5, 0.5, epsilon=0.0, xi=0.0, n=4, approx_loss=0.0,
                           vbar=0.0)
        assert value == 0.0

    def test_thm2_integer_plugin(self):
        # 13*2 - 1 + 6 + 9*8*0.5/0.5 + 4 = 26 - 1 + 6 + 72 + 4 = 107
        value = thm2_bound(1.5, 0.5, 1.0, epsilon=1.0, xi=0.5, approx_loss=2.0,
                           D_bar=3.0, loss_min=1.0)
        assert value == pytest.approx(107.0, abs=1e-12)

    @pytest.mark.parametrize("bad", [0.0, -1.0])
    def test_rejects_nonpositive_structure_constants(self, bad):
        with pytest.raises(ConfigError):
            thm1_bound(bad, 0.5, 1.0, 1.0, 10, 0.0, 0.5)
        with pytest.raises(ConfigError):
            thm2_bound(1.5, 0.5, bad, 1.0, 1.0, 0.0, 0.0)

    def test_rejects_negative_tail_arguments(self):
        with pytest.raises(ConfigError):
            thm1_bound(1.5, 0.5, -0.1, 1.0, 10, 0.0, 0.5)
        with pytest.raises(ConfigError):
            thm2_bound(1.5, 0.5, 1.0, 1.0, -2.0, 0.0, 0.0)

    def test_rejects_bad_n(self):
        with pytest.raises(ConfigError):
            thm1_bound(1.5, 0.5, 1.0, 1.0, 0, 0.0, 0.5)


class TestScenarioSpecializations:
    """The aggregate evaluator reproduces each specialized display exactly."""

    def test_wasserstein_from_thm1(self):
        n, xi, eps, approx = 200, 1.0, 1.0, 37.0
        aggregate = thm1_bound(1.5, 0.5, eps, xi, n, approx_loss=approx,
                               vbar=default_vbar("wasserstein"), loss_min=approx)
        direct = wasserstein_dev_bound(n, xi, eps, 0.0) + 5.0 * approx / n
        assert aggregate / n == pytest.approx(direct, abs=1e-12)

    def test_l2_from_thm1(self):
        R, n, xi, eps, approx = 2.0, 100, 1.0, 1.0, 37.0
        aggregate = thm1_bound(3.0 / (4.0 * R), 1.0 / (4.0 * R), eps, xi, n,
                               approx_loss=approx,
                               vbar=default_vbar("l2_linear"), loss_min=approx)
        direct = l2_linear_bound(R, n, xi, eps, 0.0) + 5.0 * approx / n
        assert aggregate / n == pytest.approx(direct, abs=1e-12)

    def test_tv_vc_from_thm1(self):
        V, n, xi, eps = 2.0, 100, 1.0, 1.0
        aggregate = thm1_bound(1.5, 0.5, eps, xi, n, approx_loss=0.0,
                               vbar=default_vbar("tv_vc", vc_dimension=V))
        assert aggregate / n == pytest.approx(vc_bound_tv(V, n, xi, eps, 0.0),
                                              abs=1e-12)

    def test_default_vbar_values(self):
        assert default_vbar("wasserstein") == 0.5
        assert default_vbar("l2_linear") == 0.5
        assert default_vbar("tv_vc", vc_dimension=2.0) == pytest.approx(
            10.0 * math.sqrt(10.0), abs=1e-15)

    def test_default_vbar_errors(self):
        with pytest.raises(ConfigError, match="unknown vbar scenario"):
            default_vbar("hellinger")
        with pytest.raises(ConfigError, match="needs vc_dimension"):
            default_vbar("tv_vc")


class TestWassersteinAndL2:
    def test_wasserstein_frozen(self):
        assert wasserstein_dev_bound(200, 1.0, 1.0, 0.0) == pytest.approx(
            0.35142135623730947, abs=1e-12)

    def test_wasserstein_hand_value(self):
        # n=100, xi=0.5, eps=1, approx=0.25:
        # 1.25 + 0.2*(1 + 1 + 0.1) = 1.67
        assert wasserstein_dev_bound(100, 0.5, 1.0, 0.25) == pytest.approx(
            1.67, abs=1e-12)

    def test_l2_frozen(self):
        assert l2_linear_bound(2.0, 100, 1.0, 1.0, 0.3) == pytest.approx(
            3.511370849898476, abs=1e-9)

    def test_l2_rejects_bad_R(self):
        with pytest.raises(ConfigError):
            l2_linear_bound(0.0, 100, 1.0, 1.0, 0.0)


class TestVcBounds:
    def test_vc_frozen_plugin(self):
        # 40*sqrt(0.1) + 2*sqrt(0.02) + 0.02
        assert vc_bound_tv(2.0, 100, 1.0, 1.0, 0.0) == pytest.approx(
            12.951953353148136, abs=1e-9)

    def test_vc_leading_constant(self):
        # With V/n = 1 the sqrt factor is 40*sqrt(5).
        lead = vc_bound_tv(7.0, 7, 0.0, 0.0, 0.0)
        assert lead == pytest.approx(40.0 * math.sqrt(5.0), abs=1e-9)
        assert 40.0 * math.sqrt(5.0) == pytest.approx(89.44271909999159, abs=1e-9)

    def test_vc_rejects_small_V(self):
        with pytest.raises(ConfigError, match="at least 1"):
            vc_bound_tv(0.5, 100, 1.0, 1.0, 0.0)

    def test_fast_frozen_plugin(self):
        # (144/100)*(4.5e5*2*log(2e*100/2) + 3)
        assert fast_bound_tv(1.0, 2.0, 100, 1.0, 0.0) == pytest.approx(
            7264304.881040566, rel=1e-12)

    def test_fast_constant_value(self):
        assert FAST_TV_CONSTANT == 4.5e5

    def test_fast_hand_decomposition(self):
        a2, V, n, xi, approx = 2.0, 1.0, 50, 0.5, 0.1
        expected = 14.0 * approx + (144.0 * a2 / n) * (
            FAST_TV_CONSTANT * a2**2 * V * math.log(2.0 * math.e * n) + 2.0 + xi)
        assert fast_bound_tv(a2, V, n, xi, approx) == pytest.approx(
            expected, rel=1e-15)

    def test_fast_caps_V_at_n(self):
        # Inside the log, V is capped at n; outside it is not.
        big_v = fast_bound_tv(1.0, 600.0, 50, 0.0, 0.0)
        expected = (144.0 / 50) * (
            FAST_TV_CONSTANT * 600.0 * math.log(2.0 * math.e) + 2.0)
        assert big_v == pytest.approx(expected, rel=1e-12)

    def test_process_bound_sigma_one(self):
        # sigma v a = 1, so the bound collapses to 10*sqrt(5 n V).
        assert vc_process_bound(1.0, 2.0, 100) == pytest.approx(
            10.0 * math.sqrt(1000.0), abs=1e-9)

    def test_process_bound_small_sigma_large_n(self):
        # Here a = 32*sqrt(log(2e*10^6)/10^6) ~ 0.126 > sigma = 0.05.
        n = 10**6
        a = 32.0 * math.sqrt(math.log(2.0 * math.e * n) / n)
        expected = 10.0 * a * math.sqrt(n * 1.0 * (5.0 + math.log(1.0 / a)))
        assert vc_process_bound(0.05, 1.0, n) == pytest.approx(expected, rel=1e-12)
        assert vc_process_bound(0.05, 1.0, n) == pytest.approx(
            3351.099588861154, rel=1e-9)

    def test_process_bound_rejects_sigma_out_of_range(self):
        for sigma in (0.0, -0.2, 1.5):
            with pytest.raises(ConfigError, match="sigma"):
                vc_process_bound(sigma, 2.0, 100)


class TestHistogramFamilies:
    def test_cj_at_two_is_four(self):
        assert cj_constant(2.0) == 4.0
        assert cj_constant(1.5) == 4.0

    def test_cj_frozen_above_two(self):
        assert cj_constant(3.0) == pytest.approx(48.463890124953515, abs=1e-9)
        assert cj_constant(10.0) == pytest.approx(189.70382614419222, abs=1e-9)

    def test_cj_max_switches_branch(self):
        # At j=3 the additive branch wins; by j=4 the single-product branch
        # takes over, so the max is load-bearing.
        root_e = math.sqrt(math.e)
        j = 4.0
        first = 2.0 ** (1.0 - 1.0 / j) * math.sqrt(
            j * root_e / (root_e - 1.0)) + math.sqrt(j / (math.e - root_e))
        second = j * root_e / (2.0 ** (1.0 / j) * (root_e - 1.0))
        assert second > first
        assert cj_constant(j) == pytest.approx(8.0 * second, abs=1e-12)

    def test_cj_rejects_small_j(self):
        with pytest.raises(ConfigError):
            cj_constant(1.0)

    def test_lj_histogram_frozen(self):
        assert lj_histogram_bound(2.0, 4, 100, 1.0, 1.0, 0.2, 1.0) == pytest.approx(
            3.0113708498984764, abs=1e-9)
        assert lj_histogram_bound(3.0, 8, 200, 0.5, 1.0, 0.0, 1.5) == pytest.approx(
            13.082551025542934, abs=1e-9)

    def test_lj_histogram_range_checks(self):
        with pytest.raises(ConfigError, match="D in 2..n"):
            lj_histogram_bound(2.0, 101, 100, 1.0, 1.0, 0.0)
        with pytest.raises(ConfigError, match="D in 2..n"):
            lj_histogram_bound(2.0, 1, 100, 1.0, 1.0, 0.0)
        with pytest.raises(ConfigError):
            lj_histogram_bound(1.0, 4, 100, 1.0, 1.0, 0.0)

    def test_linf_frozen(self):
        assert linf_bound(4, 100, 1.0, 1.0, 0.1) == pytest.approx(
            3.3428380341685706, abs=1e-9)

    def test_linf_hand_value(self):
        # D=2, n=2, xi=0, eps=0, approx=0: 4*sqrt(2 log 4 / 2) = 4*sqrt(log 4)
        assert linf_bound(2, 2, 0.0, 0.0, 0.0) == pytest.approx(
            4.0 * math.sqrt(math.log(4.0)), abs=1e-12)

    def test_linf_range_checks(self):
        with pytest.raises(ConfigError):
            linf_bound(1, 100, 1.0, 1.0, 0.0)
        with pytest.raises(ConfigError):
            linf_bound(4, 1, 1.0, 1.0, 0.0)


class TestRegressionBound:
    def test_frozen(self):
        assert regression_bound(1, 400, 1.0, 0.05) == pytest.approx(
            19.978279195104676, abs=1e-9)

    def test_leading_constant(self):
        # d=1, n=2: 277*sqrt(2/2) = 277 exactly, plus nothing else.
        assert regression_bound(1, 2, 0.0, 0.0) == pytest.approx(277.0, abs=1e-12)

    def test_rejects_bad_dimension(self):
        with pytest.raises(ConfigError):
            regression_bound(0, 400, 1.0, 0.0)


class TestMonotoneFamily:
    def test_monotone_frozen(self):
        assert monotone_bound(3, 1000, 1.0, 0.1) == pytest.approx(
            7.690851030132389, abs=1e-9)

    def test_monotone_iid_frozen(self):
        assert monotone_iid_bound(3, 1000, 1.0, 0.1) == pytest.approx(
            14.881702060264779, abs=1e-9)

    def test_monotone_leading_constant(self):
        # d=10, n=100 makes the sqrt factor exactly 1.
        assert monotone_bound(10, 100, 0.0, 0.0) == pytest.approx(41.0, abs=1e-12)
        assert monotone_iid_bound(10, 100, 0.0, 0.0) == pytest.approx(
            82.0, abs=1e-12)

    def test_birge_exact_values(self):
        # exp(log(4)/2) - 1 = 1 exactly; zero variation needs one piece only.
        assert birge_histogram_error(3.0, 1.0, 2) == pytest.approx(1.0, abs=1e-15)
        assert birge_histogram_error(0.0, 5.0, 3) == 0.0
        assert birge_histogram_error(2.0, 3.0, 5) == pytest.approx(
            0.4757731615945521, abs=1e-12)

    def test_birge_decreasing_in_pieces(self):
        values = [birge_histogram_error(2.0, 3.0, d) for d in range(1, 20)]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_optimizer_matches_brute_force(self):
        best_d, best_value = optimize_monotone_bound(2.0, 3.0, 10000, 1.0)
        brute = min(
            (monotone_iid_bound(d, 10000, 1.0, birge_histogram_error(2.0, 3.0, d)), d)
            for d in range(1, 2001))
        assert (best_value, best_d) == pytest.approx(brute)
        assert best_d == 5
        assert best_value == pytest.approx(8.233709956197373, abs=1e-9)

    def test_optimizer_respects_cap(self):
        best_d, best_value = optimize_monotone_bound(2.0, 3.0, 10000, 1.0, d_max=2)
        assert best_d == 2
        assert best_value == pytest.approx(
            monotone_iid_bound(2, 10000, 1.0, birge_histogram_error(2.0, 3.0, 2)),
            abs=1e-12)

    def test_optimizer_flat_density_picks_one_piece(self):
        best_d, _ = optimize_monotone_bound(0.0, 1.0, 100, 1.0)
        assert best_d == 1
