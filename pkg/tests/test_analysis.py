"""Bound evaluators and crossing oracles against independent arithmetic
and small Monte Carlo cross-checks (the full-size oracle suite lives in
test_acceptance.py)."""

import math

import numpy as np
import pytest

from pureucb.analysis import (
    best_arm_confidence_floor,
    bound_report,
    crossing_moment_bounds,
    crossing_time,
    crossing_time_series,
    gaussian_mean_tail,
    heavy_cs_nf,
    location_scale_crossing_bound,
    nagaev_bound,
    noniz_budget_general,
    noniz_budget_simplified,
    pcs_lower_bound_mc,
    solve_gamma0,
    tail_bound_constants,
    u1_star,
    ucb_stays_above,
)
from pureucb.bonus import BonusSpec, n_f
from pureucb.configs import make_shifted
from pureucb.distributions import DistributionSpec, sample_block
from pureucb.errors import BetaTooLarge, GammaOutOfRange, Infeasible, QTooSmall

N01 = DistributionSpec.normal(0.0, 1.0)
UCBE1 = BonusSpec.ucbe(1.0)
GREEDY = BonusSpec.greedy()


class TestConfidenceFloor:
    def test_unit_exponent_point(self):
        assert best_arm_confidence_floor(1.0, math.pi / math.sqrt(6.0)) == \
            pytest.approx(math.exp(-1.0), rel=1e-12)

    def test_small_noise_limit(self):
        assert best_arm_confidence_floor(1e-9, 0.5) == pytest.approx(1.0, abs=1e-12)

    def test_scalar_value(self):
        assert best_arm_confidence_floor(1.0, 0.5) == \
            pytest.approx(math.exp(-math.pi ** 2 / 1.5), rel=1e-12)
        assert best_arm_confidence_floor(1.0, 0.5) == pytest.approx(0.0013882, abs=1e-7)

    def test_in_unit_interval(self):
        for s, g in ((0.5, 0.1), (2.0, 1.0), (1.0, 10.0)):
            assert 0.0 < best_arm_confidence_floor(s, g) <= 1.0


class TestTailBound:
    def test_zero_deviation_clamps_to_one(self):
        assert nagaev_bound(4.0, 1.0, 10, 0.0) == 1.0

    def test_independent_recompute(self):
        a1 = 3.0 ** 4
        a2 = 36.0 ** -1 * math.exp(-4.0) / 2.0
        expect = a1 * 100 ** -3 * 0.5 ** -4 + math.exp(-a2 * 100 * 0.25)
        assert nagaev_bound(4.0, 1.0, 100, 0.5) == pytest.approx(min(1.0, expect),
                                                                 rel=1e-12)

    def test_termwise_monotonicity(self):
        xs = np.linspace(0.05, 2.0, 30)
        vals = [nagaev_bound(4.0, 1.0, 50, x) for x in xs]
        assert all(b <= a + 1e-15 for a, b in zip(vals, vals[1:]))
        ns = range(1, 200, 7)
        vals_n = [nagaev_bound(4.0, 1.0, n, 0.8) for n in ns]
        assert all(b <= a + 1e-15 for a, b in zip(vals_n, vals_n[1:]))

    def test_monte_carlo_validity_small(self):
        # normal arms: E|Z|^4 = 3; 1e5 paths here (1e6 in the acceptance suite)
        paths = 10 ** 5
        n = 50
        for x in (0.2, 0.5):
            hits = 0
            for chunk in range(10):
                draws = sample_block(N01, 777 + chunk, 0, 1, (paths // 10) * n)
                means = draws.reshape(paths // 10, n).mean(axis=1)
                hits += int((means >= x).sum())
            p_hat = hits / paths
            se = math.sqrt(p_hat * (1 - p_hat) / paths)
            assert p_hat <= nagaev_bound(4.0, 3.0, n, x) + 3 * se


class TestConstants:
    def test_values(self):
        cons = tail_bound_constants(4.0, 1.0)
        assert cons["a1"] == pytest.approx(81.0, rel=1e-12)
        assert cons["c1"] == pytest.approx(81.0 * 3.0 / 2.0, rel=1e-12)
        assert cons["c2"] == cons["a2"]
        assert cons["c3"] == pytest.approx(2.0 * 81.0 * 2.0 / 1.0, rel=1e-12)

    def test_q_at_three_rejected(self):
        with pytest.raises(QTooSmall):
            tail_bound_constants(3.0, 5.0)


class TestCrossingMoments:
    def test_large_level_limit_is_start_index(self):
        out = crossing_moment_bounds(4.0, 1.0, 1e8, 10)
        assert out["C"] == pytest.approx(10.0, rel=1e-10)

    def test_independent_recompute(self):
        cons = tail_bound_constants(4.0, 1.0)
        b, n0 = 0.5, 10
        cb2 = cons["c2"] * b * b
        expect_c = (cons["c1"] * b ** -4 * n0 ** -2
                    + math.exp(-n0 * cb2) / (1.0 - math.exp(-cb2)) + n0)
        expect_d = (cons["c3"] * b ** -4 * n0 ** -1
                    + 2.0 * n0 * math.exp(-n0 * cb2) / (1.0 - math.exp(-cb2)) ** 2)
        out = crossing_moment_bounds(4.0, 1.0, b, n0)
        assert out["C"] == pytest.approx(expect_c, rel=1e-9)
        assert out["D"] == pytest.approx(expect_d, rel=1e-9)


class TestLocationScaleBound:
    def test_no_bonus_closed_form(self):
        x, z = 0.7, 1.3
        assert location_scale_crossing_bound(x, 1.0, z, GREEDY) == \
            pytest.approx(math.exp(2.0 * z * z * math.pi ** 2 / (3.0 * x * x)),
                          rel=1e-12)

    def test_sqrt_bonus_example(self):
        # threshold at level 0.5*1/(2*1) = 0.25 is 17; then substitute
        assert n_f(UCBE1, 0.25) == 17
        expect = 17.0 * math.exp(2.0 * math.pi ** 2 / (3.0 * 0.25 * 17.0))
        assert location_scale_crossing_bound(0.5, 1.0, 1.0, UCBE1) == \
            pytest.approx(expect, rel=1e-12)

    def test_wide_gap_limit(self):
        assert location_scale_crossing_bound(1e6, 1.0, 1.0, UCBE1) == \
            pytest.approx(1.0, rel=1e-6)

    def test_tiny_gap_overflows_to_inf(self):
        assert location_scale_crossing_bound(1e-9, 1.0, 1.0, GREEDY) == math.inf


class TestSolveGamma0:
    def test_agrees_with_algebraic_inversion_for_no_bonus(self):
        # 2*exp(2*pi^2/(3 x^2)) = c  =>  x = sqrt(2 pi^2 / (3 log(c/2)))
        gamma, c = 1.2, 2000.0
        x_star = math.sqrt(2.0 * math.pi ** 2 / (3.0 * math.log(c / 2.0)))
        got = solve_gamma0(c, gamma, 1.0, 1.0, GREEDY)
        assert got == pytest.approx(gamma - x_star, abs=1e-6)

    def test_infeasible_when_gap_cannot_cover(self):
        with pytest.raises(Infeasible):
            solve_gamma0(2000.0, 0.5, 1.0, 1.0, GREEDY)

    def test_barely_feasible_gives_near_zero(self):
        gamma = 1.0
        c_min = 2.0 * location_scale_crossing_bound(gamma, 1.0, 1.0, GREEDY)
        got = solve_gamma0(c_min * 1.0001, gamma, 1.0, 1.0, GREEDY)
        assert 0.0 <= got < 0.01

    def test_monotone_in_budget_and_matches_inversion(self):
        gamma = 1.0
        lo = solve_gamma0(2000.0, gamma, 1.0, 1.0, GREEDY)
        hi = solve_gamma0(1e12, gamma, 1.0, 1.0, GREEDY)
        assert hi > lo
        x_star = math.sqrt(2.0 * math.pi ** 2 / (3.0 * math.log(1e12 / 2.0)))
        assert hi == pytest.approx(gamma - x_star, abs=1e-6)

    def test_moment_regime_consistent_with_predicate(self):
        gamma, c = 1.0, 5e5
        g0 = solve_gamma0(c, gamma, 1.0, 1.0, UCBE1, regime="moment", q=4.0, M=1.0)
        for g in (g0 - 1e-4,):
            b = (gamma - g) / 2.0
            assert 2.0 * crossing_moment_bounds(4.0, 1.0, b, n_f(UCBE1, b))["C"] <= c
        b_out = (gamma - min(gamma, g0 + 1e-3)) / 2.0
        assert (b_out <= 0.0 or
                2.0 * crossing_moment_bounds(4.0, 1.0, b_out, n_f(UCBE1, b_out))["C"] > c)


class TestNonIZBudgets:
    def test_reference_point_is_650(self):
        assert noniz_budget_simplified(6.0, 0.45) == pytest.approx(650.0, abs=1e-9)

    def test_zero_rate(self):
        assert noniz_budget_simplified(6.0, 0.0) == pytest.approx(20.0, abs=1e-12)

    def test_pole_rejected(self):
        with pytest.raises(BetaTooLarge):
            noniz_budget_simplified(6.0, 0.5)
        with pytest.raises(BetaTooLarge):
            noniz_budget_simplified(4.0, 0.25)

    def test_general_form_positive_and_diverges_at_pole(self):
        v = noniz_budget_general(6.0, 0.3, 0.1, 1.0, 2.0)
        assert v > 0 and math.isfinite(v)
        near = noniz_budget_general(6.0, 0.499, 0.1, 1.0, 2.0)
        assert near > v
        with pytest.raises(BetaTooLarge):
            noniz_budget_general(6.0, 0.5, 0.1, 1.0, 2.0)


class TestCrossingOracles:
    def test_huge_boundary_crosses_immediately(self):
        ct = crossing_time(3, 0, N01, UCBE1, 1e9, 1, 100)
        assert ct.value == 1

    def test_unreachable_boundary_censors(self):
        ct = crossing_time(3, 0, N01, UCBE1, -1e9, 1, 10 ** 4)
        assert ct.censored and ct.horizon == 10 ** 4

    def test_raising_boundary_never_delays_crossing(self):
        for seed in range(10):
            lo = crossing_time(seed, 0, N01, UCBE1, 0.1, 1, 10 ** 5)
            hi = crossing_time(seed, 0, N01, UCBE1, 0.4, 1, 10 ** 5)
            if lo.value is not None:
                assert hi.value is not None and hi.value <= lo.value

    def test_u1_star_single_term_and_monotone_in_horizon(self):
        from pureucb.distributions import sample_at
        from pureucb.bonus import eval_bonus

        v1 = u1_star(5, N01, UCBE1, horizon=1)
        assert v1 == sample_at(N01, 5, 0, 1) + eval_bonus(UCBE1, 1)
        v2 = u1_star(5, N01, UCBE1, horizon=100)
        v3 = u1_star(5, N01, UCBE1, horizon=10 ** 4)
        assert v3 <= v2 <= v1

    def test_no_bonus_minimum_is_negative_on_average(self):
        vals = [u1_star(s, N01, GREEDY, horizon=10 ** 5) for s in range(200)]
        assert np.mean(vals) < 0.0

    def test_pointwise_bonus_dominance_transfers_to_stay_above(self):
        boundary = -0.25
        for seed in range(50):
            g = ucb_stays_above(seed, N01, GREEDY, boundary, 10 ** 4)
            u = ucb_stays_above(seed, N01, UCBE1, boundary, 10 ** 4)
            assert u >= g  # larger bonus keeps the process higher, pathwise


class TestCrossingSeries:
    def test_boundary_at_mean_diverges(self):
        out = crossing_time_series(lambda n: 0.5, terms=10 ** 4)
        assert out.e_tau_status == "divergent" and out.e_tau == math.inf
        assert out.p_never_status == "divergent" and out.p_never == 0.0

    def test_gaussian_no_crossing_probability_vs_monte_carlo(self):
        out = crossing_time_series(gaussian_mean_tail(-0.5), terms=10 ** 4)
        assert out.p_never_status == "converged"
        reps = 400
        hits = sum(ucb_stays_above(s, N01, GREEDY, -0.5, 10 ** 5) for s in range(reps))
        p_hat = hits / reps
        se = math.sqrt(p_hat * (1 - p_hat) / reps)
        # finite scan horizon can only overcount no-crossing paths
        assert out.p_never <= p_hat + 3 * se
        assert out.p_never >= p_hat - 3 * se - 0.01

    def test_gaussian_expected_crossing_time_vs_monte_carlo(self):
        out = crossing_time_series(gaussian_mean_tail(0.5), terms=10 ** 4)
        assert out.e_tau_status == "converged"
        reps = 4000
        taus = []
        for s in range(reps):
            ct = crossing_time(s, 0, N01, GREEDY, 0.5, 1, 10 ** 5)
            assert not ct.censored
            taus.append(ct.value)
        taus = np.array(taus, dtype=float)
        se = taus.std() / math.sqrt(reps)
        assert abs(taus.mean() - out.e_tau) < 3 * se


class TestPCSLowerBound:
    def test_gamma0_out_of_range(self):
        cfg = make_shifted(2, N01, 0.5)
        with pytest.raises(GammaOutOfRange):
            pcs_lower_bound_mc(cfg, UCBE1, 1000, 0.5, reps=10)
        with pytest.raises(GammaOutOfRange):
            pcs_lower_bound_mc(cfg, UCBE1, 1000, 0.0, reps=10)

    def test_huge_budget_reduces_to_boundary_factor(self):
        cfg = make_shifted(2, N01, 0.5)
        out = pcs_lower_bound_mc(cfg, UCBE1, 10 ** 6, 0.4, horizon=10 ** 5,
                                 reps=200, seed=5)
        assert out.factor_budget == 1.0
        assert out.estimate == out.factor_boundary

    def test_unreachable_boundary_censors_conservatively(self):
        cfg = make_shifted(2, N01, 0.5)
        # an enormous bonus cannot dip below the boundary within 3 rounds,
        # so every crossing is censored and counts against the budget factor
        out = pcs_lower_bound_mc(cfg, BonusSpec.ucbe(100.0), 10 ** 6, 0.25,
                                 horizon=3, reps=50, seed=6)
        assert out.factor_budget == 0.0
        assert out.censored_fraction > 0.9
        assert "conservative" in out.bias_note


class TestBoundReport:
    def test_fields_populated_and_sane(self):
        rep = bound_report(UCBE1, gamma=1.0, c=1e6, sigma_lo=1.0, sigma_hi=1.0,
                           q=4.0, M=1.0, regime="moment")
        assert 0.0 < rep.gamma0 < 1.0
        assert 0.0 < rep.confidence_floor <= 1.0
        assert rep.n_f_used >= 1
        assert rep.crossing_mean_bound > 0
        assert rep.crossing_var_bound > 0
        assert rep.location_scale_bound > 0
        assert rep.a1 > 0 and rep.a2 > 0
        d = rep.to_json_dict()
        assert set(d) >= {"gamma0", "confidence_floor", "n_f_used", "budget"}

    def test_noniz_budget_echo(self):
        rep = bound_report(BonusSpec.heavy_cs(6.0, 2.0, 1.0, 0.1), gamma=0.5,
                           c=1e9, q=6.0, M=1.0, regime="moment", beta=0.45)
        assert rep.budget == pytest.approx(noniz_budget_simplified(6.0, 0.45))


def test_heavy_cs_threshold_reexport():
    assert heavy_cs_nf(1e9, 5.0, 2.0, 2.0, 0.1) == 1
