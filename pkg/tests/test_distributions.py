"""Distribution specs: closed-form moments, sampling laws, determinism."""

import math

import numpy as np
import pytest
import scipy.stats as st
from hypothesis import given, settings
from hypothesis import strategies as hst

from pureucb.configs import table1_presets
from pureucb.distributions import (
    ArmStream,
    DistributionSpec,
    abs_moment_mc,
    draws_per_obs,
    sample,
    sample_at,
    sample_block,
)
from pureucb.errors import MomentDiverges, NoFiniteMoment


class TestConstruction:
    def test_invalid_parameters_rejected_at_construction(self):
        with pytest.raises(ValueError):
            DistributionSpec.normal(0.0, 0.0)
        with pytest.raises(ValueError):
            DistributionSpec.lognormal(0.0, -1.0)
        with pytest.raises(ValueError):
            DistributionSpec.student_t(0.0, 1.0)
        with pytest.raises(ValueError):
            DistributionSpec.pareto(2.0, -0.5)
        with pytest.raises(ValueError):
            DistributionSpec("normal", {"mean": 0.0, "sd": 1.0})

    def test_json_round_trip(self):
        spec = DistributionSpec.pareto(3.0, 1.2, shift=-0.25)
        assert DistributionSpec.from_json_dict(spec.to_json_dict()) == spec


class TestMoments:
    def test_normal_identity(self):
        assert DistributionSpec.normal(0.0, 1.0).variance() == 1.0

    def test_student_t_closed_forms(self):
        spec = DistributionSpec.student_t(3.0, 0.6)
        assert spec.mean() == 0.0
        assert spec.variance() == pytest.approx(0.36 * 3.0 / 1.0, rel=1e-12)

    def test_pareto_closed_forms(self):
        spec = DistributionSpec.pareto(3.0, 1.2)
        assert spec.mean() == pytest.approx(1.8, rel=1e-12)
        assert spec.variance() == pytest.approx(1.44 * 3.0 / 4.0, rel=1e-12)

    def test_lognormal_shifted_mean(self):
        spec = DistributionSpec.lognormal(-2.0, 1.45, shift=-0.1)
        assert spec.mean() == pytest.approx(math.exp(-2.0 + 1.45 ** 2 / 2.0) - 0.1,
                                            rel=1e-14)

    def test_moment_order_suprema(self):
        assert DistributionSpec.lognormal(0.0, 1.0).moment_order_sup() == math.inf
        assert DistributionSpec.normal(0.0, 1.0).moment_order_sup() == math.inf
        assert DistributionSpec.student_t(3.0, 0.6).moment_order_sup() == 3.0
        assert DistributionSpec.pareto(4.0, 2.1).moment_order_sup() == 4.0

    def test_divergent_moments_raise(self):
        with pytest.raises(NoFiniteMoment):
            DistributionSpec.pareto(1.0, 1.0).mean()
        with pytest.raises(NoFiniteMoment):
            DistributionSpec.student_t(1.0, 1.0).mean()
        with pytest.raises(NoFiniteMoment):
            DistributionSpec.pareto(2.0, 1.0).variance()
        with pytest.raises(NoFiniteMoment):
            DistributionSpec.student_t(2.0, 1.0).variance()

    def test_shift_moves_mean_exactly_and_keeps_variance(self):
        for spec in table1_presets().values():
            shifted = spec.shifted(-0.37)
            assert shifted.mean() == spec.mean() + (-0.37)
            assert shifted.variance() == spec.variance()


class TestSamplingDeterminism:
    def test_stream_matches_addressed_draws(self):
        spec = DistributionSpec.lognormal(-2.0, 1.45)
        stream = ArmStream(seed=99, arm_index=3)
        xs = [sample(spec, stream) for _ in range(50)]
        assert xs == [sample_at(spec, 99, 3, j) for j in range(1, 51)]
        assert stream.position == 51

    def test_blocks_match_scalar_path(self):
        specs = [
            DistributionSpec.normal(0.1, 0.5, 0.2),
            DistributionSpec.lognormal(-2.0, 1.45, -0.1),
            DistributionSpec.student_t(3.0, 0.6),
            DistributionSpec.student_t(4.0, 0.7, 0.5),
            DistributionSpec.pareto(3.0, 1.2),
            DistributionSpec.student_t(2.5, 0.6),  # non-integer df path
        ]
        for spec in specs:
            block = sample_block(spec, 7, 1, 5, 64)
            scalars = np.array([sample_at(spec, 7, 1, j) for j in range(5, 69)])
            assert (block == scalars).all()

    def test_same_address_same_value_independent_of_order(self):
        spec = DistributionSpec.pareto(4.0, 2.1)
        a = sample_at(spec, 5, 2, 10)
        _ = [sample_at(spec, 5, 0, j) for j in range(1, 100)]  # unrelated arm
        assert sample_at(spec, 5, 2, 10) == a

    def test_shift_equivariance_is_exact_per_draw(self):
        base = DistributionSpec.student_t(4.0, 0.7)
        shifted = base.shifted(-1.25)
        for j in (1, 2, 17):
            assert sample_at(shifted, 11, 0, j) == sample_at(base, 11, 0, j) + (-1.25)

    def test_draws_per_obs(self):
        assert draws_per_obs(DistributionSpec.normal(0, 1)) == 1
        assert draws_per_obs(DistributionSpec.pareto(3, 1.2)) == 1
        assert draws_per_obs(DistributionSpec.student_t(3, 0.6)) == 3
        assert draws_per_obs(DistributionSpec.student_t(4, 0.7)) == 3
        assert draws_per_obs(DistributionSpec.student_t(5, 1.0)) == 4
        assert draws_per_obs(DistributionSpec.student_t(3.5, 0.6)) == 1


@settings(max_examples=40, deadline=None)
@given(shape=hst.floats(0.5, 10), scale=hst.floats(0.1, 5), shift=hst.floats(-3, 3),
       seed=hst.integers(0, 2 ** 32), j=hst.integers(1, 1000))
def test_pareto_support_lower_bound(shape, scale, shift, seed, j):
    spec = DistributionSpec.pareto(shape, scale, shift)
    assert sample_at(spec, seed, 0, j) > scale + shift


class TestSamplingLaw:
    """Distributional correctness against scipy's reference CDFs."""

    N_KS = 20000

    def _ks(self, spec, dist):
        draws = sample_block(spec, 2024, 0, 1, self.N_KS)
        return st.kstest(draws, dist.cdf).pvalue

    def test_normal_law(self):
        assert self._ks(DistributionSpec.normal(0.3, 0.7, 0.1),
                        st.norm(loc=0.4, scale=0.7)) > 1e-4

    def test_lognormal_law(self):
        assert self._ks(DistributionSpec.lognormal(-2.0, 1.45),
                        st.lognorm(s=1.45, scale=math.exp(-2.0))) > 1e-4

    def test_pareto_law(self):
        assert self._ks(DistributionSpec.pareto(3.0, 1.2, -0.5),
                        st.pareto(b=3.0, scale=1.2, loc=-0.5)) > 1e-4

    def test_student_t_law_ratio_construction(self):
        assert self._ks(DistributionSpec.student_t(3.0, 0.6),
                        st.t(df=3.0, scale=0.6)) > 1e-4
        assert self._ks(DistributionSpec.student_t(4.0, 0.7),
                        st.t(df=4.0, scale=0.7)) > 1e-4

    def test_student_t_law_quantile_path(self):
        assert self._ks(DistributionSpec.student_t(3.5, 0.6),
                        st.t(df=3.5, scale=0.6)) > 1e-4

    def test_standard_normal_mean_example(self):
        draws = sample_block(DistributionSpec.normal(0.0, 1.0), 31415, 0, 1, 10 ** 6)
        assert abs(draws.mean()) < 4.0 / math.sqrt(10 ** 6)

    def test_lognormal_variance_example(self):
        spec = DistributionSpec.lognormal(-2.0, 1.45)
        closed = (math.exp(1.45 ** 2) - 1.0) * math.exp(-4.0 + 1.45 ** 2)
        draws = sample_block(spec, 27182, 0, 1, 10 ** 6)
        assert draws.var() == pytest.approx(closed, rel=0.10)
        assert closed == pytest.approx(1.0775, abs=2e-4)

    def test_closed_moments_match_monte_carlo_at_5_sigma(self):
        for name, spec in table1_presets().items():
            draws = sample_block(spec, 16180, 0, 1, 10 ** 6)
            n = draws.size
            se_mean = draws.std() / math.sqrt(n)
            assert abs(draws.mean() - spec.mean()) < 5 * se_mean, name
            v = draws.var()
            m4 = ((draws - draws.mean()) ** 4).mean()
            se_var = math.sqrt(max(m4 - v * v, 0.0) / n)
            assert abs(v - spec.variance()) < 5 * se_var, name


class TestMonteCarloMoments:
    def test_standard_normal_second_moment(self):
        est = abs_moment_mc(DistributionSpec.normal(0.0, 1.0), 2.0, 10 ** 6, seed=1)
        assert abs(est.value - 1.0) < 3 * est.stderr

    def test_pareto_first_moment(self):
        est = abs_moment_mc(DistributionSpec.pareto(4.0, 1.0), 1.0, 10 ** 6, seed=2)
        assert abs(est.value - 4.0 / 3.0) < 3 * est.stderr

    def test_boundary_order_rejected(self):
        with pytest.raises(MomentDiverges):
            abs_moment_mc(DistributionSpec.student_t(3.0, 0.6), 3.0, 100, seed=3)
        with pytest.raises(MomentDiverges):
            abs_moment_mc(DistributionSpec.pareto(4.0, 2.1), 4.5, 100, seed=3)
