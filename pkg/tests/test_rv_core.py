import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from brvlab.rv_core import RVMarginal, hill_estimate, matuszewska_indices, normalization_U, survival

alphas = st.floats(0.2, 8.0)
sigmas = st.floats(0.05, 50.0)


class TestSurvival:
    def test_pareto_value(self):
        assert survival(RVMarginal(2.0), 10.0) == pytest.approx(0.01, rel=1e-15)

    def test_at_scale_is_one(self):
        assert survival(RVMarginal(2.0, 1.0), 1.0) == 1.0

    def test_below_scale_is_one(self):
        m = RVMarginal(1.5, 3.0)
        assert np.all(m.survival(np.array([-5.0, 0.0, 2.999])) == 1.0)

    def test_exact_power_ratio(self):
        m = RVMarginal(3.0)
        assert m.survival(200.0) / m.survival(100.0) == pytest.approx(0.125, rel=1e-14)

    @given(alphas, sigmas, st.floats(1.0, 1e8))
    def test_power_law_identity(self, a, s, t):
        m = RVMarginal(a, s)
        y = s * t
        assert m.survival(y) * (y / s) ** a == pytest.approx(1.0, rel=1e-12)

    @given(alphas, sigmas, st.floats(-1e3, 1e6), st.floats(0.0, 1e3))
    def test_non_increasing_and_positive(self, a, s, y, dy):
        m = RVMarginal(a, s)
        assert 0 < m.survival(y + dy) <= m.survival(y) <= 1

    def test_cdf_complements(self):
        m = RVMarginal(2.5, 2.0)
        y = np.linspace(0, 100, 51)
        np.testing.assert_allclose(m.cdf(y) + m.survival(y), 1.0, rtol=0, atol=1e-15)

    @pytest.mark.parametrize("alpha,sigma", [(0.0, 1.0), (-1.0, 1.0), (2.0, 0.0), (2.0, -3.0), (math.inf, 1.0)])
    def test_rejects_bad_parameters(self, alpha, sigma):
        with pytest.raises(ValueError):
            RVMarginal(alpha, sigma)


class TestNormalization:
    def test_value(self):
        assert normalization_U(RVMarginal(2.0), 100.0) == pytest.approx(10.0, rel=1e-15)

    @pytest.mark.parametrize("alpha,sigma", [(0.5, 1.0), (2.0, 3.0), (7.0, 0.2)])
    def test_boundary(self, alpha, sigma):
        assert normalization_U(RVMarginal(alpha, sigma), 1.0) == pytest.approx(sigma, rel=1e-15)

    def test_round_trip_limit(self):
        m = RVMarginal(2.0)
        x = 1e6
        assert x * m.survival(m.normalization_U(x) * 2.0) == pytest.approx(0.25, rel=1e-12)

    @given(alphas, sigmas, st.floats(1.0, 1e15))
    def test_inverse_identity(self, a, s, x):
        m = RVMarginal(a, s)
        assert abs(x * m.survival(m.normalization_U(x)) - 1.0) <= 1e-12

    @given(alphas, st.floats(1.0, 1e10), st.floats(1e-6, 1.0))
    def test_strictly_increasing(self, a, x, eps):
        m = RVMarginal(a)
        assert m.normalization_U(x * (1 + eps)) > m.normalization_U(x)

    @given(alphas, sigmas, st.floats(1.0, 1e10))
    def test_scale_equivariance(self, a, s, x):
        assert RVMarginal(a, s).normalization_U(x) == pytest.approx(s * RVMarginal(a).normalization_U(x), rel=1e-13)

    @pytest.mark.parametrize("x", [0.0, -1.0])
    def test_rejects_non_positive(self, x):
        with pytest.raises(ValueError):
            RVMarginal(2.0).normalization_U(x)

    def test_below_one_clamps_to_scale(self):
        assert RVMarginal(2.0, 4.0).normalization_U(0.5) == 4.0


class TestMatuszewska:
    @pytest.mark.parametrize("alpha", [2.0, 0.5, 7.0])
    def test_both_indices_equal_alpha(self, alpha):
        assert matuszewska_indices(RVMarginal(alpha)) == (alpha, alpha)


class TestSampling:
    def test_ks_against_exact_law(self, rng):
        m = RVMarginal(2.0, 1.5)
        x = m.sample(rng, 10 ** 5)
        assert x.min() >= 1.5
        assert stats.kstest(x, m.cdf).pvalue > 0.01

    def test_from_survival_inverts(self):
        m = RVMarginal(3.0, 2.0)
        u = np.array([1.0, 0.5, 1e-6, 1e-300])
        np.testing.assert_allclose(m.survival(m.from_survival(u)), u, rtol=1e-12)

    def test_partial_mean(self):
        m = RVMarginal(2.0)
        # E[X; X > 10] = 2 * 10 * 10^-2
        assert m.partial_mean(10.0) == pytest.approx(0.2, rel=1e-14)
        assert m.partial_mean(0.1) == pytest.approx(2.0, rel=1e-14)


class TestHill:
    def test_pareto_two(self, rng):
        x = RVMarginal(2.0).sample(rng, 10 ** 6)
        assert hill_estimate(x, 10 ** 4) == pytest.approx(2.0, abs=0.1)

    def test_full_sample_alpha_one(self, rng):
        x = RVMarginal(1.0).sample(rng, 10 ** 5)
        assert hill_estimate(x, x.size - 1) == pytest.approx(1.0, abs=0.1)

    @pytest.mark.parametrize("k", [2, 5, 20, 63])
    def test_geometric_grid_hand_formula(self, k):
        # Top k+1 values of 2^i have log-spacings j*log 2, j = 1..k.
        y = 2.0 ** np.arange(1, 65)
        assert hill_estimate(y, k) == pytest.approx(2.0 / ((k + 1) * math.log(2.0)), rel=1e-12)

    @pytest.mark.parametrize("k", [0, 1, 10, 11])
    def test_rejects_k_out_of_range(self, k):
        with pytest.raises(ValueError):
            hill_estimate(np.arange(1.0, 11.0), k)

    def test_rejects_non_positive(self):
        with pytest.raises(ValueError):
            hill_estimate(np.array([1.0, 2.0, 0.0, 4.0, 5.0]), 2)
