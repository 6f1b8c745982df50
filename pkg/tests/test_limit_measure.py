import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from brvlab.dep_families import DependenceFamily, MixingFunction, StoppingLaw, WeightLaw
from brvlab.limit_measure import (LimitMeasureSpec, corner_mass_product, corner_mass_sum, marginal_constants,
                                  mu_bar, mu_hat_product_box, mu_hat_sum_box, mu_tilde_stopped_box)
from brvlab.rv_core import RVMarginal

M2 = RVMarginal(2.0)
U02 = WeightLaw.uniform(0.0, 2.0)
ONE = WeightLaw.constant(1.0)


def _min_square_oracle():
    # E[min(T^2, D^2)] for iid uniform(0, 2), split along the diagonal
    lower = integrate.dblquad(lambda d, t: 0.25 * d * d, 0, 2, 0, lambda t: t, epsabs=1e-13)[0]
    upper = integrate.dblquad(lambda d, t: 0.25 * t * t, 0, 2, lambda t: t, 2, epsabs=1e-13)[0]
    return lower + upper


def _family_A():
    return DependenceFamily.independence(M2, M2, U02, U02, 0.5)


def _affine_family():
    return DependenceFamily.joint_mixture(RVMarginal(2.0), RVMarginal(3.0), U02, WeightLaw.uniform(0.5, 1.5),
                                          MixingFunction(0.25, 0.125, 0.125), weight_coupling=0.4)


class TestMuBar:
    def test_zero_weight(self):
        assert mu_bar(LimitMeasureSpec(2.0, 3.0, 0.0), 0.7, 5.0) == 0.0

    def test_half_weight(self):
        assert mu_bar(LimitMeasureSpec(2.0, 2.0, 0.5), 1.0, 1.0) == 0.5

    def test_homogeneity_example(self):
        measure = LimitMeasureSpec(2.0, 4.0, 1.0)
        for x, y in [(1.0, 1.0), (0.3, 2.0), (5.0, 0.1)]:
            assert measure.mu_bar(3 * x, 9 ** 0.25 * y) == pytest.approx(measure.mu_bar(x, y) / 9, rel=1e-14)

    @given(st.floats(0.2, 6), st.floats(0.2, 6), st.floats(0, 1), st.floats(1e-3, 1e3), st.floats(1e-3, 1e3),
           st.floats(1e-3, 1e3))
    def test_homogeneity_property(self, a, b, w, x, y, lam):
        measure = LimitMeasureSpec(a, b, w)
        assert measure.mu_bar(lam ** (1 / a) * x, lam ** (1 / b) * y) == pytest.approx(measure.mu_bar(x, y) / lam,
                                                                                    rel=1e-12, abs=1e-300)

    @pytest.mark.parametrize("x,y", [(0.0, 1.0), (1.0, -1.0)])
    def test_rejects_non_positive(self, x, y):
        with pytest.raises(ValueError):
            LimitMeasureSpec(2.0, 2.0, 0.5).mu_bar(x, y)

    def test_matches_finite_x_joint_tail(self, third_config):
        # exact joint tail of the mixture at U(x) = sqrt(x)
        x = 1e8
        u = np.sqrt(x)
        assert x * third_config.joint_sf(u, u) == pytest.approx(0.5, rel=1e-6)


class TestCorner:
    def test_tilt_is_zero(self, tilt_config):
        assert corner_mass_product(tilt_config, 0.3, 2.0) == 0.0

    def test_third_configuration(self, third_config):
        oracle = _min_square_oracle()
        assert oracle == pytest.approx(2 / 3, abs=1e-12)
        assert corner_mass_product(third_config, 1.0, 1.0) == pytest.approx(0.5 * oracle, abs=1e-10)

    def test_degenerate_weights(self, comonotone):
        assert corner_mass_product(comonotone(2.0, 1.0), 1.0, 1.0) == pytest.approx(1.0, abs=1e-15)

    def test_affine_against_independent_quadrature(self):
        fam = _affine_family()
        p, q = 0.8, 1.3

        def dens(t, d):
            u, v = t / 2, d - 0.5
            return 0.5 * (1 + 0.4 * (1 - 2 * u) * (1 - 2 * v))

        f = lambda d, t: dens(t, d) * (0.25 + 0.125 * (t + d)) * min((t / p) ** 2, (d / q) ** 3)
        oracle = integrate.dblquad(f, 0, 2, 0.5, 1.5, epsabs=1e-12, epsrel=1e-11)[0]
        assert corner_mass_product(fam, p, q) == pytest.approx(oracle, rel=1e-8)

    def test_discrete_exact_sum(self):
        th = WeightLaw.discrete([0.5, 1.5], [0.4, 0.6])
        fam = DependenceFamily.joint_mixture(M2, M2, th, th, MixingFunction(0.3))
        exp = sum(pi * pj * 0.3 * min(ti ** 2, tj ** 2) for (ti, pi), (tj, pj)
                  in itertools.product(zip([0.5, 1.5], [0.4, 0.6]), repeat=2))
        assert corner_mass_product(fam, 1.0, 1.0) == pytest.approx(exp, rel=1e-14)

    @pytest.mark.parametrize("p,q", [(0.5, 0.5), (1.0, 2.0), (3.0, 0.7)])
    def test_bounds(self, p, q):
        fam = _affine_family()
        cx, cy = marginal_constants(fam)
        c = corner_mass_product(fam, p, q)
        assert 0 <= c <= min(cx / p ** fam.alpha, cy / q ** fam.beta)

    def test_monotone(self):
        fam = _affine_family()
        grid = [0.25, 0.5, 1.0, 2.0, 4.0]
        cs = [corner_mass_product(fam, p, 1.0) for p in grid]
        bs = [mu_hat_product_box(fam, 1.0, q) for q in grid]
        assert all(a >= b for a, b in zip(cs, cs[1:]))
        assert all(a >= b for a, b in zip(bs, bs[1:]))


class TestProductBox:
    def test_seven_thirds(self):
        assert mu_hat_product_box(_family_A(), 1.0, 1.0) == pytest.approx(7 / 3, rel=1e-10)

    def test_complete_dependence(self, comonotone):
        assert mu_hat_product_box(comonotone(2.0, 1.0), 1.0, 1.0) == pytest.approx(1.0, abs=1e-14)

    def test_tilt_constants(self):
        fam = DependenceFamily.marginal_tilt(RVMarginal(2.0), RVMarginal(3.0), U02, WeightLaw.uniform(0.0, 1.0), 0.5, 0.5)
        cx = integrate.quad(lambda t: 0.5 * t * t * (0.5 + 0.5 * t), 0, 2)[0]
        cy = integrate.quad(lambda d: d ** 3 * (1 + 0.5 * (2 * d - 1)), 0, 1)[0]
        assert (cx, cy) == pytest.approx((5 / 3, 0.325), rel=1e-12)
        assert mu_hat_product_box(fam, 1.0, 1.0) == pytest.approx(cx + cy, rel=1e-10)

    def test_independent_weights_reduction(self):
        # constant mixing and uncoupled weights: the formula must match the plain independence expression
        fam = DependenceFamily.joint_mixture(M2, M2, U02, U02, MixingFunction(0.5))
        alt = DependenceFamily.independence(M2, M2, U02, U02, 0.5)
        lit = U02.moment(2) + U02.moment(2) - 0.5 * _min_square_oracle()
        assert mu_hat_product_box(fam, 1, 1) == pytest.approx(lit, rel=1e-9)
        assert mu_hat_product_box(alt, 1, 1) == pytest.approx(lit, rel=1e-9)

    @pytest.mark.parametrize("lam", [0.1, 1.0, 10.0])
    @pytest.mark.parametrize("p,q", list(itertools.product([0.5, 1.0, 2.0], repeat=2)))
    def test_homogeneity_grid(self, lam, p, q):
        fam = _affine_family()
        a, b = fam.alpha, fam.beta
        lhs = mu_hat_product_box(fam, lam ** (1 / a) * p, lam ** (1 / b) * q)
        assert abs(lhs - mu_hat_product_box(fam, p, q) / lam) <= 1e-12 * max(1.0, lhs)


class TestSums:
    def test_n1_reduces(self, third_config):
        assert mu_hat_sum_box([third_config], 1, 1, 1) == mu_hat_product_box(third_config, 1, 1)

    def test_iid_additive(self, third_config):
        assert mu_hat_sum_box(third_config, 3, 1, 1) == pytest.approx(3 * mu_hat_product_box(third_config, 1, 1),
                                                                       rel=1e-14)

    def test_heterogeneous_indices(self):
        fams = [DependenceFamily.joint_mixture(M2, M2, ONE, ONE, MixingFunction(w)) for w in (0.25, 0.75)]
        assert corner_mass_sum(fams, 2, 1, 1) == pytest.approx(1.0, abs=1e-14)
        assert mu_hat_sum_box(fams, 2, 1, 1) == pytest.approx(3.0, abs=1e-14)

    def test_mixed_indices_rejected(self, third_config):
        other = DependenceFamily.joint_mixture(RVMarginal(3.0), M2, U02, U02, MixingFunction(0.5))
        with pytest.raises(ValueError):
            mu_hat_sum_box([third_config, other], 2, 1, 1)


class TestStopped:
    def test_constant_n(self, third_config):
        assert mu_tilde_stopped_box(third_config, StoppingLaw((1,), (1.0,)), 1, 1) == mu_hat_product_box(third_config, 1, 1)

    def test_uniform_doubles(self, third_config):
        base = mu_hat_product_box(third_config, 1, 1)
        assert mu_tilde_stopped_box(third_config, StoppingLaw.uniform(1, 3), 1, 1) == 2 * base

    def test_skewed_law(self):
        law = StoppingLaw((1, 10), (0.9, 0.1))
        assert law.mean() == pytest.approx(1.9, rel=1e-15)
        assert mu_tilde_stopped_box(_family_A(), law, 1, 1) == pytest.approx(1.9 * 7 / 3, rel=1e-10)

    @given(st.lists(st.floats(0.01, 1.0), min_size=1, max_size=6))
    def test_linear_in_mean(self, probs):
        probs = np.array(probs) / sum(probs)
        law = StoppingLaw(tuple(range(1, probs.size + 1)), tuple(probs))
        fam = DependenceFamily.independence(M2, M2, WeightLaw.constant(1.0), WeightLaw.constant(1.0), 0.5)
        base = mu_hat_product_box(fam, 1, 1)
        assert mu_tilde_stopped_box(fam, law, 1, 1) == law.mean() * base
