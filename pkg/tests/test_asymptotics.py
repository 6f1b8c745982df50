import warnings

import numpy as np
import pytest
from scipy import integrate

from brvlab.asymptotics import (RuinAsymptote, breiman_constant, cr_limit, jes_factor, jes_factor_direct,
                                ruin_asymptote, ruin_coefficients)
from brvlab.dep_families import DependenceFamily, MixingFunction, WeightLaw
from brvlab.errors import AssumptionViolation, DegenerateAsymptoteWarning
from brvlab.rv_core import RVMarginal

M2 = RVMarginal(2.0)
U01 = WeightLaw.uniform(0.0, 1.0)
U02 = WeightLaw.uniform(0.0, 2.0)
ONE = WeightLaw.constant(1.0)


class TestBreiman:
    @pytest.mark.parametrize("c,alpha", [(0.5, 2.0), (3.0, 1.5), (1.0, 7.0)])
    def test_constant_weight(self, c, alpha):
        assert breiman_constant(WeightLaw.constant(c), lambda t: 1.0, alpha) == pytest.approx(c ** alpha, rel=1e-15)

    def test_unit_weight_exact(self):
        assert breiman_constant(ONE, lambda t: 1.0, 3.3) == 1.0

    def test_five_twelfths(self):
        oracle = integrate.quad(lambda t: t * t * (0.5 + t), 0, 1)[0]
        assert oracle == pytest.approx(5 / 12, rel=1e-14)
        val = breiman_constant(U01, lambda t: 1 + 0.5 * (2 * t - 1), 2.0)
        assert val == pytest.approx(oracle, abs=1e-10)

    def test_five_thirds(self):
        oracle = 0.5 * integrate.quad(lambda t: t * t * (0.5 + 0.5 * t), 0, 2)[0]
        assert oracle == pytest.approx(5 / 3, rel=1e-14)
        assert breiman_constant(U02, lambda t: 0.5 + 0.5 * t, 2.0) == pytest.approx(oracle, abs=1e-10)

    def test_family_factor(self, u02):
        fam = DependenceFamily.marginal_tilt(M2, M2, u02, u02, 0.5, 0.0)
        assert breiman_constant(u02, fam.h1, 2.0) == pytest.approx(5 / 3, abs=1e-10)

    def test_rejects_bad_alpha(self):
        with pytest.raises(ValueError):
            breiman_constant(U02, lambda t: 1.0, 0.0)


class TestCR:
    def test_tilt_zero(self, tilt_config):
        assert cr_limit(tilt_config, 1, 1, 1) == 0.0

    def test_complete_dependence(self, comonotone):
        assert cr_limit(comonotone(2.0, 1.0), 1, 1, 1) == pytest.approx(1.0, abs=1e-14)

    def test_third_configuration(self, third_config):
        assert cr_limit(third_config, 1, 1, 1) == pytest.approx(0.25, abs=1e-10)

    @pytest.mark.parametrize("p,q,expected", [(1.0, 0.5, 0.25), (0.5, 1.0, 1.0), (2.0, 1.0, 0.25), (1.0, 1.0, 1.0)])
    def test_raw_formula(self, comonotone, p, q, expected):
        # q^beta * min(p^-a, q^-b) / E[Delta^beta]
        assert cr_limit(comonotone(2.0, 1.0), 1, p, q) == pytest.approx(expected, abs=1e-14)

    @pytest.mark.parametrize("p,q", [(0.5, 0.5), (1.0, 3.0), (4.0, 0.2)])
    def test_bounded_by_one(self, p, q):
        fam = DependenceFamily.joint_mixture(M2, RVMarginal(3.0), U02, U01, MixingFunction(0.25, 0.125, 0.125))
        assert 0 <= cr_limit(fam, 2, p, q) <= 1 + 1e-12

    def test_zero_denominator(self, monkeypatch):
        import brvlab.asymptotics as asy
        monkeypatch.setattr(asy, "marginal_sum_constants", lambda seq, n: (1.0, 0.0))
        with pytest.raises(ValueError):
            asy.cr_limit(DependenceFamily.joint_mixture(M2, M2, U02, U02, MixingFunction(0.5)), 1, 1, 1)


class TestRuin:
    def test_hand_values(self, comonotone):
        fam = comonotone(2.0, 1.0)
        a, o = ruin_coefficients(fam, 1, 0.5, 0.5)
        assert (a.coefficient, o.coefficient) == pytest.approx((4.0, 4.0), rel=1e-14)
        x = 1e3
        and_v, or_v = ruin_asymptote(fam, 1, 0.5, 0.5, x)
        assert and_v == pytest.approx(4 * x ** -2, rel=1e-14) and or_v == pytest.approx(4 * x ** -2, rel=1e-14)

    def test_n_additive(self, third_config):
        one = ruin_asymptote(third_config, 1, 0.3, 0.7, 500.0)
        three = ruin_asymptote(third_config, 3, 0.3, 0.7, 500.0)
        assert three == pytest.approx(tuple(3 * v for v in one), rel=1e-13)

    def test_ordering(self, third_config):
        a, o = ruin_coefficients(third_config, 2, 0.4, 0.6)
        assert o.coefficient >= a.coefficient > 0

    def test_degenerate_tilt(self):
        fam = DependenceFamily.marginal_tilt(M2, M2, U02, U02, 0.5, 0.5)
        with pytest.warns(DegenerateAsymptoteWarning):
            and_v, or_v = ruin_asymptote(fam, 1, 0.5, 0.5, 100.0)
        assert and_v == 0.0
        assert or_v == pytest.approx(1e-4 * (5 / 3 / 0.25 + 5 / 3 / 0.25), rel=1e-10)

    def test_rejects_unequal_indices(self, tilt_config):
        with pytest.raises(AssumptionViolation):
            ruin_coefficients(tilt_config, 1, 0.5, 0.5)

    def test_rejects_unequal_scales(self):
        fam = DependenceFamily.joint_mixture(M2, RVMarginal(2.0, 3.0), U02, U02, MixingFunction(0.5))
        with pytest.raises(AssumptionViolation):
            ruin_coefficients(fam, 1, 0.5, 0.5)

    def test_rejects_split(self, third_config):
        with pytest.raises(AssumptionViolation):
            ruin_coefficients(third_config, 1, 0.5, 0.6)

    def test_value(self):
        assert RuinAsymptote("or", 3.0).value(0.25) == 0.75


class TestJES:
    @pytest.mark.parametrize("alpha", [1.5, 2.0, 3.0, 5.0])
    def test_comonotone_closed_form(self, comonotone, alpha):
        assert abs(jes_factor(comonotone(alpha, 1.0)) - alpha / (alpha - 1)) <= 1e-8

    def test_monotone_in_alpha(self, comonotone):
        vals = [jes_factor(comonotone(a, 1.0)) for a in (1.5, 2.0, 3.0, 5.0)]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_mixing_weight_cancels(self, comonotone):
        assert jes_factor(comonotone(2.0, 0.5)) == pytest.approx(2.0, abs=1e-12)

    @pytest.mark.parametrize("mixing,beta,delta", [
        (MixingFunction(0.25, 0.125, 0.125), 3.0, U02),
        (MixingFunction(0.5), 2.0, U02),
        (MixingFunction(0.3, 0.1, 0.0), 2.5, WeightLaw.discrete([0.5, 1.0, 2.0], [0.2, 0.5, 0.3])),
    ])
    def test_two_routes_agree(self, mixing, beta, delta):
        fam = DependenceFamily.joint_mixture(M2, RVMarginal(beta), U02, delta, mixing)
        assert jes_factor(fam) == pytest.approx(jes_factor_direct(fam), rel=1e-8)

    def test_reference_value(self):
        fam = DependenceFamily.joint_mixture(M2, RVMarginal(3.0), U02, U02, MixingFunction(0.25, 0.125, 0.125))
        assert jes_factor(fam) == pytest.approx(2.3382733509, abs=1e-9)

    def test_rejects_light_alpha(self, comonotone):
        with pytest.raises(AssumptionViolation):
            jes_factor(comonotone(1.0, 1.0))

    def test_rejects_zero_corner(self, tilt_config):
        with pytest.raises(AssumptionViolation):
            jes_factor(tilt_config)
