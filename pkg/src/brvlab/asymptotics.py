"""Closed-form asymptotic constants: Breiman factors, CR limit, ruin and JES."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .dep_families import DependenceFamily, WeightLaw, check_sequence
from .errors import AssumptionViolation, DegenerateAsymptoteWarning
from .limit_measure import corner_mass_product, corner_mass_sum, marginal_sum_constants
from .quadrature import quad


@dataclass(frozen=True)
class RuinAsymptote:
    """``psi(x) ~ coefficient * V_bar(x)`` for ruin of kind ``and_sim`` or ``or``."""

    kind: str
    coefficient: float

    def value(self, v_bar: float) -> float:
        return self.coefficient * v_bar


def breiman_constant(weight: WeightLaw, h: Callable[[float], float], alpha: float) -> float:
    """``E[Theta^alpha h(Theta)]``, the tail inflation of ``Theta X``."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return weight.expect(lambda t: t ** alpha * h(t))


def cr_limit(fams: Sequence[DependenceFamily], n: int, p: float, q: float) -> float:
    """Limit of ``P[S_n > p U_F(x) | T_n > q U_G(x)]``; returned unclamped."""
    seq = check_sequence(fams, n)
    _, den = marginal_sum_constants(seq, n)
    if den <= 0:
        raise ValueError("denominator sum of E[Delta^beta h2(Delta)] is zero")
    return corner_mass_sum(seq, n, p, q) / den * q ** seq[0].beta


def _standard_brv(seq: Sequence[DependenceFamily]):
    f = seq[0]
    if f.alpha != f.beta:
        raise AssumptionViolation(
            f"ruin asymptotics need the standard case alpha == beta (got {f.alpha}, {f.beta})")
    if f.marginal_x.sigma != f.marginal_y.sigma:
        raise AssumptionViolation("ruin asymptotics need a shared marginal V for both lines")
    return f.marginal_x


def ruin_coefficients(fams: Sequence[DependenceFamily], n: int, p: float, q: float) -> tuple[RuinAsymptote, RuinAsymptote]:
    """Coefficients of ``V_bar(x)`` for ``psi_and ~ psi_sim`` and for ``psi_or``."""
    if not (p > 0 and q > 0):
        raise ValueError("p and q must be positive")
    if abs(p + q - 1.0) > 1e-12:
        raise AssumptionViolation(f"capital split must satisfy p + q = 1 (got {p + q})")
    seq = check_sequence(fams, n)
    _standard_brv(seq)
    a = seq[0].alpha
    corner = corner_mass_sum(seq, n, p, q)
    cx, cy = marginal_sum_constants(seq, n)
    if corner == 0:
        warnings.warn("asymptotic equivalence degenerate: joint ruin coefficient is zero",
                      DegenerateAsymptoteWarning, stacklevel=2)
    return RuinAsymptote("and_sim", corner), RuinAsymptote("or", cx / p ** a + cy / q ** a - corner)


def ruin_asymptote(fams: Sequence[DependenceFamily], n: int, p: float, q: float, x: float) -> tuple[float, float]:
    """``(and_sim_value, or_value)``: asymptotic ``psi_and ~ psi_sim`` and ``psi_or`` at capital ``x``."""
    and_sim, or_ = ruin_coefficients(fams, n, p, q)
    v_bar = float(check_sequence(fams, n)[0].marginal_x.survival(x))
    return and_sim.value(v_bar), or_.value(v_bar)


def _jes_inner(t, d, a, b):
    """``int_1^inf min(t^a xi^-a, d^b) dxi`` in closed form (``a > 1``)."""
    top, cap = t ** a, d ** b
    if top == 0:
        return 0.0
    if cap == 0:
        return 0.0
    cross = t * cap ** (-1.0 / a)  # xi where t^a xi^-a == d^b
    if cross <= 1.0:
        return top / (a - 1.0)
    return cap * (cross - 1.0) + top * cross ** (1.0 - a) / (a - 1.0)


def jes_factor(fam: DependenceFamily) -> float:
    """Limit of ``JES(x) / U_F(x)``.

    The integral over the corner masses is exchanged with the expectation over
    the weights, so the inner integral over ``xi`` is closed-form and only the
    weight law needs quadrature.
    """
    a, b = fam.alpha, fam.beta
    if a <= 1:
        raise AssumptionViolation(f"JES limit needs alpha > 1 (got {a}); the integral diverges")
    base = corner_mass_product(fam, 1.0, 1.0)
    if base <= 0:
        raise AssumptionViolation("JES limit needs positive joint corner mass at (1, 1)")
    kink = (lambda t: t ** (a / b), lambda d: d ** (b / a))
    extra = fam.weights.expect(lambda t, d: float(fam.mixing_prob(t, d)) * _jes_inner(t, d, a, b), kink=kink)
    return 1.0 + extra / base


def jes_factor_direct(fam: DependenceFamily) -> float:
    """Same limit by direct adaptive quadrature of the normalized corner mass over ``xi``.

    Independent route used to cross-check :func:`jes_factor`.
    """
    a = fam.alpha
    if a <= 1:
        raise AssumptionViolation("JES limit needs alpha > 1")
    base = corner_mass_product(fam, 1.0, 1.0)
    if base <= 0:
        raise AssumptionViolation("JES limit needs positive joint corner mass at (1, 1)")
    upper = fam.theta_law.upper
    lower_d = fam.delta_law.support[0]
    knots = [upper * lower_d ** (fam.beta / a)] if lower_d > 0 else []
    body = quad(lambda xi: corner_mass_product(fam, xi, 1.0), 1.0, max(upper, 1.0) * 8, points=knots,
                epsabs=1e-11, epsrel=1e-10)
    tail = quad(lambda s: corner_mass_product(fam, 1.0 / s, 1.0) / s ** 2, 0.0, 1.0 / (max(upper, 1.0) * 8),
                epsabs=1e-11, epsrel=1e-10)
    return 1.0 + (body + tail) / base
