"""Closed-form and quadrature evaluation of the bivariate limit measures.

Only three set shapes are supported: corner rectangles ``(x, inf] x (y, inf]``,
complement boxes ``([0, p) x [0, q))^c`` and single-coordinate exceedances.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dep_families import DependenceFamily, StoppingLaw, check_sequence


@dataclass(frozen=True)
class LimitMeasureSpec:
    """Tail of the base measure: ``mu_bar(x, y) = w_bar * min(x^-alpha, y^-beta)``."""

    alpha: float
    beta: float
    w_bar: float = 0.0

    def __post_init__(self):
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("tail indices must be positive")
        if not 0.0 <= self.w_bar <= 1.0:
            raise ValueError("w_bar must lie in [0, 1]")

    @classmethod
    def of(cls, fam: DependenceFamily) -> "LimitMeasureSpec":
        return cls(fam.alpha, fam.beta, fam.w_bar)

    def mu_bar(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if np.any(~(x > 0)) or np.any(~(y > 0)):
            raise ValueError("mu_bar is defined for positive coordinates only")
        out = self.w_bar * np.minimum(x ** -self.alpha, y ** -self.beta)
        return out if out.ndim else float(out)


def mu_bar(measure: LimitMeasureSpec, x, y):
    return measure.mu_bar(x, y)


def marginal_constants(fam: DependenceFamily) -> tuple[float, float]:
    """``(E[Theta^alpha h1(Theta)], E[Delta^beta h2(Delta)])``."""
    a, b = fam.alpha, fam.beta
    cx = fam.theta_law.expect(lambda t: t ** a * fam.h1(t))
    cy = fam.delta_law.expect(lambda d: d ** b * fam.h2(d))
    return cx, cy


def _corner_kink(fam: DependenceFamily, p: float, q: float):
    # theta^a p^-a = delta^b q^-b
    a, b = fam.alpha, fam.beta
    return (lambda t: q * (t / p) ** (a / b), lambda d: p * (d / q) ** (b / a))


def corner_mass_product(fam: DependenceFamily, p: float, q: float) -> float:
    """``E[g(Theta, Delta) * mu_bar(p / Theta, q / Delta)]``.

    Equals the limit of ``x P[Theta X > U_F(x) p, Delta Y > U_G(x) q]``.
    """
    if not (p > 0 and q > 0):
        raise ValueError("p and q must be positive")
    if fam.variant == "B" or fam.w_bar == 0.0:
        return 0.0
    a, b = fam.alpha, fam.beta
    # g * w_bar collapses to the branch probability w(theta, delta)
    def f(t, d):
        return float(fam.mixing_prob(t, d)) * min((t / p) ** a, (d / q) ** b)

    return fam.weights.expect(f, kink=_corner_kink(fam, p, q))


def mu_hat_product_box(fam: DependenceFamily, p: float, q: float) -> float:
    """Product-measure mass of ``([0, p) x [0, q))^c``."""
    cx, cy = marginal_constants(fam)
    return cx / p ** fam.alpha + cy / q ** fam.beta - corner_mass_product(fam, p, q)


def corner_mass_sum(fams: Sequence[DependenceFamily], n: int, p: float, q: float) -> float:
    """Sum over indices of the per-index corner terms."""
    return float(sum(corner_mass_product(f, p, q) for f in check_sequence(fams, n)))


def marginal_sum_constants(fams: Sequence[DependenceFamily], n: int) -> tuple[float, float]:
    cs = [marginal_constants(f) for f in check_sequence(fams, n)]
    return float(sum(c[0] for c in cs)), float(sum(c[1] for c in cs))


def mu_hat_sum_box(fams: Sequence[DependenceFamily], n: int, p: float, q: float) -> float:
    """Limit-measure mass of the complement box for ``(S_n, T_n)``."""
    seq = check_sequence(fams, n)
    return float(sum(mu_hat_product_box(f, p, q) for f in seq))


def mu_tilde_stopped_box(fam: DependenceFamily, stopping_law: StoppingLaw, p: float, q: float) -> float:
    """Limit-measure mass of the complement box for the stopped sums ``(S_N, T_N)``."""
    if not isinstance(stopping_law, StoppingLaw):
        raise TypeError("stopping_law must be a StoppingLaw (bounded, non-degenerate at zero)")
    return stopping_law.mean() * mu_hat_product_box(fam, p, q)
