"""Thin adaptive-quadrature layer over QUADPACK with typed failure."""

from __future__ import annotations

import warnings

from scipy import integrate

from .errors import NumericFailure

EPSABS = 1e-10
EPSREL = 1e-9


def quad(f, a: float, b: float, points=(), epsabs: float = EPSABS, epsrel: float = EPSREL, limit: int = 200) -> float:
    """Integrate ``f`` over ``[a, b]``, splitting at interior ``points``.

    Raises NumericFailure if QUADPACK reports non-convergence on any piece.
    """
    if b <= a:
        return 0.0
    cuts = sorted(p for p in points if p is not None and a < p < b)
    edges = [a, *cuts, b]
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi <= lo:
            continue
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            out = integrate.quad(f, lo, hi, epsabs=epsabs, epsrel=epsrel, limit=limit, full_output=1)
        value, err = out[0], out[1]
        if len(out) > 3 and err > max(epsabs, epsrel * abs(value)) * 10:
            raise NumericFailure(f"quadrature on [{lo}, {hi}] did not converge: {out[3]} (err={err:.3g})")
        total += value
    return total
