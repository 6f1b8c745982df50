"""Pareto marginals, their normalization functions, and tail-index diagnostics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RVMarginal:
    """One-parameter Pareto law with survival ``(sigma / y) ** alpha`` above ``sigma``.

    The tail is exactly a power law above the scale, so every regular-variation
    limit statement holds as an identity there.
    """

    alpha: float
    sigma: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and self.alpha > 0):
            raise ValueError(f"tail index must be positive, got {self.alpha}")
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError(f"scale must be positive, got {self.sigma}")

    def survival(self, y):
        y = np.asarray(y, dtype=float)
        with np.errstate(divide="ignore"):
            out = np.where(y >= self.sigma, (self.sigma / np.maximum(y, self.sigma)) ** self.alpha, 1.0)
        return out if out.ndim else float(out)

    def cdf(self, y):
        return 1.0 - np.asarray(self.survival(y))

    def partial_mean(self, m):
        """``E[V; V > m]``; requires ``alpha > 1``."""
        if self.alpha <= 1:
            raise ValueError("partial mean is infinite for alpha <= 1")
        m = np.maximum(np.asarray(m, dtype=float), self.sigma)
        with np.errstate(invalid="ignore"):
            out = np.where(np.isinf(m), 0.0, self.alpha / (self.alpha - 1) * m * (self.sigma / m) ** self.alpha)
        return out if out.ndim else float(out)

    def from_survival(self, u):
        """Quantile map ``u -> V`` with ``survival(V) = u`` for ``u`` in (0, 1]."""
        return self.sigma * np.asarray(u, dtype=float) ** (-1.0 / self.alpha)

    def sample(self, rng: np.random.Generator, size=None):
        return self.from_survival(1.0 - rng.random(size))

    def normalization_U(self, x):
        """Generalized inverse of ``1 / survival``: the level exceeded with probability ``1/x``."""
        x = np.asarray(x, dtype=float)
        if np.any(~(x > 0)):
            raise ValueError("normalization function is defined for x > 0 only")
        out = self.sigma * np.maximum(x, 1.0) ** (1.0 / self.alpha)
        return out if out.ndim else float(out)

    def matuszewska_indices(self) -> tuple[float, float]:
        return (self.alpha, self.alpha)


def survival(m: RVMarginal, y):
    return m.survival(y)


def normalization_U(m: RVMarginal, x):
    return m.normalization_U(x)


def matuszewska_indices(m: RVMarginal) -> tuple[float, float]:
    return m.matuszewska_indices()


def hill_estimate(samples, k: int) -> float:
    """Hill estimator of the tail index from the ``k`` largest observations.

    Parameters
    ----------
    samples : array_like
        Strictly positive observations.
    k : int
        Number of upper order statistics, ``2 <= k < len(samples)``.

    Returns
    -------
    float
        ``1 / mean(log(X_(i) / X_(k+1)))`` over the top ``k`` order statistics.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if np.any(~(x > 0)):
        raise ValueError("Hill estimator needs strictly positive samples")
    k = int(k)
    if not 2 <= k < x.size:
        raise ValueError(f"k must satisfy 2 <= k < {x.size}, got {k}")
    top = np.partition(x, x.size - k - 1)[x.size - k - 1:]
    threshold = top.min()
    logs = np.log(top) - np.log(threshold)
    return float(k / logs.sum())
