"""Exact joint laws of (X, Y, Theta, Delta) with closed-form dependence factors.

Three constructions are provided:

* ``A`` (independence): weights independent of the claims; (X, Y) is a fixed
  mixture of a comonotone pair and an independent pair.
* ``B`` (marginal tilt): X is FGM-coupled to Theta and Y to Delta, X and Y are
  conditionally independent given the weights. Nontrivial ``h1, h2, g`` but
  the claims are asymptotically independent.
* ``C`` (joint mixture): given the weights, (X, Y) is comonotone with
  probability ``w(theta, delta)`` and independent otherwise. Marginal factors
  are 1, the joint factor is ``w / E[w]``.

Every random quantity is a deterministic function of independent uniforms so
that rare-event estimators can condition the heavy-tailed drivers directly.
Heavy-tailed drivers use the survival convention: a small driver means a large
claim.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import AssumptionViolation
from .quadrature import quad
from .rv_core import RVMarginal

VARIANTS = ("A", "B", "C")


def _fgm_conditional_inverse(r, tilt):
    """Solve ``v * (1 + tilt * (1 - v)) = r`` for ``v`` in [0, 1], ``|tilt| <= 1``."""
    r = np.asarray(r, dtype=float)
    b = 1.0 + tilt
    return 2.0 * r / (b + np.sqrt(b * b - 4.0 * tilt * r))


@dataclass(frozen=True)
class WeightLaw:
    """Law of a non-negative random weight with support bounded above.

    Use the ``uniform``, ``discrete`` or ``constant`` constructors.
    """

    kind: str
    lo: float = 0.0
    hi: float = 1.0
    values: tuple = ()
    probs: tuple = ()

    def __post_init__(self):
        if self.kind == "uniform":
            if not (np.isfinite(self.hi) and 0 <= self.lo < self.hi):
                raise AssumptionViolation(
                    f"uniform weight needs 0 <= lo < hi < inf, got ({self.lo}, {self.hi}); "
                    "bounded support is what guarantees the moment and weight-tail conditions"
                )
        elif self.kind == "discrete":
            v = np.asarray(self.values, dtype=float)
            p = np.asarray(self.probs, dtype=float)
            if v.size == 0 or v.shape != p.shape:
                raise ValueError("discrete weight needs matching non-empty values and probs")
            if np.any(~np.isfinite(v)) or np.any(v <= 0):
                raise AssumptionViolation("discrete weight atoms must be finite and positive")
            if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
                raise ValueError("discrete weight probabilities must be non-negative and sum to 1")
            order = np.argsort(v)
            object.__setattr__(self, "values", tuple(float(a) for a in v[order]))
            object.__setattr__(self, "probs", tuple(float(a) for a in p[order]))
        else:
            raise AssumptionViolation(
                f"weight law kind {self.kind!r} is not supported; only bounded laws "
                "(uniform, discrete) satisfy the moment/weight-tail conditions automatically"
            )

    @classmethod
    def uniform(cls, lo: float, hi: float) -> "WeightLaw":
        return cls("uniform", lo=float(lo), hi=float(hi))

    @classmethod
    def discrete(cls, values: Sequence[float], probs: Sequence[float]) -> "WeightLaw":
        return cls("discrete", values=tuple(values), probs=tuple(probs))

    @classmethod
    def constant(cls, c: float) -> "WeightLaw":
        return cls("discrete", values=(float(c),), probs=(1.0,))

    @property
    def is_discrete(self) -> bool:
        return self.kind == "discrete"

    @property
    def support(self) -> tuple[float, float]:
        if self.is_discrete:
            return (self.values[0], self.values[-1])
        return (self.lo, self.hi)

    @property
    def upper(self) -> float:
        return self.support[1]

    def in_support(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.is_discrete:
            return np.isin(t, np.asarray(self.values))
        return (t >= self.lo) & (t <= self.hi)

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        if self.is_discrete:
            cum = np.concatenate([[0.0], np.cumsum(self.probs)])
            return cum[np.searchsorted(self.values, t, side="right")]
        return np.clip((t - self.lo) / (self.hi - self.lo), 0.0, 1.0)

    def mid_cdf(self, t):
        """``P[W < t] + P[W = t] / 2``; equals the cdf for continuous laws and has mean 1/2."""
        t = np.asarray(t, dtype=float)
        if not self.is_discrete:
            return self.cdf(t)
        v = np.asarray(self.values)
        cum = np.concatenate([[0.0], np.cumsum(self.probs)])
        below = cum[np.searchsorted(v, t, side="left")]
        at = np.where(np.isin(t, v), np.asarray(self.probs)[np.clip(np.searchsorted(v, t), 0, v.size - 1)], 0.0)
        return below + 0.5 * at

    def tilt_score(self, t):
        """``2 * mid_cdf(t) - 1`` in [-1, 1], mean zero; rejects points off the support."""
        t = np.asarray(t, dtype=float)
        if not np.all(self.in_support(t)):
            raise ValueError(f"weight value outside support {self.support}")
        return 2.0 * self.mid_cdf(t) - 1.0

    def quantile(self, u):
        u = np.asarray(u, dtype=float)
        if self.is_discrete:
            cum = np.cumsum(self.probs)
            idx = np.minimum(np.searchsorted(cum, u, side="right"), len(self.values) - 1)
            return np.asarray(self.values)[idx]
        return self.lo + (self.hi - self.lo) * u

    def sample(self, rng: np.random.Generator, size=None):
        return self.quantile(rng.random(size))

    def mean(self) -> float:
        return self.moment(1.0)

    def moment(self, r: float) -> float:
        """Closed-form ``E[W ** r]`` for ``r >= 0``."""
        if self.is_discrete:
            return float(np.dot(self.probs, np.asarray(self.values) ** r))
        return (self.hi ** (r + 1) - self.lo ** (r + 1)) / ((r + 1) * (self.hi - self.lo))

    def expect(self, f: Callable[[float], float], points=()) -> float:
        """``E[f(W)]`` by exact summation or adaptive quadrature."""
        if self.is_discrete:
            return float(sum(p * f(v) for v, p in zip(self.values, self.probs)))
        return quad(f, self.lo, self.hi, points=points) / (self.hi - self.lo)

    def _pieces(self):
        """Split [0, 1] in copula scale into (u_lo, u_hi, atom-or-None)."""
        if not self.is_discrete:
            return [(0.0, 1.0, None)]
        cum = np.concatenate([[0.0], np.cumsum(self.probs)])
        return [(cum[j], min(cum[j + 1], 1.0), v) for j, v in enumerate(self.values) if self.probs[j] > 0]

    @classmethod
    def from_config(cls, cfg: dict) -> "WeightLaw":
        kind = cfg.get("kind")
        if kind == "uniform":
            return cls.uniform(cfg["lo"], cfg["hi"])
        if kind == "discrete":
            return cls.discrete(cfg["values"], cfg["probs"])
        if kind == "constant":
            return cls.constant(cfg["value"])
        raise AssumptionViolation(
            f"weight law {kind!r} has unbounded or unsupported support; the weight-tail "
            "negligibility and moment conditions cannot be verified for it"
        )


@dataclass(frozen=True)
class WeightPair:
    """Joint law of (Theta, Delta): given marginals glued by an FGM copula.

    ``coupling = 0`` gives independent weights.
    """

    theta: WeightLaw
    delta: WeightLaw
    coupling: float = 0.0

    def __post_init__(self):
        if not -1.0 <= self.coupling <= 1.0:
            raise ValueError("FGM coupling must lie in [-1, 1]")

    def _C(self, u, v):
        return u * v * (1.0 + self.coupling * (1.0 - u) * (1.0 - v))

    def _dC_du(self, u, v):
        return v * (1.0 + self.coupling * (1.0 - v) * (1.0 - 2.0 * u))

    def _dC_dv(self, u, v):
        return u * (1.0 + self.coupling * (1.0 - u) * (1.0 - 2.0 * v))

    def _density(self, u, v):
        return 1.0 + self.coupling * (1.0 - 2.0 * u) * (1.0 - 2.0 * v)

    def sample(self, rng: np.random.Generator, size=None):
        u = rng.random(size)
        r = rng.random(size)
        v = _fgm_conditional_inverse(r, self.coupling * (1.0 - 2.0 * u)) if self.coupling else r
        return self.theta.quantile(u), self.delta.quantile(v)

    def expect(self, f: Callable[[float, float], float], kink=None) -> float:
        """``E[f(Theta, Delta)]`` for a scalar ``f``.

        Discrete-discrete parts are summed exactly; continuous parts use nested
        adaptive quadrature. ``kink`` is an optional pair of callables
        ``(delta_at(theta), theta_at(delta))`` locating a curve along which ``f``
        is not smooth; integrals are split there.
        """
        total = 0.0
        lt, ld = self.theta, self.delta
        for u0, u1, a in lt._pieces():
            for v0, v1, b in ld._pieces():
                if a is not None and b is not None:
                    mass = self._C(u1, v1) - self._C(u0, v1) - self._C(u1, v0) + self._C(u0, v0)
                    total += mass * f(a, b)
                elif a is not None:
                    span = ld.hi - ld.lo

                    def inner(d, a=a, u0=u0, u1=u1):
                        v = (d - ld.lo) / span
                        w = self._dC_dv(u1, v) - self._dC_dv(u0, v)
                        return f(a, d) * w / span

                    pts = [kink[0](a)] if kink else ()
                    total += quad(inner, ld.lo, ld.hi, points=pts)
                elif b is not None:
                    span = lt.hi - lt.lo

                    def inner(t, b=b, v0=v0, v1=v1):
                        u = (t - lt.lo) / span
                        w = self._dC_du(u, v1) - self._dC_du(u, v0)
                        return f(t, b) * w / span

                    pts = [kink[1](b)] if kink else ()
                    total += quad(inner, lt.lo, lt.hi, points=pts)
                else:
                    st, sd = lt.hi - lt.lo, ld.hi - ld.lo

                    def outer(t):
                        u = (t - lt.lo) / st

                        def inner(d):
                            return f(t, d) * self._density(u, (d - ld.lo) / sd)

                        pts = [kink[0](t)] if kink else ()
                        return quad(inner, ld.lo, ld.hi, points=pts) / sd

                    pts = [kink[1](ld.lo), kink[1](ld.hi)] if kink else ()
                    total += quad(outer, lt.lo, lt.hi, points=pts) / st
        return float(total)


@dataclass(frozen=True)
class MixingFunction:
    """Affine comonotone-branch probability ``w0 + wt * theta + wd * delta``."""

    w0: float
    wt: float = 0.0
    wd: float = 0.0

    def __call__(self, theta, delta):
        return self.w0 + self.wt * np.asarray(theta, dtype=float) + self.wd * np.asarray(delta, dtype=float)

    def range_over(self, theta: WeightLaw, delta: WeightLaw) -> tuple[float, float]:
        corners = [self(t, d) for t in theta.support for d in delta.support]
        return float(min(corners)), float(max(corners))

    def mean(self, weights: WeightPair) -> float:
        return self.w0 + self.wt * weights.theta.mean() + self.wd * weights.delta.mean()


@dataclass(frozen=True)
class DependenceFamily:
    """Fully specified joint law of (X, Y, Theta, Delta).

    Build instances through :meth:`independence`, :meth:`marginal_tilt` or
    :meth:`joint_mixture`.
    """

    variant: str
    marginal_x: RVMarginal
    marginal_y: RVMarginal
    theta_law: WeightLaw
    delta_law: WeightLaw
    a1: float = 0.0
    a2: float = 0.0
    mixing: MixingFunction = field(default_factory=lambda: MixingFunction(0.0))
    weight_coupling: float = 0.0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        lo, hi = self.mixing.range_over(self.theta_law, self.delta_law)
        if self.variant == "B":
            for a in (self.a1, self.a2):
                if not -1.0 < a < 1.0:
                    raise ValueError(f"tilt strength must lie in (-1, 1), got {a}")
            if self.mixing.w0 or self.mixing.wt or self.mixing.wd:
                raise ValueError("variant B has no comonotone branch")
        else:
            if self.a1 or self.a2:
                raise ValueError(f"variant {self.variant} has no marginal tilt")
        if self.variant == "A":
            if self.mixing.wt or self.mixing.wd or not 0.0 <= self.mixing.w0 <= 1.0:
                raise ValueError("variant A needs a constant mixing weight in [0, 1]")
        if self.variant == "C":
            if lo <= 0:
                raise AssumptionViolation(
                    f"mixing function must be strictly positive on the weight support (min {lo}); "
                    "otherwise the joint factor g is not positive"
                )
            if hi > 1:
                raise ValueError(f"mixing function exceeds 1 on the weight support (max {hi})")
        object.__setattr__(self, "_weights", WeightPair(self.theta_law, self.delta_law, self.weight_coupling))

    # construction --------------------------------------------------------

    @classmethod
    def independence(cls, marginal_x, marginal_y, theta_law, delta_law, w_bar=0.0, weight_coupling=0.0):
        return cls("A", marginal_x, marginal_y, theta_law, delta_law,
                   mixing=MixingFunction(float(w_bar)), weight_coupling=weight_coupling)

    @classmethod
    def marginal_tilt(cls, marginal_x, marginal_y, theta_law, delta_law, a1, a2, weight_coupling=0.0):
        return cls("B", marginal_x, marginal_y, theta_law, delta_law, a1=float(a1), a2=float(a2),
                   weight_coupling=weight_coupling)

    @classmethod
    def joint_mixture(cls, marginal_x, marginal_y, theta_law, delta_law, mixing, weight_coupling=0.0):
        if not isinstance(mixing, MixingFunction):
            mixing = MixingFunction(*np.atleast_1d(mixing).tolist())
        return cls("C", marginal_x, marginal_y, theta_law, delta_law, mixing=mixing,
                   weight_coupling=weight_coupling)

    # basic attributes -----------------------------------------------------

    @property
    def weights(self) -> WeightPair:
        return self._weights

    @property
    def alpha(self) -> float:
        return self.marginal_x.alpha

    @property
    def beta(self) -> float:
        return self.marginal_y.alpha

    @property
    def w_bar(self) -> float:
        """Asymptotic-dependence weight of (X, Y): ``E[w(Theta, Delta)]``."""
        if self.variant == "B":
            return 0.0
        return float(self.mixing.mean(self.weights))

    @property
    def has_comonotone_branch(self) -> bool:
        return self.variant != "B" and self.mixing.range_over(self.theta_law, self.delta_law)[1] > 0

    def _check(self, theta=None, delta=None):
        if theta is not None and not np.all(self.theta_law.in_support(theta)):
            raise ValueError(f"theta outside weight support {self.theta_law.support}")
        if delta is not None and not np.all(self.delta_law.in_support(delta)):
            raise ValueError(f"delta outside weight support {self.delta_law.support}")

    # dependence factors ----------------------------------------------------

    def _tilt_x(self, theta):
        return self.a1 * self.theta_law.tilt_score(theta) if self.variant == "B" else np.zeros_like(np.asarray(theta, float))

    def _tilt_y(self, delta):
        return self.a2 * self.delta_law.tilt_score(delta) if self.variant == "B" else np.zeros_like(np.asarray(delta, float))

    def h1(self, theta):
        self._check(theta=theta)
        return _scalar(1.0 + self._tilt_x(theta))

    def h2(self, delta):
        self._check(delta=delta)
        return _scalar(1.0 + self._tilt_y(delta))

    def mixing_prob(self, theta, delta):
        if self.variant == "B":
            return _scalar(np.zeros(np.broadcast(np.asarray(theta), np.asarray(delta)).shape))
        return _scalar(np.broadcast_to(self.mixing(theta, delta), np.broadcast(np.asarray(theta), np.asarray(delta)).shape) * 1.0)

    def _h1h2_mean(self) -> float:
        return self.weights.expect(lambda t, d: (1.0 + self._tilt_x(t)) * (1.0 + self._tilt_y(d)))

    def g(self, theta, delta):
        self._check(theta, delta)
        if self.variant == "A":
            return _scalar(np.ones(np.broadcast(np.asarray(theta), np.asarray(delta)).shape))
        if self.variant == "B":
            return _scalar((1.0 + self._tilt_x(theta)) * (1.0 + self._tilt_y(delta)) / self._h1h2_mean())
        return _scalar(self.mixing(theta, delta) / self.w_bar)

    def factor_bounds(self) -> tuple[float, float, float]:
        """Finite upper bounds ``(k1, k2, Lambda)`` for ``h1``, ``h2`` and ``g``."""
        if self.variant == "A":
            return (1.0, 1.0, 1.0)
        if self.variant == "B":
            k1, k2 = 1.0 + abs(self.a1), 1.0 + abs(self.a2)
            return (k1, k2, k1 * k2 / self._h1h2_mean())
        return (1.0, 1.0, self.mixing.range_over(self.theta_law, self.delta_law)[1] / self.w_bar)

    # closed-form conditional tails -------------------------------------------

    def cond_sf_x(self, t, theta):
        """``P[X > t | Theta = theta]``."""
        sf = self.marginal_x.survival(t)
        return sf * (1.0 + self._tilt_x(theta) * (1.0 - sf))

    def cond_sf_y(self, t, delta):
        sf = self.marginal_y.survival(t)
        return sf * (1.0 + self._tilt_y(delta) * (1.0 - sf))

    def _y_level_on_x_scale(self, t2):
        """X-threshold equivalent to ``Y > t2`` on the comonotone branch."""
        mx, my = self.marginal_x, self.marginal_y
        with np.errstate(divide="ignore", over="ignore"):
            return mx.sigma * (np.maximum(np.asarray(t2, float), 0.0) / my.sigma) ** (my.alpha / mx.alpha)

    def cond_joint_sf(self, t1, t2, theta, delta):
        """``P[X > t1, Y > t2 | Theta = theta, Delta = delta]``."""
        if self.variant == "B":
            return self.cond_sf_x(t1, theta) * self.cond_sf_y(t2, delta)
        w = self.mixing(theta, delta)
        mx, my = self.marginal_x, self.marginal_y
        como = mx.survival(np.maximum(t1, self._y_level_on_x_scale(t2)))
        return w * como + (1.0 - w) * mx.survival(t1) * my.survival(t2)

    def cond_partial_mean_x(self, t1, t2, theta, delta):
        """``E[X; X > t1, Y > t2 | Theta = theta, Delta = delta]`` (needs alpha > 1)."""
        mx = self.marginal_x
        if self.variant == "B":
            tau = self._tilt_x(theta)
            a = mx.alpha
            m = np.maximum(np.asarray(t1, float), mx.sigma)
            sf = mx.survival(m)
            with np.errstate(invalid="ignore"):
                tail1 = np.where(np.isinf(m), 0.0, m * sf / (a - 1.0))
                tail2 = np.where(np.isinf(m), 0.0, m * sf * sf / (2.0 * a - 1.0))
                head = np.where(np.isinf(m), 0.0, m * sf * (1.0 + tau * (1.0 - sf)))
            pm = head + (1.0 + tau) * tail1 - tau * tail2
            return pm * self.cond_sf_y(t2, delta)
        w = self.mixing(theta, delta)
        como = mx.partial_mean(np.maximum(t1, self._y_level_on_x_scale(t2)))
        return w * como + (1.0 - w) * mx.partial_mean(t1) * self.marginal_y.survival(t2)

    def joint_sf(self, t1, t2) -> float:
        """Unconditional ``P[X > t1, Y > t2]`` by quadrature over the weights."""
        if self.variant != "B":
            w = self.w_bar
            mx, my = self.marginal_x, self.marginal_y
            return float(w * mx.survival(max(t1, float(self._y_level_on_x_scale(t2))))
                         + (1 - w) * mx.survival(t1) * my.survival(t2))
        return self.weights.expect(lambda t, d: float(self.cond_joint_sf(t1, t2, t, d)))

    # samplers ---------------------------------------------------------------

    def driver_levels(self, level_x: float, level_y: float) -> tuple[float, float]:
        """Survival-scale cut-offs for the X and Y drivers.

        A driver at or above its cut-off guarantees ``X <= level_x`` and
        ``Y <= level_y`` whatever the weights and branch are. Infinite levels
        impose no constraint (cut-off 0).
        """
        mx, my = self.marginal_x, self.marginal_y
        fx, fy = float(mx.survival(level_x)), float(my.survival(level_y))
        if self.variant == "B":
            ex = min(1.0, fx * (1.0 + abs(self.a1) * (1.0 - fx)))
            ey = min(1.0, fy * (1.0 + abs(self.a2) * (1.0 - fy)))
            return ex, ey
        if self.has_comonotone_branch:
            # comonotone Y is driven by the X driver; survival(Y) equals survival(X) there
            return max(fx, fy), fy
        return fx, fy

    def realize(self, theta, delta, drv_x, drv_y, branch_u):
        """Map weights and uniforms to claims.

        ``drv_x``/``drv_y`` are conditional-survival levels in (0, 1]; ``branch_u``
        picks the comonotone branch when below ``w(theta, delta)``.

        Returns ``(x, y, branch)`` with ``branch`` True on the comonotone branch.
        """
        mx, my = self.marginal_x, self.marginal_y
        if self.variant == "B":
            vx = _fgm_conditional_inverse(drv_x, self._tilt_x(theta))
            vy = _fgm_conditional_inverse(drv_y, self._tilt_y(delta))
            return mx.from_survival(vx), my.from_survival(vy), np.zeros(np.shape(drv_x), dtype=bool)
        branch = branch_u < self.mixing(theta, delta)
        x = mx.from_survival(drv_x)
        y = my.from_survival(np.where(branch, drv_x, drv_y))
        return x, y, branch

    def sample(self, rng: np.random.Generator, size=None):
        theta, delta = self.weights.sample(rng, size)
        drv_x = 1.0 - rng.random(size)
        drv_y = 1.0 - rng.random(size)
        branch_u = rng.random(size)
        x, y, branch = self.realize(theta, delta, drv_x, drv_y, branch_u)
        return x, y, theta, delta, branch

    # config ---------------------------------------------------------------------

    @classmethod
    def from_config(cls, cfg: dict) -> "DependenceFamily":
        mx = RVMarginal(cfg["alpha"], cfg.get("sigma_x", 1.0))
        my = RVMarginal(cfg.get("beta", cfg["alpha"]), cfg.get("sigma_y", 1.0))
        th = WeightLaw.from_config(cfg["theta"])
        de = WeightLaw.from_config(cfg["delta"])
        kappa = cfg.get("weight_coupling", 0.0)
        variant = cfg["variant"]
        if variant == "A":
            return cls.independence(mx, my, th, de, cfg.get("w_bar", 0.0), kappa)
        if variant == "B":
            return cls.marginal_tilt(mx, my, th, de, cfg.get("a1", 0.0), cfg.get("a2", 0.0), kappa)
        if variant == "C":
            w = cfg["w"]
            mixing = MixingFunction(w) if isinstance(w, (int, float)) else MixingFunction(*w)
            return cls.joint_mixture(mx, my, th, de, mixing, kappa)
        raise ValueError(f"unknown variant {variant!r}")


def _scalar(a):
    a = np.asarray(a, dtype=float)
    return float(a) if a.ndim == 0 else a


@dataclass(frozen=True)
class StoppingLaw:
    """Bounded law of the random number of summands ``N``."""

    values: tuple
    probs: tuple

    def __post_init__(self):
        v = np.asarray(self.values)
        p = np.asarray(self.probs, dtype=float)
        if v.size == 0 or v.shape != p.shape:
            raise ValueError("stopping law needs matching non-empty values and probs")
        if np.any(v < 0) or np.any(v != np.round(v)):
            raise ValueError("stopping law values must be non-negative integers")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("stopping law probabilities must sum to 1")
        if p[v > 0].sum() == 0:
            raise AssumptionViolation("N is degenerate at zero")
        object.__setattr__(self, "values", tuple(int(a) for a in v))
        object.__setattr__(self, "probs", tuple(float(a) for a in p))

    @classmethod
    def uniform(cls, lo: int, hi: int) -> "StoppingLaw":
        vals = tuple(range(int(lo), int(hi) + 1))
        return cls(vals, tuple(1.0 / len(vals) for _ in vals))

    @classmethod
    def from_config(cls, cfg: dict) -> "StoppingLaw":
        kind = cfg.get("kind", "discrete")
        if kind == "discrete":
            return cls(tuple(cfg["values"]), tuple(cfg["probs"]))
        if kind == "uniform":
            return cls.uniform(cfg["lo"], cfg["hi"])
        if kind == "constant":
            return cls((int(cfg["value"]),), (1.0,))
        raise AssumptionViolation(f"stopping law {kind!r} is not bounded above; the stopped-sum result needs N <= r_N")

    @property
    def max(self) -> int:
        return max(v for v, p in zip(self.values, self.probs) if p > 0)

    def mean(self) -> float:
        return float(np.dot(self.values, self.probs))

    def sample(self, rng: np.random.Generator, size=None):
        cum = np.cumsum(self.probs)
        idx = np.minimum(np.searchsorted(cum, rng.random(size), side="right"), len(self.values) - 1)
        return np.asarray(self.values)[idx]


def check_sequence(fams: Sequence[DependenceFamily], n: Optional[int] = None) -> list[DependenceFamily]:
    """Expand a per-index family list to length ``n`` and check shared marginals.

    A single family is repeated (iid indices).
    """
    fams = [fams] if isinstance(fams, DependenceFamily) else list(fams)
    if not fams:
        raise ValueError("empty family sequence")
    if n is None:
        n = len(fams)
    if n < 1:
        raise ValueError("horizon must be at least 1")
    if len(fams) == 1:
        fams = fams * n
    elif len(fams) != n:
        raise ValueError(f"got {len(fams)} per-index families for horizon {n}")
    first = fams[0]
    for f in fams[1:]:
        if f.marginal_x != first.marginal_x or f.marginal_y != first.marginal_y:
            raise AssumptionViolation("per-index families must share the marginals (alpha, sigma_x), (beta, sigma_y)")
    return fams


# module-level operation aliases -------------------------------------------------

def h1(fam: DependenceFamily, theta):
    return fam.h1(theta)


def h2(fam: DependenceFamily, delta):
    return fam.h2(delta)


def g(fam: DependenceFamily, theta, delta):
    return fam.g(theta, delta)


def sample_joint(fam: DependenceFamily, rng: np.random.Generator, size=None):
    """Draw ``(x, y, theta, delta, branch_tag)``."""
    return fam.sample(rng, size)


# assumption verification -------------------------------------------------------


@dataclass(frozen=True)
class RatioCheck:
    """Empirical conditional-to-unconditional tail ratio at one weight bin and scale."""

    factor: str
    point: tuple
    x: float
    empirical: float
    stderr: float
    expected: float
    hits: int

    @property
    def z(self) -> float:
        if self.stderr == 0:
            return 0.0 if self.empirical == self.expected else float("inf")
        return abs(self.empirical - self.expected) / self.stderr

    @property
    def informative(self) -> bool:
        return self.hits > 0


@dataclass
class AssumptionReport:
    family: DependenceFamily
    mean_h1: float
    mean_h2: float
    mean_g: float
    bounds: tuple
    moment_margins: tuple
    ratio_checks: list
    marginal_ks_pvalues: tuple
    hill_alpha: float
    flags: list

    @property
    def mean_one_ok(self) -> bool:
        return all(abs(m - 1.0) <= 1e-10 for m in (self.mean_h1, self.mean_h2, self.mean_g))

    @property
    def passed(self) -> bool:
        return not self.flags


def _eval_points(law: WeightLaw, k: int = 3):
    """Bin centers and half-widths used to condition on a weight value."""
    if law.is_discrete:
        return [(v, 0.0) for v in law.values[:5]]
    hw = (law.hi - law.lo) / 128.0
    return [(law.lo + (law.hi - law.lo) * f, hw) for f in np.linspace(0.1, 0.9, k)]


def _in_bin(rng, law: WeightLaw, center, hw, size):
    if hw == 0:
        return np.full(size, center)
    return rng.uniform(max(law.lo, center - hw), min(law.hi, center + hw), size)


def _pair_in_bin(rng, fam, c1, hw1, c2, hw2, size):
    w = fam.weights
    if w.coupling == 0 or hw1 == 0 or hw2 == 0:
        return _in_bin(rng, fam.theta_law, c1, hw1, size), _in_bin(rng, fam.delta_law, c2, hw2, size)
    t_out, d_out, got = [], [], 0
    bound = 1.0 + abs(w.coupling)
    while got < size:
        t = _in_bin(rng, fam.theta_law, c1, hw1, size)
        d = _in_bin(rng, fam.delta_law, c2, hw2, size)
        dens = w._density(fam.theta_law.cdf(t), fam.delta_law.cdf(d))
        keep = rng.random(size) * bound < dens
        t_out.append(t[keep])
        d_out.append(d[keep])
        got += int(keep.sum())
    return np.concatenate(t_out)[:size], np.concatenate(d_out)[:size]


def verify_assumptions(fam: DependenceFamily, sample_count: int = 10 ** 4, x_grid=(100.0, 1000.0),
                       eps: float = 1.0, seed: int = 0, z_limit: float = 5.0) -> AssumptionReport:
    """Check mean-one identities, conditional tail factorization and moment margins.

    Conditional ratios are estimated by drawing the weights uniformly inside
    a small bin around each evaluation point (interval conditioning) and the
    claims from their exact conditional law.
    """
    from scipy import stats

    from .rv_core import hill_estimate

    if sample_count < 10 ** 4:
        raise ValueError("sample_count must be at least 10^4")
    w = fam.weights
    mean_h1 = fam.theta_law.expect(fam.h1)
    mean_h2 = fam.delta_law.expect(fam.h2)
    mean_g = w.expect(lambda t, d: float(fam.g(t, d)))
    flags = []
    for name, m in (("h1", mean_h1), ("h2", mean_h2), ("g", mean_g)):
        if abs(m - 1.0) > 1e-10:
            flags.append(f"E[{name}] = {m!r} differs from 1")

    margins = (fam.theta_law.expect(lambda t: t ** (fam.alpha + eps) * fam.h1(t)),
               fam.delta_law.expect(lambda d: d ** (fam.beta + eps) * fam.h2(d)))

    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))
    size = int(sample_count)
    checks = []
    mx, my = fam.marginal_x, fam.marginal_y
    pts_t, pts_d = _eval_points(fam.theta_law), _eval_points(fam.delta_law)
    for x in x_grid:
        t1, t2 = mx.normalization_U(x), my.normalization_U(x)
        fx, fy = float(mx.survival(t1)), float(my.survival(t2))
        for c, hw in pts_t:
            th = _in_bin(rng, fam.theta_law, c, hw, size)
            de = np.full(size, fam.delta_law.support[0])
            xs, _, _ = fam.realize(th, de, 1.0 - rng.random(size), 1.0 - rng.random(size), np.ones(size))
            checks.append(_ratio_check("h1", (c,), x, xs > t1, fx, fam.h1(c)))
        for c, hw in pts_d:
            de = _in_bin(rng, fam.delta_law, c, hw, size)
            th = np.full(size, fam.theta_law.support[0])
            _, ys, _ = fam.realize(th, de, 1.0 - rng.random(size), 1.0 - rng.random(size), np.ones(size))
            checks.append(_ratio_check("h2", (c,), x, ys > t2, fy, fam.h2(c)))
        joint = fam.joint_sf(t1, t2)
        for c1, hw1 in pts_t:
            for c2, hw2 in pts_d:
                th, de = _pair_in_bin(rng, fam, c1, hw1, c2, hw2, size)
                xs, ys, _ = fam.realize(th, de, 1.0 - rng.random(size), 1.0 - rng.random(size), rng.random(size))
                checks.append(_ratio_check("g", (c1, c2), x, (xs > t1) & (ys > t2), joint, fam.g(c1, c2)))
    for ch in checks:
        if ch.informative and ch.z > z_limit:
            flags.append(f"{ch.factor} at {ch.point}, x={ch.x:g}: ratio {ch.empirical:.4g} vs {ch.expected:.4g} "
                         f"({ch.z:.1f} standard errors)")

    xs, ys, _, _, _ = fam.sample(rng, size)
    ks = (float(stats.kstest(mx.cdf(xs), "uniform").pvalue), float(stats.kstest(my.cdf(ys), "uniform").pvalue))
    hill = hill_estimate(xs, max(2, size // 100))
    return AssumptionReport(fam, mean_h1, mean_h2, mean_g, fam.factor_bounds(), margins, checks, ks, hill, flags)


def _ratio_check(factor, point, x, hit, base_prob, expected) -> RatioCheck:
    n = hit.size
    ph = hit.mean()
    se = np.sqrt(ph * (1.0 - ph) / n) / base_prob if base_prob > 0 else float("nan")
    return RatioCheck(factor, tuple(float(v) for v in point), float(x), float(ph / base_prob), float(se),
                      float(expected), int(hit.sum()))
