"""Seeded, reproducible Monte-Carlo estimation of scaled tail functionals.

Work is cut into fixed-size blocks. Block ``b`` draws from the substream keyed by
``(master_seed, task, b)`` and returns exact running moments; blocks are merged
in index order. The pooled result therefore depends only on the seed and the
budget, never on how many workers executed the blocks.

Two estimator families live here:

* semi-analytic product estimators: the weights are simulated and the claim
  tail given the weights is evaluated in closed form (branch stratification
  for the mixture family);
* path estimators for weighted sums: either plain simulation, or the
  big-jump stratified sampler, which conditions on at least one heavy driver
  exceeding a cut-off below which the target event is impossible and
  reweights by the exact probability of that stratum.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Optional, Sequence

import numpy as np

from .dep_families import DependenceFamily, StoppingLaw, check_sequence
from .errors import LowHitCountWarning

DEFAULT_BLOCK = 1 << 16
HIT_FLOOR = 50


@dataclass(frozen=True)
class StreamSpec:
    """Root of a family of reproducible substreams."""

    master_seed: int
    task_index: int = 0

    def seed_sequence(self, *key: int) -> np.random.SeedSequence:
        return np.random.SeedSequence(int(self.master_seed), spawn_key=(int(self.task_index), *map(int, key)))

    def generator(self, *key: int) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed_sequence(*key)))


def as_stream(stream) -> StreamSpec:
    if isinstance(stream, StreamSpec):
        return stream
    return StreamSpec(int(stream))


@dataclass(frozen=True)
class Moments:
    """Exact sufficient statistics of paired samples ``(a, b)``."""

    n: int = 0
    mean_a: float = 0.0
    mean_b: float = 0.0
    m2_a: float = 0.0
    m2_b: float = 0.0
    c_ab: float = 0.0
    hits: int = 0

    @classmethod
    def of(cls, a, b=None) -> "Moments":
        a = np.asarray(a, dtype=float)
        if a.size == 0:
            return cls()
        b = np.zeros_like(a) if b is None else np.asarray(b, dtype=float)
        ma, mb = a.mean(), b.mean()
        da, db = a - ma, b - mb
        return cls(a.size, float(ma), float(mb), float(da @ da), float(db @ db), float(da @ db),
                   int(np.count_nonzero(a)))

    def __add__(self, other: "Moments") -> "Moments":
        if other.n == 0:
            return self
        if self.n == 0:
            return other
        n = self.n + other.n
        da = other.mean_a - self.mean_a
        db = other.mean_b - self.mean_b
        f = self.n * other.n / n
        return Moments(
            n,
            self.mean_a + da * other.n / n,
            self.mean_b + db * other.n / n,
            self.m2_a + other.m2_a + da * da * f,
            self.m2_b + other.m2_b + db * db * f,
            self.c_ab + other.c_ab + da * db * f,
            self.hits + other.hits,
        )


@dataclass(frozen=True)
class Estimate:
    """Monte-Carlo point estimate with standard error and 95% interval.

    ``ci95`` is None when the hit count is below the reporting floor.
    """

    point: float
    stderr: float
    n: int
    ci95: Optional[tuple] = None
    hits: int = -1
    notes: tuple = field(default=())

    @classmethod
    def from_values(cls, point: float, stderr: float, n: int, hits: int = -1, report_ci: bool = True, notes=()):
        ci = (point - 1.96 * stderr, point + 1.96 * stderr) if report_ci else None
        return cls(float(point), float(stderr), int(n), ci, int(hits), tuple(notes))

    @property
    def degenerate(self) -> bool:
        """True when every sample contributed zero, as opposed to a tiny positive mean."""
        return self.hits == 0

    @property
    def reliable(self) -> bool:
        return self.ci95 is not None

    def covers(self, target: float) -> bool:
        return self.ci95 is not None and self.ci95[0] <= target <= self.ci95[1]


def _mean_estimate(m: Moments, scale: float = 1.0, hit_floor: Optional[int] = HIT_FLOOR, what: str = "") -> Estimate:
    se = math.sqrt(m.m2_a / (m.n - 1) / m.n) if m.n > 1 else float("nan")
    ok = hit_floor is None or m.hits >= hit_floor
    if not ok:
        warnings.warn(f"{what or 'estimate'}: only {m.hits} hits (< {hit_floor}); interval withheld",
                      LowHitCountWarning, stacklevel=3)
    return Estimate.from_values(scale * m.mean_a, scale * se, m.n, m.hits, report_ci=ok)


def _ratio_estimate(m: Moments, hit_floor: Optional[int] = HIT_FLOOR, what: str = "") -> Estimate:
    """Delta-method estimate of ``E[a] / E[b]``."""
    if m.mean_b == 0:
        return Estimate.from_values(float("nan"), float("nan"), m.n, 0, report_ci=False, notes=("no denominator hits",))
    r = m.mean_a / m.mean_b
    if m.n > 1:
        var = (m.m2_a - 2 * r * m.c_ab + r * r * m.m2_b) / (m.n - 1)
        se = math.sqrt(max(var, 0.0) / m.n) / abs(m.mean_b)
    else:
        se = float("nan")
    ok = hit_floor is None or m.hits >= hit_floor
    if not ok:
        warnings.warn(f"{what or 'ratio'}: only {m.hits} hits (< {hit_floor}); interval withheld",
                      LowHitCountWarning, stacklevel=3)
    return Estimate.from_values(r, se, m.n, m.hits, report_ci=ok)


def _block_sizes(n_samples: int, block_size: int) -> list[int]:
    full, rest = divmod(int(n_samples), int(block_size))
    return [block_size] * full + ([rest] if rest else [])


def _run_block(kernel, stream: StreamSpec, args):
    b, size = args
    return kernel(stream, b, size)


def run_blocks(kernel: Callable, n_samples: int, stream, workers: int = 1,
               block_size: int = DEFAULT_BLOCK) -> Moments:
    """Evaluate ``kernel(stream, block_index, size) -> Moments`` over the budget.

    ``kernel`` must be picklable when ``workers > 1``.
    """
    if n_samples < 1:
        raise ValueError("sample budget must be positive")
    stream = as_stream(stream)
    jobs = list(enumerate(_block_sizes(n_samples, block_size)))
    call = partial(_run_block, kernel, stream)
    if workers and workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(call, jobs))
    else:
        parts = [call(j) for j in jobs]
    total = Moments()
    for part in parts:
        total = total + part
    return total


def merge(estimates: Sequence[Estimate]) -> Estimate:
    """Pool estimates from disjoint substreams (sample-size weighted)."""
    estimates = list(estimates)
    if not estimates:
        raise ValueError("nothing to merge")
    if len(estimates) == 1:
        return estimates[0]
    n = sum(e.n for e in estimates)
    point = math.fsum(e.n * e.point for e in estimates) / n
    stderr = math.sqrt(math.fsum((e.n * e.stderr) ** 2 for e in estimates)) / n
    hits = sum(e.hits for e in estimates) if all(e.hits >= 0 for e in estimates) else -1
    report = all(e.ci95 is not None for e in estimates)
    return Estimate.from_values(point, stderr, n, hits, report_ci=report)


# ---------------------------------------------------------------------------
# semi-analytic product kernels


def _weights(fam: DependenceFamily, stream: StreamSpec, b: int, size: int):
    return fam.weights.sample(stream.generator(b), size)


def _k_corner(fam, ta, tb, x, stream, b, size):
    t, d = _weights(fam, stream, b, size)
    with np.errstate(divide="ignore"):
        v = x * fam.cond_joint_sf(ta / t, tb / d, t, d)
    return Moments.of(v)


def _k_marginal(fam, side, thr, x, stream, b, size):
    t, d = _weights(fam, stream, b, size)
    with np.errstate(divide="ignore"):
        v = x * (fam.cond_sf_x(thr / t, t) if side == "first" else fam.cond_sf_y(thr / d, d))
    return Moments.of(v)


def _k_cr_product(fam, ta, tb, x, stream, b, size):
    t, d = _weights(fam, stream, b, size)
    with np.errstate(divide="ignore"):
        return Moments.of(x * fam.cond_joint_sf(ta / t, tb / d, t, d), x * fam.cond_sf_y(tb / d, d))


def _k_jes_product(fam, ta, tb, stream, b, size):
    t, d = _weights(fam, stream, b, size)
    with np.errstate(divide="ignore", invalid="ignore"):
        num = t * fam.cond_partial_mean_x(ta / t, tb / d, t, d) / ta
        num = np.where(t > 0, num, 0.0)
        den = fam.cond_joint_sf(ta / t, tb / d, t, d)
    return Moments.of(num, den)


def estimate_scaled_corner(fam: DependenceFamily, p: float, q: float, x: float, n_samples: int, stream,
                           workers: int = 1, block_size: int = DEFAULT_BLOCK) -> Estimate:
    """Estimate ``x P[Theta X > U_F(x) p, Delta Y > U_G(x) q]``.

    The weights are simulated; the claim corner given the weights is exact, so
    the standard error reflects weight sampling only.
    """
    _check_scale(x, n_samples)
    ta = fam.marginal_x.normalization_U(x) * p
    tb = fam.marginal_y.normalization_U(x) * q
    m = run_blocks(partial(_k_corner, fam, ta, tb, x), n_samples, stream, workers, block_size)
    return _mean_estimate(m, hit_floor=None)


def estimate_scaled_marginal(fam: DependenceFamily, side: str, p: float, x: float, n_samples: int, stream,
                             workers: int = 1, block_size: int = DEFAULT_BLOCK) -> Estimate:
    """Estimate ``x P[Theta X > U_F(x) p]`` (or the Delta Y analogue) semi-analytically."""
    _check_scale(x, n_samples)
    if side not in ("first", "second"):
        raise ValueError("side must be 'first' or 'second'")
    marg = fam.marginal_x if side == "first" else fam.marginal_y
    thr = marg.normalization_U(x) * p
    m = run_blocks(partial(_k_marginal, fam, side, thr, x), n_samples, stream, workers, block_size)
    return _mean_estimate(m, hit_floor=None)


def _check_scale(x, n_samples):
    if not x >= 1:
        raise ValueError("scale x must be >= 1")
    if n_samples < 1000:
        raise ValueError("need at least 1000 samples")


# ---------------------------------------------------------------------------
# path sampler for weighted sums


@dataclass
class SumPaths:
    """Per-path, per-index draws; ``lik`` is the stratum probability per path."""

    theta: np.ndarray
    delta: np.ndarray
    x: np.ndarray
    y: np.ndarray
    active: np.ndarray
    lik: np.ndarray


def simulate_paths(fams: Sequence[DependenceFamily], stream: StreamSpec, block: int, size: int,
                   guard: Optional[tuple] = None, stopping: Optional[StoppingLaw] = None) -> SumPaths:
    """Draw ``size`` paths of ``(Theta_i, Delta_i, X_i, Y_i)``, ``i = 1..n``.

    Each index draws from its own substream. With ``guard = (A, B)`` the heavy
    drivers are conditioned on at least one of them entering its tail region,
    where the cut-offs are chosen so that outside that stratum
    ``sum_i Theta_i X_i <= A`` and ``sum_i Delta_i Y_i <= B``. An infinite
    threshold leaves that side unguarded.
    """
    n = len(fams)
    if stopping is not None:
        if stopping.max > n:
            raise ValueError("need one family per possible summand")
        count = stopping.sample(stream.generator(block, 0), size)
    else:
        count = np.full(size, n)
    active = np.arange(n)[None, :] < count[:, None]

    theta = np.empty((size, n))
    delta = np.empty((size, n))
    raw = np.empty((size, 2 * n))
    branch_u = np.empty((size, n))
    for i, fam in enumerate(fams):
        rng = stream.generator(block, 2 + i)
        theta[:, i], delta[:, i] = fam.weights.sample(rng, size)
        raw[:, 2 * i] = 1.0 - rng.random(size)
        raw[:, 2 * i + 1] = 1.0 - rng.random(size)
        branch_u[:, i] = rng.random(size)

    lik = np.ones(size)
    drv = raw
    if guard is not None:
        A, B = guard
        eta = np.empty(2 * n)
        for i, fam in enumerate(fams):
            la = A / (n * fam.theta_law.upper)
            lb = B / (n * fam.delta_law.upper)
            eta[2 * i], eta[2 * i + 1] = fam.driver_levels(la, lb)
        with np.errstate(divide="ignore"):
            logsurv = np.concatenate([[0.0], np.cumsum(np.log1p(-np.minimum(eta, 1.0)))])
        cumprob = -np.expm1(logsurv[1:])
        lik = -np.expm1(logsurv[2 * count])
        target = (1.0 - stream.generator(block, 1).random(size)) * lik
        first = np.searchsorted(cumprob, target, side="left")
        cols = np.arange(2 * n)[None, :]
        first_c = first[:, None]
        drv = np.where(cols < first_c, eta + (1.0 - eta) * raw,
                       np.where(cols == first_c, eta * raw, raw))
        drv = np.where(lik[:, None] > 0, drv, raw)

    x = np.empty((size, n))
    y = np.empty((size, n))
    for i, fam in enumerate(fams):
        x[:, i], y[:, i], _ = fam.realize(theta[:, i], delta[:, i], drv[:, 2 * i], drv[:, 2 * i + 1], branch_u[:, i])
    return SumPaths(theta, delta, x, y, active, lik)


def weighted_sums(paths: SumPaths, premium_x: float = 0.0, premium_y: float = 0.0, positive_part: bool = False):
    """Final weighted sums of (net) losses over the active indices."""
    lx = paths.x - premium_x
    ly = paths.y - premium_y
    if positive_part:
        lx, ly = np.maximum(lx, 0.0), np.maximum(ly, 0.0)
    s = np.where(paths.active, paths.theta * lx, 0.0).sum(axis=1)
    t = np.where(paths.active, paths.delta * ly, 0.0).sum(axis=1)
    return s, t


def _k_sum_event(fams, kind, ta, tb, x, method, stopping, stream, b, size):
    if method == "stratified":
        guard = {"corner": (ta, np.inf), "first": (ta, np.inf), "second": (np.inf, tb), "box": (ta, tb)}[kind]
    else:
        guard = None
    paths = simulate_paths(fams, stream, b, size, guard=guard, stopping=stopping)
    s, t = weighted_sums(paths)
    if kind == "corner":
        hit = (s > ta) & (t > tb)
    elif kind == "first":
        hit = s > ta
    elif kind == "second":
        hit = t > tb
    else:
        hit = (s > ta) | (t > tb)
    return Moments.of(np.where(hit, x * paths.lik, 0.0))


def _k_sum_cr(fams, ta, tb, x, method, stream, b, size):
    guard = (np.inf, tb) if method == "stratified" else None
    paths = simulate_paths(fams, stream, b, size, guard=guard)
    s, t = weighted_sums(paths)
    den = np.where(t > tb, paths.lik, 0.0)
    num = np.where(s > ta, den, 0.0)
    return Moments.of(num, den)


def _estimate_sum_event(fams, kind, p, q, x, n_samples, stream, method, workers, block_size, stopping=None):
    _check_scale(x, n_samples)
    if method not in ("plain", "stratified"):
        raise ValueError("method must be 'plain' or 'stratified'")
    f0 = fams[0]
    ta = f0.marginal_x.normalization_U(x) * p
    tb = f0.marginal_y.normalization_U(x) * q
    kern = partial(_k_sum_event, list(fams), kind, ta, tb, x, method, stopping)
    m = run_blocks(kern, n_samples, stream, workers, block_size)
    return _mean_estimate(m, what=f"{kind} tail of weighted sums")


def estimate_scaled_sum_corner(fams: Sequence[DependenceFamily], n: int, p: float, q: float, x: float,
                               n_samples: int, stream, method: str = "plain", workers: int = 1,
                               block_size: int = DEFAULT_BLOCK) -> Estimate:
    """Estimate ``x P[S_n > U_F(x) p, T_n > U_G(x) q]`` by simulating the weighted sums."""
    return _estimate_sum_event(check_sequence(fams, n), "corner", p, q, x, n_samples, stream, method,
                               workers, block_size)


def estimate_scaled_sum_box(fams: Sequence[DependenceFamily], n: int, p: float, q: float, x: float,
                            n_samples: int, stream, method: str = "stratified", workers: int = 1,
                            block_size: int = DEFAULT_BLOCK) -> Estimate:
    """Estimate ``x P[S_n > U_F(x) p or T_n > U_G(x) q]``."""
    return _estimate_sum_event(check_sequence(fams, n), "box", p, q, x, n_samples, stream, method,
                               workers, block_size)


def estimate_marginal_sum_tail(fams: Sequence[DependenceFamily], n: int, side: str, threshold_multiplier: float,
                               x: float, n_samples: int, stream, method: str = "stratified", workers: int = 1,
                               block_size: int = DEFAULT_BLOCK) -> Estimate:
    """Estimate ``x P[S_n > U_F(x) p]`` (``side='first'``) or the ``T_n`` analogue."""
    if side not in ("first", "second"):
        raise ValueError("side must be 'first' or 'second'")
    seq = check_sequence(fams, n)
    return _estimate_sum_event(seq, side, threshold_multiplier, threshold_multiplier, x, n_samples, stream,
                               method, workers, block_size)


def estimate_stopped_event(fam: DependenceFamily, stopping: StoppingLaw, kind: str, p: float, q: float, x: float,
                           n_samples: int, stream, method: str = "stratified", workers: int = 1,
                           block_size: int = DEFAULT_BLOCK) -> Estimate:
    """Scaled corner/box/marginal tail of the randomly stopped sums ``(S_N, T_N)``."""
    seq = check_sequence(fam, stopping.max)
    return _estimate_sum_event(seq, kind, p, q, x, n_samples, stream, method, workers, block_size, stopping)


def estimate_cr(fams: Sequence[DependenceFamily], n: int, p: float, q: float, x: float, n_samples: int, stream,
                method: str = "stratified", workers: int = 1, block_size: int = DEFAULT_BLOCK) -> Estimate:
    """Estimate ``P[S_n > p U_F(x) | T_n > q U_G(x)]``.

    For ``n = 1`` with ``method='semi-analytic'`` both probabilities are exact
    given the weights.
    """
    seq = check_sequence(fams, n)
    _check_scale(x, n_samples)
    ta = seq[0].marginal_x.normalization_U(x) * p
    tb = seq[0].marginal_y.normalization_U(x) * q
    if method == "semi-analytic":
        if n != 1:
            raise ValueError("semi-analytic CR needs n = 1")
        m = run_blocks(partial(_k_cr_product, seq[0], ta, tb, x), n_samples, stream, workers, block_size)
        return _ratio_estimate(m, hit_floor=None)
    m = run_blocks(partial(_k_sum_cr, seq, ta, tb, x, method), n_samples, stream, workers, block_size)
    return _ratio_estimate(m, what="conditional exceedance")


def estimate_jes_ratio(fam: DependenceFamily, x: float, n_samples: int, stream, workers: int = 1,
                       block_size: int = DEFAULT_BLOCK) -> Estimate:
    """Semi-analytic ``E[Theta X | Theta X > U_F(x), Delta Y > U_G(x)] / U_F(x)``."""
    _check_scale(x, n_samples)
    ta = fam.marginal_x.normalization_U(x)
    tb = fam.marginal_y.normalization_U(x)
    m = run_blocks(partial(_k_jes_product, fam, ta, tb), n_samples, stream, workers, block_size)
    return _ratio_estimate(m, hit_floor=None)
