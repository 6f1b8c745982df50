"""Bidimensional discrete-time surplus simulation and empirical tail risk.

Each line starts with a share of the capital (``p x`` and ``q x``, ``p + q = 1``)
and pays discounted net losses ``Theta_i (X_i - c_x)`` and ``Delta_i (Y_i - c_y)``
in period ``i``. Ruin of a line means its cumulative discounted net loss
exceeds its capital at some period up to the horizon.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import partial
from typing import Sequence

import numpy as np

from .dep_families import DependenceFamily, StoppingLaw, check_sequence
from .errors import AssumptionViolation
from .mc_engine import (
    DEFAULT_BLOCK,
    Estimate,
    Moments,
    StreamSpec,
    _mean_estimate,
    _ratio_estimate,
    as_stream,
    estimate_jes_ratio,
    run_blocks,
    simulate_paths as _simulate_sum_paths,
    weighted_sums,
)

RUIN_KINDS = ("and", "sim", "or", "first", "second")


@dataclass(frozen=True)
class NetLossModel:
    """Per-period net loss = Pareto claim minus a constant premium, for each line."""

    premium_x: float = 0.0
    premium_y: float = 0.0

    def __post_init__(self):
        if self.premium_x < 0 or self.premium_y < 0:
            raise ValueError("premiums must be non-negative")


@dataclass(frozen=True)
class RuinResult:
    kind: str
    estimate: Estimate
    x: float
    p: float
    q: float
    n: int


@dataclass
class RuinPaths:
    """Per-path ruin indicators; ``lik`` is the stratum weight (1 for plain sampling)."""

    and_: np.ndarray
    sim: np.ndarray
    or_: np.ndarray
    first: np.ndarray
    second: np.ndarray
    lik: np.ndarray

    def indicator(self, kind: str) -> np.ndarray:
        return {"and": self.and_, "sim": self.sim, "or": self.or_,
                "first": self.first, "second": self.second}[kind]


def _check_split(p, q, n):
    if not (p > 0 and q > 0):
        raise ValueError("p and q must be positive")
    if abs(p + q - 1.0) > 1e-12:
        raise ValueError("capital split must satisfy p + q = 1")
    if n < 1:
        raise ValueError("horizon must be at least 1")


def _guard_for(kind, cx, cy):
    return {"and": (cx, np.inf), "sim": (cx, np.inf), "first": (cx, np.inf),
            "second": (np.inf, cy), "or": (cx, cy), "all": (cx, cy)}[kind]


def _ruin_block(model, fams, x, p, q, guard_kind, stream, b, size) -> RuinPaths:
    cx, cy = p * x, q * x
    guard = _guard_for(guard_kind, cx, cy) if guard_kind else None
    paths = _simulate_sum_paths(fams, stream, b, size, guard=guard)
    s = np.cumsum(paths.theta * (paths.x - model.premium_x), axis=1)
    t = np.cumsum(paths.delta * (paths.y - model.premium_y), axis=1)
    first = (s > cx).any(axis=1)
    second = (t > cy).any(axis=1)
    sim = ((s > cx) & (t > cy)).any(axis=1)
    return RuinPaths(first & second, sim, first | second, first, second, paths.lik)


def simulate_paths(model: NetLossModel, fams: Sequence[DependenceFamily], n: int, x: float, p: float, q: float,
                   n_paths: int, stream, method: str = "plain") -> RuinPaths:
    """Simulate ``n_paths`` surplus paths and return per-path ruin indicators.

    With ``method='stratified'`` paths are drawn from the big-jump stratum that
    contains every ruin event and ``lik`` carries its probability.
    """
    _check_split(p, q, n)
    seq = check_sequence(fams, n)
    _reject_product_weights(seq)
    stream = as_stream(stream)
    return _ruin_block(model, seq, x, p, q, "all" if method == "stratified" else None, stream, 0, int(n_paths))


def _k_psi(model, fams, x, p, q, kind, method, stream, b, size):
    r = _ruin_block(model, fams, x, p, q, kind if method == "stratified" else None, stream, b, size)
    return Moments.of(np.where(r.indicator(kind), r.lik, 0.0))


def _reject_product_weights(seq):
    for f in seq:
        if getattr(f, "product_form", False):
            raise AssumptionViolation(
                "cumulative-product discount factors break independence across periods; "
                "give each period its own weight law instead")


def estimate_psi(kind: str, model: NetLossModel, fams: Sequence[DependenceFamily], n: int, x: float, p: float,
                 q: float, n_paths: int, stream, method: str = "stratified", workers: int = 1,
                 block_size: int = DEFAULT_BLOCK) -> RuinResult:
    """Empirical finite-horizon ruin probability of the given kind."""
    if kind not in RUIN_KINDS:
        raise ValueError(f"kind must be one of {RUIN_KINDS}")
    if method not in ("plain", "stratified"):
        raise ValueError("method must be 'plain' or 'stratified'")
    _check_split(p, q, n)
    seq = check_sequence(fams, n)
    _reject_product_weights(seq)
    m = run_blocks(partial(_k_psi, model, seq, x, p, q, kind, method), n_paths, stream, workers, block_size)
    return RuinResult(kind, _mean_estimate(m, what=f"psi_{kind}"), x, p, q, n)


def _k_gap(model, fams, x, p, q, stream, b, size):
    cx, cy = p * x, q * x
    paths = _simulate_sum_paths(fams, stream, b, size, guard=(cx, np.inf))
    s, t = weighted_sums(paths, model.premium_x, model.premium_y)
    sp, tp = weighted_sums(paths, model.premium_x, model.premium_y, positive_part=True)
    den = np.where((sp > cx) & (tp > cy), paths.lik, 0.0)
    num = np.where((s > cx) & (t > cy), paths.lik, 0.0)
    return Moments.of(num, den)


def positive_part_gap(model: NetLossModel, fams: Sequence[DependenceFamily], n: int, x: float, p: float, q: float,
                      n_paths: int, stream, workers: int = 1, block_size: int = DEFAULT_BLOCK) -> Estimate:
    """``P[S_n > p x, T_n > q x] / P[S_n^+ > p x, T_n^+ > q x]`` on common random numbers."""
    if model.premium_x == 0 and model.premium_y == 0:
        return Estimate.from_values(1.0, 0.0, int(n_paths), notes=("zero premium: net losses equal their positive parts",))
    _check_split(p, q, n)
    seq = check_sequence(fams, n)
    m = run_blocks(partial(_k_gap, model, seq, x, p, q), n_paths, stream, workers, block_size)
    return _ratio_estimate(m, what="positive-part gap")


def sample_stopped_sums(fam: DependenceFamily, stopping_law: StoppingLaw, stream, size: int = 1):
    """Draw ``size`` realizations of ``(S_N, T_N)`` with iid summands and independent ``N``."""
    if not isinstance(fam, DependenceFamily):
        raise AssumptionViolation("stopped sums need a single family (iid weights across summands)")
    if not isinstance(stopping_law, StoppingLaw):
        raise AssumptionViolation("N must follow a bounded StoppingLaw independent of everything else")
    seq = check_sequence(fam, stopping_law.max)
    paths = _simulate_sum_paths(seq, as_stream(stream), 0, int(size), stopping=stopping_law)
    return weighted_sums(paths)


def _k_jes_plain(fam, ta, tb, stream, b, size):
    rng = stream.generator(b)
    x, y, t, d, _ = fam.sample(rng, size)
    hit = (t * x > ta) & (d * y > tb)
    return Moments.of(np.where(hit, t * x / ta, 0.0), hit.astype(float))


def jes_empirical(fam: DependenceFamily, x: float, n_samples: int, stream, method: str = "semi-analytic",
                  workers: int = 1, block_size: int = DEFAULT_BLOCK) -> Estimate:
    """Estimate ``JES(x) / U_F(x)``.

    ``semi-analytic`` simulates the weights and evaluates both mixture branches
    exactly given the weights; the note records the independent-branch share of
    the conditioning probability. ``plain`` simulates everything.
    """
    if fam.alpha <= 1:
        raise AssumptionViolation("JES needs alpha > 1")
    if method == "plain":
        ta = fam.marginal_x.normalization_U(x)
        tb = fam.marginal_y.normalization_U(x)
        m = run_blocks(partial(_k_jes_plain, fam, ta, tb), n_samples, stream, workers, block_size)
        return _ratio_estimate(m, what="JES")
    if method != "semi-analytic":
        raise ValueError("method must be 'semi-analytic' or 'plain'")
    est = estimate_jes_ratio(fam, x, n_samples, stream, workers, block_size)
    if fam.variant != "B" and est.point == est.point:
        share = independent_branch_share(fam, x)
        est = Estimate(est.point, est.stderr, est.n, est.ci95, est.hits,
                       est.notes + (f"independent-branch share of conditioning event: {share:.3g}",))
    return est


def independent_branch_share(fam: DependenceFamily, x: float, n_grid: int = 4096) -> float:
    """Fraction of ``P[Theta X > U_F(x), Delta Y > U_G(x)]`` due to the independent branch.

    Evaluated on a deterministic quasi-random weight sample.
    """
    ta = fam.marginal_x.normalization_U(x)
    tb = fam.marginal_y.normalization_U(x)
    rng = StreamSpec(0x5EED).generator(0)
    t, d = fam.weights.sample(rng, n_grid)
    with np.errstate(divide="ignore"):
        w = fam.mixing(t, d)
        indep = (1 - w) * fam.marginal_x.survival(ta / t) * fam.marginal_y.survival(tb / d)
        total = fam.cond_joint_sf(ta / t, tb / d, t, d)
    return float(indep.sum() / total.sum()) if total.sum() > 0 else float("nan")
