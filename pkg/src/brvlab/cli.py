"""Command-line experiment runner: ``brvlab run <config> [--workers N] [--output DIR] [--seed HEX]``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from . import asymptotics, limit_measure, mc_engine, risk_sim
from .config import ExperimentConfig, load, parse_seed
from .dep_families import verify_assumptions
from .errors import BRVError, ConfigError, ToleranceFailure
from .rv_core import hill_estimate

log = logging.getLogger("brvlab")

COLUMNS = ["x", "empirical", "stderr", "ci_lo", "ci_hi", "asymptote", "ratio"]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    if isinstance(v, str):
        return v
    return "%.17g" % float(v)


def _row(x, est: mc_engine.Estimate, asym: float) -> dict:
    lo, hi = est.ci95 if est.ci95 is not None else (None, None)
    ratio = est.point / asym if asym else float("nan")
    return dict(x=x, empirical=est.point, stderr=est.stderr, ci_lo=lo, ci_hi=hi, asymptote=asym, ratio=ratio)


def _common(cfg: ExperimentConfig):
    return dict(workers=cfg.workers, block_size=cfg.block_size)


def _exp_breiman(cfg):
    fam, seq = cfg.family, cfg.families
    if cfg.n == 1:
        asym = asymptotics.breiman_constant(fam.theta_law, fam.h1, fam.alpha) / cfg.p ** fam.alpha
    else:
        asym = limit_measure.marginal_sum_constants(seq, cfg.n)[0] / cfg.p ** fam.alpha
    rows = []
    for x in cfg.x_grid:
        if cfg.n == 1:
            est = mc_engine.estimate_scaled_marginal(fam, "first", cfg.p, x, cfg.budget, cfg.seed, **_common(cfg))
        else:
            est = mc_engine.estimate_marginal_sum_tail(seq, cfg.n, "first", cfg.p, x, cfg.budget, cfg.seed,
                                                       method=cfg.method or "stratified", **_common(cfg))
        rows.append(_row(x, est, asym))
    rng = mc_engine.StreamSpec(cfg.seed, 1).generator(0)
    xs, _, th, _, _ = fam.sample(rng, min(cfg.budget, 10 ** 6))
    prod = th * xs
    prod = prod[prod > 0]
    extra = {"matuszewska_indices": list(fam.marginal_x.matuszewska_indices()),
             "hill_alpha_of_product": hill_estimate(prod, max(2, prod.size // 100))}
    return rows, extra


def _exp_product_corner(cfg):
    fam = cfg.family
    asym = limit_measure.corner_mass_product(fam, cfg.p, cfg.q)
    rows = [_row(x, mc_engine.estimate_scaled_corner(fam, cfg.p, cfg.q, x, cfg.budget, cfg.seed, **_common(cfg)), asym)
            for x in cfg.x_grid]
    box = limit_measure.mu_hat_product_box(fam, cfg.p, cfg.q)
    return rows, {"mu_hat_box": box, "mu_bar_at_pq": limit_measure.LimitMeasureSpec.of(fam).mu_bar(cfg.p, cfg.q)}


def _exp_sum_measure(cfg):
    seq = cfg.families
    asym = limit_measure.mu_hat_sum_box(seq, cfg.n, cfg.p, cfg.q)
    rows = [_row(x, mc_engine.estimate_scaled_sum_box(seq, cfg.n, cfg.p, cfg.q, x, cfg.budget, cfg.seed,
                                                      method=cfg.method or "stratified", **_common(cfg)), asym)
            for x in cfg.x_grid]
    xm = cfg.x_grid[-1]
    corner = mc_engine.estimate_scaled_sum_corner(seq, cfg.n, cfg.p, cfg.q, xm, cfg.budget, cfg.seed,
                                                  method=cfg.method or "stratified", **_common(cfg))
    first = mc_engine.estimate_marginal_sum_tail(seq, cfg.n, "first", cfg.p, xm, cfg.budget, cfg.seed, **_common(cfg))
    second = mc_engine.estimate_marginal_sum_tail(seq, cfg.n, "second", cfg.q, xm, cfg.budget, cfg.seed, **_common(cfg))
    return rows, {"corner_estimate_at_max_x": corner.point, "corner_limit": limit_measure.corner_mass_sum(seq, cfg.n, cfg.p, cfg.q),
                  "first_tail_estimate_at_max_x": first.point, "second_tail_estimate_at_max_x": second.point}


def _exp_stopped(cfg):
    fam, law = cfg.family, cfg.stopping
    asym = limit_measure.mu_tilde_stopped_box(fam, law, cfg.p, cfg.q)
    rows = [_row(x, mc_engine.estimate_stopped_event(fam, law, "box", cfg.p, cfg.q, x, cfg.budget, cfg.seed,
                                                     method=cfg.method or "stratified", **_common(cfg)), asym)
            for x in cfg.x_grid]
    return rows, {"mean_N": law.mean()}


def _exp_ruin(cfg):
    seq = cfg.families
    r = cfg.ruin
    kind = r.get("kind", "and")
    model = risk_sim.NetLossModel(r.get("premium_x", 0.0), r.get("premium_y", 0.0))
    and_sim, or_ = asymptotics.ruin_coefficients(seq, cfg.n, cfg.p, cfg.q)
    v = seq[0].marginal_x
    rows = []
    for x in cfg.x_grid:
        if kind == "gap":
            est, asym = risk_sim.positive_part_gap(model, seq, cfg.n, x, cfg.p, cfg.q, cfg.budget, cfg.seed, **_common(cfg)), 1.0
        else:
            est = risk_sim.estimate_psi(kind, model, seq, cfg.n, x, cfg.p, cfg.q, cfg.budget, cfg.seed,
                                        method=r.get("method", "stratified"), **_common(cfg)).estimate
            coef = {"and": and_sim, "sim": and_sim, "or": or_}.get(kind)
            if coef is None:
                a = seq[0].alpha
                cx, cy = limit_measure.marginal_sum_constants(seq, cfg.n)
                asym = (cx / cfg.p ** a if kind == "first" else cy / cfg.q ** a) * float(v.survival(x))
            else:
                asym = coef.value(float(v.survival(x)))
        rows.append(_row(x, est, asym))
    return rows, {"and_sim_coefficient": and_sim.coefficient, "or_coefficient": or_.coefficient}


def _exp_jes(cfg):
    fam = cfg.family
    asym = asymptotics.jes_factor(fam)
    rows = []
    notes = []
    for x in cfg.x_grid:
        est = risk_sim.jes_empirical(fam, x, cfg.budget, cfg.seed, method=cfg.method or "semi-analytic", **_common(cfg))
        notes.extend(est.notes)
        rows.append(_row(x, est, asym))
    return rows, {"notes": notes}


def _exp_cr(cfg):
    seq = cfg.families
    asym = asymptotics.cr_limit(seq, cfg.n, cfg.p, cfg.q)
    method = cfg.method or ("semi-analytic" if cfg.n == 1 else "stratified")
    rows = [_row(x, mc_engine.estimate_cr(seq, cfg.n, cfg.p, cfg.q, x, cfg.budget, cfg.seed, method=method,
                                          **_common(cfg)), asym) for x in cfg.x_grid]
    return rows, {}


def _exp_verify(cfg):
    rep = verify_assumptions(cfg.family, max(cfg.budget, 10 ** 4), cfg.x_grid, eps=cfg.epsilon, seed=cfg.seed)
    rows = []
    for ch in rep.ratio_checks:
        lo, hi = ch.empirical - 1.96 * ch.stderr, ch.empirical + 1.96 * ch.stderr
        rows.append(dict(x=ch.x, empirical=ch.empirical, stderr=ch.stderr, ci_lo=lo, ci_hi=hi, asymptote=ch.expected,
                         ratio=ch.empirical / ch.expected, check=ch.factor, hits=ch.hits, point=" ".join(_fmt(v) for v in ch.point)))
    extra = {"mean_h1": rep.mean_h1, "mean_h2": rep.mean_h2, "mean_g": rep.mean_g, "mean_one_ok": rep.mean_one_ok,
             "bounds": list(rep.bounds), "moment_margins": list(rep.moment_margins),
             "marginal_ks_pvalues": list(rep.marginal_ks_pvalues), "hill_alpha": rep.hill_alpha, "flags": rep.flags}
    return rows, extra


EXPERIMENTS = {
    "breiman": _exp_breiman, "product-corner": _exp_product_corner, "sum-measure": _exp_sum_measure,
    "stopped-sum": _exp_stopped, "ruin": _exp_ruin, "jes": _exp_jes, "cr": _exp_cr, "verify-assumptions": _exp_verify,
}


def _judge(cfg: ExperimentConfig, rows: list, extra: dict) -> dict:
    if cfg.experiment == "verify-assumptions":
        ok = extra["mean_one_ok"] and not extra["flags"]
        return {"passed": bool(ok), "criterion": "mean-one to 1e-10 and no ratio beyond 5 standard errors"}
    tol = cfg.tolerance
    if not tol:
        return {"passed": True, "criterion": "none configured"}
    last = rows[-1]
    gap = abs(last["empirical"] - last["asymptote"])
    allowed = max(tol.get("relative", 0.0) * abs(last["asymptote"]), tol.get("stderrs", 0.0) * last["stderr"])
    return {"passed": bool(gap <= allowed), "criterion": tol, "at_x": last["x"], "abs_gap": gap, "allowed": allowed}


def run(cfg: ExperimentConfig) -> int:
    """Execute one experiment, write ``<kind>.csv`` and ``<kind>.summary.json``; return the exit status."""
    rows, extra = EXPERIMENTS[cfg.experiment](cfg)
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    stem = cfg.experiment
    cols = COLUMNS + [c for c in ("check", "point", "hits") if rows and c in rows[0]]
    with open(out / f"{stem}.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([_fmt(r.get(c)) for c in cols])
    verdict = _judge(cfg, rows, extra)
    summary = {"version": __version__, "config": cfg.resolved(), "verdict": verdict, "diagnostics": extra}
    (out / f"{stem}.summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True, default=_jsonable) + "\n")
    log.info("wrote %s", out / f"{stem}.csv")
    return 0 if verdict["passed"] else ToleranceFailure.exit_code


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    raise TypeError(f"not serializable: {type(v)}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="brvlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run one experiment from a TOML config")
    p_run.add_argument("config")
    p_run.add_argument("--workers", type=int)
    p_run.add_argument("--output")
    p_run.add_argument("--seed", help="hexadecimal master seed, e.g. 0x2a")
    p_run.add_argument("-v", "--verbose", action="store_true")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.seed is not None:
            parse_seed(args.seed)
        cfg = load(args.config, {"workers": args.workers, "output": args.output, "seed": args.seed})
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return run(cfg)
    except BRVError as exc:
        print(f"brvlab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"brvlab: ConfigError: {exc}", file=sys.stderr)
        return ConfigError.exit_code


if __name__ == "__main__":
    sys.exit(main())
