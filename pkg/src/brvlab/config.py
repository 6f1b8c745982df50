"""Experiment configuration: TOML file, JSON-schema validation, object building."""

from __future__ import annotations

import copy
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import jsonschema

from .dep_families import DependenceFamily, StoppingLaw
from .errors import AssumptionViolation, ConfigError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

SCHEMA_VERSION = 1
EXPERIMENTS = ("breiman", "product-corner", "sum-measure", "stopped-sum", "ruin", "jes", "cr", "verify-assumptions")

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_WEIGHT = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"type": "string"},
        "lo": _NUM, "hi": _NUM, "value": _NUM,
        "values": {"type": "array", "items": _NUM, "minItems": 1},
        "probs": {"type": "array", "items": _NUM, "minItems": 1},
    },
}
_FAMILY = {
    "type": "object",
    "required": ["variant", "alpha", "theta", "delta"],
    "additionalProperties": False,
    "properties": {
        "variant": {"enum": ["A", "B", "C"]},
        "alpha": _POS, "beta": _POS, "sigma_x": _POS, "sigma_y": _POS,
        "a1": _NUM, "a2": _NUM, "w_bar": _NUM,
        "w": {"oneOf": [_NUM, {"type": "array", "items": _NUM, "minItems": 1, "maxItems": 3}]},
        "weight_coupling": _NUM,
        "theta": _WEIGHT, "delta": _WEIGHT,
        "discount": {"enum": ["per-period", "product"]},
    },
}

SCHEMA = {
    "type": "object",
    "required": ["schema_version", "experiment", "seed", "x_grid", "budget"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "experiment": {"enum": list(EXPERIMENTS)},
        "seed": {"type": "string", "pattern": "^0[xX][0-9a-fA-F]{1,16}$"},
        "output": {"type": "string"},
        "x_grid": {"type": "array", "items": {"type": "number", "minimum": 1}, "minItems": 1},
        "budget": {"type": "integer", "minimum": 1000},
        "n": {"type": "integer", "minimum": 1},
        "p": _POS, "q": _POS,
        "epsilon": _POS,
        "workers": {"type": "integer", "minimum": 1},
        "block_size": {"type": "integer", "minimum": 1},
        "family": _FAMILY,
        "families": {"type": "array", "items": _FAMILY, "minItems": 1},
        "stopping": {
            "type": "object", "required": ["kind"],
            "properties": {"kind": {"type": "string"}, "lo": {"type": "integer"}, "hi": {"type": "integer"},
                           "value": {"type": "integer"}, "values": {"type": "array"}, "probs": {"type": "array"}},
        },
        "ruin": {
            "type": "object", "additionalProperties": False,
            "properties": {"kind": {"enum": ["and", "sim", "or", "first", "second", "gap"]},
                           "premium_x": {"type": "number", "minimum": 0},
                           "premium_y": {"type": "number", "minimum": 0},
                           "method": {"enum": ["plain", "stratified"]}},
        },
        "method": {"enum": ["plain", "stratified", "semi-analytic"]},
        "tolerance": {
            "type": "object", "additionalProperties": False,
            "properties": {"relative": {"type": "number", "minimum": 0}, "stderrs": {"type": "number", "minimum": 0}},
        },
    },
    "oneOf": [{"required": ["family"]}, {"required": ["families"]}],
}


@dataclass
class ExperimentConfig:
    raw: dict
    experiment: str
    seed: int
    x_grid: list
    budget: int
    families: list
    n: int = 1
    p: float = 1.0
    q: float = 1.0
    epsilon: float = 1.0
    workers: int = 1
    block_size: int = 1 << 16
    output: str = "results"
    stopping: StoppingLaw | None = None
    ruin: dict = field(default_factory=dict)
    method: str | None = None
    tolerance: dict = field(default_factory=dict)

    @property
    def family(self) -> DependenceFamily:
        return self.families[0]

    def resolved(self) -> dict:
        out = copy.deepcopy(self.raw)
        out.update(seed=f"0x{self.seed:x}", workers=self.workers, output=self.output, n=self.n,
                   p=self.p, q=self.q, epsilon=self.epsilon, block_size=self.block_size)
        return out


def parse_seed(text: str) -> int:
    try:
        value = int(str(text), 16)
    except ValueError as exc:
        raise ConfigError(f"seed must be hexadecimal, got {text!r}") from exc
    if not 0 <= value < 2 ** 64:
        raise ConfigError("seed must fit in 64 bits")
    return value


def load(path, overrides: dict | None = None) -> ExperimentConfig:
    try:
        raw = tomllib.loads(Path(path).read_text())
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for k, v in (overrides or {}).items():
        if v is not None:
            raw[k] = v
    return from_dict(raw)


def from_dict(raw: dict) -> ExperimentConfig:
    try:
        jsonschema.validate(raw, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(map(str, exc.absolute_path)) or "<root>"
        raise ConfigError(f"config invalid at {where}: {exc.message}") from exc
    try:
        specs = raw.get("families") or [raw["family"]]
        for s in specs:
            if s.get("discount") == "product":
                raise AssumptionViolation(
                    "cumulative-product discount factors make the weights dependent across periods; "
                    "per-period independence of (Theta_i, Delta_i) is required")
        fams = [DependenceFamily.from_config({k: v for k, v in s.items() if k != "discount"}) for s in specs]
        stopping = StoppingLaw.from_config(raw["stopping"]) if "stopping" in raw else None
    except AssumptionViolation:
        raise
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"invalid family parameters: {exc}") from exc
    n = int(raw.get("n", len(fams)))
    if raw["experiment"] == "stopped-sum" and stopping is None:
        raise ConfigError("stopped-sum experiment needs a [stopping] table")
    return ExperimentConfig(
        raw=raw, experiment=raw["experiment"], seed=parse_seed(raw["seed"]), x_grid=[float(v) for v in raw["x_grid"]],
        budget=int(raw["budget"]), families=fams, n=n, p=float(raw.get("p", 1.0)), q=float(raw.get("q", 1.0)),
        epsilon=float(raw.get("epsilon", 1.0)), workers=int(raw.get("workers", 1)),
        block_size=int(raw.get("block_size", 1 << 16)), output=raw.get("output", "results"), stopping=stopping,
        ruin=dict(raw.get("ruin", {})), method=raw.get("method"), tolerance=dict(raw.get("tolerance", {})),
    )
