"""Interdependent heavy-tailed models: limit measures, asymptotics and Monte-Carlo checks."""

__version__ = "0.1.0"

from .dep_families import DependenceFamily, MixingFunction, StoppingLaw, WeightLaw, verify_assumptions
from .errors import AssumptionViolation, ConfigError, NumericFailure, ToleranceFailure
from .mc_engine import Estimate, StreamSpec, merge
from .rv_core import RVMarginal, hill_estimate

__all__ = [
    "AssumptionViolation", "ConfigError", "DependenceFamily", "Estimate", "MixingFunction", "NumericFailure",
    "RVMarginal", "StoppingLaw", "StreamSpec", "ToleranceFailure", "WeightLaw", "hill_estimate", "merge",
    "verify_assumptions",
]
