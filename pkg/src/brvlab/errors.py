"""Exception hierarchy; each class maps to one CLI exit code."""


class BRVError(Exception):
    exit_code = 1


class ConfigError(BRVError, ValueError):
    """Malformed or schema-invalid experiment configuration."""

    exit_code = 2


class AssumptionViolation(BRVError, ValueError):
    """Inputs outside the hypotheses under which a limit formula holds."""

    exit_code = 3


class NumericFailure(BRVError, ArithmeticError):
    """Quadrature did not reach the requested tolerance."""

    exit_code = 4


class ToleranceFailure(BRVError):
    exit_code = 5


class LowHitCountWarning(UserWarning):
    """Fewer rare-event hits than needed for a trustworthy Wald interval."""


class DegenerateAsymptoteWarning(UserWarning):
    """The leading asymptotic coefficient is zero, so equivalence is vacuous."""
