"""Exception types. Each maps to a distinct CLI exit code."""


class EvtCvarError(Exception):
    exit_code = 1
    kind = "error"


class ConfigError(EvtCvarError, ValueError):
    """Invalid configuration, flags, or unreadable input path."""

    exit_code = 2
    kind = "config"


class DataError(EvtCvarError, ValueError):
    """Malformed input data (non-numeric lines, NaN, schema mismatch)."""

    exit_code = 3
    kind = "data"


class DomainError(EvtCvarError, ValueError):
    """Argument outside the mathematical domain of an operation."""

    exit_code = 4
    kind = "domain"


class NumericError(EvtCvarError, ArithmeticError):
    """Quadrature failure or other numerical breakdown."""

    exit_code = 5
    kind = "numeric"


class DegenerateSampleError(NumericError):
    """Order-statistic spacings vanish or have the wrong sign."""

    kind = "degenerate"
