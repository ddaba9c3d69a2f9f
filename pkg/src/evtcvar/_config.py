from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    quad_abstol: float = 1e-9
    quad_reltol: float = 1e-10
    quad_limit: int = 1_000_000
    identity_rtol: float = 1e-12
    # warn when sqrt(m) * A(n/m) exceeds this
    condition2_warn: float = 0.5
    # warn when the leading bias term exceeds this fraction of the asymptotic sd
    bias_warn_fraction: float = 0.10
    # flag a sweep cell when more than this fraction of replications is degenerate
    degenerate_flag_fraction: float = 0.01


_current = Tolerances()


def get_tolerances() -> Tolerances:
    return _current


def set_tolerances(**overrides) -> Tolerances:
    """Replace selected tolerance fields process-wide and return the new record."""
    global _current
    _current = replace(_current, **overrides)
    return _current
