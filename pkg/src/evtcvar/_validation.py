"""Input checks shared across modules."""
from __future__ import annotations

import math
import numbers

import numpy as np
from sklearn.utils.validation import check_array, column_or_1d

from .exceptions import DataError, DomainError

# CVaR exists for gamma < 1; the limiting CVaR process has finite variance for gamma < 1/2
CVAR_LIMIT = 1.0
VARIANCE_LIMIT = 0.5


def check_gamma(gamma, upper=None, what="operation"):
    """Return ``gamma`` as a float, enforcing ``gamma < upper`` when given."""
    if isinstance(gamma, bool) or not isinstance(gamma, numbers.Real):
        raise DomainError(f"gamma must be a real number, got {gamma!r}")
    gamma = float(gamma)
    if not math.isfinite(gamma):
        raise DomainError(f"gamma must be finite, got {gamma}")
    if upper is not None and gamma >= upper:
        raise DomainError(f"{what} requires gamma < {upper:g}, got {gamma:g}")
    return gamma


def check_positive(x, name):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise DomainError(f"{name} must be positive and finite")
    return arr


def check_spacing_pair(u, v):
    u, v = float(u), float(v)
    for name, val in (("u", u), ("v", v)):
        if not (val > 0 and math.isfinite(val)) or val == 1.0:
            raise DomainError(f"{name} must be positive and different from 1, got {val:g}")
    return u, v


def integer_part(x):
    """Integer part of a positive real; absorbs representation error such as 0.29 * 100."""
    r = round(x)
    if abs(x - r) <= 1e-9 * max(1.0, abs(x)):
        return int(r)
    return math.floor(x)


def check_sample(sample):
    """Validate a one-dimensional finite sample and return it as a float64 array."""
    try:
        arr = check_array(
            sample, ensure_2d=False, dtype=np.float64, ensure_all_finite=False
        )
        arr = column_or_1d(arr)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    if np.isnan(arr).any():
        raise DataError("sample contains NaN")
    if not np.isfinite(arr).all():
        raise DataError("sample contains infinite values")
    return arr
