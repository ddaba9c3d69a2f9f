from __future__ import annotations

import math

from scipy import integrate

from ._config import get_tolerances
from .exceptions import NumericError


def _h(y, gamma):
    # scalar h_gamma without validation, for use inside integrands
    if gamma == 0.0:
        return -math.log(y)
    return math.expm1(-gamma * math.log(y)) / gamma


def adaptive_quad(f, a, b, points=None):
    """Integrate ``f`` over ``[a, b]`` with QUADPACK; raise instead of returning junk.

    Endpoint singularities are left to the extrapolation in QAGS, so the
    integrand is never evaluated at ``a`` or ``b`` themselves.
    """
    tol = get_tolerances()
    res = integrate.quad(
        f,
        a,
        b,
        epsabs=tol.quad_abstol * 1e-3,
        epsrel=tol.quad_reltol,
        limit=tol.quad_limit,
        points=points,
        full_output=1,
    )
    value, abserr = res[0], res[1]
    if len(res) > 3 and abserr > tol.quad_abstol:
        raise NumericError(f"quadrature did not converge on [{a}, {b}]: {res[3]}")
    if not math.isfinite(value):
        raise NumericError(f"quadrature returned non-finite value on [{a}, {b}]")
    return value
