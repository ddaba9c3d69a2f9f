"""First-order limit functions, the limiting CVaR-process covariance, and the
asymptotic variances of the CVaR-based and classical Pickands estimators.

All functions are pure. Expressions of the form ``(y**-gamma - 1) / gamma`` are
evaluated through ``expm1`` so they stay accurate as ``gamma`` approaches zero;
the exact ``gamma == 0`` formulas are used only when ``gamma`` is exactly zero.
"""
from __future__ import annotations

import math

import numpy as np

from ._validation import (
    CVAR_LIMIT,
    VARIANCE_LIMIT,
    check_gamma,
    check_positive,
    check_spacing_pair,
)

__all__ = [
    "h_gamma",
    "h_tilde_gamma",
    "g_factor",
    "limit_variance",
    "cov_kernel",
    "covariance_matrix",
    "sigma2_quadratic",
    "cvar_pickands_av",
    "pickands_reference_av",
    "var_cov_kernel",
    "yun_av",
    "printed_sigma2",
    "printed_formula_discrepancy",
]

LOG2 = math.log(2.0)


def _scalar_or_array(x):
    return x.item() if isinstance(x, np.ndarray) and x.ndim == 0 else x


def h_gamma(y, gamma):
    """Limit function of the first-order condition on the tail quantile function.

    Returns ``(y**-gamma - 1) / gamma``, read as ``-log(y)`` when ``gamma == 0``.
    Accepts scalars or arrays for ``y``.
    """
    gamma = check_gamma(gamma)
    y = check_positive(y, "y")
    log_y = np.log(y)
    if gamma == 0.0:
        out = -log_y
    else:
        out = np.expm1(-gamma * log_y) / gamma
    return _scalar_or_array(out)


def h_tilde_gamma(y, gamma):
    """Limit function for the CVaR curve: ``(1/y) int_0^y h - int_0^1 h``.

    Closed form ``(y**-gamma - 1) / (gamma (1 - gamma))``; ``-log(y)`` at zero.
    """
    gamma = check_gamma(gamma, CVAR_LIMIT, "h_tilde_gamma")
    return _scalar_or_array(np.asarray(h_gamma(y, gamma)) / (1.0 - gamma))


def g_factor(u, v, gamma):
    """Limit of the denominator spacing, ``(v**-g - (uv)**-g) / (g (1 - g))``.

    Equals ``log(u)`` at ``gamma == 0``.
    """
    gamma = check_gamma(gamma, CVAR_LIMIT, "g_factor")
    u, v = check_spacing_pair(u, v)
    # v^-g - (uv)^-g = -v^-g * g * h_gamma(u)
    return -(v ** -gamma) * h_gamma(u, gamma) / (1.0 - gamma)


def limit_variance(t, gamma):
    """Variance of the limiting CVaR process at ``t``.

    ``2 t**(-2 gamma - 1) / ((1 - gamma)(1 - 2 gamma))``; ``2 / t`` at zero.
    """
    gamma = check_gamma(gamma, VARIANCE_LIMIT, "limit_variance")
    t = check_positive(t, "t")
    if gamma == 0.0:
        out = 2.0 / t
    else:
        out = 2.0 / ((1.0 - gamma) * (1.0 - 2.0 * gamma)) * t ** (-2.0 * gamma - 1.0)
    return _scalar_or_array(out)


def cov_kernel(t1, t2, gamma):
    """Covariance of the limiting CVaR process ``(1/t) int_0^t s**(-gamma-1) W(s) ds``.

    With ``a = min(t1, t2)`` and ``b = max(t1, t2)`` this is

        a**(-2 gamma) / (b (1 - gamma)) * (2 / (1 - 2 gamma) - h_gamma(b / a))

    which is algebraically the two-constant form with ``1/(g(1-g)(1-2g))``
    and ``1/(g(1-g))`` but has no ``1/gamma`` cancellation near zero.
    """
    gamma = check_gamma(gamma, VARIANCE_LIMIT, "cov_kernel")
    t1 = check_positive(t1, "t1")
    t2 = check_positive(t2, "t2")
    a = np.minimum(t1, t2)
    b = np.maximum(t1, t2)
    out = (
        a ** (-2.0 * gamma)
        / (b * (1.0 - gamma))
        * (2.0 / (1.0 - 2.0 * gamma) - np.asarray(h_gamma(b / a, gamma)))
    )
    return _scalar_or_array(out)


def covariance_matrix(points, gamma):
    """Matrix of ``cov_kernel`` over all pairs of ``points``."""
    pts = check_positive(np.asarray(points, dtype=float).ravel(), "points")
    return np.asarray(cov_kernel(pts[:, None], pts[None, :], gamma), dtype=float)


def _contrast(u, v, gamma):
    points = np.array([1.0, u, v, u * v])
    vg = v**gamma
    return points, np.array([1.0, -1.0, -vg, vg])


def sigma2_quadratic(u, v, gamma):
    """Variance of ``B(1) - B(u) - v**g (B(v) - B(uv))`` for the limit process.

    Computed as ``c' S c`` with ``c = (1, -1, -v**g, v**g)`` and ``S`` the
    covariance matrix over ``(1, u, v, uv)``.
    """
    gamma = check_gamma(gamma, VARIANCE_LIMIT, "sigma2_quadratic")
    u, v = check_spacing_pair(u, v)
    points, c = _contrast(u, v, gamma)
    return float(c @ covariance_matrix(points, gamma) @ c)


def cvar_pickands_av(gamma, u=2.0, v=2.0):
    """Asymptotic variance of ``sqrt(m) (gamma_hat - gamma)`` for the CVaR-based estimator.

    Parameters
    ----------
    gamma : float
        Extreme value index, must satisfy ``gamma < 1/2``.
    u, v : float
        Spacing parameters, positive and different from 1.

    Returns
    -------
    float
        ``sigma2 / (v**(2 gamma) log(v)**2 g(v, uv)**2)`` where ``sigma2`` is
        :func:`sigma2_quadratic`.
    """
    gamma = check_gamma(gamma, VARIANCE_LIMIT, "cvar_pickands_av")
    u, v = check_spacing_pair(u, v)
    s2 = sigma2_quadratic(u, v, gamma)
    g = g_factor(u, v, gamma)
    return float(s2 / (v ** (2.0 * gamma) * math.log(v) ** 2 * g**2))


def pickands_reference_av(gamma):
    """Asymptotic variance of the classical Pickands estimator (``u = v = 2``).

    ``gamma**2 (2**(2 gamma + 1) + 1) / (2 (2**gamma - 1) log 2)**2`` with the
    limit ``3 / (4 log(2)**4)`` at zero.
    """
    gamma = check_gamma(gamma)
    if gamma == 0.0:
        ratio = 1.0 / LOG2
    else:
        ratio = gamma / math.expm1(gamma * LOG2)
    return (2.0 ** (2.0 * gamma + 1.0) + 1.0) * (ratio / (2.0 * LOG2)) ** 2


def var_cov_kernel(t1, t2, gamma):
    """Covariance of the limiting VaR process ``t**(-gamma-1) W(t)``."""
    gamma = check_gamma(gamma)
    t1 = check_positive(t1, "t1")
    t2 = check_positive(t2, "t2")
    return _scalar_or_array((t1 * t2) ** (-gamma - 1.0) * np.minimum(t1, t2))


def yun_av(gamma, u=2.0, v=2.0):
    """Asymptotic variance of the generalized Pickands estimator for any ``(u, v)``.

    Same contrast as :func:`cvar_pickands_av` but over the VaR limit process,
    normalized by ``(v**-g - (uv)**-g) / g`` (``log u`` at zero). With
    ``u = v = 2`` it coincides with :func:`pickands_reference_av`.
    """
    gamma = check_gamma(gamma)
    u, v = check_spacing_pair(u, v)
    points, c = _contrast(u, v, gamma)
    cov = np.asarray(var_cov_kernel(points[:, None], points[None, :], gamma))
    g = -(v ** -gamma) * h_gamma(u, gamma)
    return float(c @ cov @ c) / (v ** (2.0 * gamma) * math.log(v) ** 2 * g**2)


def printed_sigma2(u, v, gamma):
    """The variance expression exactly as typeset, kept for comparison only.

    It differs from :func:`sigma2_quadratic` in the sign of the
    ``v**(2g) sigma(v, uv)`` term and, at ``gamma == 0``, by the missing
    factor 2 on the diagonal part.
    """
    gamma = check_gamma(gamma, VARIANCE_LIMIT, "printed_sigma2")
    u, v = check_spacing_pair(u, v)
    vg = v**gamma

    def s(a, b):
        return cov_kernel(a, b, gamma)

    cross = 2.0 * (
        -s(1.0, u)
        - vg * s(1.0, v)
        + vg * s(1.0, u * v)
        + vg * s(u, v)
        - vg * s(u, u * v)
        + vg**2 * s(v, u * v)
    )
    if gamma == 0.0:
        diag = (1.0 + 1.0 / u) * (1.0 + 1.0 / v)
    else:
        diag = (
            2.0
            / ((1.0 - gamma) * (1.0 - 2.0 * gamma))
            * (1.0 + 1.0 / v)
            * (1.0 + u ** (-2.0 * gamma - 1.0))
        )
    return diag + cross


def printed_formula_discrepancy(u, v, gamma):
    """Compare the typeset variance expression with the quadratic form.

    Returns a dict with both values, their asymptotic variances and the
    relative difference of the typeset value from the quadratic form.
    """
    q = sigma2_quadratic(u, v, gamma)
    p = printed_sigma2(u, v, gamma)
    scale = v ** (2.0 * gamma) * math.log(v) ** 2 * g_factor(u, v, gamma) ** 2
    return {
        "gamma": float(gamma),
        "u": float(u),
        "v": float(v),
        "sigma2_quadratic": q,
        "sigma2_printed": p,
        "av_quadratic": q / scale,
        "av_printed": p / scale,
        "relative_difference": (p - q) / q,
    }
