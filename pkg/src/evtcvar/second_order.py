"""Second-order regular variation: the limit functions H and H-tilde, the
asymptotic bias coefficient of the CVaR-based Pickands estimator, and
diagnostics for the intermediate-sequence condition.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from ._config import get_tolerances
from ._quadrature import _h, adaptive_quad
from ._validation import CVAR_LIMIT, check_gamma, check_positive, check_spacing_pair
from .asymptotics import h_tilde_gamma
from .exceptions import DomainError

__all__ = [
    "SecondOrderSpec",
    "ConditionWarning",
    "big_H",
    "big_H_tilde",
    "bias_b",
    "condition2_statistic",
    "remainder_R",
]


class ConditionWarning(UserWarning):
    """Experiment design violates (or nearly violates) an asymptotic condition."""


@dataclass(frozen=True)
class SecondOrderSpec:
    """Second-order parameters ``(rho, c1, c2)`` and the rate ``A(t) = coef * t**exponent``.

    ``a_exponent`` defaults to ``rho``. ``a_coef = 0`` describes a family for
    which the first-order relation is exact (e.g. the GPD).
    """

    rho: float
    c1: float = 1.0
    c2: float = 0.0
    a_coef: float = 0.0
    a_exponent: float | None = None

    def __post_init__(self):
        if not math.isfinite(self.rho) or self.rho > 0:
            raise DomainError(f"rho must be <= 0, got {self.rho}")
        if self.a_exponent is None:
            object.__setattr__(self, "a_exponent", float(self.rho))
        if self.a_coef != 0.0:
            if self.a_exponent > 0:
                raise DomainError("A(t) must tend to 0: exponent must be negative")
            if self.a_exponent == 0:
                warnings.warn(
                    "constant A(t) does not tend to 0 as t grows",
                    ConditionWarning,
                    stacklevel=2,
                )

    def A(self, t):
        if self.a_coef == 0.0:
            return 0.0
        return self.a_coef * t**self.a_exponent


def _phi2(z):
    # int_0^1 tau * exp(z tau) d tau
    if abs(z) <= 1.0:
        term, total, k = 0.5, 0.5, 0
        fact = 1.0
        while True:
            k += 1
            fact *= z / k
            term = fact / (k + 2)
            total += term
            if abs(term) < 1e-17 * abs(total):
                return total
    return (math.exp(z) * (z - 1.0) + 1.0) / (z * z)


def _H_parts(y, gamma, rho):
    """Return the two basis functions multiplying ``c1`` and ``c2``."""
    log_y = math.log(y)
    h_sum = _h(y, gamma + rho)
    if rho == 0.0:
        # int_y^1 s^(-gamma-1) (-log s) ds with s = exp(-x)
        part1 = log_y * log_y * _phi2(-gamma * log_y)
    else:
        part1 = (h_sum - _h(y, gamma)) / rho
    return part1, h_sum


def big_H(y, gamma, spec):
    """Second-order limit function for the tail quantile function.

    ``c1 int_y^1 s^(-g-1) int_s^1 w^(-rho-1) dw ds + c2 int_y^1 s^(-(rho+g)-1) ds``
    in closed form. The ``c1`` part is ``(h_{g+rho}(y) - h_g(y)) / rho`` for
    ``rho != 0`` and ``d h_g(y) / d g`` for ``rho == 0``.
    """
    gamma = check_gamma(gamma)
    y = float(check_positive(y, "y"))
    p1, p2 = _H_parts(y, gamma, spec.rho)
    return spec.c1 * p1 + spec.c2 * p2


def _tilde_from_integrals(y, f):
    # (1/y) int_0^y f - int_0^1 f, splitting the integration range at 1
    i01 = adaptive_quad(f, 0.0, 1.0)
    if y == 1.0:
        return 0.0
    if y < 1.0:
        return adaptive_quad(f, 0.0, y) / y - i01
    return (i01 + adaptive_quad(f, 1.0, y)) / y - i01


def _H_tilde_closed_parts(y, gamma, rho):
    g_sum = gamma + rho
    log_y = math.log(y)
    if rho == 0.0:
        dh = log_y * log_y * _phi2(-gamma * log_y)
        part1 = dh / (1.0 - gamma) + _h(y, gamma) / (1.0 - gamma) ** 2
    else:
        part1 = (_h(y, g_sum) / (1.0 - g_sum) - _h(y, gamma) / (1.0 - gamma)) / rho
    return part1, _h(y, g_sum) / (1.0 - g_sum)


def big_H_tilde(y, gamma, spec, method="quad"):
    """Second-order limit function for the CVaR curve, ``(1/y) int_0^y H - int_0^1 H``.

    ``method="quad"`` integrates :func:`big_H` adaptively (each of the two
    linear components separately); ``method="closed"`` uses the antiderivative
    form, which is exact for ``gamma < 1``.
    """
    gamma = check_gamma(gamma, CVAR_LIMIT, "big_H_tilde")
    y = float(check_positive(y, "y"))
    if y == 1.0:
        return 0.0
    if method == "closed":
        p1, p2 = _H_tilde_closed_parts(y, gamma, spec.rho)
        return spec.c1 * p1 + spec.c2 * p2
    if method != "quad":
        raise ValueError(f"unknown method {method!r}")
    total = 0.0
    if spec.c1 != 0.0:
        total += spec.c1 * _tilde_from_integrals(
            y, lambda x: _H_parts(x, gamma, spec.rho)[0]
        )
    if spec.c2 != 0.0:
        g_sum = gamma + spec.rho
        total += spec.c2 * _tilde_from_integrals(y, lambda x: _h(x, g_sum))
    return total


def bias_b(gamma, spec, u=2.0, v=2.0, method="quad"):
    """Coefficient of ``sqrt(m) A(n/m)`` in the bias of ``sqrt(m)(A_nm - v**gamma)``.

    ``g(1-g)/(1-u**-g) v**(2g) [Ht(uv) - Ht(v) - v**-g Ht(u)]``, which tends to
    ``(1/log u) [Ht(uv) - Ht(v) - Ht(u)]`` at ``gamma == 0``.
    """
    gamma = check_gamma(gamma, CVAR_LIMIT, "bias_b")
    u, v = check_spacing_pair(u, v)
    if spec.c1 == 0.0 and spec.c2 == 0.0:
        return 0.0
    # g (1 - g) / (1 - u^-g) == -(1 - g) / h_g(u)
    lead = -(1.0 - gamma) * v ** (2.0 * gamma) / _h(u, gamma)

    def Ht(y):
        return big_H_tilde(y, gamma, spec, method=method)

    return lead * (Ht(u * v) - Ht(v) - v ** (-gamma) * Ht(u))


def condition2_statistic(m, n, spec):
    """``sqrt(m) * A(n / m)``; should be small for the bias term to vanish."""
    m, n = int(m), int(n)
    if m < 1 or n < 1:
        raise DomainError("m and n must be positive")
    if m > n:
        raise DomainError(f"m={m} exceeds n={n}")
    stat = math.sqrt(m) * spec.A(n / m)
    if abs(stat) > get_tolerances().condition2_warn:
        warnings.warn(
            f"sqrt(m) A(n/m) = {stat:.4g} is large for m={m}, n={n}",
            ConditionWarning,
            stacklevel=2,
        )
    return stat


def remainder_R(t, y, model):
    """First-order remainder ``(V(y/t) - V(1/t)) / a(t) - h_tilde(y)`` for a tail model."""
    t = float(check_positive(t, "t"))
    y = float(check_positive(y, "y"))
    if t <= 1.0:
        raise DomainError(f"t must exceed 1, got {t}")
    if y / t > 1.0:
        raise DomainError(f"y/t must be at most 1, got {y / t}")
    gamma = check_gamma(model.gamma, CVAR_LIMIT, "remainder_R")
    if y == 1.0:
        return 0.0
    diff = model.cvar_curve_V(y / t) - model.cvar_curve_V(1.0 / t)
    return diff / model.scale_a(t) - h_tilde_gamma(y, gamma)
