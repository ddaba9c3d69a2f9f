"""Order statistics, CVaR order statistics and spacing-ratio estimators of the
extreme value index.

The functional API (``pickands_estimate``, ``yun_estimate``,
``cvar_pickands_estimate``) works on raw samples. The ``*_from_order_stats``
functions operate on already-sorted descending statistics along the last axis
and are vectorized over leading axes, which is how the Monte Carlo harness
evaluates thousands of replications at once. The estimator classes wrap the
functional API in the scikit-learn estimator protocol.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import VARIANCE_LIMIT, check_sample, check_spacing_pair, integer_part
from .asymptotics import cvar_pickands_av, pickands_reference_av
from .exceptions import DegenerateSampleError, DomainError

__all__ = [
    "SpacingSpec",
    "top_k_descending",
    "cvar_order_stats",
    "yun_from_order_stats",
    "cvar_pickands_from_order_stats",
    "cvar_pickands_from_cvar_stats",
    "yun_estimate",
    "pickands_estimate",
    "cvar_pickands_estimate",
    "PickandsEstimator",
    "YunEstimator",
    "CVaRPickandsEstimator",
]


@dataclass(frozen=True)
class SpacingSpec:
    """Spacing pair ``(u, v)`` and intermediate order ``m``."""

    u: float = 2.0
    v: float = 2.0
    m: int = 1

    def __post_init__(self):
        u, v = check_spacing_pair(self.u, self.v)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)
        if isinstance(self.m, bool) or int(self.m) != self.m or self.m < 1:
            raise DomainError(f"m must be a positive integer, got {self.m!r}")
        object.__setattr__(self, "m", int(self.m))

    @property
    def indices(self):
        """1-based indices ``(m, [um], [vm], [uvm])`` with ``[x]`` the integer part."""
        m, u, v = self.m, self.u, self.v
        return (m, integer_part(u * m), integer_part(v * m), integer_part(u * v * m))

    @property
    def depth(self):
        """Number of top order statistics the estimators read."""
        return max(self.indices)

    def check(self, n):
        idx = self.indices
        if min(idx) < 1 or max(idx) > n:
            raise DomainError(
                f"indices (m, [um], [vm], [uvm]) = {idx} must lie in [1, {n}]"
            )
        return idx


def top_k_descending(sample, k):
    """The ``k`` largest values of ``sample`` in nonincreasing order.

    Uses partial selection, so the cost is ``O(n + k log k)``.
    """
    x = check_sample(sample)
    n = x.shape[0]
    k = int(k)
    if not 1 <= k <= n:
        raise DomainError(f"k must lie in [1, {n}], got {k}")
    if k == n:
        top = np.sort(x)
    else:
        top = np.partition(x, n - k)[n - k:]
        top.sort()
    return top[::-1].copy()


def _prefix_sums(desc):
    # extended precision keeps prefix means accurate when magnitudes spread
    return np.cumsum(np.asarray(desc, dtype=np.longdouble), axis=-1)


def cvar_order_stats(desc):
    """CVaR order statistics ``Y_k = (1/k) sum_{i<=k} X_i`` of descending values."""
    desc = np.asarray(desc, dtype=float)
    if desc.shape[-1] == 0:
        raise DomainError("need at least one order statistic")
    k = np.arange(1, desc.shape[-1] + 1, dtype=np.longdouble)
    return (_prefix_sums(desc) / k).astype(np.float64)


def _log_ratio(top, idx, v):
    # top: (..., k) descending statistics; idx: 1-based indices
    i1, i2, i3, i4 = (i - 1 for i in idx)
    num = top[..., i1] - top[..., i2]
    den = top[..., i3] - top[..., i4]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.asarray(num / den, dtype=np.float64)
        degenerate = ~(np.isfinite(ratio) & (ratio > 0))
        est = np.log(np.where(degenerate, 1.0, ratio)) / math.log(v)
    est = np.where(degenerate, np.nan, est)
    return est, degenerate


def _check_depth(top, spec):
    idx = spec.indices
    if min(idx) < 1 or max(idx) > top.shape[-1]:
        raise DomainError(
            f"indices {idx} need {max(idx)} order statistics, got {top.shape[-1]}"
        )
    return idx


def yun_from_order_stats(desc, spec):
    """Generalized Pickands estimate from descending order statistics.

    Returns ``(estimate, degenerate)`` arrays over the leading axes;
    degenerate entries hold NaN.
    """
    desc = np.asarray(desc, dtype=float)
    return _log_ratio(desc, _check_depth(desc, spec), spec.v)


def cvar_pickands_from_cvar_stats(cvar_stats, spec):
    """CVaR-based estimate from CVaR order statistics ``Y_1 >= Y_2 >= ...``."""
    cvar_stats = np.asarray(cvar_stats)
    return _log_ratio(cvar_stats, _check_depth(cvar_stats, spec), spec.v)


def cvar_pickands_from_order_stats(desc, spec):
    """CVaR-based estimate from descending order statistics (vectorized)."""
    desc = np.asarray(desc, dtype=float)
    idx = _check_depth(desc, spec)
    depth = max(idx)
    sums = _prefix_sums(desc[..., :depth])
    # only the four CVaR order statistics involved are formed, in extended precision
    pos = np.array(idx) - 1
    ys = sums[..., pos] / np.array(idx, dtype=np.longdouble)
    return _log_ratio(ys, (1, 2, 3, 4), spec.v)


def _scalar(est, degenerate):
    if bool(degenerate):
        raise DegenerateSampleError(
            "spacings of the order statistics vanish or have inconsistent signs"
        )
    return float(est)


def _spec(u, v, m):
    return m if isinstance(m, SpacingSpec) else SpacingSpec(u=u, v=v, m=m)


def yun_estimate(sample, m, u=2.0, v=2.0):
    """Generalized Pickands estimator

        log((X_m - X_[um]) / (X_[vm] - X_[uvm])) / log(v)

    on descending order statistics ``X_1 >= X_2 >= ...`` of ``sample``.
    ``m`` may also be a :class:`SpacingSpec`, in which case ``u`` and ``v``
    are ignored.
    """
    spec = _spec(u, v, m)
    x = check_sample(sample)
    spec.check(x.shape[0])
    top = top_k_descending(x, spec.depth)
    return _scalar(*yun_from_order_stats(top, spec))


def pickands_estimate(sample, m):
    """Classical Pickands estimator, i.e. :func:`yun_estimate` with ``u = v = 2``."""
    return yun_estimate(sample, m, 2.0, 2.0)


def cvar_pickands_estimate(sample, m, u=2.0, v=2.0):
    """CVaR-based Pickands estimator

        log((Y_m - Y_[um]) / (Y_[vm] - Y_[uvm])) / log(v)

    where ``Y_k`` is the mean of the ``k`` largest observations. Only the top
    ``max(m, [um], [vm], [uvm])`` values are selected and summed.
    """
    spec = _spec(u, v, m)
    x = check_sample(sample)
    spec.check(x.shape[0])
    top = top_k_descending(x, spec.depth)
    return _scalar(*cvar_pickands_from_order_stats(top, spec))


class _SpacingEstimator(BaseEstimator):
    def _fit_estimate(self, X):
        raise NotImplementedError

    def fit(self, X, y=None):
        """Estimate the extreme value index from the one-dimensional sample ``X``."""
        x = check_sample(X)
        self.n_samples_ = x.shape[0]
        self.gamma_ = self._fit_estimate(x)
        return self


class PickandsEstimator(_SpacingEstimator):
    """Classical Pickands estimator of the extreme value index.

    Parameters
    ----------
    m : int
        Intermediate order; requires ``4 m <= n``.

    Attributes
    ----------
    gamma_ : float
    n_samples_ : int
    asymptotic_variance_ : float
        Variance of ``sqrt(m) (gamma_hat - gamma)`` evaluated at ``gamma_``.
    """

    def __init__(self, m=100):
        self.m = m

    def _fit_estimate(self, x):
        est = pickands_estimate(x, self.m)
        self.asymptotic_variance_ = pickands_reference_av(est)
        return est


class YunEstimator(_SpacingEstimator):
    """Generalized Pickands estimator with spacing parameters ``u`` and ``v``."""

    def __init__(self, m=100, u=2.0, v=2.0):
        self.m = m
        self.u = u
        self.v = v

    def _fit_estimate(self, x):
        return yun_estimate(x, self.m, self.u, self.v)


class CVaRPickandsEstimator(_SpacingEstimator):
    """CVaR-based Pickands estimator of the extreme value index.

    Parameters
    ----------
    m : int
        Intermediate order.
    u, v : float
        Spacing parameters, positive and different from 1.
    confidence : float or None
        When given and the estimate is below 1/2, a plug-in Wald interval
        at this level is stored in ``confidence_interval_``.

    Attributes
    ----------
    gamma_ : float
    n_samples_ : int
    asymptotic_variance_ : float or None
        Plug-in asymptotic variance of ``sqrt(m) (gamma_hat - gamma)``;
        None when ``gamma_ >= 1/2`` (the variance is infinite there).
    confidence_interval_ : tuple of float or None
    """

    def __init__(self, m=100, u=2.0, v=2.0, confidence=None):
        self.m = m
        self.u = u
        self.v = v
        self.confidence = confidence

    def _fit_estimate(self, x):
        est = cvar_pickands_estimate(x, self.m, self.u, self.v)
        self.asymptotic_variance_ = None
        self.confidence_interval_ = None
        if est < VARIANCE_LIMIT:
            self.asymptotic_variance_ = cvar_pickands_av(est, self.u, self.v)
            if self.confidence is not None:
                self.confidence_interval_ = wald_interval(
                    est, self.asymptotic_variance_, self.m, self.confidence
                )
        return est

    def standard_error(self):
        check_is_fitted(self, "gamma_")
        if self.asymptotic_variance_ is None:
            return math.inf
        return math.sqrt(self.asymptotic_variance_ / self.m)


def wald_interval(estimate, asymptotic_variance, m, confidence):
    if not 0.0 < confidence < 1.0:
        raise DomainError(f"confidence must lie in (0, 1), got {confidence}")
    z = stats.norm.ppf(0.5 + confidence / 2.0)
    half = z * math.sqrt(asymptotic_variance / m)
    return (float(estimate - half), float(estimate + half))
