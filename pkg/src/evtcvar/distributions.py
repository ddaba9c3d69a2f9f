"""Canonical GEV and GPD tail models and reproducible inverse-transform sampling.

Random streams come from the Philox counter-based generator keyed by the pair
``(seed, stream)``. Draw ``i`` of a stream depends only on that key and ``i``,
so any partition of the work across processes reproduces the same values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from ._quadrature import _h, adaptive_quad
from ._validation import CVAR_LIMIT, check_gamma
from .exceptions import DomainError

__all__ = [
    "TailModel",
    "SampleBatch",
    "stream_id",
    "exceedance_uniforms",
    "smallest_exceedances",
    "sample",
]

FAMILIES = ("gev", "gpd")
_U64 = (1 << 64) - 1


def stream_id(cell, rep):
    """Stream key for replication ``rep`` of experiment cell ``cell``: ``cell * 2**32 + rep``."""
    cell, rep = int(cell), int(rep)
    if not (0 <= cell < 2**32 and 0 <= rep < 2**32):
        raise DomainError("cell and rep must lie in [0, 2**32)")
    return (cell << 32) | rep


def _check_seed(seed):
    seed = int(seed)
    if not 0 <= seed <= _U64:
        raise DomainError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def exceedance_uniforms(seed, stream, n):
    """``n`` uniforms on the open interval (0, 1) from the Philox stream ``(seed, stream)``.

    Each 64-bit output keeps its top 53 bits and is centred in its cell,
    ``(k + 0.5) / 2**53``, so neither endpoint can occur.
    """
    bitgen = np.random.Philox(key=np.array([_check_seed(seed), int(stream) & _U64], dtype=np.uint64))
    raw = bitgen.random_raw(int(n))
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def smallest_exceedances(seed, streams, n, depth):
    """The ``depth`` smallest of ``n`` uniforms for each stream, ascending.

    Returns an array of shape ``(len(streams), depth)``. Because every upper
    quantile transform is decreasing, these map to the top order statistics.
    """
    out = np.empty((len(streams), depth))
    for i, stream in enumerate(streams):
        q = exceedance_uniforms(seed, stream, n)
        if depth < n:
            q = np.partition(q, depth - 1)[:depth]
        out[i] = np.sort(q)
    return out


@dataclass(frozen=True)
class TailModel:
    """GEV or GPD with location 0, scale 1 and extreme value index ``gamma``."""

    family: str
    gamma: float

    def __post_init__(self):
        fam = str(self.family).lower()
        if fam not in FAMILIES:
            raise DomainError(f"family must be one of {FAMILIES}, got {self.family!r}")
        object.__setattr__(self, "family", fam)
        object.__setattr__(self, "gamma", check_gamma(self.gamma))

    def upper_quantile(self, q):
        """``F^{-1}(1 - q)``, accurate for small exceedance probabilities ``q``."""
        q = np.asarray(q, dtype=float)
        if np.any((q <= 0) | (q >= 1)):
            raise DomainError("exceedance probability must lie in (0, 1)")
        return self._upper_quantile(q)

    def _upper_quantile(self, q):
        # no validation; q is assumed to lie in (0, 1)
        g = self.gamma
        w = q if self.family == "gpd" else -np.log1p(-q)
        if g == 0.0:
            return -np.log(w)
        return np.expm1(-g * np.log(w)) / g

    def quantile(self, p):
        """Quantile function; monotone nondecreasing in ``p``."""
        p = np.asarray(p, dtype=float)
        if np.any((p <= 0) | (p >= 1)):
            raise DomainError("p must lie in (0, 1)")
        g = self.gamma
        w = 1.0 - p if self.family == "gpd" else -np.log(p)
        out = -np.log(w) if g == 0.0 else np.expm1(-g * np.log(w)) / g
        return out.item() if out.ndim == 0 else out

    def tail_quantile_U(self, t):
        """``U(t) = F^{-1}(1 - 1/t)`` for ``t > 1``."""
        t = np.asarray(t, dtype=float)
        if np.any(t <= 1):
            raise DomainError("t must exceed 1")
        out = self._upper_quantile(1.0 / t)
        return out.item() if out.ndim == 0 else out

    def scale_a(self, t):
        """Auxiliary scale ``a(t) = t U'(t)``, regularly varying with index gamma."""
        t = np.asarray(t, dtype=float)
        if np.any(t <= 1):
            raise DomainError("t must exceed 1")
        g = self.gamma
        if self.family == "gpd":
            out = t**g
        else:
            lam = -np.log1p(-1.0 / t)
            out = lam ** (-g - 1.0) / (t - 1.0)
        return out.item() if out.ndim == 0 else out

    def cvar_curve_V(self, x):
        """Population CVaR curve ``V(x) = (1/x) int_0^x F^{-1}(1 - s) ds`` for ``0 < x <= 1``.

        Closed form for the GPD. For the GEV the integral is taken in the
        variable ``w = -log(1 - s)``, where it reads ``int_0^W h_gamma(w) e^-w dw``
        with the integrable singularity ``w**-gamma`` at 0.
        """
        g = check_gamma(self.gamma, CVAR_LIMIT, "cvar_curve_V")
        x = float(x)
        if not 0.0 < x <= 1.0:
            raise DomainError(f"x must lie in (0, 1], got {x}")
        if self.family == "gpd":
            return (_h(x, g) + 1.0) / (1.0 - g)
        upper = math.inf if x == 1.0 else -math.log1p(-x)

        def f(w):
            return _h(w, g) * math.exp(-w)

        if upper <= 1.0:
            total = adaptive_quad(f, 0.0, upper)
        else:
            total = adaptive_quad(f, 0.0, 1.0) + adaptive_quad(f, 1.0, upper)
        return total / x

    def gev_cvar_closed(self, x):
        """GEV ``V(x)`` through the regularized incomplete gamma function (``gamma != 0``)."""
        g = check_gamma(self.gamma, CVAR_LIMIT, "gev_cvar_closed")
        if self.family != "gev" or g == 0.0:
            raise DomainError("closed form available only for the GEV with gamma != 0")
        upper = math.inf if x == 1.0 else -math.log1p(-x)
        inc = special.gamma(1.0 - g) * (1.0 if math.isinf(upper) else special.gammainc(1.0 - g, upper))
        return (inc - x) / (g * x)

    def sample(self, n, seed, stream=0):
        return sample(self, n, seed, stream)


@dataclass(frozen=True)
class SampleBatch:
    values: np.ndarray = field(repr=False)
    seed: int
    stream: int
    family: str
    gamma: float

    def __len__(self):
        return len(self.values)


def sample(model, n, seed, stream=0):
    """Draw ``n`` values from ``model`` by inverse transform of a Philox stream.

    The same ``(model, n, seed, stream)`` always yields bit-identical values.
    """
    n = int(n)
    if n < 1:
        raise DomainError("n must be positive")
    q = exceedance_uniforms(seed, stream, n)
    return SampleBatch(
        values=model._upper_quantile(q),
        seed=int(seed),
        stream=int(stream),
        family=model.family,
        gamma=model.gamma,
    )
