"""Empirical CVaR processes and a discretized limit process.

Weak convergence of the normalized empirical CVaR process is checked at the
level of finite-dimensional covariances: the sample covariance of simulated
empirical paths, the sample covariance of a discretized limit process, and
the closed-form kernel should all agree on a grid of time points.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from ._validation import VARIANCE_LIMIT, check_gamma, integer_part
from .asymptotics import cov_kernel, limit_variance
from .distributions import smallest_exceedances, stream_id
from .exceptions import DomainError

__all__ = [
    "ProcessGrid",
    "ProcessPaths",
    "empirical_tilde_B",
    "simulate_limit_process",
    "empirical_cov",
    "truncation_epsilon",
    "three_way_covariance",
]

_BLOCK = 256


@dataclass(frozen=True)
class ProcessGrid:
    t_values: tuple

    def __post_init__(self):
        t = tuple(float(x) for x in self.t_values)
        if not t:
            raise DomainError("grid must not be empty")
        if any(x <= 0 or not math.isfinite(x) for x in t):
            raise DomainError("grid points must be positive and finite")
        if any(b <= a for a, b in zip(t, t[1:])):
            raise DomainError("grid points must be strictly increasing")
        object.__setattr__(self, "t_values", t)

    def orders(self, m, n):
        """Indices ``[m t]`` of the CVaR order statistics at each grid point."""
        ks = [integer_part(m * t) for t in self.t_values]
        if ks[0] < 1:
            raise DomainError(f"grid point t={self.t_values[0]} gives [m t] = 0")
        if m * self.t_values[-1] > n:
            raise DomainError(f"grid point t={self.t_values[-1]} exceeds n/m")
        return ks

    def __len__(self):
        return len(self.t_values)


@dataclass
class ProcessPaths:
    """Path values, one row per replication and one column per grid point."""

    values: np.ndarray = field(repr=False)
    grid: ProcessGrid
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2 or self.values.shape[1] != len(self.grid):
            raise DomainError("paths must be a (reps, grid size) matrix")


def empirical_tilde_B(model, n, m, grid, reps, seed, cell=0):
    """Simulate ``sqrt(m) (Y_[mt] - V(mt/n)) / a(n/m)`` on ``grid``.

    Each replication draws ``n`` exceedance uniforms from its own stream,
    keeps the smallest ``[m t_max]`` (the transform to ``model`` is
    decreasing, so these give the top order statistics), transforms only
    those and forms prefix means.
    """
    gamma = check_gamma(model.gamma, VARIANCE_LIMIT, "empirical_tilde_B")
    n, m, reps = int(n), int(m), int(reps)
    if reps < 1 or m < 1 or n < 1:
        raise DomainError("n, m and reps must be positive")
    ks = grid.orders(m, n)
    depth = ks[-1]
    centre = np.array([model.cvar_curve_V(k / n) for k in ks])
    scale = model.scale_a(n / m) / math.sqrt(m)
    out = np.empty((reps, len(ks)))
    cols = np.array(ks) - 1
    counts = np.array(ks, dtype=np.longdouble)
    for start in range(0, reps, _BLOCK):
        stop = min(start + _BLOCK, reps)
        q = smallest_exceedances(seed, [stream_id(cell, r) for r in range(start, stop)], n, depth)
        x = model._upper_quantile(q)
        ys = (np.cumsum(x.astype(np.longdouble), axis=1)[:, cols] / counts).astype(float)
        out[start:stop] = (ys - centre) / scale
    return ProcessPaths(
        out, grid, {"kind": "empirical", "family": model.family, "gamma": gamma,
                    "n": n, "m": m, "seed": int(seed)}
    )


def _truncated_variance(eps, t, gamma):
    # Var of (1/t) int_eps^t s^(-gamma-1) W(s) ds
    p = 1.0 - gamma
    q = 1.0 - 2.0 * gamma
    if gamma == 0.0:
        tail = eps * math.log(t / eps)
    else:
        tail = eps**p * (t ** (-gamma) - eps ** (-gamma)) / (-gamma)
    inner = (t**q - eps**q) / q
    return 2.0 / p * (inner - tail) / t**2


def truncation_epsilon(gamma, t_min, max_deficit=1e-3):
    """Lower cutoff ``eps`` such that dropping ``int_0^eps`` loses at most
    ``max_deficit`` of the limit variance at ``t_min``.

    The truncated variance has the closed form

        (2 / (t^2 (1-g))) [ (t^(1-2g) - eps^(1-2g)) / (1-2g)
                            - eps^(1-g) (t^-g - eps^-g) / (-g) ]

    (``eps log(t/eps)`` replaces the last term at ``g == 0``); the root is
    located in ``log eps`` by Brent's method.
    """
    gamma = check_gamma(gamma, VARIANCE_LIMIT, "truncation_epsilon")
    full = limit_variance(t_min, gamma)

    def deficit(log_eps):
        return 1.0 - _truncated_variance(math.exp(log_eps), t_min, gamma) / full - max_deficit

    lo, hi = math.log(t_min) - 200.0, math.log(t_min) - 1e-9
    if deficit(hi) <= 0:
        return math.exp(hi)
    return math.exp(optimize.brentq(deficit, lo, hi, xtol=1e-12))


def simulate_limit_process(gamma, grid, steps=4000, reps=10_000, seed=0, cell=0):
    """Simulate ``(1/t) int_0^t s^(-gamma-1) W(s) ds`` on ``grid``.

    Brownian motion is sampled exactly at geometrically spaced nodes on
    ``[eps, t_max]`` (``eps`` from :func:`truncation_epsilon`), with the grid
    points inserted as nodes, and the integral is the trapezoidal sum of
    ``s^(-gamma-1) W(s)`` over those nodes.
    """
    gamma = check_gamma(gamma, VARIANCE_LIMIT, "simulate_limit_process")
    steps, reps = int(steps), int(reps)
    if steps < 1000:
        raise DomainError("steps must be at least 1000")
    if reps < 1:
        raise DomainError("reps must be positive")
    t_vals = np.array(grid.t_values)
    eps = truncation_epsilon(gamma, t_vals[0])
    nodes = np.unique(np.concatenate([np.geomspace(eps, t_vals[-1], steps + 1), t_vals]))
    cols = np.searchsorted(nodes, t_vals)
    dt = np.diff(nodes)
    sd = np.sqrt(np.concatenate([[nodes[0]], dt]))
    weight = nodes ** (-gamma - 1.0)
    out = np.empty((reps, len(t_vals)))
    for start in range(0, reps, _BLOCK):
        stop = min(start + _BLOCK, reps)
        rows = []
        for r in range(start, stop):
            rng = np.random.Generator(
                np.random.Philox(key=np.array([int(seed), stream_id(cell, r)], dtype=np.uint64))
            )
            rows.append(rng.standard_normal(nodes.shape[0]))
        w = np.cumsum(np.stack(rows) * sd, axis=1)
        f = w * weight
        integral = np.concatenate(
            [np.zeros((stop - start, 1)), np.cumsum(0.5 * (f[:, 1:] + f[:, :-1]) * dt, axis=1)],
            axis=1,
        )
        out[start:stop] = integral[:, cols] / t_vals
    return ProcessPaths(
        out, grid, {"kind": "limit", "gamma": gamma, "steps": steps, "eps": eps,
                    "seed": int(seed)}
    )


def empirical_cov(paths):
    """Unbiased sample covariance across replications, exactly symmetric."""
    values = paths.values if isinstance(paths, ProcessPaths) else np.asarray(paths, float)
    if values.shape[0] < 2:
        raise DomainError("need at least two replications")
    # shifting by the first row first makes constant columns give exact zeros
    shifted = values - values[0]
    centred = shifted - shifted.mean(axis=0)
    cov = centred.T @ centred / (values.shape[0] - 1)
    return 0.5 * (cov + cov.T)


def three_way_covariance(model, n, m, grid, reps, seed, limit_reps=None, steps=4000):
    """Empirical, simulated-limit and closed-form covariances on ``grid``.

    Returns a list of row dicts, one per grid pair ``t1 <= t2``.
    """
    emp = empirical_cov(empirical_tilde_B(model, n, m, grid, reps, seed))
    lim = empirical_cov(
        simulate_limit_process(model.gamma, grid, steps, limit_reps or reps, seed, cell=1)
    )
    t = grid.t_values
    rows = []
    for i in range(len(t)):
        for j in range(i, len(t)):
            k = cov_kernel(t[i], t[j], model.gamma)
            rows.append({
                "gamma": model.gamma,
                "t1": t[i],
                "t2": t[j],
                "cov_kernel": float(k),
                "cov_empirical": float(emp[i, j]),
                "cov_limit": float(lim[i, j]),
                "relerr_empirical": float((emp[i, j] - k) / k),
                "relerr_limit": float((lim[i, j] - k) / k),
            })
    return rows
