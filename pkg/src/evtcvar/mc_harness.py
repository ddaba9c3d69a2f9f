"""Deterministic Monte Carlo sweeps comparing the CVaR-based and classical
Pickands estimators over a grid of extreme value indices.

Replication ``r`` draws its exceedance uniforms from the Philox stream
``(master_seed, stream_id(cell, r))``. With common random numbers (the
default) every gamma cell uses ``cell = 0``, so all cells and both families
see the same uniforms and differ only through the quantile transform; both
estimators always read the same transformed batch. Only the smallest
``depth`` uniforms of each replication are kept, because the transform to
the upper tail is decreasing and the estimators read nothing else. Work is
split into blocks of replications so memory stays bounded for large ``n``.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from ._config import get_tolerances
from ._validation import VARIANCE_LIMIT, check_gamma
from .asymptotics import cvar_pickands_av, pickands_reference_av, yun_av
from .distributions import FAMILIES, TailModel, smallest_exceedances, stream_id
from .estimators import SpacingSpec, cvar_pickands_from_order_stats, yun_from_order_stats
from .exceptions import ConfigError, EvtCvarError
from .second_order import ConditionWarning, bias_b, condition2_statistic

__all__ = [
    "SCHEMA",
    "SweepConfig",
    "SweepRow",
    "SweepResult",
    "default_gamma_grid",
    "run_sweep",
    "sweep_condition_report",
    "resolve_workers",
]

log = logging.getLogger(__name__)

SCHEMA = "evtcvar.v1"
CSV_COLUMNS = (
    "gamma",
    "av_cvar",
    "av_pickands",
    "ratio_asym",
    "var_sim_cvar",
    "var_sim_pickands",
    "ratio_sim",
    "degenerate_cvar",
    "degenerate_pickands",
    "stderr_cvar",
    "stderr_pickands",
)
_BLOCK = 250


def default_gamma_grid():
    """-1.00, -0.95, ..., 0.45."""
    return tuple(round(-1.0 + 0.05 * i, 2) for i in range(30))


def resolve_workers(workers):
    env = os.environ.get("EVTCVAR_WORKERS")
    if env:
        workers = env
    if workers in (None, "auto"):
        return os.cpu_count() or 1
    try:
        workers = int(workers)
    except (TypeError, ValueError):
        raise ConfigError(f"workers must be a positive integer or 'auto', got {workers!r}")
    if workers < 1:
        raise ConfigError("workers must be positive")
    return workers


@dataclass(frozen=True)
class SweepConfig:
    gamma_grid: tuple = field(default_factory=default_gamma_grid)
    family: str = "gpd"
    n: int = 10_000
    m: int = 100
    u: float = 2.0
    v: float = 2.0
    reps: int = 10_000
    master_seed: int = 20240501
    workers: object = 1
    common_random_numbers: bool = True
    keep_estimates: bool = False

    def __post_init__(self):
        grid = tuple(float(g) for g in self.gamma_grid)
        object.__setattr__(self, "gamma_grid", grid)
        if self.family.lower() not in FAMILIES:
            raise ConfigError(f"family must be one of {FAMILIES}")
        object.__setattr__(self, "family", self.family.lower())
        for g in grid:
            try:
                check_gamma(g, VARIANCE_LIMIT, "a sweep cell")
            except EvtCvarError as exc:
                raise ConfigError(str(exc)) from exc
        if self.reps < 2:
            raise ConfigError("reps must be at least 2")
        if not 0 <= int(self.master_seed) < 2**64:
            raise ConfigError("master_seed must be a 64-bit unsigned integer")
        try:
            self.spacing.check(self.n)
        except EvtCvarError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def spacing(self):
        return SpacingSpec(self.u, self.v, self.m)

    def to_dict(self):
        d = asdict(self)
        d["gamma_grid"] = list(self.gamma_grid)
        return d

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown sweep config keys: {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True)
class SweepRow:
    gamma: float
    av_cvar: float
    av_pickands: float
    ratio_asym: float
    var_sim_cvar: float
    var_sim_pickands: float
    ratio_sim: float
    degenerate_cvar: int
    degenerate_pickands: int
    stderr_cvar: float
    stderr_pickands: float


@dataclass
class SweepResult:
    config: SweepConfig
    rows: list
    flagged: list = field(default_factory=list)
    checksums: dict = field(default_factory=dict)
    estimates: dict = field(default_factory=dict)

    def row(self, gamma):
        for r in self.rows:
            if math.isclose(r.gamma, gamma, abs_tol=1e-12):
                return r
        raise KeyError(gamma)

    def to_csv(self, fh=None):
        """Write the CSV (schema header comment first); return the text when ``fh`` is None."""
        buf = io.StringIO() if fh is None else fh
        write_sweep_csv(self.rows, buf)
        if fh is None:
            return buf.getvalue()
        return None

    def sidecar(self):
        return {
            "schema": SCHEMA,
            "config": self.config.to_dict(),
            "flagged_gammas": self.flagged,
            "batch_checksums": self.checksums,
        }


def _fmt(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def write_sweep_csv(rows, fh):
    fh.write(f"# schema={SCHEMA}\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])


def top_exceedances(seed, cell, reps, n, depth):
    """Smallest ``depth`` uniforms of each replication of ``cell``, shape ``(reps, depth)``."""
    return smallest_exceedances(seed, [stream_id(cell, r) for r in range(reps)], n, depth)


def _sweep_block(args):
    """Estimates for replications ``start:stop`` of every gamma cell.

    Returns one ``(est_cvar, deg_cvar, est_pickands, deg_pickands, digest)``
    tuple per cell; ``digest`` is the SHA-256 of the transformed batch.
    """
    seed, family, gammas, crn, start, stop, n, spec = args
    shared = None
    out = []
    for cell_index, gamma in enumerate(gammas):
        cell = 0 if crn else cell_index + 1
        if crn and shared is not None:
            q = shared
        else:
            q = smallest_exceedances(
                seed, [stream_id(cell, r) for r in range(start, stop)], n, spec.depth
            )
            if crn:
                shared = q
        x = TailModel(family, gamma)._upper_quantile(q)
        digest = hashlib.sha256(np.ascontiguousarray(x).tobytes()).digest()
        # both estimators read the same transformed batch
        est_c, deg_c = cvar_pickands_from_order_stats(x, spec)
        est_p, deg_p = yun_from_order_stats(x, spec)
        out.append((est_c, deg_c, est_p, deg_p, digest))
    return out


def _m_scaled_variance(est, degenerate, m):
    good = est[~degenerate]
    k = good.shape[0]
    if k < 2:
        return math.nan, math.nan
    var = m * float(np.var(good, ddof=1))
    # sd of a normal-theory sample variance: s^2 sqrt(2 / (k - 1))
    return var, var * math.sqrt(2.0 / (k - 1))


def _asymptotic_pair(gamma, u, v):
    av_c = cvar_pickands_av(gamma, u, v)
    av_p = pickands_reference_av(gamma) if u == v == 2.0 else yun_av(gamma, u, v)
    return av_c, av_p


def run_sweep(config):
    """Run the sweep described by ``config`` and return a :class:`SweepResult`.

    Replications are processed in fixed blocks of 250, optionally across
    worker processes; results are assembled in block order, so the output
    does not depend on the worker count.
    """
    spec = config.spacing
    workers = resolve_workers(config.workers)
    tol = get_tolerances()
    gammas = config.gamma_grid
    tasks = [
        (config.master_seed, config.family, gammas, config.common_random_numbers,
         s, min(s + _BLOCK, config.reps), config.n, spec)
        for s in range(0, config.reps, _BLOCK)
    ]
    if workers <= 1 or len(tasks) == 1:
        blocks = [_sweep_block(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(_sweep_block, tasks))

    rows, flagged, checksums, estimates = [], [], {}, {}
    for cell_index, gamma in enumerate(gammas):
        parts = [b[cell_index] for b in blocks]
        est_c, deg_c, est_p, deg_p = (np.concatenate([p[i] for p in parts]) for i in range(4))
        digest = hashlib.sha256(b"".join(p[4] for p in parts)).hexdigest()[:16]
        checksums[repr(gamma)] = digest
        log.debug("cell gamma=%r batch=%s shared by both estimators", gamma, digest)

        var_c, se_c = _m_scaled_variance(est_c, deg_c, config.m)
        var_p, se_p = _m_scaled_variance(est_p, deg_p, config.m)
        av_c, av_p = _asymptotic_pair(gamma, config.u, config.v)
        n_deg_c, n_deg_p = int(deg_c.sum()), int(deg_p.sum())
        if max(n_deg_c, n_deg_p) > tol.degenerate_flag_fraction * config.reps:
            flagged.append(gamma)
            warnings.warn(
                f"gamma={gamma}: {n_deg_c} (cvar) / {n_deg_p} (pickands) degenerate replications",
                RuntimeWarning,
                stacklevel=2,
            )
        if config.keep_estimates:
            estimates[gamma] = {"cvar": est_c, "pickands": est_p}
        rows.append(
            SweepRow(
                gamma=gamma,
                av_cvar=av_c,
                av_pickands=av_p,
                ratio_asym=av_c / av_p,
                var_sim_cvar=var_c,
                var_sim_pickands=var_p,
                ratio_sim=var_c / var_p,
                degenerate_cvar=n_deg_c,
                degenerate_pickands=n_deg_p,
                stderr_cvar=se_c,
                stderr_pickands=se_p,
            )
        )
    rows.sort(key=lambda r: r.gamma)
    return SweepResult(config, rows, flagged, checksums, estimates)


def sweep_condition_report(config, second_order):
    """Per-gamma bias diagnostics for the sweep design.

    Reports ``sqrt(m) A(n/m)``, the bias coefficient ``b(u, v, gamma, rho)``
    and the leading bias of ``sqrt(m)(gamma_hat - gamma)``,
    ``b sqrt(m) A(n/m) / (v**gamma log v)``, next to the asymptotic standard
    deviation. A :class:`ConditionWarning` is issued for each gamma whose
    bias exceeds the configured fraction of that standard deviation.
    """
    tol = get_tolerances()
    stat = condition2_statistic(config.m, config.n, second_order)
    out = []
    for gamma in config.gamma_grid:
        b = bias_b(gamma, second_order, config.u, config.v) if stat != 0.0 else 0.0
        bias = b * stat / (config.v**gamma * math.log(config.v))
        sd = math.sqrt(cvar_pickands_av(gamma, config.u, config.v))
        warn = abs(bias) > tol.bias_warn_fraction * sd
        if warn:
            warnings.warn(
                f"gamma={gamma}: leading bias {bias:.4g} exceeds "
                f"{tol.bias_warn_fraction:g} x asymptotic sd {sd:.4g}",
                ConditionWarning,
                stacklevel=2,
            )
        out.append({
            "gamma": gamma,
            "condition2": stat,
            "bias_coefficient": b,
            "bias_bound": abs(bias),
            "asymptotic_sd": sd,
            "warning": warn,
        })
    return out


def write_sidecar(result, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(result.sidecar(), fh, indent=2, sort_keys=True)
        fh.write("\n")
