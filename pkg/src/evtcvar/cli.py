"""Command-line interface.

    evtcvar estimate DATA --estimator cvar --m 100 [--confidence 0.95]
    evtcvar asympvar --gammas=-1,-0.5,0,0.25 [--u 2 --v 2]
    evtcvar mc-sweep --family gev --reps 10000 --out sweep.csv [--sidecar sweep.json]
    evtcvar process-check --gamma 0 --n 100000 --m 100 --grid 0.5,1,2,4
    evtcvar sample --family gpd --gamma 0.25 --n 10000 --seed 7 [--stream 0]
    evtcvar plot sweep.csv sweep.svg

Every command accepts ``--config FILE.json``; flags given on the command line
override values from the file. Errors print one line on stderr,
``evtcvar: error kind=<kind> code=<exit code> message=<json string>``.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys

from . import __version__
from ._config import set_tolerances
from ._validation import VARIANCE_LIMIT
from .asymptotics import cvar_pickands_av, pickands_reference_av, yun_av
from .distributions import TailModel, sample
from .estimators import cvar_pickands_estimate, wald_interval, yun_estimate
from .exceptions import ConfigError, DataError, EvtCvarError
from .mc_harness import SCHEMA, SweepConfig, run_sweep, write_sidecar
from .plotting import plot_sweep
from .process_lab import ProcessGrid, three_way_covariance

DEFAULTS = {
    "estimate": {"estimator": "cvar", "m": None, "u": 2.0, "v": 2.0, "confidence": None},
    "asympvar": {"gammas": None, "u": 2.0, "v": 2.0, "out": None},
    "mc-sweep": {
        "family": "gpd", "n": 10_000, "m": 100, "u": 2.0, "v": 2.0, "reps": 10_000,
        "seed": 20240501, "workers": 1, "gammas": None, "independent_cells": False,
        "out": None, "sidecar": None,
    },
    "process-check": {
        "family": "gpd", "gamma": 0.0, "n": 100_000, "m": 100, "grid": "0.5,1,2,4",
        "reps": 2000, "limit_reps": 10_000, "steps": 4000, "seed": 1, "out": None,
        "sidecar": None,
    },
    "sample": {"family": "gpd", "gamma": 0.0, "n": 10_000, "seed": 0, "stream": 0, "out": None},
    "plot": {"title": None},
}


def read_values(path):
    """Read one decimal value per line; blank lines and ``#`` comments are skipped."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    values = []
    for lineno, line in enumerate(lines, start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        try:
            val = float(text)
        except ValueError:
            raise DataError(f"{path}:{lineno}: not a number: {text!r}") from None
        if not math.isfinite(val):
            raise DataError(f"{path}:{lineno}: non-finite value {text!r}")
        values.append(val)
    if not values:
        raise DataError(f"{path}: no values")
    return values


def _parse_floats(text):
    if text is None:
        return None
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    text = str(text).strip()
    if not text:
        return []
    try:
        return [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"cannot parse list of numbers {text!r}") from exc


def _open_out(path):
    if path is None or path == "-":
        return sys.stdout, False
    try:
        return open(path, "w", encoding="utf-8", newline=""), True
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc}") from exc


def _effective(command, args):
    cfg = dict(DEFAULTS[command])
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot load config {args.config}: {exc}") from exc
        if not isinstance(file_cfg, dict):
            raise ConfigError("config file must hold a JSON object")
        for key, val in file_cfg.items():
            key = key.replace("-", "_")
            if key in ("quad_abstol", "quad_reltol"):
                set_tolerances(**{key: float(val)})
                continue
            if key not in cfg:
                raise ConfigError(f"unknown config key {key!r} for {command}")
            cfg[key] = val
    for key in cfg:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def cmd_estimate(args):
    cfg = _effective("estimate", args)
    if cfg["m"] is None:
        raise ConfigError("--m is required")
    m, u, v = int(cfg["m"]), float(cfg["u"]), float(cfg["v"])
    est_name = cfg["estimator"]
    if est_name == "pickands":
        u = v = 2.0
    values = read_values(args.input)
    if est_name == "cvar":
        est = cvar_pickands_estimate(values, m, u, v)
    elif est_name in ("pickands", "yun"):
        est = yun_estimate(values, m, u, v)
    else:
        raise ConfigError(f"unknown estimator {est_name!r}")
    out = sys.stdout
    out.write(f"estimator={est_name}\n")
    out.write(f"n={len(values)}\nm={m}\nu={u!r}\nv={v!r}\n")
    out.write(f"gamma_hat={est!r}\n")
    conf = cfg["confidence"]
    if conf is not None:
        conf = float(conf)
        if est_name == "cvar":
            if est >= VARIANCE_LIMIT:
                out.write(
                    "interval=suppressed\n"
                    "reason=estimated gamma is at least 1/2, where the CVaR-based "
                    "estimator has infinite asymptotic variance\n"
                )
                return 0
            av = cvar_pickands_av(est, u, v)
        else:
            av = pickands_reference_av(est) if u == v == 2.0 else yun_av(est, u, v)
        lo, hi = wald_interval(est, av, m, conf)
        out.write(f"asymptotic_variance={av!r}\nconfidence={conf!r}\n")
        out.write(f"lower={lo!r}\nupper={hi!r}\n")
    return 0


def cmd_asympvar(args):
    cfg = _effective("asympvar", args)
    gammas = _parse_floats(cfg["gammas"])
    if gammas is None:
        gammas = [round(-1.0 + 0.05 * i, 2) for i in range(30)]
    u, v = float(cfg["u"]), float(cfg["v"])
    rows = []
    for g in gammas:
        if g >= VARIANCE_LIMIT:
            raise ConfigError(f"gamma={g} is outside the grid domain gamma < 1/2")
        av_c = cvar_pickands_av(g, u, v)
        av_p = pickands_reference_av(g) if u == v == 2.0 else yun_av(g, u, v)
        rows.append((g, av_c, av_p, av_c / av_p))
    fh, close = _open_out(cfg["out"])
    try:
        fh.write(f"# schema={SCHEMA}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["gamma", "av_cvar", "av_pickands", "ratio"])
        for r in rows:
            w.writerow([repr(float(x)) for x in r])
    finally:
        if close:
            fh.close()
    return 0


def cmd_mc_sweep(args):
    cfg = _effective("mc-sweep", args)
    grid = _parse_floats(cfg["gammas"])
    kwargs = {}
    if grid is not None:
        kwargs["gamma_grid"] = tuple(grid)
    try:
        config = SweepConfig(
            family=cfg["family"], n=int(cfg["n"]), m=int(cfg["m"]), u=float(cfg["u"]),
            v=float(cfg["v"]), reps=int(cfg["reps"]), master_seed=int(cfg["seed"]),
            workers=cfg["workers"], common_random_numbers=not cfg["independent_cells"],
            **kwargs,
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, EvtCvarError):
            raise
        raise ConfigError(str(exc)) from exc
    result = run_sweep(config)
    fh, close = _open_out(cfg["out"])
    try:
        result.to_csv(fh)
    finally:
        if close:
            fh.close()
    if cfg["sidecar"]:
        write_sidecar(result, cfg["sidecar"])
    return 0


def cmd_process_check(args):
    cfg = _effective("process-check", args)
    grid = ProcessGrid(tuple(_parse_floats(cfg["grid"])))
    model = TailModel(cfg["family"], float(cfg["gamma"]))
    rows = three_way_covariance(
        model, int(cfg["n"]), int(cfg["m"]), grid, int(cfg["reps"]), int(cfg["seed"]),
        limit_reps=int(cfg["limit_reps"]), steps=int(cfg["steps"]),
    )
    fh, close = _open_out(cfg["out"])
    try:
        fh.write(f"# schema={SCHEMA}\n")
        w = csv.writer(fh, lineterminator="\n")
        cols = list(rows[0])
        w.writerow(cols)
        for r in rows:
            w.writerow([repr(float(r[c])) for c in cols])
    finally:
        if close:
            fh.close()
    if cfg["sidecar"]:
        with open(cfg["sidecar"], "w", encoding="utf-8") as sc:
            json.dump({"schema": SCHEMA, "command": "process-check", "config": cfg}, sc,
                      indent=2, sort_keys=True)
            sc.write("\n")
    return 0


def cmd_sample(args):
    cfg = _effective("sample", args)
    batch = sample(TailModel(cfg["family"], float(cfg["gamma"])), int(cfg["n"]),
                   int(cfg["seed"]), int(cfg["stream"]))
    fh, close = _open_out(cfg["out"])
    try:
        fh.write(f"# family={batch.family} gamma={batch.gamma!r} seed={batch.seed} "
                 f"stream={batch.stream} n={len(batch)}\n")
        fh.write("\n".join(repr(float(x)) for x in batch.values))
        fh.write("\n")
    finally:
        if close:
            fh.close()
    return 0


def cmd_plot(args):
    cfg = _effective("plot", args)
    plot_sweep(args.csv, args.svg, title=cfg["title"])
    return 0


class _Parser(argparse.ArgumentParser):
    # usage mistakes get the same one-line diagnostic as every other error
    def error(self, message):
        self.print_usage(sys.stderr)
        print(_diagnostic(ConfigError.kind, ConfigError.exit_code, message), file=sys.stderr)
        sys.exit(ConfigError.exit_code)


def build_parser():
    p = _Parser(
        prog="evtcvar",
        description="CVaR-based Pickands estimation of the extreme value index.",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--quad-abstol", type=float, help="absolute quadrature tolerance")
    p.add_argument("--quad-reltol", type=float, help="relative quadrature tolerance")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", help="JSON file with option values")
        sp.set_defaults(func=func)
        return sp

    sp = add("estimate", cmd_estimate, "estimate gamma from a data file")
    sp.add_argument("input", help="one value per line; '#' starts a comment")
    sp.add_argument("--estimator", choices=["pickands", "yun", "cvar"])
    sp.add_argument("--m", type=int)
    sp.add_argument("--u", type=float)
    sp.add_argument("--v", type=float)
    sp.add_argument("--confidence", type=float)

    sp = add("asympvar", cmd_asympvar, "table of asymptotic variances and their ratio")
    sp.add_argument("--gammas", help="comma-separated gamma values (default -1:0.45:0.05)")
    sp.add_argument("--u", type=float)
    sp.add_argument("--v", type=float)
    sp.add_argument("--out")

    sp = add("mc-sweep", cmd_mc_sweep, "Monte Carlo variance-ratio sweep")
    sp.add_argument("--family", choices=["gev", "gpd"])
    sp.add_argument("--n", type=int)
    sp.add_argument("--m", type=int)
    sp.add_argument("--u", type=float)
    sp.add_argument("--v", type=float)
    sp.add_argument("--reps", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--workers", help="worker processes or 'auto'")
    sp.add_argument("--gammas")
    sp.add_argument("--independent-cells", action="store_const", const=True, default=None,
                    help="draw separate random streams for each gamma cell")
    sp.add_argument("--out")
    sp.add_argument("--sidecar", help="write the effective config as JSON")

    sp = add("process-check", cmd_process_check, "three-way covariance check of the CVaR process")
    sp.add_argument("--family", choices=["gev", "gpd"])
    sp.add_argument("--gamma", type=float)
    sp.add_argument("--n", type=int)
    sp.add_argument("--m", type=int)
    sp.add_argument("--grid")
    sp.add_argument("--reps", type=int)
    sp.add_argument("--limit-reps", type=int)
    sp.add_argument("--steps", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out")
    sp.add_argument("--sidecar")

    sp = add("sample", cmd_sample, "write a reproducible sample, one value per line")
    sp.add_argument("--family", choices=["gev", "gpd"])
    sp.add_argument("--gamma", type=float)
    sp.add_argument("--n", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--stream", type=int, help="stream key; replication r of a sweep is stream r")
    sp.add_argument("--out")

    sp = add("plot", cmd_plot, "SVG chart of a sweep CSV")
    sp.add_argument("csv")
    sp.add_argument("svg")
    sp.add_argument("--title")
    return p


def _diagnostic(kind, code, message):
    return f"evtcvar: error kind={kind} code={code} message={json.dumps(message)}"


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        overrides = {k: getattr(args, k) for k in ("quad_abstol", "quad_reltol")
                     if getattr(args, k) is not None}
        if overrides:
            set_tolerances(**overrides)
        return args.func(args)
    except EvtCvarError as exc:
        print(_diagnostic(exc.kind, exc.exit_code, str(exc)), file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
