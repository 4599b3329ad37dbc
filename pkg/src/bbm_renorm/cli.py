"""Command-line entry point: ``bbm-renorm list`` and ``bbm-renorm run``.

Configs are INI files with the sections below; every key is optional except
``[experiment] id`` and unknown sections or keys are rejected::

    [experiment]
    id = blowup
    [model]
    alpha = 0.0
    truncation = 64
    appendix_alpha = 0.75
    [solver]
    dt = 0.002
    T = 1.0
    mode_bound = 256
    [ensemble]
    samples = 400
    seed = 20240611
    [sweep]
    truncations = 16, 32, 64
    alphas = 0.0, -0.25
    times = 1.0
    [output]
    dir = out/blowup

Exit codes: 0 all gates passed, 1 runtime failure, 2 config/schema error,
3 at least one gate failed.
"""
from __future__ import annotations

import argparse
import configparser
import datetime as _dt
import os
import platform
import sys
import time
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .ensemble import config_digest
from .experiments import EXPERIMENTS, ROW_COLUMNS, Params, experiment_defaults, list_experiments, run_experiment
from .io import dump_json, write_rows_csv

WORKERS_ENV = "BBM_RENORM_WORKERS"

EXIT_OK, EXIT_RUNTIME, EXIT_SCHEMA, EXIT_GATE = 0, 1, 2, 3

ALPHA_SWEEPS = ("blowup", "picard-check", "covariance-limit")


def _floats(s: str) -> tuple:
    return tuple(float(x) for x in s.replace(" ", "").split(",") if x)


def _ints(s: str) -> tuple:
    return tuple(int(x) for x in s.replace(" ", "").split(",") if x)


# section -> key -> (parser, Params field)
SCHEMA = {
    "experiment": {"id": (str, None)},
    "model": {"alpha": (float, "alpha"), "truncation": (int, "truncation"), "appendix_alpha": (float, "appendix_alpha")},
    "solver": {"dt": (float, "dt"), "T": (float, "T"), "mode_bound": (int, "mode_bound")},
    "ensemble": {"samples": (int, "samples"), "seed": (int, "seed")},
    "sweep": {"truncations": (_ints, "truncations"), "alphas": (_floats, "alphas"), "times": (_floats, "times")},
    "output": {"dir": (str, None)},
}


class ConfigError(ValueError):
    pass


def _key_index() -> dict:
    idx = {}
    for sec, keys in SCHEMA.items():
        for k in keys:
            idx[k] = sec
    return idx


def load_config(path: str | None, overrides: list[str] = ()) -> dict:
    """Parse and validate; returns {section: {key: raw string}}."""
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    if path is not None:
        try:
            with open(path) as fh:
                cp.read_file(fh)
        except (OSError, configparser.Error) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
    raw = {s: dict(cp[s]) for s in cp.sections()}
    idx = _key_index()
    for ov in overrides:
        if "=" not in ov:
            raise ConfigError(f"override {ov!r} is not key=value")
        key, val = ov.split("=", 1)
        key = key.strip()
        if "." in key:
            sec, key = key.split(".", 1)
        elif key in idx:
            sec = idx[key]
        else:
            raise ConfigError(f"unknown key {key!r}")
        raw.setdefault(sec, {})[key] = val.strip()
    for sec, kv in raw.items():
        if sec not in SCHEMA:
            raise ConfigError(f"unknown section [{sec}]")
        for k in kv:
            if k not in SCHEMA[sec]:
                raise ConfigError(f"unknown key {k!r} in [{sec}]")
    return raw


def resolve(raw: dict) -> tuple[str, Params, str | None]:
    exp_id = raw.get("experiment", {}).get("id")
    if exp_id not in EXPERIMENTS:
        raise ConfigError(f"experiment id must be one of {list(EXPERIMENTS)}, got {exp_id!r}")
    values = experiment_defaults(exp_id)
    for sec, kv in raw.items():
        for k, v in kv.items():
            parser, fld = SCHEMA[sec][k]
            if fld is None:
                continue
            try:
                values[fld] = parser(v)
            except ValueError as exc:
                raise ConfigError(f"bad value for {sec}.{k}: {v!r}") from exc
    # for alpha sweeps, a lone model.alpha narrows the sweep to that value
    if exp_id in ALPHA_SWEEPS and "alpha" in raw.get("model", {}) and "alphas" not in raw.get("sweep", {}):
        values["alphas"] = (values["alpha"],)
    p = Params(**values)
    if p.dt <= 0 or p.T <= 0 or p.samples < 2 or p.mode_bound < 1 or p.truncation < 0:
        raise ConfigError("dt, T must be > 0; samples >= 2; mode_bound >= 1; truncation >= 0")
    if not (0 <= p.seed < 2 ** 64):
        raise ConfigError("seed must be a non-negative 64-bit integer")
    return exp_id, p, raw.get("output", {}).get("dir")


def _fmt(v) -> str:
    if isinstance(v, tuple):
        return ", ".join(_fmt(x) for x in v)
    return repr(v) if isinstance(v, float) else str(v)


def frozen_config(exp_id: str, p: Params, out_dir: str) -> str:
    lines = ["[experiment]", f"id = {exp_id}", ""]
    for sec in ("model", "solver", "ensemble", "sweep"):
        lines.append(f"[{sec}]")
        for k, (_, fld) in SCHEMA[sec].items():
            lines.append(f"{k} = {_fmt(getattr(p, fld))}")
        lines.append("")
    lines += ["[output]", f"dir = {out_dir}", ""]
    return "\n".join(lines)


def cmd_list(args) -> int:
    rows = list_experiments()
    w = max(len(r[0]) for r in rows)
    for exp_id, desc, statement in rows:
        print(f"{exp_id:<{w}}  {desc}  [{statement}]")
    return EXIT_OK


def _default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def cmd_run(args) -> int:
    overrides = list(args.set or [])
    if args.experiment:
        overrides.insert(0, f"experiment.id={args.experiment}")
    if args.seed is not None:
        overrides.append(f"ensemble.seed={args.seed}")
    try:
        raw = load_config(args.config, overrides)
        exp_id, params, cfg_dir = resolve(raw)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    out = Path(args.out or cfg_dir or f"results/{exp_id}")
    workers = args.workers if args.workers is not None else _default_workers()
    started = _dt.datetime.now(_dt.timezone.utc)
    t0 = time.perf_counter()
    try:
        result = run_experiment(exp_id, params, workers)
    except Exception as exc:  # runtime failure of the experiment itself
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    wall = time.perf_counter() - t0
    out.mkdir(parents=True, exist_ok=True)
    frozen = frozen_config(exp_id, params, str(out))
    (out / "config.ini").write_text(frozen)
    digest = config_digest(frozen_config(exp_id, params, ""))
    rows = [{c: r.get(c, "") for c in ROW_COLUMNS} for r in result.rows]
    write_rows_csv(rows, out / "results.csv", ROW_COLUMNS)
    for s in result.samples:
        write_rows_csv(s.rows(), out / f"samples_{s.label}.csv", ["member_index", "value"])
    meta = {"experiment": exp_id, "config_digest": digest, "master_seed": params.seed}
    dump_json({**meta, "summary": result.summary}, out / "summary.json")
    dump_json({**meta, "passed": result.passed, "gates": [g.as_dict() for g in result.gates]}, out / "report.json")
    dump_json({
        "started_utc": started.isoformat(), "wall_seconds": wall, "workers": workers,
        "package_version": __version__, "python": platform.python_version(),
        "numpy": np.__version__, "scipy": scipy.__version__,
    }, out / "metadata.json")
    for g in result.gates:
        print(f"[{'PASS' if g.passed else 'FAIL'}] {g.name}: {g.value:.6g} ({g.threshold})")
    print(f"{exp_id}: {'all gates passed' if result.passed else 'gate failure'}; outputs in {out}")
    return EXIT_OK if result.passed else EXIT_GATE


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bbm-renorm", description="Renormalized BBM experiments")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("list", help="list experiments").set_defaults(func=cmd_list)
    r = sub.add_parser("run", help="run one experiment")
    r.add_argument("--config", help="INI config path")
    r.add_argument("--experiment", help="experiment id (shortcut for --set experiment.id=ID)")
    r.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key (repeatable)")
    r.add_argument("--workers", type=int, help=f"worker processes (default ${WORKERS_ENV} or 1)")
    r.add_argument("--seed", type=int, help="master seed")
    r.add_argument("--out", help="output directory")
    r.set_defaults(func=cmd_run)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
