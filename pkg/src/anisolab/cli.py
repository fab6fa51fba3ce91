"""Command line: ``anisolab run <config>``, ``anisolab list``, ``anisolab export-csv <field-file>``."""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .exprlang import ExprError
from .experiments import EXPERIMENTS, ConfigError, RunConfig, run_config
from .grid import field_csv, read_field, write_field

REPORT_SCHEMA = 1
EXIT_OK, EXIT_ERROR, EXIT_VIOLATED = 0, 1, 2


def _jsonable(obj):
    """Recursively convert numpy scalars/arrays and non-finite floats for JSON."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "to_dict"):
        return _jsonable(obj.to_dict())
    return str(obj)


def _run_dir(root: Path, name: str, text: str) -> Path:
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()[:8]
    base = root / f"{name}-{digest}"
    out, k = base, 1
    while out.exists():
        out = root / f"{base.name}-{k}"
        k += 1
    out.mkdir(parents=True)
    return out


def run(config_path: str, output: str | None = None, stream=None) -> int:
    """Execute one configuration file; return the process exit code."""
    stream = stream or sys.stdout
    try:
        text = Path(config_path).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_ERROR
    t0 = time.perf_counter()
    try:
        cfg = RunConfig.from_text(text)
        exp, full, outcome = run_config(cfg)
        root = Path(output or full.raw("experiment", "output", "runs"))
    except (ConfigError, ExprError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    wall = time.perf_counter() - t0
    try:
        out = _run_dir(root, exp.name, text)
    except OSError as exc:
        print(f"error: output directory not writable: {exc}", file=sys.stderr)
        return EXIT_ERROR
    files = []
    for key, u in outcome.fields.items():
        name = f"{key}.aniso"
        write_field(out / name, u)
        files.append(name)
    for key, body in outcome.csv.items():
        name = f"scan-{key}.csv"
        (out / name).write_text(body, encoding="utf-8")
        files.append(name)
    status = "violated" if outcome.violated else "ok"
    report = {
        "schema": REPORT_SCHEMA,
        "experiment": exp.name,
        "anchor": exp.anchor,
        "version": __version__,
        "config": full.echo(),
        "status": status,
        "blocks": _jsonable(outcome.blocks),
        "files": files,
        "timestamp": {"utc": datetime.now(timezone.utc).isoformat(timespec="seconds"),
                      "wall_time_s": round(wall, 3)},
    }
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"{exp.name}: {status} -> {out / 'report.json'}", file=stream)
    return EXIT_VIOLATED if outcome.violated else EXIT_OK


def list_experiments(stream=None) -> None:
    stream = stream or sys.stdout
    width = max(len(n) for n in EXPERIMENTS)
    for name, exp in EXPERIMENTS.items():
        print(f"{name:<{width}}  {exp.summary}", file=stream)


def export_csv(path: str, output: str | None = None, stream=None) -> int:
    stream = stream or sys.stdout
    try:
        body = field_csv(read_field(path))
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if output:
        Path(output).write_text(body, encoding="utf-8")
    else:
        stream.write(body)
    return EXIT_OK


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="anisolab", description="Numerical experiments for weighted semilinear elliptic equations.")
    ap.add_argument("--version", action="version", version=f"anisolab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run the experiment described by a config file")
    p_run.add_argument("config")
    p_run.add_argument("-o", "--output", help="output root (overrides [experiment] output)")
    sub.add_parser("list", help="list built-in experiments")
    p_csv = sub.add_parser("export-csv", help="convert a .aniso field file to CSV")
    p_csv.add_argument("field")
    p_csv.add_argument("-o", "--output", help="write to this file instead of stdout")
    args = ap.parse_args(argv)
    if args.command == "run":
        return run(args.config, args.output)
    if args.command == "list":
        list_experiments()
        return EXIT_OK
    return export_csv(args.field, args.output)


if __name__ == "__main__":
    sys.exit(main())
