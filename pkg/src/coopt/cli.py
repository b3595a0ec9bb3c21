"""Command-line front end: run experiments, list presets, score archives.

Subcommands::

    coopt run <config>        run the experiment described by a config file
    coopt presets             list the built-in experiment presets
    coopt metrics <archive>   front measures for an archive.csv
    coopt report <run-dir>    regenerate trace.csv/archive.csv from report.json
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from coopt.analysis import MULTI, Archive
from coopt.core import Evaluation
from coopt.harness import (
    PRESET_SUMMARIES,
    ConfigError,
    RunReport,
    load_config,
    run_experiment,
    write_archive_csv,
    write_trace_csv,
)
from coopt.metrics import (
    area_trapezoid,
    average_distance,
    generational_distance,
    hypervolume,
    hypervolume_complement,
)


def _parse_point(text: str, flag: str) -> tuple[float, ...]:
    try:
        values = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise SystemExit(f"error: {flag} expects z1,z2 — got {text!r}")
    if len(values) != 2:
        raise SystemExit(f"error: {flag} expects exactly two values")
    return values


def _read_objectives(path) -> list[tuple[float, ...]]:
    """The z1[,z2] columns of a CSV written by the harness (or compatible)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        columns = [c for c in (reader.fieldnames or []) if c.startswith("z")]
        if not columns:
            raise SystemExit(f"error: {path} has no z1/z2 columns")
        return [tuple(float(row[c]) for c in columns) for row in reader]


def _cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    summary = run_experiment(cfg)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 1 if summary["failures"] else 0


def _cmd_presets(_args) -> int:
    for name in sorted(PRESET_SUMMARIES):
        print(f"{name}: {PRESET_SUMMARIES[name]}")
    return 0


def _cmd_metrics(args) -> int:
    points = _read_objectives(args.archive)
    if not points:
        print("error: archive is empty", file=sys.stderr)
        return 2
    rows = [("non-dominated points", float(len(points)))]
    if len(points[0]) == 2:
        rows.append(("area", area_trapezoid(points)))
        if args.ref:
            ref = _parse_point(args.ref, "--ref")
            rows.append(("hypervolume", hypervolume(points, ref)))
            rows.append(("hypervolume complement",
                         hypervolume_complement(points, ref)))
        if args.utopia:
            rows.append(("average distance", average_distance(
                points, _parse_point(args.utopia, "--utopia"))))
        if args.front:
            rows.append(("generational distance", generational_distance(
                points, _read_objectives(args.front))))
    writer = csv.writer(sys.stdout)
    writer.writerow(["measure", "value"])
    for measure, value in rows:
        writer.writerow([measure, repr(float(value))])
    return 0


def _cmd_report(args) -> int:
    run_dir = Path(args.run_dir)
    report_path = run_dir / "report.json"
    if not report_path.exists():
        print(f"error: {report_path} not found", file=sys.stderr)
        return 2
    with open(report_path, encoding="utf-8") as fh:
        data = json.load(fh)
    members = [
        Evaluation(point=tuple(m["point"]),
                   objectives=tuple(m["objectives"]),
                   constraint=m["g"], solver_id=m["solver_id"], seq=m["seq"])
        for m in data["archive"]
    ]
    report = RunReport(
        problem=data["problem"], mode=data["mode"],
        rep_index=data["rep_index"], sharing=data["sharing"],
        archive=Archive(MULTI, front=members), trace=data["trace"])
    write_trace_csv(run_dir / "trace.csv", report)
    write_archive_csv(run_dir / "archive.csv", report)
    print(f"wrote {run_dir / 'trace.csv'} and {run_dir / 'archive.csv'}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="coopt",
        description="cooperating-solver optimization experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the experiment in a config file")
    p_run.add_argument("config", help="path to a key = value config file")
    p_run.set_defaults(func=_cmd_run)

    p_presets = sub.add_parser("presets", help="list experiment presets")
    p_presets.set_defaults(func=_cmd_presets)

    p_metrics = sub.add_parser(
        "metrics", help="front measures for an archive.csv")
    p_metrics.add_argument("archive", help="CSV with z1[,z2] columns")
    p_metrics.add_argument("--front", help="true-front CSV (z1,z2 columns)")
    p_metrics.add_argument("--utopia", help="utopia point as z1,z2")
    p_metrics.add_argument("--ref", help="hypervolume reference as z1,z2")
    p_metrics.set_defaults(func=_cmd_metrics)

    p_report = sub.add_parser(
        "report", help="regenerate CSVs from a run directory's report.json")
    p_report.add_argument("run_dir")
    p_report.set_defaults(func=_cmd_report)

    args = parser.parse_args(argv)
    return args.func(args)
