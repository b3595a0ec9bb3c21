"""Experiment runner: wire the agents per config and report the results.

A run connects one scheduler, one analysis agent, a pool of evaluators, and
a roster of solver instances over bounded mailboxes, feeds every solver the
same initial population, and lets the scheduler drive the system to its
budget.  ``run_experiment`` repeats that for every repetition in both the
independent and the cooperating mode and writes plot-ready CSV summaries.

Config files are UTF-8 ``key = value`` text with one ``[solver]`` block per
solver instance; ``#`` starts a comment (whole line or trailing)::

    problem = rastrigin-10
    preset = hen-protocol
    seed = 42
    repetitions = 10
    output_dir = runs/rastrigin

    # optional explicit roster (replaces the preset's)
    [solver]
    kind = GA
    size = 20
    omega = 0.5
    priority = 1
    label = ga-big

Recognized top-level keys: ``problem``, ``preset``, ``budget`` (written as
``messages:60000`` or ``evaluations:1000``), ``np`` (shared initial
population size), ``n_evaluators``, ``sharing``, ``seed``, ``repetitions``,
``output_dir``, ``deterministic``.
"""

from __future__ import annotations

import asyncio
import csv
import json
import time
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from coopt.analysis import MULTI, SINGLE, Archive, analysis_loop
from coopt.core import Problem
from coopt.evaluator import EvaluatorStats, SeqCounter, evaluator_loop
from coopt.messaging import Mailbox
from coopt.metrics import (
    area_trapezoid,
    average_distance,
    generational_distance,
    hypervolume,
    hypervolume_complement,
)
from coopt.problems import front_samples, registry_get
from coopt.scheduler import Budget, SchedulerState, scheduler_loop
from coopt.solvers import SolverConfig, solver_loop

MODES = (("independent", False), ("cooperating", True))

_TOP_KEYS = frozenset({
    "problem", "preset", "budget", "np", "n_evaluators", "sharing",
    "seed", "repetitions", "output_dir", "deterministic",
})
_SOLVER_KEYS = frozenset({"kind", "size", "omega", "priority", "label"})


class ConfigError(ValueError):
    """A config file failed validation; the message cites the line."""


@dataclass(frozen=True)
class RunConfig:
    """Everything one experiment needs: problem, budget, roster, seeds."""

    problem: str
    budget: Budget
    solvers: tuple[SolverConfig, ...]
    population_size: int
    n_evaluators: int = 2
    sharing: bool = True
    seed: int = 0
    repetitions: int = 10
    output_dir: str = "runs"
    deterministic: bool = False

    def __post_init__(self):
        if not self.solvers:
            raise ValueError("at least one solver is required")
        if self.population_size < 1:
            raise ValueError("np (population size) must be >= 1")
        if self.n_evaluators < 1:
            raise ValueError("n_evaluators must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be >= 0")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.deterministic and self.n_evaluators != 1:
            raise ValueError(
                "deterministic runs require n_evaluators = 1")
        labels = [sc.label for sc in self.solvers]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate solver labels: {sorted(labels)}")


@dataclass
class RunReport:
    """Outcome of one run: archive, improvement trace, counters, metrics."""

    problem: str
    mode: str
    rep_index: int
    sharing: bool
    archive: Optional[Archive] = None
    trace: list[dict] = field(default_factory=list)
    per_solver_evaluations: dict[str, int] = field(default_factory=dict)
    counters: dict = field(default_factory=dict)
    metrics_row: Optional[dict] = None
    wall_time: float = 0.0
    valid: bool = True
    error: str = ""
    events: list[dict] = field(default_factory=list)

    def best_value(self) -> Optional[float]:
        if self.archive is None or self.archive.best is None:
            return None
        return self.archive.best.objectives[0]


# ------------------------------------------------------------------ presets

PRESET_SUMMARIES = {
    "hen-protocol": (
        "message-budget protocol: 60000 scheduler messages, np = problem "
        "dimensions, roster GA(np), GA(5np), PPA(np/2), PPA(2np), SD, CS"),
    "mutas-protocol": (
        "evaluation-budget protocol: 1000 evaluations, np = 20, roster "
        "GA(2np), GA(5np), PPA(np/2), PPA(2np), PSO(np), PSO(5np), plus SD "
        "and CS at scalarizing weights 0.2/0.4/0.6/0.8"),
}


def _hen_roster(ps: int) -> tuple[SolverConfig, ...]:
    return (
        SolverConfig("GA", ps, instance_label="ga-small"),
        SolverConfig("GA", 5 * ps, instance_label="ga-large"),
        SolverConfig("PPA", max(1, round(ps / 2)), instance_label="ppa-small"),
        SolverConfig("PPA", 2 * ps, instance_label="ppa-large"),
        SolverConfig("SD", instance_label="sd"),
        SolverConfig("CS", instance_label="cs"),
    )


def _mutas_roster(ps: int) -> tuple[SolverConfig, ...]:
    weights = (0.2, 0.4, 0.6, 0.8)
    return (
        SolverConfig("GA", 2 * ps, instance_label="ga-small"),
        SolverConfig("GA", 5 * ps, instance_label="ga-large"),
        SolverConfig("PPA", max(1, round(ps / 2)), instance_label="ppa-small"),
        SolverConfig("PPA", 2 * ps, instance_label="ppa-large"),
        SolverConfig("PSO", ps, instance_label="pso-small"),
        SolverConfig("PSO", 5 * ps, instance_label="pso-large"),
    ) + tuple(
        SolverConfig("SD", weight=w, instance_label=f"sd-w{int(w * 100)}")
        for w in weights
    ) + tuple(
        SolverConfig("CS", weight=w, instance_label=f"cs-w{int(w * 100)}")
        for w in weights
    )


def preset_config(preset: str, problem: str, *,
                  population_size: Optional[int] = None,
                  **overrides) -> RunConfig:
    """Build a RunConfig for a named preset; keyword overrides pass through."""
    problem_obj = registry_get(problem)
    if preset == "hen-protocol":
        ps = population_size or problem_obj.domain.size
        budget = Budget.messages(60_000)
        roster = _hen_roster(ps)
    elif preset == "mutas-protocol":
        ps = population_size or 20
        budget = Budget.evaluations(1_000)
        roster = _mutas_roster(ps)
    else:
        raise ValueError(f"unknown preset {preset!r}; available: "
                         + ", ".join(sorted(PRESET_SUMMARIES)))
    return RunConfig(problem=problem, budget=budget, solvers=roster,
                     population_size=ps, **overrides)


# ------------------------------------------------------------- config files

def load_config(path) -> RunConfig:
    """Parse and validate a config file; errors cite the offending line."""
    text = Path(path).read_text(encoding="utf-8")
    top: dict[str, tuple[str, int]] = {}
    blocks: list[dict[str, tuple[str, int]]] = []
    current: Optional[dict] = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line == "[solver]":
            current = {}
            blocks.append(current)
            continue
        if line.startswith("["):
            raise ConfigError(f"line {lineno}: unknown section {line!r}")
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(
                f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = key.strip(), value.strip()
        allowed = _TOP_KEYS if current is None else _SOLVER_KEYS
        target = top if current is None else current
        if key not in allowed:
            where = "" if current is None else " in [solver] block"
            raise ConfigError(f"line {lineno}: unknown key {key!r}{where}")
        if key in target:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        target[key] = (value, lineno)
    return _assemble(top, blocks)


def _parse_int(entry: tuple[str, int], key: str) -> int:
    value, lineno = entry
    try:
        return int(value)
    except ValueError:
        raise ConfigError(
            f"line {lineno}: {key} must be an integer, got {value!r}") \
            from None


def _parse_float(entry: tuple[str, int], key: str) -> float:
    value, lineno = entry
    try:
        return float(value)
    except ValueError:
        raise ConfigError(
            f"line {lineno}: {key} must be a number, got {value!r}") from None


def _parse_bool(entry: tuple[str, int], key: str) -> bool:
    value, lineno = entry
    if value.lower() in ("true", "false"):
        return value.lower() == "true"
    raise ConfigError(
        f"line {lineno}: {key} must be true or false, got {value!r}")


def _parse_budget(entry: tuple[str, int]) -> Budget:
    value, lineno = entry
    kind, sep, limit = value.partition(":")
    if not sep:
        raise ConfigError(
            f"line {lineno}: budget must look like messages:60000 or "
            f"evaluations:1000, got {value!r}")
    try:
        return Budget(kind.strip(), int(limit.strip()))
    except ValueError as exc:
        raise ConfigError(f"line {lineno}: {exc}") from None


def _assemble(top: dict, blocks: list[dict]) -> RunConfig:
    if "problem" not in top:
        raise ConfigError("missing required key 'problem'")
    problem_name, problem_line = top["problem"]
    try:
        problem = registry_get(problem_name)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"line {problem_line}: {exc}") from None

    preset = None
    if "preset" in top:
        preset, preset_line = top["preset"]
        if preset not in PRESET_SUMMARIES:
            raise ConfigError(
                f"line {preset_line}: unknown preset {preset!r}; available: "
                + ", ".join(sorted(PRESET_SUMMARIES)))

    # Parse whatever is present first so malformed lines get cited before
    # any complaint about keys that are merely missing.
    population = _parse_int(top["np"], "np") if "np" in top else None
    budget = _parse_budget(top["budget"]) if "budget" in top else None
    solvers = tuple(_solver_from_block(i, block)
                    for i, block in enumerate(blocks))
    kwargs: dict = {}
    if "n_evaluators" in top:
        kwargs["n_evaluators"] = _parse_int(top["n_evaluators"],
                                            "n_evaluators")
    if "sharing" in top:
        kwargs["sharing"] = _parse_bool(top["sharing"], "sharing")
    if "seed" in top:
        kwargs["seed"] = _parse_int(top["seed"], "seed")
    if "repetitions" in top:
        kwargs["repetitions"] = _parse_int(top["repetitions"], "repetitions")
    if "output_dir" in top:
        kwargs["output_dir"] = top["output_dir"][0]
    if "deterministic" in top:
        kwargs["deterministic"] = _parse_bool(top["deterministic"],
                                              "deterministic")

    if population is None:
        if preset == "hen-protocol":
            population = problem.domain.size
        elif preset == "mutas-protocol":
            population = 20
        else:
            raise ConfigError(
                "missing required key 'np' (no preset supplies it)")
    if budget is None:
        if preset == "hen-protocol":
            budget = Budget.messages(60_000)
        elif preset == "mutas-protocol":
            budget = Budget.evaluations(1_000)
        else:
            raise ConfigError(
                "missing required key 'budget' (no preset supplies it)")
    if not solvers:
        if preset == "hen-protocol":
            solvers = _hen_roster(population)
        elif preset == "mutas-protocol":
            solvers = _mutas_roster(population)
        else:
            raise ConfigError("no [solver] blocks and no preset roster")

    try:
        return RunConfig(problem=problem_name, budget=budget, solvers=solvers,
                         population_size=population, **kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _solver_from_block(index: int, block: dict) -> SolverConfig:
    if "kind" not in block:
        raise ConfigError(
            f"[solver] block {index + 1}: missing required key 'kind'")
    kind, kind_line = block["kind"]
    kwargs: dict = {}
    if "size" in block:
        kwargs["size_param"] = _parse_int(block["size"], "size")
    if "omega" in block:
        kwargs["weight"] = _parse_float(block["omega"], "omega")
    if "priority" in block:
        kwargs["priority"] = _parse_int(block["priority"], "priority")
    label = block["label"][0] if "label" in block \
        else f"{kind.lower()}-{index + 1}"
    try:
        return SolverConfig(kind, instance_label=label, **kwargs)
    except ValueError as exc:
        raise ConfigError(f"line {kind_line}: {exc}") from None


# ------------------------------------------------------------------ running

def _derive_seeds(cfg: RunConfig, rep_index: int):
    """Per-rep RNG streams, identical across modes for paired comparisons."""
    root = np.random.SeedSequence((cfg.seed, rep_index))
    children = root.spawn(1 + len(cfg.solvers))
    population_rng = np.random.default_rng(children[0])
    solver_seeds = [int(child.generate_state(1, np.uint64)[0])
                    for child in children[1:]]
    return population_rng, solver_seeds


async def _run_agents(cfg: RunConfig, problem: Problem,
                      initial_points, solver_cfgs, sink):
    """Start analysis, evaluators, scheduler, then solvers; run to budget."""
    scheduler_inbox = Mailbox(
        2 * (len(solver_cfgs) + cfg.n_evaluators + 1), name="scheduler")
    analysis_inbox = Mailbox(2 * (cfg.n_evaluators + 1), name="analysis")
    evaluator_mbs = {f"eval-{i}": Mailbox(2, name=f"eval-{i}")
                     for i in range(cfg.n_evaluators)}
    share_mbs = {sc.label: Mailbox(4, name=f"share:{sc.label}")
                 for sc in solver_cfgs}
    mode = SINGLE if problem.n_obj == 1 else MULTI
    state = SchedulerState(
        inbox=scheduler_inbox,
        evaluator_mailboxes=evaluator_mbs,
        share_mailboxes=share_mbs,
        analysis_inbox=analysis_inbox,
        budget=cfg.budget,
        sharing=cfg.sharing,
        events=sink,
    )
    seq = SeqCounter()
    stats = {eid: EvaluatorStats(eid) for eid in evaluator_mbs}

    tasks = [asyncio.ensure_future(
        analysis_loop(analysis_inbox, scheduler_inbox, Archive(mode)))]
    tasks += [
        asyncio.ensure_future(evaluator_loop(
            eid, problem, scheduler_inbox, analysis_inbox, mb, seq,
            stats[eid]))
        for eid, mb in evaluator_mbs.items()
    ]
    scheduler_task = asyncio.ensure_future(scheduler_loop(state))
    tasks += [
        asyncio.ensure_future(solver_loop(
            sc, problem.domain, initial_points, scheduler_inbox,
            share_mbs[sc.label], sink))
        for sc in solver_cfgs
    ]
    snapshot = await scheduler_task
    results = await asyncio.gather(*tasks, return_exceptions=True)
    errors = [r for r in results if isinstance(r, BaseException)]

    for evaluator_stats in stats.values():
        sink(evaluator_stats.record())
    for mb in (scheduler_inbox, analysis_inbox, *evaluator_mbs.values(),
               *share_mbs.values()):
        sink({"event": "mailbox", **mb.stats()})
    return snapshot, state, errors


def run_once(cfg: RunConfig, rep_index: int) -> RunReport:
    """Run one full agent system to its budget and collect the report."""
    problem = registry_get(cfg.problem)
    population_rng, solver_seeds = _derive_seeds(cfg, rep_index)
    initial_points = problem.domain.random_population(
        population_rng, cfg.population_size)
    solver_cfgs = [replace(sc, seed=seed)
                   for sc, seed in zip(cfg.solvers, solver_seeds)]
    classes = {sc.label: sc.solver_class for sc in solver_cfgs}

    events: list[dict] = []
    report = RunReport(problem=cfg.problem, rep_index=rep_index,
                       sharing=cfg.sharing,
                       mode="cooperating" if cfg.sharing else "independent",
                       events=events)
    events.append({
        "event": "run-start",
        "problem": cfg.problem,
        "mode": report.mode,
        "rep_index": rep_index,
        "np": cfg.population_size,
        "solvers": [sc.label for sc in solver_cfgs],
        "initial_population": [[float(v) for v in p]
                               for p in initial_points],
    })
    started = time.perf_counter()
    try:
        snapshot, state, errors = asyncio.run(
            _run_agents(cfg, problem, initial_points, solver_cfgs,
                        events.append))
    except Exception as exc:  # agent panic: abort run, flag the report
        report.valid = False
        report.error = f"{type(exc).__name__}: {exc}"
        report.wall_time = time.perf_counter() - started
        return report
    report.wall_time = time.perf_counter() - started

    if errors:
        report.valid = False
        report.error = "; ".join(
            f"{type(e).__name__}: {e}" for e in errors)
    report.archive = snapshot
    report.counters = {
        "messages": state.msg_count,
        "dispatches": state.dispatches,
        "broadcasts": state.broadcasts,
        "refusals": state.refusals,
        "improvements": state.improvements,
    }
    report.trace = [
        {
            "seq": e["seq"],
            "messages": e["messages"],
            "dispatches": e["dispatches"],
            "z": e["z"],
            "instance_label": e["solver"],
            "class": classes.get(e["solver"], "?"),
        }
        for e in events if e.get("event") == "improvement"
    ]
    report.per_solver_evaluations = dict(Counter(
        e["solver"] for e in events if e.get("event") == "dispatch"))
    if problem.n_obj > 1 and snapshot.front:
        report.metrics_row = front_metrics(
            [e.objectives for e in snapshot.front], cfg.problem)
    return report


def front_metrics(objective_points, problem_name: str) -> dict:
    """The summary measures for one final front, keyed by measure name.

    Reference and utopia points come from the problem's known front when it
    has one (reference 10% beyond the worst front value per objective),
    otherwise from the data itself.  ``hypervolume`` is the dominated area
    (higher is better); ``hypervolume complement`` is the rest of the
    [0, reference] box (lower is better).
    """
    pts = np.asarray(objective_points, dtype=float)
    try:
        front = front_samples(problem_name, 1_000)
    except (KeyError, ValueError):
        front = None
    anchor = front if front is not None else pts
    utopia = anchor.min(axis=0)
    nadir = anchor.max(axis=0)
    reference = nadir + 0.1 * np.maximum(nadir - utopia, 1.0)
    row = {
        "hypervolume": hypervolume(pts, reference),
        "hypervolume complement": hypervolume_complement(pts, reference),
        "area": area_trapezoid(pts),
        "average distance": average_distance(pts, utopia),
        "non-dominated points": float(len(pts)),
    }
    if front is not None:
        row["generational distance"] = generational_distance(pts, front)
    return row


# ------------------------------------------------------------------ reports

def _float_cell(value) -> str:
    return repr(float(value))


def write_trace_csv(path, report: RunReport) -> None:
    """One row per archive improvement, in arrival order."""
    n_obj = max((len(row["z"]) for row in report.trace), default=1)
    header = ["seq", "messages", "dispatches"] \
        + [f"z{i + 1}" for i in range(n_obj)] + ["instance_label", "class"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in report.trace:
            writer.writerow(
                [row["seq"], row["messages"], row["dispatches"]]
                + [_float_cell(z) for z in row["z"]]
                + [row["instance_label"], row["class"]])


def write_archive_csv(path, report: RunReport) -> None:
    """One row per archive member: decision values, objectives, g, origin."""
    members = report.archive.members() if report.archive else []
    n_dim = len(members[0].point) if members else 0
    n_obj = len(members[0].objectives) if members else 1
    header = [f"d{i + 1}" for i in range(n_dim)] \
        + [f"z{i + 1}" for i in range(n_obj)] + ["g", "solver_id", "seq"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for member in members:
            writer.writerow(
                [_float_cell(d) for d in member.point]
                + [_float_cell(z) for z in member.objectives]
                + [_float_cell(member.constraint), member.solver_id,
                   member.seq])


def write_events_log(path, events: list[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in events:
            fh.write(json.dumps(record, sort_keys=True) + "\n")


def report_summary(report: RunReport) -> dict:
    """The JSON-serializable run summary (everything but the raw events)."""
    members = report.archive.members() if report.archive else []
    return {
        "problem": report.problem,
        "mode": report.mode,
        "rep_index": report.rep_index,
        "sharing": report.sharing,
        "valid": report.valid,
        "error": report.error,
        "wall_time": report.wall_time,
        "counters": report.counters,
        "per_solver_evaluations": report.per_solver_evaluations,
        "best": report.best_value(),
        "front_size": len(members),
        "metrics": report.metrics_row,
        "trace": report.trace,
        "archive": [
            {"point": list(m.point), "objectives": list(m.objectives),
             "g": m.constraint, "solver_id": m.solver_id, "seq": m.seq}
            for m in members
        ],
    }


def write_run_dir(run_dir, report: RunReport) -> Path:
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    write_trace_csv(run_dir / "trace.csv", report)
    write_archive_csv(run_dir / "archive.csv", report)
    write_events_log(run_dir / "events.log", report.events)
    with open(run_dir / "report.json", "w", encoding="utf-8") as fh:
        json.dump(report_summary(report), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return run_dir


def write_boxplot_csv(path, bests_by_mode: dict[str, list[float]]) -> None:
    """Five-number summary of the final best value per mode."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["mode", "min", "q1", "median", "q3", "max"])
        for mode, _sharing in MODES:
            values = bests_by_mode.get(mode, [])
            if not values:
                continue
            q = np.percentile(values, [0, 25, 50, 75, 100])
            writer.writerow([mode] + [_float_cell(v) for v in q])


def write_metrics_csv(path, rows: dict[str, dict[str, float]]) -> None:
    """Measure table with one column per mode (median over repetitions)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["measure", "independent", "cooperating"])
        for measure, by_mode in rows.items():
            writer.writerow([measure] + [
                _float_cell(by_mode[mode]) if mode in by_mode else ""
                for mode, _sharing in MODES])


_METRIC_ORDER = ("hypervolume", "hypervolume complement", "area",
                 "average distance", "generational distance",
                 "non-dominated points")


def run_experiment(cfg: RunConfig) -> dict:
    """Run every repetition in both modes and write the summary CSVs.

    Produces one ``<mode>-rep<k>`` directory per run (trace.csv,
    archive.csv, events.log, report.json) plus, at the top level,
    ``boxplot.csv`` for single-objective problems or ``metrics.csv`` for
    multi-objective ones.  Failed runs are recorded and skipped in the
    summaries; the remaining repetitions still run.
    """
    problem = registry_get(cfg.problem)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    reports: dict[str, list[RunReport]] = {mode: [] for mode, _ in MODES}
    failures: list[str] = []
    for mode, sharing in MODES:
        for rep in range(cfg.repetitions):
            report = run_once(replace(cfg, sharing=sharing), rep)
            write_run_dir(out / f"{mode}-rep{rep:02d}", report)
            reports[mode].append(report)
            if not report.valid:
                failures.append(f"{mode}-rep{rep:02d}: {report.error}")

    summary = {
        "problem": cfg.problem,
        "output_dir": str(out),
        "runs": 2 * cfg.repetitions,
        "failures": failures,
    }
    if problem.n_obj == 1:
        bests = {
            mode: [r.best_value() for r in mode_reports
                   if r.valid and r.best_value() is not None]
            for mode, mode_reports in reports.items()
        }
        write_boxplot_csv(out / "boxplot.csv", bests)
        summary["boxplot"] = str(out / "boxplot.csv")
        summary["median_best"] = {
            mode: float(np.median(values)) if values else None
            for mode, values in bests.items()
        }
    else:
        rows: dict[str, dict[str, float]] = {}
        for measure in _METRIC_ORDER:
            by_mode = {}
            for mode, mode_reports in reports.items():
                values = [r.metrics_row[measure] for r in mode_reports
                          if r.valid and r.metrics_row
                          and measure in r.metrics_row]
                if values:
                    by_mode[mode] = float(np.median(values))
            if by_mode:
                rows[measure] = by_mode
        write_metrics_csv(out / "metrics.csv", rows)
        summary["metrics"] = str(out / "metrics.csv")
    return summary
