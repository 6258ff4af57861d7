"""Experiment harness: repeated randomized runs, CSV persistence, aggregation.

A cell is one (domain, problem, algorithm, w, c, g_r) combination run with
seeds seed_base .. seed_base + runs - 1.  Runs are isolated: each gets its
own goal environment, evaluator and tree.  CSV rows are written in sorted
(cell, run) order so identical inputs produce identically ordered output.
"""

from __future__ import annotations

import csv
import statistics
from dataclasses import dataclass, fields
from pathlib import Path

from .baselines import run_gfra, run_sastar
from .controller import AgentTrace, InternalError, MgpConfig, run_mgp
from .goal_dynamics import GoalDynamicsConfig, GoalEnvironment
from .grounding import GroundProblem, load_ground_problem

ALGORITHMS = ("sastar", "gfra", "mgp", "mgp-oc", "mgp-pf", "mgp-ocpf")

# Default parameters of the reference protocol; the desk profile is the
# scaled-down preset meant for CI-class machines.
PROFILES = {
    "paper": {"runs": 100, "timeout_s": 60.0},
    "desk": {"runs": 30, "timeout_s": 10.0},
}


@dataclass
class ExperimentRecord:
    """One simulation run's outcome, exactly one CSV row."""

    domain: str
    problem: str
    algorithm: str
    w: float
    c: float
    g_r: int
    run_id: int
    seed: int
    status: str
    cpu_time_ms: int
    executed_actions: int
    search_episodes: int
    expansions: int
    heuristic_calls: int
    goal_changes: int


CSV_COLUMNS = [f.name for f in fields(ExperimentRecord)]

_INT_COLUMNS = {
    "g_r",
    "run_id",
    "seed",
    "cpu_time_ms",
    "executed_actions",
    "search_episodes",
    "expansions",
    "heuristic_calls",
    "goal_changes",
}
_FLOAT_COLUMNS = {"w", "c"}


def write_csv(records: list[ExperimentRecord], path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for rec in records:
            writer.writerow([getattr(rec, col) for col in CSV_COLUMNS])


def read_csv(path) -> list[ExperimentRecord]:
    records = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV columns: {reader.fieldnames}")
        for row in reader:
            kwargs = {}
            for col in CSV_COLUMNS:
                value = row[col]
                if col in _INT_COLUMNS:
                    kwargs[col] = int(value)
                elif col in _FLOAT_COLUMNS:
                    kwargs[col] = float(value)
                else:
                    kwargs[col] = value
            records.append(ExperimentRecord(**kwargs))
    return records


@dataclass
class CellSummary:
    domain: str
    problem: str
    algorithm: str
    w: float
    c: float
    g_r: int
    runs: int
    success_rate: float
    mean_time_ms: float | None
    median_time_ms: float | None
    mean_executed: float | None


def aggregate(records: list[ExperimentRecord]) -> list[CellSummary]:
    """Per-cell summaries; time/length are averaged over successful runs only
    and absent (None) when a cell has no successes."""
    cells: dict[tuple, list[ExperimentRecord]] = {}
    for rec in records:
        key = (rec.domain, rec.problem, rec.algorithm, rec.w, rec.c, rec.g_r)
        cells.setdefault(key, []).append(rec)
    out = []
    for key in sorted(cells):
        group = cells[key]
        wins = [r for r in group if r.status == "success"]
        rate = len(wins) / len(group)
        if wins:
            times = [r.cpu_time_ms for r in wins]
            lengths = [r.executed_actions for r in wins]
            mean_t, median_t = statistics.mean(times), statistics.median(times)
            mean_len = statistics.mean(lengths)
        else:
            mean_t = median_t = mean_len = None
        out.append(CellSummary(*key, len(group), rate, mean_t, median_t, mean_len))
    return out


def algorithm_config(
    algorithm: str,
    weight: float = 1.0,
    delay_coefficient: float = 1.2,
    heuristic: str = "ff",
    timeout_s: float | None = 60.0,
    max_nodes: int | None = 4_000_000,
    max_expansions: int | None = None,
) -> MgpConfig:
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm: {algorithm}")
    return MgpConfig(
        weight=weight,
        delay_coefficient=delay_coefficient,
        oc_enabled=algorithm in ("mgp-oc", "mgp-ocpf"),
        pf_enabled=algorithm in ("mgp-pf", "mgp-ocpf"),
        heuristic=heuristic,
        cpu_budget_s=timeout_s,
        max_nodes=max_nodes,
        max_expansions=max_expansions,
    )


def _runner(algorithm: str):
    if algorithm == "sastar":
        return run_sastar
    if algorithm == "gfra":
        return run_gfra
    return run_mgp


def run_single(
    problem: GroundProblem,
    algorithm: str,
    cfg: MgpConfig,
    g_r: int,
    seed: int,
    run_id: int,
    evolution: bool = True,
    trace_path=None,
    trace_sink: list | None = None,
) -> ExperimentRecord:
    env = GoalEnvironment(
        problem.actions, problem.goal, GoalDynamicsConfig(g_r, seed=seed, enabled=evolution)
    )
    try:
        trace = _runner(algorithm)(problem, cfg, env)
    except InternalError:
        # A controller invariant broke; the run is over but the cell goes on.
        trace = AgentTrace(
            algorithm=algorithm,
            domain=problem.domain_name,
            problem=problem.problem_name,
            weight=cfg.weight,
            delay_coefficient=cfg.delay_coefficient,
            heuristic=cfg.heuristic,
            goal_rate=g_r,
            seed=seed,
            status="failure",
        )
    if trace_path is not None:
        trace.write(trace_path)
    if trace_sink is not None:
        trace_sink.append(trace)
    return ExperimentRecord(
        domain=problem.domain_name,
        problem=problem.problem_name,
        algorithm=algorithm,
        w=cfg.weight,
        c=cfg.delay_coefficient,
        g_r=g_r,
        run_id=run_id,
        seed=seed,
        status=trace.status,
        cpu_time_ms=trace.cpu_time_ms,
        executed_actions=len(trace.executed),
        search_episodes=trace.search_episodes,
        expansions=trace.expansions,
        heuristic_calls=trace.heuristic_calls,
        goal_changes=trace.goal_changes,
    )


def run_cell(
    problem: GroundProblem,
    algorithm: str,
    g_r: int,
    runs: int,
    seed_base: int = 0,
    weight: float = 1.0,
    delay_coefficient: float = 1.2,
    heuristic: str = "ff",
    timeout_s: float | None = 60.0,
    max_nodes: int | None = 4_000_000,
    max_expansions: int | None = None,
    evolution: bool = True,
    trace_dir=None,
    trace_sink: list | None = None,
) -> list[ExperimentRecord]:
    """`runs` isolated runs with consecutive seeds; errors never abort the cell."""
    cfg = algorithm_config(
        algorithm,
        weight=weight,
        delay_coefficient=delay_coefficient,
        heuristic=heuristic,
        timeout_s=timeout_s,
        max_nodes=max_nodes,
        max_expansions=max_expansions,
    )
    records = []
    for run_id in range(runs):
        trace_path = None
        if trace_dir is not None:
            name = f"{problem.problem_name}_{algorithm}_gr{g_r}_run{run_id}.trace"
            trace_path = Path(trace_dir) / name
        records.append(
            run_single(
                problem,
                algorithm,
                cfg,
                g_r,
                seed=seed_base + run_id,
                run_id=run_id,
                evolution=evolution,
                trace_path=trace_path,
                trace_sink=trace_sink,
            )
        )
    return records


def sort_records(records: list[ExperimentRecord]) -> list[ExperimentRecord]:
    return sorted(
        records,
        key=lambda r: (r.domain, r.problem, r.algorithm, r.w, r.c, r.g_r, r.run_id),
    )
