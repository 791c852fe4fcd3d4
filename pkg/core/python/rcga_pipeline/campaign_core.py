"""
Core campaign orchestration.
Runs single-run, scaling, drift, phase and verification campaigns from an ExperimentConfig,
writes their artifacts and evaluates the config's acceptance checks.
"""

import os
from dataclasses import dataclass, field
from fractions import Fraction
from multiprocessing import get_context
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from core.python.rcga_pipeline.artifacts_core import (
    DECOMPOSED_COLUMNS,
    DRIFT_COLUMNS,
    PHASE_RATIOS_COLUMNS,
    PHASES_COLUMNS,
    RUNS_COLUMNS,
    SCALING_COLUMNS,
    SCALING_RUNS_COLUMNS,
    VERIFY_COLUMNS,
    plot_phase_retention,
    plot_scaling,
    write_csv,
    write_summary,
)
from core.python.rcga_pipeline.campaign_config import ExperimentConfig
from core.python.rcga_pipeline.eda_core import (
    RNG_ALGORITHM,
    TRACE_FULL,
    TRACE_MASSES,
    TRACE_NONE,
    new_frequency_matrix,
    run,
)
from core.python.rcga_pipeline.errors import ConfigError, InvalidParameterError, MatrixCorruptionError
from core.python.rcga_pipeline.fitness_core import make_objective
from core.python.rcga_pipeline.hierarchy_core import (
    PhaseRecord,
    PhaseTracker,
    build_hierarchy,
    phases_from_masses,
    suffix_numerators,
)
from core.python.rcga_pipeline.instrumentation_core import decompose, replay_masses
from core.python.rcga_pipeline.theory_oracles import (
    VIOLATED,
    BoundReport,
    adak_witt_bound,
    phase_retention_factor,
    rcga_on_gom_bound,
    run_oracle,
)
from core.python.shared.shared_logger import logger

EXIT_SUCCESS = 0
EXIT_CONFIG_ERROR = 2
EXIT_PRECONDITION_ERROR = 3
EXIT_ACCEPTANCE_FAILURE = 4

EXIT_CODES = {
    ConfigError: EXIT_CONFIG_ERROR,
    InvalidParameterError: EXIT_PRECONDITION_ERROR,
    MatrixCorruptionError: EXIT_PRECONDITION_ERROR,
}


def exit_code_for(error: Exception) -> Optional[int]:
    """Exit status for a campaign error; None for errors the CLI should not translate."""
    for error_type, code in EXIT_CODES.items():
        if isinstance(error, error_type):
            return code
    return None


@dataclass
class CampaignOutcome:
    kind: str
    summary: Dict[str, object]
    checks: Dict[str, bool] = field(default_factory=dict)
    artifacts: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    @property
    def exit_code(self) -> int:
        return EXIT_SUCCESS if self.passed else EXIT_ACCEPTANCE_FAILURE


@dataclass(frozen=True)
class ReplicaTask:
    replica: int
    seed: int
    n: int
    r: int
    K: int
    objective: str
    max_iterations: int
    trace_level: str = TRACE_NONE
    check_invariants: bool = False
    position: int = 0
    suffix_start: Optional[int] = None
    horizon: Optional[int] = None


@dataclass(frozen=True)
class ReplicaResult:
    replica: int
    seed: int
    iterations: int
    found: bool
    invariant_violations: int = 0


@dataclass
class ScalingRow:
    n: int
    r: int
    K: int
    replicas: int
    median_iterations: float
    q1_iterations: float
    q3_iterations: float
    success_fraction: float
    normalized: Optional[float]
    comparator: float
    flagged: bool

    def as_row(self) -> list:
        return [self.n, self.r, self.K, self.replicas, self.median_iterations, self.q1_iterations,
                self.q3_iterations, self.success_fraction, self.normalized, self.comparator, self.flagged]


@dataclass
class DriftReplica:
    replica: int
    seed: int
    position: int
    biased_steps: int
    random_walk_steps: int
    mu_start: Fraction
    mu_end: Fraction
    max_deviation: Fraction
    decomposition_consistent: bool
    decomposed_rows: List[tuple] = field(default_factory=list)


@dataclass
class PhaseReplica:
    replica: int
    seed: int
    iterations: int
    found: bool
    records: List[PhaseRecord]


def parallel_map(fn: Callable, tasks: Sequence, threads: int) -> list:
    """Map over tasks in task order, in spawned worker processes when threads > 1."""
    if threads <= 1 or len(tasks) <= 1:
        return [fn(task) for task in tasks]
    ctx = get_context("spawn")
    with ctx.Pool(processes=min(threads, len(tasks))) as pool:
        return pool.map(fn, tasks)


def _warn_applicability(n: int, r: int):
    if r ** 6 > n:
        logger.warning(f"r^6 = {r ** 6} exceeds n = {n}: the O(K sqrt(n) log n log r) guarantee may not apply")


class InvariantObserver:
    """Counts iterations after which a row leaves [0, K]^r / sum K or an entry moves by more than one."""

    def __init__(self, n: int, r: int, K: int):
        self.previous = new_frequency_matrix(n, r, K).counts.copy()
        self.violations = 0

    def __call__(self, t: int, m, step=None):
        try:
            m.check_invariants()
        except MatrixCorruptionError as e:
            self.violations += 1
            logger.warning(f"invariant violated after iteration {t}: {e}")
        if int(np.abs(m.counts - self.previous).max()) > 1:
            self.violations += 1
            logger.warning(f"a count moved by more than one at iteration {t}")
        np.copyto(self.previous, m.counts)


def _run_replica(task: ReplicaTask) -> ReplicaResult:
    objective = make_objective(task.objective, task.n, task.r)
    observer = InvariantObserver(task.n, task.r, task.K) if task.check_invariants else None
    result = run(task.n, task.r, task.K, objective, task.max_iterations, task.seed, observer=observer)
    return ReplicaResult(replica=task.replica, seed=task.seed, iterations=result.iterations_used,
                         found=result.optimum_found,
                         invariant_violations=observer.violations if observer is not None else 0)


def _replica_tasks(config: ExperimentConfig, **extra) -> List[ReplicaTask]:
    tasks = []
    for n, r, K in config.cells():
        _warn_applicability(n, r)
        max_iterations = config.max_iterations(n, r, K)
        logger.info(f"Cell n={n} r={r} K={K}: {config.repetitions} replica(s), max {max_iterations} iterations")
        for replica, seed in enumerate(config.seeds()):
            tasks.append(ReplicaTask(replica=replica, seed=seed, n=n, r=r, K=K, objective=config.objective,
                                     max_iterations=max_iterations, **extra))
    return tasks


# ---------------------------------------------------------------------------
# Studies (pure computation)
# ---------------------------------------------------------------------------

def run_study(config: ExperimentConfig, threads: int = 1) -> List[Tuple[ReplicaTask, ReplicaResult]]:
    tasks = _replica_tasks(config, check_invariants=bool(config.acceptance.get("exact_invariants", False)))
    return list(zip(tasks, parallel_map(_run_replica, tasks, threads)))


def scaling_row(n: int, r: int, K: int, iterations: Sequence[int], found: Sequence[bool]) -> ScalingRow:
    q1, median, q3 = (float(value) for value in np.percentile(np.asarray(iterations, dtype=float), [25, 50, 75]))
    success = sum(bool(value) for value in found) / len(found)
    bound = rcga_on_gom_bound(n, r, K)
    return ScalingRow(n=n, r=r, K=K, replicas=len(iterations), median_iterations=median, q1_iterations=q1,
                      q3_iterations=q3, success_fraction=success,
                      normalized=median / bound if bound > 0 else None,
                      comparator=adak_witt_bound(n, r, K), flagged=success < 1)


def scaling_study(config: ExperimentConfig, threads: int = 1) -> Tuple[List[ScalingRow], list]:
    """
    One ScalingRow per (n, r, K) cell plus the per-replica rows behind it.

    Cells whose success fraction is below 1 are flagged and kept.
    """
    pairs = run_study(config, threads)
    rows = []
    replica_rows = []
    for n, r, K in config.cells():
        cell = [(task, result) for task, result in pairs if (task.n, task.r, task.K) == (n, r, K)]
        row = scaling_row(n, r, K, [result.iterations for _, result in cell], [result.found for _, result in cell])
        if row.flagged:
            logger.warning(f"Cell n={n} r={r} K={K} flagged: success fraction {row.success_fraction:.3f}")
        rows.append(row)
        replica_rows += [[n, r, K, task.replica, task.seed, result.iterations, result.found] for task, result in cell]
    return rows, replica_rows


def normalized_spread(rows: Sequence[ScalingRow]) -> Dict[int, Optional[float]]:
    """Per r: max / min of the normalized statistic across n."""
    spread = {}
    for r in sorted({row.r for row in rows}):
        values = [row.normalized for row in rows if row.r == r and row.normalized]
        spread[r] = max(values) / min(values) if values else None
    return spread


def _drift_replica(task: ReplicaTask) -> DriftReplica:
    objective = make_objective(task.objective, task.n, task.r)
    result = run(task.n, task.r, task.K, objective, task.max_iterations, task.seed, trace_level=TRACE_FULL)
    position = task.position
    biased = sum(bool(step.biased[position]) for step in result.trace)
    series = replay_masses(result, position, task.suffix_start)
    mu_start = series[0]
    horizon = len(result.trace) if task.horizon is None else min(task.horizon, len(result.trace))
    decomposed = decompose(result, position, task.suffix_start, 0, horizon)
    consistent = decomposed.total_change == series[horizon] - mu_start
    return DriftReplica(replica=task.replica, seed=task.seed, position=position, biased_steps=biased,
                        random_walk_steps=len(result.trace) - biased, mu_start=mu_start, mu_end=series[-1],
                        max_deviation=max(abs(mu - mu_start) for mu in series),
                        decomposition_consistent=consistent,
                        decomposed_rows=decomposed.rows() if task.replica == 0 else [])


def drift_study(config: ExperimentConfig, threads: int = 1) -> List[DriftReplica]:
    """Full-trace runs; per replica the biased / random-walk split at the tracked position."""
    n, r = config.n_values[0], config.r_values[0]
    if not 0 <= config.drift_position < n:
        raise InvalidParameterError(f"DRIFT_POSITION={config.drift_position} outside [0..{n - 1}]")
    suffix_start = r // 2 if config.drift_suffix_start is None else config.drift_suffix_start
    if not 0 <= suffix_start <= r - 1:
        raise InvalidParameterError(f"DRIFT_SUFFIX_START={suffix_start} outside [0..{r - 1}]")
    tasks = _replica_tasks(config, trace_level=TRACE_FULL, position=config.drift_position,
                           suffix_start=suffix_start, horizon=config.drift_horizon)
    return parallel_map(_drift_replica, tasks, threads)


def _phase_replica(task: ReplicaTask) -> PhaseReplica:
    h = build_hierarchy(task.r)
    objective = make_objective(task.objective, task.n, task.r)
    initial_suffix = suffix_numerators(new_frequency_matrix(task.n, task.r, task.K).counts, h.starts)
    if task.trace_level == TRACE_MASSES:
        result = run(task.n, task.r, task.K, objective, task.max_iterations, task.seed, trace_level=TRACE_MASSES)
        records = phases_from_masses(initial_suffix, result.trace, h)
    else:
        tracker = PhaseTracker(h, task.n)
        tracker.start(initial_suffix)
        result = run(task.n, task.r, task.K, objective, task.max_iterations, task.seed,
                     observer=tracker.observe_matrix)
        records = tracker.finish()
    return PhaseReplica(replica=task.replica, seed=task.seed, iterations=result.iterations_used,
                        found=result.optimum_found, records=records)


def phase_study(config: ExperimentConfig, threads: int = 1) -> List[PhaseReplica]:
    """Per replica the phases of every position (traced online, or from masses-only records)."""
    level = TRACE_MASSES if config.trace_level == TRACE_MASSES else TRACE_NONE
    return parallel_map(_phase_replica, _replica_tasks(config, trace_level=level), threads)


def phase_retention(replicas: Sequence[PhaseReplica], kappa_star: int) -> Tuple[int, int, List[float]]:
    """
    (pairs, retained, relative ratios) over finished, non-skipped phases.

    A (position, phase) pair counts as retained if every applicable nu kept at least
    (1 - 1/kappa*)^3 of its start-of-phase ratio.
    """
    factor = phase_retention_factor(kappa_star)
    pairs = retained = 0
    relative = []
    for replica in replicas:
        for record in replica.records:
            if record.skipped or record.end is None:
                continue
            verdicts = [value for value in record.retention(factor).values() if value is not None]
            if not verdicts:
                continue
            pairs += 1
            retained += all(verdicts)
            for nu, start_ratio in record.ratios_start.items():
                end_ratio = record.ratios_end.get(nu)
                if start_ratio and end_ratio is not None:
                    relative.append(float(end_ratio / start_ratio))
    return pairs, retained, relative


def verify(config: ExperimentConfig) -> List[BoundReport]:
    """Run every configured oracle verifier; an empty oracle list gives an empty report."""
    reports = []
    for name in config.oracles:
        logger.info(f"Verifying oracle '{name}'...")
        reports += run_oracle(name, config.oracle_settings.get(name), seed=config.base_seed,
                              significance=config.significance)
    return reports


# ---------------------------------------------------------------------------
# Campaigns (studies + artifacts + acceptance)
# ---------------------------------------------------------------------------

def _run_campaign(config: ExperimentConfig, out_dir: str, threads: int, emit_plots: bool) -> CampaignOutcome:
    pairs = run_study(config, threads)
    rows = [[task.replica, task.seed, task.n, task.r, task.K, task.objective, result.iterations, result.found]
            for task, result in pairs]
    path = os.path.join(out_dir, "runs.csv")
    write_csv(path, RUNS_COLUMNS, rows)

    found = sum(result.found for _, result in pairs)
    violations = sum(result.invariant_violations for _, result in pairs)
    success = found / len(pairs)
    iterations = [result.iterations for _, result in pairs]
    summary = {"replicas": len(pairs), "optimum_found": found == len(pairs), "success_fraction": success,
               "median_iterations": float(np.median(iterations)), "max_iterations_used": max(iterations),
               "evaluations": 2 * sum(iterations)}
    checks = {}
    if "min_success_fraction" in config.acceptance:
        checks["min_success_fraction"] = success >= float(config.acceptance["min_success_fraction"])
    if config.acceptance.get("exact_invariants"):
        summary["invariant_violations"] = violations
        checks["exact_invariants"] = violations == 0
    return CampaignOutcome(kind="run", summary=summary, checks=checks, artifacts=[path])


def _scaling_campaign(config: ExperimentConfig, out_dir: str, threads: int, emit_plots: bool) -> CampaignOutcome:
    rows, replica_rows = scaling_study(config, threads)
    artifacts = [os.path.join(out_dir, "scaling_runs.csv"), os.path.join(out_dir, "scaling.csv")]
    write_csv(artifacts[0], SCALING_RUNS_COLUMNS, replica_rows)
    write_csv(artifacts[1], SCALING_COLUMNS, [row.as_row() for row in rows])
    if emit_plots:
        artifacts.append(os.path.join(out_dir, "scaling.svg"))
        plot_scaling(rows, artifacts[-1])

    spread = normalized_spread(rows)
    summary = {"cells": len(rows), "flagged_cells": sum(row.flagged for row in rows)}
    for r, value in spread.items():
        summary[f"normalized_spread.r{r}"] = value
    checks = {}
    if "min_success_fraction" in config.acceptance:
        threshold = float(config.acceptance["min_success_fraction"])
        checks["min_success_fraction"] = all(row.success_fraction >= threshold for row in rows)
    if "max_normalized_spread" in config.acceptance:
        limit = float(config.acceptance["max_normalized_spread"])
        checks["max_normalized_spread"] = all(value is not None and value <= limit for value in spread.values())
    return CampaignOutcome(kind="scaling", summary=summary, checks=checks, artifacts=artifacts)


def _drift_campaign(config: ExperimentConfig, out_dir: str, threads: int, emit_plots: bool) -> CampaignOutcome:
    replicas = drift_study(config, threads)
    artifacts = [os.path.join(out_dir, "drift.csv"), os.path.join(out_dir, "decomposed.csv")]
    write_csv(artifacts[0], DRIFT_COLUMNS,
              [[rep.replica, rep.seed, rep.position, rep.biased_steps, rep.random_walk_steps, rep.mu_start,
                rep.mu_end, rep.max_deviation] for rep in replicas])
    write_csv(artifacts[1], DECOMPOSED_COLUMNS, replicas[0].decomposed_rows if replicas else [])

    max_biased = max((rep.biased_steps for rep in replicas), default=0)
    summary = {"replicas": len(replicas), "max_biased_steps": max_biased,
               "max_deviation": max((rep.max_deviation for rep in replicas), default=Fraction(0)),
               "decomposition_consistent": all(rep.decomposition_consistent for rep in replicas)}
    checks = {"decomposition_consistent": summary["decomposition_consistent"]}
    if "max_biased_steps" in config.acceptance:
        checks["max_biased_steps"] = max_biased <= int(config.acceptance["max_biased_steps"])
    return CampaignOutcome(kind="drift", summary=summary, checks=checks, artifacts=artifacts)


def _phases_campaign(config: ExperimentConfig, out_dir: str, threads: int, emit_plots: bool) -> CampaignOutcome:
    h = build_hierarchy(config.r_values[0])
    replicas = phase_study(config, threads)
    factor = phase_retention_factor(h.kappa_star)

    phase_rows = []
    ratio_rows = []
    initial_ratios = []
    for rep in replicas:
        for record in rep.records:
            nu = record.kappa + 1
            phase_rows.append([rep.replica, record.position, record.kappa, record.start, record.end, record.skipped,
                               record.ratios_start.get(nu), record.ratios_end.get(nu)])
            retention = record.retention(factor)
            for nu, start_ratio in sorted(record.ratios_start.items()):
                ratio_rows.append([rep.replica, record.position, record.kappa, nu, start_ratio,
                                   record.ratios_end.get(nu), retention[nu]])
                if record.start == 0 and start_ratio is not None:
                    initial_ratios.append(start_ratio)

    artifacts = [os.path.join(out_dir, "phases.csv"), os.path.join(out_dir, "phase_ratios.csv")]
    write_csv(artifacts[0], PHASES_COLUMNS, phase_rows)
    write_csv(artifacts[1], PHASE_RATIOS_COLUMNS, ratio_rows)

    pairs, retained, relative = phase_retention(replicas, h.kappa_star)
    if emit_plots:
        artifacts.append(os.path.join(out_dir, "phases.svg"))
        plot_phase_retention(relative, factor, artifacts[-1])

    fraction = retained / pairs if pairs else None
    summary = {"replicas": len(replicas), "kappa_star": h.kappa_star, "retention_factor": factor,
               "phase_pairs": pairs, "retained_pairs": retained, "retention_fraction": fraction,
               "optimum_found_replicas": sum(rep.found for rep in replicas),
               "min_initial_ratio": min(initial_ratios) if initial_ratios else None}
    checks = {}
    if "min_retention_fraction" in config.acceptance:
        checks["min_retention_fraction"] = (fraction is not None
                                            and fraction >= float(config.acceptance["min_retention_fraction"]))
    if "min_initial_ratio" in config.acceptance:
        threshold = Fraction(str(config.acceptance["min_initial_ratio"]))
        checks["min_initial_ratio"] = bool(initial_ratios) and min(initial_ratios) >= threshold
    return CampaignOutcome(kind="phases", summary=summary, checks=checks, artifacts=artifacts)


def _verify_campaign(config: ExperimentConfig, out_dir: str, threads: int, emit_plots: bool) -> CampaignOutcome:
    reports = verify(config)
    path = os.path.join(out_dir, "verify.csv")
    write_csv(path, VERIFY_COLUMNS, [[report.oracle, report.parameters_json(), report.bound_value,
                                      report.empirical_value, report.samples, report.status]
                                     for report in reports])
    violated = sum(report.status == VIOLATED for report in reports)
    summary = {"reports": len(reports), "violations": violated,
               "oracles": ",".join(config.oracles)}
    checks = {"max_violations": violated <= int(config.acceptance.get("max_violations", 0))}
    return CampaignOutcome(kind="verify", summary=summary, checks=checks, artifacts=[path])


CAMPAIGNS = {
    "run": _run_campaign,
    "scaling": _scaling_campaign,
    "drift": _drift_campaign,
    "phases": _phases_campaign,
    "verify": _verify_campaign,
}


def run_campaign(config: ExperimentConfig, out_dir: str, threads: int = 1, emit_plots: bool = False) -> CampaignOutcome:
    """
    Run the campaign the config describes and write its artifacts into out_dir.

    Args:
        config: Validated ExperimentConfig
        out_dir: Artifact directory (created if missing)
        threads: Worker processes for independent replicas
        emit_plots: Also write an SVG chart (scaling and phase campaigns)

    Returns:
        CampaignOutcome; its exit_code is 0 iff every acceptance check passed
    """
    logger.info("=" * 60)
    logger.info(f"Starting {config.kind} campaign '{config.name}' (base seed {config.base_seed}, {threads} worker(s))")
    logger.info("=" * 60)
    os.makedirs(out_dir, exist_ok=True)

    outcome = CAMPAIGNS[config.kind](config, out_dir, threads, emit_plots)
    outcome.summary.update({"kind": config.kind, "config": config.name, "base_seed": config.base_seed,
                            "repetitions": config.repetitions, "rng_algorithm": RNG_ALGORITHM,
                            "status": "passed" if outcome.passed else "failed"})
    for name, passed in outcome.checks.items():
        outcome.summary[f"check.{name}"] = "pass" if passed else "fail"
    summary_path = os.path.join(out_dir, "summary.txt")
    write_summary(summary_path, outcome.summary)
    outcome.artifacts.append(summary_path)

    logger.info("=" * 60)
    for name, passed in sorted(outcome.checks.items()):
        logger.info(f"Acceptance {name}: {'pass' if passed else 'FAIL'}")
    logger.info(f"Campaign {config.kind} finished: {outcome.summary['status']}")
    logger.info("=" * 60)
    return outcome
