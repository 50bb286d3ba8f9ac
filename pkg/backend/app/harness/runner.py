"""
Sweep Runner

Trains kinds x gammas x seeds, analyses every epoch checkpoint and keeps
the metrics table on disk.

Design Philosophy:
- Runs are independent jobs; workers share nothing and return records to a
  single writer (this process)
- A run directory with run.json is finished and never retrained, so an
  interrupted sweep resumes where it stopped
- One failing run is recorded and the sweep carries on
- Results do not depend on the worker count
"""

import logging
import shutil
from concurrent.futures import ProcessPoolExecutor, as_completed
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..core.constraints import RegularizerKind
from ..core.embedding import build_lattice
from ..core.errors import CalibrationError
from ..core.settings import LabSettings, get_settings, worker_count
from ..metrics.analyze import MetricRecord, MetricsTable, analyze_checkpoint
from ..training.checkpoint import find_run_dirs, read_run, read_run_status, run_dir_name
from ..training.schema import RunStatus, TaskName, TrainConfig
from ..training.trainer import passes_filter, train
from .schema import RunOutcome, SweepConfig, SweepSummary

logger = logging.getLogger(__name__)

METRICS_FILE = "metrics.csv"
RUNS_DIR = "runs"
SWEEP_FILE = "sweep.json"


def linear_grid(gamma_max: float, count: int) -> List[float]:
    """count evenly spaced values from 0 to gamma_max inclusive."""
    if count == 1:
        return [float(gamma_max)]
    return [float(g) for g in np.linspace(0.0, gamma_max, count)]


def _train_config(config: SweepConfig, kind: RegularizerKind, gamma: float, seed: int) -> TrainConfig:
    return TrainConfig(
        kind=kind,
        gamma=gamma,
        seed=seed,
        task=config.task,
        epochs=config.epochs,
        data_seed=config.data_seed,
        train_data=config.train_data,
        test_data=config.test_data,
    )


# =============================================================================
# CALIBRATION
# =============================================================================

def calibrate_gamma_max(
    kind: RegularizerKind,
    task: TaskName,
    probe_seeds: Optional[int] = None,
    settings: Optional[LabSettings] = None,
    base: Optional[SweepConfig] = None,
) -> float:
    """
    Largest probed gamma at which at least half the probe seeds still pass
    the accuracy filter.

    Gammas 1e-6 * 2^k are probed in order until fewer than half pass.

    Raises:
        CalibrationError: not even the first probe trains
    """
    settings = settings or get_settings()
    hs = settings.harness
    probe_seeds = probe_seeds or hs.probe_seeds
    if probe_seeds < 3:
        raise CalibrationError(f"calibration needs at least 3 probe seeds, got {probe_seeds}")
    base = base or SweepConfig(kinds=[kind], task=task)
    thresholds = settings.filters.thresholds

    last_good: Optional[float] = None
    history: List[Tuple[float, int]] = []
    for k in range(hs.probe_max_doublings + 1):
        gamma = hs.probe_start * 2.0 ** k
        passing = 0
        for seed in range(base.seed_offset, base.seed_offset + probe_seeds):
            result = train(_train_config(base, kind, gamma, seed), settings=settings)
            if result.status is RunStatus.COMPLETED and passes_filter(result.final, thresholds):
                passing += 1
        history.append((gamma, passing))
        logger.info(f"Calibration {kind.value}: gamma={gamma:g} passing {passing}/{probe_seeds}")
        if 2 * passing < probe_seeds:
            break
        last_good = gamma

    if last_good is None:
        probes = ", ".join(f"{g:g}: {n}/{probe_seeds}" for g, n in history)
        raise CalibrationError(f"no probed gamma trains {kind.value} on {task.value} ({probes})")
    return last_good


# =============================================================================
# JOBS
# =============================================================================

def _run_job(
    train_config: TrainConfig,
    run_dir: str,
    settings: LabSettings,
    resume: bool,
) -> Tuple[RunStatus, List[dict], Optional[str], bool]:
    """
    Train (or reload) one run and analyse all of its checkpoints.

    Module level so the process pool can pickle it.
    """
    path = Path(run_dir)
    status_doc = read_run_status(path) if resume else None
    if status_doc is not None:
        checkpoints = read_run(path)
        status = RunStatus(status_doc["status"])
        error = status_doc.get("error")
        resumed = True
    else:
        if path.exists():
            shutil.rmtree(path)
        result = train(train_config, out_dir=path, settings=settings)
        checkpoints, status, error, resumed = result.checkpoints, result.status, result.error, False

    lattice = build_lattice(train_config.resolved(settings).dims)
    records = [analyze_checkpoint(c, lattice, settings=settings).to_dict() for c in checkpoints]
    return status, records, error, resumed


def _completed_keys(table: MetricsTable) -> Dict[Tuple[str, float, int], int]:
    """Number of recorded epochs per (kind, gamma, seed)."""
    if len(table) == 0:
        return {}
    counts = table.frame.groupby(["kind", "gamma", "seed"]).size()
    return {(k, float(g), int(s)): int(n) for (k, g, s), n in counts.items()}


def run_sweep(
    config: SweepConfig,
    out_dir: Path,
    settings: Optional[LabSettings] = None,
) -> Tuple[MetricsTable, SweepSummary]:
    """
    Run every cell of the sweep into out_dir.

    Layout:
        out_dir/sweep.json      the resolved sweep config
        out_dir/metrics.csv     MetricsTable, rewritten after each finished run
        out_dir/runs/run_*/     checkpoint bundles

    Raises:
        CalibrationError: gamma_max had to be calibrated and could not be
    """
    settings = settings or get_settings()
    hs = settings.harness
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    gamma_max = config.gamma_max
    if config.gammas is not None:
        gammas = [float(g) for g in config.gammas]
    else:
        if gamma_max is None:
            gamma_max = min(
                calibrate_gamma_max(kind, config.task, config.probe_seeds, settings, config)
                for kind in config.kinds
            )
            logger.info(f"Calibrated gamma_max={gamma_max:g}")
        gammas = linear_grid(gamma_max, config.gamma_count or hs.gamma_count)

    seeds = list(range(config.seed_offset, config.seed_offset + (config.seeds or hs.seeds)))
    resolved = config.model_copy(update={"gammas": gammas, "gamma_max": gamma_max})
    with open(out_dir / SWEEP_FILE, "w", encoding="utf-8") as f:
        f.write(resolved.model_dump_json(indent=2) + "\n")

    metrics_path = out_dir / METRICS_FILE
    table = MetricsTable.from_csv(metrics_path) if metrics_path.exists() else MetricsTable()
    recorded = _completed_keys(table)
    summary = SweepSummary(gammas=gammas, gamma_max=gamma_max)

    jobs = []
    for kind in config.kinds:
        for gamma in gammas:
            for seed in seeds:
                run_dir = out_dir / RUNS_DIR / run_dir_name(kind, gamma, seed)
                status_doc = read_run_status(run_dir)
                if status_doc is not None and (kind.value, gamma, seed) in recorded:
                    summary.outcomes.append(RunOutcome(
                        kind=kind.value,
                        gamma=gamma,
                        seed=seed,
                        status=RunStatus(status_doc["status"]),
                        records=recorded[(kind.value, gamma, seed)],
                        resumed=True,
                        error=status_doc.get("error"),
                    ))
                    continue
                jobs.append((kind, gamma, seed, _train_config(config, kind, gamma, seed), str(run_dir)))

    workers = min(worker_count(config.workers), max(1, len(jobs)))
    logger.info(
        f"Sweep: {len(config.kinds)} kinds x {len(gammas)} gammas x {len(seeds)} seeds, "
        f"{len(jobs)} runs to do with {workers} workers"
    )

    def finish(job, status, records, error, resumed):
        kind, gamma, seed = job[:3]
        table.upsert(MetricRecord(**r) for r in records)
        table.to_csv(metrics_path)
        summary.outcomes.append(RunOutcome(
            kind=kind.value, gamma=gamma, seed=seed, status=status,
            records=len(records), resumed=resumed, error=error,
        ))

    def fail(job, e: Exception):
        kind, gamma, seed = job[:3]
        logger.error(f"Run {kind.value} gamma={gamma:g} seed={seed} failed: {e}")
        summary.outcomes.append(RunOutcome(
            kind=kind.value, gamma=gamma, seed=seed, status=RunStatus.FAILED, error=str(e),
        ))

    if workers == 1:
        for job in jobs:
            try:
                finish(job, *_run_job(job[3], job[4], settings, True))
            except Exception as e:
                fail(job, e)
    else:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            futures = {
                executor.submit(_run_job, job[3], job[4], settings, True): job
                for job in jobs
            }
            for future in as_completed(futures):
                job = futures[future]
                try:
                    finish(job, *future.result())
                except Exception as e:
                    fail(job, e)

    if not metrics_path.exists():
        table.to_csv(metrics_path)
    summary.outcomes.sort(key=lambda o: (o.kind, o.gamma, o.seed))
    return table, summary


def load_sweep_config(path: Path) -> SweepConfig:
    """Parse a sweep JSON file (pydantic ValidationError on bad content)."""
    with open(path, "r", encoding="utf-8") as f:
        return SweepConfig.model_validate_json(f.read())


def analyze_runs(runs_root: Path, settings: Optional[LabSettings] = None) -> MetricsTable:
    """Backfill a MetricsTable from every checkpoint bundle under runs_root."""
    settings = settings or get_settings()
    table = MetricsTable()
    lattices = {}
    for run_dir in find_run_dirs(runs_root):
        checkpoints = read_run(run_dir)
        for c in checkpoints:
            lattice = lattices.setdefault(tuple(c.dims), build_lattice(c.dims))
            table.upsert([analyze_checkpoint(c, lattice, settings=settings)])
        logger.info(f"Analysed {len(checkpoints)} checkpoints in {run_dir}")
    return table
