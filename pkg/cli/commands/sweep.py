"""
sweep - run the kinds x gammas x seeds harness and report directional checks.
"""

import shutil
from pathlib import Path
from typing import Optional

import typer

from backend.app.harness import directional_report, run_sweep
from backend.app.harness.runner import SWEEP_FILE, load_sweep_config
from backend.app.harness.schema import SweepConfig

from ..utils.display import console, print_claims, print_sweep

# Filled in by the harness or harmless to change between resumptions
_RESOLVED_FIELDS = {"gammas", "gamma_max", "workers"}


def _conflicts(previous: SweepConfig, requested: SweepConfig) -> list:
    fields = requested.model_fields_set - _RESOLVED_FIELDS
    conflicts = [f for f in sorted(fields) if getattr(previous, f) != getattr(requested, f)]
    for f in ("gammas", "gamma_max"):
        if f in requested.model_fields_set and getattr(previous, f) != getattr(requested, f):
            conflicts.append(f)
    return conflicts


def sweep_cmd(
    config: Path = typer.Option(..., "--config", "-c", exists=True, dir_okay=False, help="Sweep JSON"),
    out: Path = typer.Option(..., "--out", "-o", help="Sweep directory"),
    workers: Optional[int] = typer.Option(None, "--workers", "-w", min=1, help="Overrides SERNN_THREADS"),
    force: bool = typer.Option(False, "--force", help="Discard an existing sweep directory"),
):
    """
    Run a sweep. An existing --out with the same config resumes; a different
    config needs --force.
    """
    sweep_config = load_sweep_config(config)
    if workers is not None:
        sweep_config = sweep_config.model_copy(update={"workers": workers})

    previous_path = Path(out) / SWEEP_FILE
    if previous_path.exists():
        if force:
            shutil.rmtree(out)
        else:
            conflicts = _conflicts(load_sweep_config(previous_path), sweep_config)
            if conflicts:
                raise typer.BadParameter(
                    f"{out} holds a sweep with different {', '.join(conflicts)} (use --force to start over)",
                    param_hint="'--out'",
                )
            console.print(f"Resuming sweep in {out}")
    elif Path(out).is_dir() and any(Path(out).iterdir()):
        if not force:
            raise typer.BadParameter(f"{out} is not empty (use --force to overwrite)", param_hint="'--out'")
        shutil.rmtree(out)

    table, summary = run_sweep(sweep_config, out)
    print_sweep(summary)
    console.print(f"{len(table)} metric records in {Path(out) / 'metrics.csv'}")
    print_claims(directional_report(table, sweep_config.task))
