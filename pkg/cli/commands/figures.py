"""
figures - write a figure extract CSV from a metrics table.
"""

from pathlib import Path
from typing import List, Optional

import typer

from backend.app.harness import FIGURES, figure_data
from backend.app.harness.figures import write_extract
from backend.app.metrics import MetricsTable
from backend.app.training import TaskName

from ..utils.display import console
from ..utils.paths import claim_output


def figures_cmd(
    metrics: Path = typer.Option(..., "--metrics", "-m", exists=True, dir_okay=False, help="metrics CSV"),
    which: str = typer.Option(..., "--which", help=f"One of {', '.join(FIGURES)}"),
    out: Path = typer.Option(..., "--out", "-o", help="Extract CSV"),
    task: TaskName = typer.Option(TaskName.INFERENCE, "--task", "-t", help="Selects the accuracy filter"),
    runs: Optional[Path] = typer.Option(None, "--runs", file_okay=False, help="run_* bundles, for weight-based figures"),
    percent: Optional[List[float]] = typer.Option(None, "--percent", help="fig5c gamma percentages (repeatable)"),
    force: bool = typer.Option(False, "--force", help="Overwrite --out"),
):
    """Extract the data behind one figure."""
    if which not in FIGURES:
        raise typer.BadParameter(f"unknown figure {which!r}; choose from {', '.join(FIGURES)}", param_hint="'--which'")
    path = claim_output(out, force)
    extract = figure_data(MetricsTable.from_csv(metrics), which, task, runs_root=runs, percentages=percent or None)
    write_extract(extract, path)
    console.print(f"Wrote {len(extract)} rows of {which} to {path}")
