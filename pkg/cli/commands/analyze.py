"""
analyze - rebuild the metrics table from checkpoint bundles.
"""

from pathlib import Path

import typer

from backend.app.core.errors import EmptySelectionError
from backend.app.harness.runner import analyze_runs

from ..utils.display import console
from ..utils.paths import claim_output


def analyze_cmd(
    runs: Path = typer.Option(..., "--runs", "-r", exists=True, file_okay=False, help="Directory of run_* bundles"),
    out: Path = typer.Option(..., "--out", "-o", help="metrics CSV"),
    force: bool = typer.Option(False, "--force", help="Overwrite --out"),
):
    """Analyse every epoch checkpoint under --runs into a metrics CSV."""
    path = claim_output(out, force)
    table = analyze_runs(runs)
    if len(table) == 0:
        raise EmptySelectionError(f"no checkpoint bundles found under {runs}")
    table.to_csv(path)
    console.print(f"Wrote {len(table)} records to {path}")
