"""
Display utilities for the sernn CLI.
"""

import math
from typing import Iterable

from rich.console import Console
from rich.table import Table

console = Console()


def _fmt(value: float, spec: str = ".4g") -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "-"
    return format(value, spec)


def _status(passed: bool) -> str:
    return "[green]PASS[/green]" if passed else "[red]FAIL[/red]"


def print_run(result) -> None:
    """Per-epoch accuracy and losses of one training run."""
    table = Table(title=f"{result.config.kind.value} gamma={result.config.gamma:g} seed={result.config.seed}")
    table.add_column("Epoch", justify="right")
    table.add_column("Accuracy", justify="right")
    table.add_column("Task loss", justify="right")
    table.add_column("Constraint", justify="right")
    for c in result.checkpoints:
        table.add_row(str(c.epoch), f"{c.accuracy:.3f}", _fmt(c.task_loss), _fmt(c.constraint_loss))
    console.print(table)
    color = "green" if result.status.value == "completed" else "red"
    console.print(f"Status: [{color}]{result.status.value}[/{color}]")
    if result.error:
        console.print(f"[red]{result.error}[/red]")


def print_sweep(summary) -> None:
    """Run outcomes per gamma."""
    table = Table(title="Sweep outcomes")
    table.add_column("Gamma", justify="right")
    table.add_column("Completed", justify="right")
    table.add_column("Diverged", justify="right")
    table.add_column("Failed", justify="right")
    for gamma, counts in sorted(summary.attrition().items()):
        table.add_row(
            f"{gamma:.6g}",
            str(counts.get("completed", 0)),
            str(counts.get("diverged", 0)),
            str(counts.get("failed", 0)),
        )
    console.print(table)
    if summary.gamma_max is not None:
        console.print(f"gamma_max = {summary.gamma_max:.6g}")


def print_claims(checks: Iterable) -> None:
    """Direction-of-effect report."""
    table = Table(title="Directional checks")
    table.add_column("Check", style="cyan")
    table.add_column("Statistic", justify="right")
    table.add_column("p", justify="right")
    table.add_column("Status")
    table.add_column("Detail")
    for c in checks:
        table.add_row(c.name, _fmt(c.statistic), _fmt(c.p, ".3g"), _status(c.passed), c.detail)
    console.print(table)


def print_oracles(summary) -> None:
    """Selftest report: one row per oracle."""
    table = Table(title="Selftest")
    table.add_column("Oracle", style="cyan")
    table.add_column("Max error", justify="right")
    table.add_column("Tolerance", justify="right")
    table.add_column("Status")
    table.add_column("Detail")
    for r in summary.results:
        status = "[yellow]ERROR[/yellow]" if r.error else _status(r.passed)
        table.add_row(r.name, _fmt(r.max_error, ".2e"), f"{r.tolerance:.0e}", status, r.error or r.detail)
    console.print(table)
    console.print(f"{sum(r.passed for r in summary.results)}/{len(summary.results)} passed in {summary.elapsed_s:.1f}s")
