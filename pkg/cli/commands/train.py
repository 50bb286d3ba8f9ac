"""
train - train one network and write its checkpoints.
"""

from pathlib import Path
from typing import Optional

import typer

from backend.app.core.constraints import RegularizerKind
from backend.app.training import TaskName, TrainConfig, train
from backend.app.training.checkpoint import run_dir_name

from ..utils.display import print_run
from ..utils.paths import claim_output


def train_cmd(
    out: Path = typer.Option(..., "--out", "-o", help="Directory receiving the run_* bundle"),
    kind: RegularizerKind = typer.Option(RegularizerKind.SE_SPACE_COMM, "--kind", "-k"),
    gamma: float = typer.Option(0.0, "--gamma", "-g", help="Regularisation strength (>= 0)"),
    seed: int = typer.Option(0, "--seed", min=0),
    task: TaskName = typer.Option(TaskName.INFERENCE, "--task", "-t"),
    epochs: Optional[int] = typer.Option(None, "--epochs", min=0),
    learning_rate: Optional[float] = typer.Option(None, "--lr"),
    batch_size: Optional[int] = typer.Option(None, "--batch-size", min=1),
    data_seed: int = typer.Option(0, "--data-seed", min=0, help="Seed of the synthetic spike task"),
    train_data: Optional[Path] = typer.Option(None, "--train-data", help="Spike event file (shd)"),
    test_data: Optional[Path] = typer.Option(None, "--test-data", help="Spike event file (shd)"),
    force: bool = typer.Option(False, "--force", help="Replace an existing run directory"),
):
    """Train one network, checkpointing every epoch."""
    if not gamma >= 0:
        raise typer.BadParameter(f"gamma must be >= 0, got {gamma}", param_hint="'--gamma'")

    config = TrainConfig(
        kind=kind,
        gamma=gamma,
        seed=seed,
        task=task,
        epochs=epochs,
        learning_rate=learning_rate,
        batch_size=batch_size,
        data_seed=data_seed,
        train_data=train_data,
        test_data=test_data,
    )
    run_dir = claim_output(Path(out) / run_dir_name(kind, gamma, seed), force)
    result = train(config, out_dir=run_dir)
    print_run(result)
