"""
gen-task - write a spike classification dataset.
"""

from enum import Enum
from pathlib import Path
from typing import Optional

import typer

from backend.app.core.numerics import RandomSource
from backend.app.core.settings import get_settings
from backend.app.networks.spike_data import gen_synthetic_spike_task, write_spike_dataset

from ..utils.display import console
from ..utils.paths import claim_output


class Split(str, Enum):
    TRAIN = "train"
    TEST = "test"


def gen_task(
    out: Path = typer.Option(..., "--out", "-o", help="Dataset file (.jsonl or .jsonl.gz)"),
    task: str = typer.Option("synthetic-spikes", "--task", help="Task to generate"),
    seed: int = typer.Option(0, "--seed", min=0, help="Task seed; train and test splits share templates"),
    split: Split = typer.Option(Split.TRAIN, "--split", help="Which independent draw to write"),
    classes: Optional[int] = typer.Option(None, "--classes", min=2),
    channels: Optional[int] = typer.Option(None, "--channels", min=1),
    samples_per_class: Optional[int] = typer.Option(None, "--samples-per-class", min=1),
    duration_ms: Optional[float] = typer.Option(None, "--duration-ms", min=0.0),
    force: bool = typer.Option(False, "--force", help="Overwrite --out"),
):
    """Generate the synthetic spike-pattern task as a JSON-lines event file."""
    if task != "synthetic-spikes":
        raise typer.BadParameter(
            f"only synthetic-spikes can be generated; {task!r} data is produced elsewhere",
            param_hint="'--task'",
        )
    syn = get_settings().spiking.synthetic
    default_samples = syn.train_samples_per_class if split is Split.TRAIN else syn.test_samples_per_class
    dataset = gen_synthetic_spike_task(
        RandomSource(seed),
        classes=classes or syn.classes,
        channels=channels or syn.channels,
        samples_per_class=samples_per_class or default_samples,
        duration_ms=duration_ms or syn.duration_ms,
        template_size=min(syn.template_size, channels or syn.channels),
        template_rate_hz=syn.template_rate_hz,
        background_rate_hz=syn.background_rate_hz,
        split=0 if split is Split.TRAIN else 1,
    )
    path = write_spike_dataset(dataset, claim_output(out, force))
    console.print(f"Wrote {len(dataset)} samples ({dataset.classes} classes, {dataset.channels} channels) to {path}")
