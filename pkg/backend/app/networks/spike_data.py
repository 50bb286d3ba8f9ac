"""
Spike Event Data

Spike-train datasets in a portable JSON-lines format, event binning onto the
simulation grid, and a synthetic Poisson task that stands in for SHD.

File format (UTF-8, optionally gzip-compressed when the name ends in .gz):
    {"channels": 700, "classes": 20, "name": "shd-train"}      header line
    {"label": 3, "events": [[0.41, 17], [0.93, 250], ...]}     one per sample
"""

import gzip
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, List, Optional, Tuple, Union

import numpy as np

from ..core.errors import InvalidInputError
from ..core.numerics import RandomSource

logger = logging.getLogger(__name__)


@dataclass
class SpikeSample:
    """One labelled spike train."""
    label: int
    events: np.ndarray  # (E, 2): time in ms, channel id

    def to_dict(self) -> dict:
        return {
            "label": int(self.label),
            "events": [[float(t), int(c)] for t, c in self.events],
        }


@dataclass
class SpikeDataset:
    """A labelled set of spike trains over a fixed channel count."""

    samples: List[SpikeSample]
    channels: int
    classes: int
    name: str = ""
    # Channel templates of a synthetic task; not persisted
    templates: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.channels < 1 or self.classes < 1:
            raise InvalidInputError(
                f"dataset needs positive channel and class counts, got {self.channels}, {self.classes}"
            )
        for i, s in enumerate(self.samples):
            if not 0 <= s.label < self.classes:
                raise InvalidInputError(f"sample {i} label {s.label} outside [0, {self.classes})")
            if s.events.size:
                if np.any(s.events[:, 0] < 0):
                    raise InvalidInputError(f"sample {i} has a negative event time")
                ch = s.events[:, 1]
                if np.any(ch < 0) or np.any(ch >= self.channels) or np.any(ch != np.floor(ch)):
                    raise InvalidInputError(f"sample {i} has a channel id outside [0, {self.channels})")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def labels(self) -> np.ndarray:
        return np.array([s.label for s in self.samples], dtype=np.int64)

    def header(self) -> dict:
        return {"channels": self.channels, "classes": self.classes, "name": self.name}


def _events_array(raw) -> np.ndarray:
    if not raw:
        return np.zeros((0, 2))
    arr = np.asarray(raw, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InvalidInputError("events must be a list of [time_ms, channel] pairs")
    return arr


def _open(path: Path, mode: str) -> IO[str]:
    if path.name.endswith(".gz"):
        return gzip.open(path, mode + "t", encoding="utf-8")
    return open(path, mode, encoding="utf-8")


def read_spike_dataset(path: Union[str, Path]) -> SpikeDataset:
    """
    Load a JSON-lines spike dataset.

    Raises:
        InvalidInputError: missing header, malformed lines, or out-of-range events
    """
    path = Path(path)
    samples: List[SpikeSample] = []
    header = None
    with _open(path, "r") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise InvalidInputError(f"{path}:{lineno}: invalid JSON ({e})") from e
            if header is None:
                if "channels" not in record or "classes" not in record:
                    raise InvalidInputError(f"{path}: first line must be a header with channels and classes")
                header = record
                continue
            try:
                samples.append(SpikeSample(label=int(record["label"]), events=_events_array(record["events"])))
            except (KeyError, TypeError, ValueError) as e:
                raise InvalidInputError(f"{path}:{lineno}: malformed sample ({e})") from e

    if header is None:
        raise InvalidInputError(f"{path}: empty spike dataset")

    logger.info(f"Read {len(samples)} samples from {path}")
    return SpikeDataset(
        samples=samples,
        channels=int(header["channels"]),
        classes=int(header["classes"]),
        name=str(header.get("name", "")),
    )


def write_spike_dataset(dataset: SpikeDataset, path: Union[str, Path]) -> Path:
    """Write the dataset as JSON lines (gzip when the name ends in .gz)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with _open(path, "w") as f:
        f.write(json.dumps(dataset.header()) + "\n")
        for sample in dataset.samples:
            f.write(json.dumps(sample.to_dict()) + "\n")
    return path


def bin_events(
    dataset: SpikeDataset,
    dt_ms: float,
    max_steps: int,
) -> Tuple[np.ndarray, np.ndarray, int]:
    """
    Bin every sample onto a dt grid.

    An event at time t lands in step floor(t / dt); coincident events clamp
    to 1. Samples are zero-padded or truncated to max_steps.

    Returns:
        (inputs (max_steps, B, channels), labels (B,), dropped event count)
    """
    if dt_ms <= 0:
        raise InvalidInputError(f"dt must be positive, got {dt_ms}")
    if max_steps < 1:
        raise InvalidInputError(f"max_steps must be >= 1, got {max_steps}")

    inputs = np.zeros((max_steps, len(dataset), dataset.channels))
    dropped = 0
    for b, sample in enumerate(dataset.samples):
        if sample.events.size == 0:
            continue
        steps = np.floor(sample.events[:, 0] / dt_ms).astype(np.int64)
        channels = sample.events[:, 1].astype(np.int64)
        keep = steps < max_steps
        dropped += int(np.count_nonzero(~keep))
        inputs[steps[keep], b, channels[keep]] = 1.0

    if dropped:
        logger.warning(f"Dropped {dropped} events beyond {max_steps} steps of {dt_ms} ms in {dataset.name or 'dataset'}")
    return inputs, dataset.labels, dropped


def _poisson_train(gen: np.random.Generator, rates_hz: np.ndarray, duration_ms: float) -> np.ndarray:
    """Homogeneous Poisson events per channel, sorted by time."""
    counts = gen.poisson(rates_hz * duration_ms / 1000.0)
    total = int(counts.sum())
    if total == 0:
        return np.zeros((0, 2))
    channels = np.repeat(np.arange(len(rates_hz)), counts)
    times = gen.uniform(0.0, duration_ms, size=total)
    order = np.lexsort((channels, times))
    return np.stack([times[order], channels[order].astype(np.float64)], axis=1)


def gen_synthetic_spike_task(
    rng: RandomSource,
    classes: int = 5,
    channels: int = 20,
    samples_per_class: int = 40,
    duration_ms: float = 100.0,
    template_size: int = 8,
    template_rate_hz: float = 80.0,
    background_rate_hz: float = 8.0,
    name: str = "synthetic-spikes",
    split: int = 0,
) -> SpikeDataset:
    """
    Poisson spike-pattern classification.

    Each class owns a fixed random subset of `template_size` channels that
    fire at `template_rate_hz`; the others fire at `background_rate_hz`.
    Samples are ordered class by class. Templates depend only on the seed,
    so different `split` values give independent draws of the same task.
    """
    if classes < 2:
        raise InvalidInputError(f"synthetic task needs at least 2 classes, got {classes}")
    if not 1 <= template_size <= channels:
        raise InvalidInputError(f"template size {template_size} must be in [1, {channels}]")
    if samples_per_class < 1 or duration_ms <= 0:
        raise InvalidInputError("samples_per_class and duration_ms must be positive")

    template_gen = rng.child(0).generator
    templates = np.stack([
        np.sort(template_gen.choice(channels, size=template_size, replace=False))
        for _ in range(classes)
    ])

    for a in range(classes):
        for b in range(a + 1, classes):
            if set(templates[a]) == set(templates[b]):
                logger.warning(f"Synthetic classes {a} and {b} share an identical channel template")

    sample_gen = rng.child(1 + split).generator
    samples = []
    for c in range(classes):
        rates = np.full(channels, background_rate_hz, dtype=np.float64)
        rates[templates[c]] = template_rate_hz
        for _ in range(samples_per_class):
            samples.append(SpikeSample(label=c, events=_poisson_train(sample_gen, rates, duration_ms)))

    return SpikeDataset(samples=samples, channels=channels, classes=classes, name=name, templates=templates)
