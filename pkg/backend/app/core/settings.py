"""
Lab Settings

Project-wide defaults for lattice geometry, network sizes, training
hyperparameters, accuracy filters and sweep sizes.

Design Philosophy:
- Defaults are stored in user-configurable YAML
- Search order: $SERNN_CONFIG, ~/.sernn/lab.yaml, ./config/lab.yaml, built-ins
- Every section is a validated pydantic model, so a typo fails loudly
"""

import os
import logging
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError

logger = logging.getLogger(__name__)

_CONFIG_FILENAME = "lab.yaml"


class StatsSettings(BaseModel):
    """Statistical primitives."""
    permutations: int = Field(10_000, ge=1)
    permutation_seed: int = 0


class LatticeSettings(BaseModel):
    """Neuron box geometry."""
    dims: Tuple[int, int, int] = (5, 5, 4)


class ConstraintSettings(BaseModel):
    """Communicability normalisation."""
    epsilon_strength: float = Field(1e-6, gt=0)


class RateSettings(BaseModel):
    """Rate RNN and the one-choice inference task."""
    epochs: int = Field(10, ge=0)
    learning_rate: float = Field(1e-3, gt=0)
    batch_size: int = Field(128, ge=1)
    trials_per_epoch: int = Field(6400, ge=1)
    eval_trials: int = Field(1000, ge=1)
    noise_std: float = Field(0.1, ge=0)
    spectral_radius: float = Field(0.9, gt=0)


class SyntheticSpikeSettings(BaseModel):
    """Desk-scale stand-in for SHD."""
    classes: int = Field(5, ge=2)
    channels: int = Field(20, ge=1)
    template_size: int = Field(8, ge=1)
    template_rate_hz: float = Field(80.0, gt=0)
    background_rate_hz: float = Field(8.0, ge=0)
    duration_ms: float = Field(100.0, gt=0)
    train_samples_per_class: int = Field(40, ge=1)
    test_samples_per_class: int = Field(20, ge=1)


class ShdSettings(BaseModel):
    """Binning for the real SHD event files."""
    dt_ms: float = Field(2.0, gt=0)
    max_steps: int = Field(500, ge=1)


class SpikingSettings(BaseModel):
    """LIF network defaults."""
    epochs: int = Field(50, ge=0)
    learning_rate: float = Field(1e-3, gt=0)
    batch_size: int = Field(32, ge=1)
    dt_ms: float = Field(0.5, gt=0)
    threshold: float = Field(1.0, gt=0)
    surrogate_steepness: float = Field(100.0, gt=0)
    tau_mean_ms: float = Field(20.0, gt=0)
    tau_shape: float = Field(3.0, gt=0)
    tau_max_ms: float = Field(100.0, gt=0)
    beta_max: float = Field(0.995, gt=0, le=1)
    input_scale: float = Field(1.5, gt=0)
    recurrent_scale: float = Field(0.5, ge=0)
    readout_scale: float = Field(1.0, gt=0)
    synthetic: SyntheticSpikeSettings = Field(default_factory=SyntheticSpikeSettings)
    shd: ShdSettings = Field(default_factory=ShdSettings)


class FilterSettings(BaseModel):
    """Accuracy thresholds a network must strictly exceed to be analysed."""
    thresholds: Dict[str, float] = Field(
        default_factory=lambda: {
            "inference": 0.90,
            "shd": 0.45,
            "synthetic-spikes": 0.60,
        }
    )


class HarnessSettings(BaseModel):
    """Sweep sizes and figure defaults."""
    gamma_count: int = Field(10, ge=1)
    seeds: int = Field(10, ge=1)
    probe_seeds: int = Field(3, ge=3)
    probe_start: float = Field(1e-6, gt=0)
    probe_max_doublings: int = Field(30, ge=0)
    fig5c_percentages: List[float] = Field(default_factory=lambda: [10.0, 20.0, 30.0, 40.0, 50.0])
    fig4c_top_fraction: float = Field(0.1, gt=0, le=1)
    fig3b_bins: int = Field(30, ge=1)


class LabSettings(BaseModel):
    """Complete lab configuration."""
    stats: StatsSettings = Field(default_factory=StatsSettings)
    lattice: LatticeSettings = Field(default_factory=LatticeSettings)
    constraints: ConstraintSettings = Field(default_factory=ConstraintSettings)
    rate: RateSettings = Field(default_factory=RateSettings)
    spiking: SpikingSettings = Field(default_factory=SpikingSettings)
    filters: FilterSettings = Field(default_factory=FilterSettings)
    harness: HarnessSettings = Field(default_factory=HarnessSettings)


def _search_paths() -> List[Path]:
    paths = []
    explicit = os.getenv("SERNN_CONFIG")
    if explicit:
        paths.append(Path(explicit))
    paths.append(Path.home() / ".sernn" / _CONFIG_FILENAME)
    paths.append(Path(__file__).parent.parent.parent.parent / "config" / _CONFIG_FILENAME)
    return paths


def load_settings(path: Optional[Path] = None) -> LabSettings:
    """
    Load settings from YAML.

    Args:
        path: Explicit file; when None the search order above is used

    Returns:
        Validated LabSettings (built-in defaults if nothing usable is found)
    """
    candidates = [path] if path is not None else _search_paths()

    for config_path in candidates:
        if not config_path.exists():
            continue
        try:
            with open(config_path, "r", encoding="utf-8") as f:
                data = yaml.safe_load(f) or {}
            settings = LabSettings.model_validate(data)
            logger.info(f"Loaded lab settings from {config_path}")
            return settings
        except (yaml.YAMLError, ValidationError) as e:
            logger.error(f"Failed to parse {config_path}: {e}")
            break

    logger.warning("No usable lab.yaml found, using built-in defaults")
    return LabSettings()


@lru_cache(maxsize=1)
def get_settings() -> LabSettings:
    """Get the process-wide settings."""
    load_dotenv(".env")
    return load_settings()


def worker_count(requested: Optional[int] = None) -> int:
    """Resolve sweep parallelism: explicit value, then SERNN_THREADS, then cores."""
    if requested is not None:
        return max(1, requested)
    env = os.getenv("SERNN_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            logger.warning(f"Ignoring non-integer SERNN_THREADS={env!r}")
    return os.cpu_count() or 1
