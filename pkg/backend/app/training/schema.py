"""
Training Schema

Run configuration, run outcome and per-epoch checkpoint models shared by the
trainer, the checkpoint store and the sweep harness.
"""

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..core.constraints import RegularizerKind
from ..core.errors import InvalidInputError
from ..core.settings import LabSettings

CHECKPOINT_FORMAT_VERSION = 1


class TaskName(str, Enum):
    """Tasks a network can be trained on."""
    INFERENCE = "inference"
    SYNTHETIC_SPIKES = "synthetic-spikes"
    SHD = "shd"

    @property
    def family(self) -> str:
        """Network family that solves this task."""
        return "rate" if self is TaskName.INFERENCE else "spiking"


class RunStatus(str, Enum):
    """Outcome of a single training run."""
    COMPLETED = "completed"
    DIVERGED = "diverged"
    FAILED = "failed"


class TrainConfig(BaseModel):
    """
    One network's training recipe.

    Unset hyperparameters are filled from LabSettings by `resolved()`, so a
    config written to disk always records the values actually used.
    """

    model_config = ConfigDict(extra="forbid")

    kind: RegularizerKind = RegularizerKind.SE_SPACE_COMM
    gamma: float = Field(0.0, ge=0, allow_inf_nan=False)
    seed: int = Field(0, ge=0, lt=2 ** 64)
    task: TaskName = TaskName.INFERENCE
    epochs: Optional[int] = Field(None, ge=0)
    learning_rate: Optional[float] = Field(None, gt=0, allow_inf_nan=False)
    batch_size: Optional[int] = Field(None, ge=1)
    dims: Optional[Tuple[int, int, int]] = None
    # Seed of the synthetic spike task; shared across networks so they solve the same problem
    data_seed: int = Field(0, ge=0)
    train_data: Optional[Path] = None
    test_data: Optional[Path] = None

    @model_validator(mode="after")
    def _check_data_paths(self) -> "TrainConfig":
        if self.task is TaskName.SHD and (self.train_data is None or self.test_data is None):
            raise ValueError("the shd task needs both train_data and test_data")
        return self

    def resolved(self, settings: LabSettings) -> "TrainConfig":
        """Copy with every unset hyperparameter taken from settings."""
        family = settings.rate if self.task.family == "rate" else settings.spiking
        return self.model_copy(update={
            "epochs": family.epochs if self.epochs is None else self.epochs,
            "learning_rate": family.learning_rate if self.learning_rate is None else self.learning_rate,
            "batch_size": family.batch_size if self.batch_size is None else self.batch_size,
            "dims": tuple(settings.lattice.dims) if self.dims is None else self.dims,
        })


@dataclass
class NetworkCheckpoint:
    """
    Snapshot of one network at the end of an epoch (epoch 0 = untrained).

    Parameter arrays hold float32-representable float64 values, so the
    in-memory snapshot and its on-disk bundle analyse identically.
    """

    kind: RegularizerKind
    gamma: float
    seed: int
    epoch: int
    task: TaskName
    accuracy: float
    task_loss: float
    constraint_loss: float
    dims: Tuple[int, int, int]
    params: Dict[str, np.ndarray] = field(default_factory=dict)
    constants: Dict[str, float] = field(default_factory=dict)
    format_version: int = CHECKPOINT_FORMAT_VERSION

    def __post_init__(self):
        if not 0.0 <= self.accuracy <= 1.0:
            raise InvalidInputError(f"accuracy must be in [0, 1], got {self.accuracy}")
        if self.epoch < 0:
            raise InvalidInputError(f"epoch must be >= 0, got {self.epoch}")
        if "w_rec" in self.params:
            n = int(np.prod(self.dims))
            if self.params["w_rec"].shape != (n, n):
                raise InvalidInputError(
                    f"w_rec shape {self.params['w_rec'].shape} does not match lattice {self.dims}"
                )

    @property
    def w_rec(self) -> np.ndarray:
        return self.params["w_rec"]

    @property
    def key(self) -> Tuple[str, float, int, int]:
        return (self.kind.value, self.gamma, self.seed, self.epoch)

    def manifest(self) -> Dict[str, Any]:
        """JSON-ready description; array files are listed with their shapes."""
        return {
            "format_version": self.format_version,
            "kind": self.kind.value,
            "gamma": self.gamma,
            "seed": self.seed,
            "epoch": self.epoch,
            "task": self.task.value,
            "accuracy": self.accuracy,
            "task_loss": self.task_loss,
            "constraint_loss": self.constraint_loss,
            "dims": list(self.dims),
            "lattice": {"dims": list(self.dims), "n_neurons": int(np.prod(self.dims))},
            "constants": dict(self.constants),
            "arrays": {
                name: {"file": f"{name}.f32", "shape": list(arr.shape)}
                for name, arr in sorted(self.params.items())
            },
        }


@dataclass
class RunResult:
    """Everything one train() call produced."""

    config: TrainConfig
    status: RunStatus
    checkpoints: List[NetworkCheckpoint] = field(default_factory=list)
    error: Optional[str] = None
    run_dir: Optional[Path] = None

    @property
    def final(self) -> Optional[NetworkCheckpoint]:
        return self.checkpoints[-1] if self.checkpoints else None

    def to_dict(self) -> Dict[str, Any]:
        final = self.final
        return {
            "status": self.status.value,
            "error": self.error,
            "config": self.config.model_dump(mode="json"),
            "epochs_completed": final.epoch if final else None,
            "final_accuracy": final.accuracy if final else None,
        }
