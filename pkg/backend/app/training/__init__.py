"""
Training: run configuration, Adam, the epoch loop and checkpoint bundles.
"""

from .schema import NetworkCheckpoint, RunResult, RunStatus, TaskName, TrainConfig
from .trainer import passes_filter, train

__all__ = [
    "NetworkCheckpoint",
    "RunResult",
    "RunStatus",
    "TaskName",
    "TrainConfig",
    "passes_filter",
    "train",
]
