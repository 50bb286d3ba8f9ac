"""
Harness Schema

Sweep configuration (the JSON file behind `sernn sweep --config`) and the
result types of sweeps and group statistics.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..core.constraints import RegularizerKind
from ..training.schema import RunStatus, TaskName


class SweepConfig(BaseModel):
    """
    A grid of kinds x gammas x seeds trained on one task.

    Either list `gammas` explicitly or give `gamma_count` points from 0 to
    `gamma_max`; without `gamma_max` the harness calibrates it.

    Example JSON:
        {"kinds": ["l1", "sernn"], "gamma_count": 10, "gamma_max": 0.002,
         "seeds": 10, "task": "inference", "epochs": 10}
    """

    model_config = ConfigDict(extra="forbid")

    kinds: List[RegularizerKind] = Field(
        default_factory=lambda: [RegularizerKind.BASELINE_L1, RegularizerKind.SE_SPACE_COMM]
    )
    gammas: Optional[List[float]] = None
    gamma_count: Optional[int] = Field(None, ge=1)
    gamma_max: Optional[float] = Field(None, ge=0, allow_inf_nan=False)
    seeds: Optional[int] = Field(None, ge=1)
    seed_offset: int = Field(0, ge=0)
    task: TaskName = TaskName.INFERENCE
    epochs: Optional[int] = Field(None, ge=1)
    workers: Optional[int] = Field(None, ge=1)
    probe_seeds: Optional[int] = Field(None, ge=3)
    data_seed: int = Field(0, ge=0)
    train_data: Optional[str] = None
    test_data: Optional[str] = None

    @field_validator("kinds", mode="before")
    @classmethod
    def _expand_all(cls, value):
        if value == "all" or value == ["all"]:
            return list(RegularizerKind)
        return value

    @model_validator(mode="after")
    def _check_grid(self) -> "SweepConfig":
        if not self.kinds:
            raise ValueError("kinds must not be empty")
        if len(set(self.kinds)) != len(self.kinds):
            raise ValueError("kinds must not repeat")
        if self.gammas is not None:
            if not self.gammas:
                raise ValueError("gammas must not be empty")
            if any(g < 0 for g in self.gammas):
                raise ValueError("gammas must be >= 0")
        return self


@dataclass
class RunOutcome:
    """What happened to one (kind, gamma, seed) cell."""
    kind: str
    gamma: float
    seed: int
    status: RunStatus
    records: int = 0
    resumed: bool = False
    error: Optional[str] = None


@dataclass
class SweepSummary:
    """Per-cell outcomes plus the grid that was run."""
    gammas: List[float]
    outcomes: List[RunOutcome] = field(default_factory=list)
    gamma_max: Optional[float] = None

    def attrition(self) -> Dict[float, Dict[str, int]]:
        """Count of outcomes per gamma and status."""
        counts: Dict[float, Dict[str, int]] = {g: {} for g in self.gammas}
        for o in self.outcomes:
            bucket = counts.setdefault(o.gamma, {})
            bucket[o.status.value] = bucket.get(o.status.value, 0) + 1
        return counts


@dataclass
class GroupComparison:
    """Mann-Whitney comparison of one metric between two kinds."""
    metric: str
    kind_a: str
    kind_b: str
    median_a: float
    median_b: float
    u: float
    p: float
    n_a: int
    n_b: int
    alternative: str = "less"

    def to_dict(self) -> Dict[str, Any]:
        return dict(self.__dict__)


@dataclass
class ClaimCheck:
    """One direction-of-effect check on a populated table."""
    name: str
    statistic: float
    p: float
    passed: bool
    detail: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return dict(self.__dict__)
