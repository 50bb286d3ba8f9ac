"""
Checkpoint Analysis

Turns a NetworkCheckpoint into a MetricRecord and keeps records in a
MetricsTable, a pandas frame with a fixed column order and CSV form.
"""

import logging
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Iterable, List, Optional, Union

import numpy as np
import pandas as pd

from ..core.constraints import communicability
from ..core.embedding import DistanceLattice, build_lattice
from ..core.errors import DegenerateVarianceError, InvalidInputError
from ..core.numerics import eigenvalues
from ..core.settings import LabSettings, get_settings
from ..training.schema import NetworkCheckpoint
from .measures import (
    distance_weight_correlation,
    imag_fraction,
    leading_eigenvalue,
    shannon_entropy,
    spectral_entropy,
    symmetry_index,
    total_weight,
)
from .modularity import modularity_q

logger = logging.getLogger(__name__)

KEY_COLUMNS = ["kind", "gamma", "seed", "epoch"]


@dataclass
class MetricRecord:
    """Every outcome measure of one network at one epoch."""
    kind: str
    gamma: float
    seed: int
    epoch: int
    accuracy: float
    Q: float
    H_W: float
    H_C: float
    H_lambda: float
    lambda_max: float
    total_weight: float
    sym_index: float
    imag_fraction: float
    dist_corr_r: float
    dist_corr_p: float

    def to_dict(self) -> dict:
        return asdict(self)


COLUMNS = [f.name for f in fields(MetricRecord)]


def analyze_checkpoint(
    checkpoint: NetworkCheckpoint,
    lattice: Optional[DistanceLattice] = None,
    permutations: Optional[int] = None,
    permutation_seed: Optional[int] = None,
    settings: Optional[LabSettings] = None,
) -> MetricRecord:
    """
    Compute every MetricRecord field from the checkpoint's W_rec.

    Distance correlation falls back to NaN when W has equal weights or
    fewer than three non-zero connections. Entropy and symmetry of an
    all-zero W_rec propagate their errors.
    """
    settings = settings or get_settings()
    if lattice is None:
        lattice = build_lattice(checkpoint.dims)
    if permutations is None:
        permutations = settings.stats.permutations
    if permutation_seed is None:
        permutation_seed = settings.stats.permutation_seed

    w = checkpoint.w_rec
    spectrum = eigenvalues(w)
    q, _ = modularity_q(w)

    try:
        r, p = distance_weight_correlation(w, lattice, permutations=permutations, seed=permutation_seed)
    except (DegenerateVarianceError, InvalidInputError) as e:
        logger.debug(f"distance correlation undefined for {checkpoint.key}: {e}")
        r, p = float("nan"), float("nan")

    return MetricRecord(
        kind=checkpoint.kind.value,
        gamma=float(checkpoint.gamma),
        seed=int(checkpoint.seed),
        epoch=int(checkpoint.epoch),
        accuracy=float(checkpoint.accuracy),
        Q=q,
        H_W=shannon_entropy(w),
        H_C=shannon_entropy(communicability(w, settings.constraints.epsilon_strength)),
        H_lambda=spectral_entropy(spectrum),
        lambda_max=leading_eigenvalue(spectrum),
        total_weight=total_weight(w),
        sym_index=symmetry_index(w),
        imag_fraction=imag_fraction(spectrum),
        dist_corr_r=r,
        dist_corr_p=p,
    )


class MetricsTable:
    """
    Records keyed by (kind, gamma, seed, epoch); a later record with the same
    key replaces the earlier one. Rows are kept sorted by key.
    """

    def __init__(self, frame: Optional[pd.DataFrame] = None):
        if frame is None:
            frame = pd.DataFrame(columns=COLUMNS)
        missing = [c for c in COLUMNS if c not in frame.columns]
        if missing:
            raise InvalidInputError(f"metrics table is missing columns {missing}")
        self._frame = self._normalise(frame[COLUMNS])

    @staticmethod
    def _normalise(frame: pd.DataFrame) -> pd.DataFrame:
        frame = frame.astype({
            "kind": str,
            "gamma": np.float64,
            "seed": np.int64,
            "epoch": np.int64,
        })
        floats = [c for c in COLUMNS if c not in ("kind", "seed", "epoch")]
        frame[floats] = frame[floats].astype(np.float64)
        frame = frame.drop_duplicates(subset=KEY_COLUMNS, keep="last")
        return frame.sort_values(KEY_COLUMNS, kind="mergesort").reset_index(drop=True)

    @property
    def frame(self) -> pd.DataFrame:
        return self._frame

    def __len__(self) -> int:
        return len(self._frame)

    def upsert(self, records: Iterable[MetricRecord]) -> "MetricsTable":
        rows = [r.to_dict() for r in records]
        if rows:
            new = pd.DataFrame(rows, columns=COLUMNS)
            combined = new if self._frame.empty else pd.concat([self._frame, new], ignore_index=True)
            self._frame = self._normalise(combined)
        return self

    def records(self) -> List[MetricRecord]:
        return [MetricRecord(**row) for row in self._frame.to_dict(orient="records")]

    def final_epoch(self) -> pd.DataFrame:
        """The last recorded epoch of every (kind, gamma, seed) run."""
        if self._frame.empty:
            return self._frame.copy()
        last = self._frame.groupby(["kind", "gamma", "seed"])["epoch"].transform("max")
        return self._frame[self._frame["epoch"] == last].reset_index(drop=True)

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        out = self._frame.copy()
        # Keys keep full precision so a reloaded table dedups against new records
        out["gamma"] = out["gamma"].map(lambda g: repr(float(g)))
        out.to_csv(path, index=False, float_format="%.9g", lineterminator="\n")
        return path

    @classmethod
    def from_csv(cls, path: Union[str, Path]) -> "MetricsTable":
        path = Path(path)
        if not path.exists():
            raise InvalidInputError(f"metrics file {path} does not exist")
        return cls(pd.read_csv(path, float_precision="round_trip"))
