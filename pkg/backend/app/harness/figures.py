"""
Figure Extracts

Figure-ready data frames drawn from a MetricsTable (and, for the figures
that need weights, from the checkpoint tree). Every extract starts with a
`figure` column and is written as CSV for plotting.

Only networks whose final-epoch accuracy passes the task's filter take
part.
"""

import logging
from pathlib import Path
from typing import Callable, Dict, Optional, Sequence

import numpy as np
import pandas as pd

from ..core.constraints import RegularizerKind, communicability
from ..core.embedding import build_lattice
from ..core.errors import EmptySelectionError, InvalidInputError
from ..core.numerics import eigenvalues
from ..core.settings import LabSettings, get_settings
from ..metrics.analyze import MetricsTable
from ..metrics.measures import probability_distance_pairs
from ..training.checkpoint import epoch_dir_name, read_checkpoint, run_dir_name
from ..training.schema import NetworkCheckpoint, TaskName

logger = logging.getLogger(__name__)

FIGURES = (
    "fig2a", "fig2b", "fig2c", "fig3a", "fig3b", "fig3c",
    "fig4a", "fig4b", "fig4c", "fig5a", "fig5b", "fig5c",
)

# Figures that read weights from checkpoint bundles
NEEDS_CHECKPOINTS = {"fig3b", "fig3c", "fig4b", "fig4c", "fig5c"}

_TRAJECTORY_METRICS = {"fig2a": "Q", "fig2b": "H_W", "fig4a": "H_C"}


def filtered_frame(table: MetricsTable, task: TaskName, thresholds: Dict[str, float]) -> pd.DataFrame:
    """All epochs of the runs whose final-epoch accuracy exceeds the threshold."""
    threshold = thresholds[TaskName(task).value]
    final = table.final_epoch()
    passing = final[final["accuracy"] > threshold][["kind", "gamma", "seed"]]
    if passing.empty:
        raise EmptySelectionError(f"no network passes the {threshold:.2f} accuracy filter for {TaskName(task).value}")
    return table.frame.merge(passing, on=["kind", "gamma", "seed"], how="inner")


def _final_only(frame: pd.DataFrame) -> pd.DataFrame:
    last = frame.groupby(["kind", "gamma", "seed"])["epoch"].transform("max")
    return frame[frame["epoch"] == last].reset_index(drop=True)


def _trajectory(frame: pd.DataFrame, metric: str) -> pd.DataFrame:
    """Per kind and epoch: mean and two standard errors (blank below 2 networks)."""
    grouped = frame.groupby(["kind", "epoch"])[metric]
    out = grouped.agg(n="count", mean="mean", sd="std").reset_index()
    out["two_se"] = 2.0 * out["sd"] / np.sqrt(out["n"])
    out.loc[out["n"] < 2, "two_se"] = np.nan
    out.insert(2, "metric", metric)
    return out.drop(columns="sd")


def _scatter(frame: pd.DataFrame, columns: Sequence[str]) -> pd.DataFrame:
    return _final_only(frame)[["kind", "gamma", "seed", *columns]]


def _load(runs_root: Path, kind: str, gamma: float, seed: int, epoch: int) -> NetworkCheckpoint:
    return read_checkpoint(runs_root / run_dir_name(RegularizerKind(kind), gamma, seed) / epoch_dir_name(epoch))


def _representatives(frame: pd.DataFrame) -> pd.DataFrame:
    """
    One final-epoch run per kind: the lowest seed at the passing gamma
    closest to that kind's median passing gamma.
    """
    final = _final_only(frame)
    picks = []
    for kind, group in final.groupby("kind", sort=True):
        gammas = np.sort(group["gamma"].unique())
        target = gammas[np.argmin(np.abs(gammas - np.median(gammas)))]
        at = group[group["gamma"] == target].sort_values("seed")
        picks.append(at.iloc[0])
    return pd.DataFrame(picks).reset_index(drop=True)


def _fig3b(frame: pd.DataFrame, runs_root: Path, settings: LabSettings) -> pd.DataFrame:
    """Histogram of log10 p_ij at early, middle and final epochs of representative runs."""
    rows = []
    for _, rep in _representatives(frame).iterrows():
        final_epoch = int(rep["epoch"])
        epochs = sorted({min(1, final_epoch), final_epoch // 2, final_epoch})
        logs = {}
        for epoch in epochs:
            c = _load(runs_root, rep["kind"], rep["gamma"], int(rep["seed"]), epoch)
            p, _ = probability_distance_pairs(c.w_rec, build_lattice(c.dims))
            logs[epoch] = np.log10(p)
        lo = min(v.min() for v in logs.values())
        hi = max(v.max() for v in logs.values())
        edges = np.linspace(lo, hi if hi > lo else lo + 1.0, settings.harness.fig3b_bins + 1)
        for epoch, values in logs.items():
            counts, _ = np.histogram(values, bins=edges)
            for i, n in enumerate(counts):
                rows.append({
                    "kind": rep["kind"], "gamma": rep["gamma"], "seed": int(rep["seed"]), "epoch": epoch,
                    "bin_left": edges[i], "bin_right": edges[i + 1], "count": int(n),
                    "fraction": n / values.size,
                })
    return pd.DataFrame(rows)


def _fig3c(frame: pd.DataFrame, runs_root: Path, settings: LabSettings) -> pd.DataFrame:
    """Per-connection (p_ij, D_ij) of the representative runs at their final epoch."""
    parts = []
    for _, rep in _representatives(frame).iterrows():
        c = _load(runs_root, rep["kind"], rep["gamma"], int(rep["seed"]), int(rep["epoch"]))
        p, d = probability_distance_pairs(c.w_rec, build_lattice(c.dims))
        parts.append(pd.DataFrame({
            "kind": rep["kind"], "gamma": rep["gamma"], "seed": int(rep["seed"]),
            "epoch": int(rep["epoch"]), "p": p, "distance": d,
        }))
    return pd.concat(parts, ignore_index=True)


def _fig4b(frame: pd.DataFrame, runs_root: Path, settings: LabSettings) -> pd.DataFrame:
    """
    |W| and C of one network per kind at matched gamma, in long form
    (matrix, row, col, value).

    The gamma is the largest one at which every kind has a passing network;
    the lowest passing seed is drawn there.

    Raises:
        EmptySelectionError: the kinds share no passing gamma
    """
    final = _final_only(frame)
    per_kind = [set(group["gamma"]) for _, group in final.groupby("kind", sort=True)]
    common = sorted(set.intersection(*per_kind))
    if not common:
        raise EmptySelectionError("fig4b needs a gamma at which every kind has a passing network")
    gamma = common[-1]

    parts = []
    for kind, group in final[final["gamma"] == gamma].groupby("kind", sort=True):
        r = group.sort_values("seed").iloc[0]
        c = _load(runs_root, kind, gamma, int(r["seed"]), int(r["epoch"]))
        n = c.w_rec.shape[0]
        rows, cols = np.divmod(np.arange(n * n), n)
        matrices = {
            "W": np.abs(c.w_rec),
            "C": communicability(c.w_rec, settings.constraints.epsilon_strength),
        }
        for name, m in matrices.items():
            parts.append(pd.DataFrame({
                "kind": kind, "gamma": float(gamma), "seed": int(r["seed"]), "epoch": int(r["epoch"]),
                "matrix": name, "row": rows, "col": cols, "value": m.ravel(),
            }))
    return pd.concat(parts, ignore_index=True)


def _fig4c(frame: pd.DataFrame, runs_root: Path, settings: LabSettings) -> pd.DataFrame:
    """Share of off-diagonal communicability carried by the strongest connections."""
    top = settings.harness.fig4c_top_fraction
    rows = []
    for _, r in _final_only(frame).iterrows():
        c = _load(runs_root, r["kind"], r["gamma"], int(r["seed"]), int(r["epoch"]))
        comm = communicability(c.w_rec, settings.constraints.epsilon_strength)
        values = np.sort(comm[~np.eye(comm.shape[0], dtype=bool)])[::-1]
        k = max(1, int(np.ceil(top * values.size)))
        rows.append({
            "kind": r["kind"], "gamma": r["gamma"], "seed": int(r["seed"]),
            "top_fraction": top, "share": values[:k].sum() / values.sum(),
        })
    return pd.DataFrame(rows)


def _fig5c(
    frame: pd.DataFrame,
    runs_root: Path,
    settings: LabSettings,
    grid_max: Dict[str, float],
    percentages: Optional[Sequence[float]] = None,
) -> pd.DataFrame:
    """
    Complex eigenvalues at the passing gamma closest to each percentage of the
    largest gamma in the sweep grid, passing or not.
    """
    percentages = settings.harness.fig5c_percentages if percentages is None else percentages
    final = _final_only(frame)
    rows = []
    for kind, group in final.groupby("kind", sort=True):
        gammas = np.sort(group["gamma"].unique())
        gamma_max = grid_max[kind]
        for pct in percentages:
            gamma = gammas[np.argmin(np.abs(gammas - pct / 100.0 * gamma_max))]
            r = group[group["gamma"] == gamma].sort_values("seed").iloc[0]
            c = _load(runs_root, kind, gamma, int(r["seed"]), int(r["epoch"]))
            for v in eigenvalues(c.w_rec):
                rows.append({
                    "kind": kind, "percent": float(pct), "gamma": float(gamma), "seed": int(r["seed"]),
                    "re": float(v.real), "im": float(v.imag),
                })
    return pd.DataFrame(rows)


def figure_data(
    table: MetricsTable,
    which: str,
    task: TaskName = TaskName.INFERENCE,
    runs_root: Optional[Path] = None,
    settings: Optional[LabSettings] = None,
    percentages: Optional[Sequence[float]] = None,
) -> pd.DataFrame:
    """
    Build one figure extract.

    Raises:
        InvalidInputError: unknown figure, or a weight-based figure without runs_root
        EmptySelectionError: no network passes the accuracy filter
    """
    if which not in FIGURES:
        raise InvalidInputError(f"unknown figure {which!r}; choose from {', '.join(FIGURES)}")
    if which in NEEDS_CHECKPOINTS and runs_root is None:
        raise InvalidInputError(f"{which} reads checkpoint weights; pass the runs directory")
    settings = settings or get_settings()

    frame = filtered_frame(table, task, settings.filters.thresholds)

    builders: Dict[str, Callable[[], pd.DataFrame]] = {
        "fig2c": lambda: _scatter(frame, ["Q", "H_W"]),
        "fig3a": lambda: _scatter(frame, ["total_weight", "H_W"]),
        "fig5a": lambda: _scatter(frame, ["lambda_max"]).assign(
            ln_lambda_max=lambda d: np.log(d["lambda_max"].where(d["lambda_max"] > 0))
        ),
        "fig5b": lambda: _scatter(frame, ["H_lambda"]),
        "fig3b": lambda: _fig3b(frame, Path(runs_root), settings),
        "fig3c": lambda: _fig3c(frame, Path(runs_root), settings),
        "fig4b": lambda: _fig4b(frame, Path(runs_root), settings),
        "fig4c": lambda: _fig4c(frame, Path(runs_root), settings),
        "fig5c": lambda: _fig5c(
            frame, Path(runs_root), settings, table.frame.groupby("kind")["gamma"].max().to_dict(), percentages
        ),
    }
    if which in _TRAJECTORY_METRICS:
        out = _trajectory(frame, _TRAJECTORY_METRICS[which])
    else:
        out = builders[which]()

    out = out.reset_index(drop=True)
    out.insert(0, "figure", which)
    logger.info(f"{which}: {len(out)} rows")
    return out


def write_extract(extract: pd.DataFrame, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    extract.to_csv(path, index=False, float_format="%.9g", lineterminator="\n")
    return path
