"""
Checkpoint Store

On-disk layout of one run:

    run_<kind>_<gamma>_<seed>/
        run.json                 status of the finished run (resume marker)
        epoch_<k>/
            manifest.json        NetworkCheckpoint.manifest()
            <param>.f32          little-endian float32, row-major

Writing is deterministic: no timestamps, sorted JSON keys, fixed float
formatting, so write -> read -> write reproduces the bytes exactly.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from ..core.constraints import RegularizerKind
from ..core.errors import CheckpointError
from .schema import CHECKPOINT_FORMAT_VERSION, NetworkCheckpoint, RunResult, TaskName

logger = logging.getLogger(__name__)

MANIFEST_FILE = "manifest.json"
RUN_FILE = "run.json"
_DTYPE = np.dtype("<f4")


def run_dir_name(kind: RegularizerKind, gamma: float, seed: int) -> str:
    return f"run_{RegularizerKind(kind).value}_{float(gamma)!r}_{int(seed)}"


def epoch_dir_name(epoch: int) -> str:
    return f"epoch_{int(epoch)}"


def as_stored(values: np.ndarray) -> np.ndarray:
    """Round to the stored float32 precision, returned as float64."""
    return np.asarray(values, dtype=np.float64).astype(_DTYPE).astype(np.float64)


def _dump_json(data: Dict[str, Any], path: Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, sort_keys=True)
        f.write("\n")


def write_checkpoint(checkpoint: NetworkCheckpoint, run_dir: Union[str, Path]) -> Path:
    """Write one epoch bundle under run_dir; returns the epoch directory."""
    epoch_dir = Path(run_dir) / epoch_dir_name(checkpoint.epoch)
    epoch_dir.mkdir(parents=True, exist_ok=True)
    for name, arr in checkpoint.params.items():
        np.ascontiguousarray(arr, dtype=_DTYPE).tofile(epoch_dir / f"{name}.f32")
    _dump_json(checkpoint.manifest(), epoch_dir / MANIFEST_FILE)
    return epoch_dir


def read_checkpoint(epoch_dir: Union[str, Path]) -> NetworkCheckpoint:
    """
    Load one epoch bundle.

    Raises:
        CheckpointError: missing files, unknown format, or size mismatches
    """
    epoch_dir = Path(epoch_dir)
    manifest_path = epoch_dir / MANIFEST_FILE
    try:
        with open(manifest_path, "r", encoding="utf-8") as f:
            manifest = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise CheckpointError(f"cannot read {manifest_path}: {e}") from e

    if manifest.get("format_version") != CHECKPOINT_FORMAT_VERSION:
        raise CheckpointError(f"{manifest_path}: unsupported format version {manifest.get('format_version')}")

    params = {}
    for name, spec in manifest.get("arrays", {}).items():
        path = epoch_dir / spec["file"]
        shape = tuple(spec["shape"])
        try:
            raw = np.fromfile(path, dtype=_DTYPE)
        except OSError as e:
            raise CheckpointError(f"cannot read {path}: {e}") from e
        if raw.size != int(np.prod(shape)):
            raise CheckpointError(f"{path}: {raw.size} values, manifest expects shape {shape}")
        params[name] = raw.reshape(shape).astype(np.float64)

    try:
        return NetworkCheckpoint(
            kind=RegularizerKind(manifest["kind"]),
            gamma=float(manifest["gamma"]),
            seed=int(manifest["seed"]),
            epoch=int(manifest["epoch"]),
            task=TaskName(manifest["task"]),
            accuracy=float(manifest["accuracy"]),
            task_loss=float(manifest["task_loss"]),
            constraint_loss=float(manifest["constraint_loss"]),
            dims=tuple(manifest["dims"]),
            params=params,
            constants=dict(manifest.get("constants", {})),
        )
    except (KeyError, ValueError) as e:
        raise CheckpointError(f"{manifest_path}: invalid manifest ({e})") from e


def list_epoch_dirs(run_dir: Union[str, Path]) -> List[Path]:
    """Epoch directories with a manifest, in epoch order."""
    run_dir = Path(run_dir)
    found = []
    for p in run_dir.glob("epoch_*"):
        suffix = p.name[len("epoch_"):]
        if suffix.isdigit() and (p / MANIFEST_FILE).exists():
            found.append((int(suffix), p))
    return [p for _, p in sorted(found)]


def read_run(run_dir: Union[str, Path]) -> List[NetworkCheckpoint]:
    return [read_checkpoint(p) for p in list_epoch_dirs(run_dir)]


def find_run_dirs(root: Union[str, Path]) -> List[Path]:
    """Every run directory below root, sorted by name."""
    root = Path(root)
    return sorted(p for p in root.rglob("run_*") if p.is_dir() and list_epoch_dirs(p))


def write_run_status(result: RunResult, run_dir: Union[str, Path]) -> Path:
    path = Path(run_dir) / RUN_FILE
    path.parent.mkdir(parents=True, exist_ok=True)
    _dump_json(result.to_dict(), path)
    return path


def read_run_status(run_dir: Union[str, Path]) -> Optional[Dict[str, Any]]:
    """The run.json contents, or None for an unfinished or corrupt run."""
    path = Path(run_dir) / RUN_FILE
    if not path.exists():
        return None
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        logger.warning(f"Ignoring unreadable {path}: {e}")
        return None
