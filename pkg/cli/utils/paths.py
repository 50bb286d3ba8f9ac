"""
Output path guard shared by every subcommand.
"""

import shutil
from pathlib import Path

import typer


def claim_output(path: Path, force: bool, flag: str = "--out") -> Path:
    """
    Make `path` safe to write.

    An existing file, or a non-empty directory, is only replaced with
    --force; otherwise the command fails as a usage error naming the flag.
    """
    path = Path(path)
    occupied = path.is_file() or (path.is_dir() and any(path.iterdir()))
    if occupied:
        if not force:
            raise typer.BadParameter(f"{path} already exists (use --force to overwrite)", param_hint=f"'{flag}'")
        if path.is_dir():
            shutil.rmtree(path)
        else:
            path.unlink()
    path.parent.mkdir(parents=True, exist_ok=True)
    return path
