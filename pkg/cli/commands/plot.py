"""
plot - render a figure extract as SVG.
"""

from pathlib import Path
from typing import Optional

import typer

from ..utils.display import console
from ..utils.paths import claim_output
from ..utils.render import STYLES, render_svg


def plot_cmd(
    extract: Path = typer.Option(..., "--in", "-i", exists=True, dir_okay=False, help="Figure extract CSV"),
    out: Path = typer.Option(..., "--out", "-o", help="SVG file"),
    style: Optional[str] = typer.Option(None, "--style", help=f"Override the drawing: {', '.join(STYLES)}"),
    force: bool = typer.Option(False, "--force", help="Overwrite --out"),
):
    """Render a static SVG from an extract."""
    if style is not None and style not in STYLES:
        raise typer.BadParameter(f"unknown style {style!r}; choose from {', '.join(STYLES)}", param_hint="'--style'")
    svg = render_svg(extract, style)
    path = claim_output(out, force)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(svg)
    console.print(f"Wrote {path}")
