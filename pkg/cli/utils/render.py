"""
SVG Rendering

Turns a figure extract CSV into a static, self-contained SVG.

Design Philosophy:
- The extract's `figure` column picks the layout; `style` can override how
  the same columns are drawn
- Output is byte-deterministic: fixed hash salt, no date metadata, text kept
  as <text> elements
- An empty extract still renders, as a labeled empty plot
"""

import io
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import matplotlib

matplotlib.use("Agg")

import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402
from matplotlib.patches import Circle  # noqa: E402

from backend.app.core.errors import InvalidInputError  # noqa: E402

logger = logging.getLogger(__name__)

STYLES = ("line", "scatter", "complex", "hist", "matrix")

KIND_COLORS = {
    "l1": "#7f7f7f",
    "sernn": "#d62728",
    "space": "#1f77b4",
    "comm": "#2ca02c",
}

_RC = {
    "svg.hashsalt": "sernn-lab",
    "svg.fonttype": "none",
    "path.simplify": False,
}


@dataclass(frozen=True)
class Layout:
    style: str
    x: str
    y: str
    xlabel: str
    ylabel: str
    ln_y: bool = False


LAYOUTS = {
    "fig2a": Layout("line", "epoch", "mean", "epoch", "modularity Q"),
    "fig2b": Layout("line", "epoch", "mean", "epoch", "weight entropy H(W)"),
    "fig4a": Layout("line", "epoch", "mean", "epoch", "communicability entropy H(C)"),
    "fig2c": Layout("scatter", "Q", "H_W", "modularity Q", "weight entropy H(W)"),
    "fig3a": Layout("scatter", "total_weight", "H_W", "total weight", "weight entropy H(W)"),
    "fig3b": Layout("hist", "bin_left", "fraction", "log10 p", "fraction of connections"),
    "fig3c": Layout("scatter", "distance", "p", "Euclidean distance", "connection probability p"),
    "fig4b": Layout("matrix", "col", "row", "presynaptic neuron", "postsynaptic neuron"),
    "fig4c": Layout("scatter", "gamma", "share", "gamma", "top-connection communicability share"),
    "fig5a": Layout("scatter", "gamma", "lambda_max", "gamma", "lambda max (ln scale)", ln_y=True),
    "fig5b": Layout("scatter", "gamma", "H_lambda", "gamma", "spectral entropy H(lambda)"),
    "fig5c": Layout("complex", "re", "im", "Re(lambda)", "Im(lambda)"),
}

_DEFAULT_LAYOUT = Layout("scatter", "x", "y", "x", "y")


def _color(kind: str) -> str:
    return KIND_COLORS.get(str(kind), "#000000")


def _draw_line(ax, frame: pd.DataFrame, layout: Layout) -> None:
    for kind, group in frame.groupby("kind", sort=True):
        group = group.sort_values(layout.x)
        x = group[layout.x].to_numpy(dtype=float)
        y = group[layout.y].to_numpy(dtype=float)
        ax.plot(x, y, color=_color(kind), label=str(kind))
        if "two_se" in group:
            band = group["two_se"].to_numpy(dtype=float)
            ok = np.isfinite(band)
            if ok.any():
                band = np.nan_to_num(band)
                ax.fill_between(x, y - band, y + band, where=ok, color=_color(kind), alpha=0.2, linewidth=0)


def _draw_scatter(ax, frame: pd.DataFrame, layout: Layout) -> None:
    if layout.ln_y:
        frame = frame[frame[layout.y] > 0]
        ax.set_yscale("log", base=np.e)
    for kind, group in frame.groupby("kind", sort=True):
        ax.scatter(group[layout.x], group[layout.y], s=14, color=_color(kind), label=str(kind))


def _draw_hist(ax, frame: pd.DataFrame, layout: Layout) -> None:
    dashes = ("dotted", "dashed", "solid")
    for kind, per_kind in frame.groupby("kind", sort=True):
        epochs = sorted(per_kind["epoch"].unique())
        for rank, epoch in enumerate(epochs):
            group = per_kind[per_kind["epoch"] == epoch].sort_values("bin_left")
            centers = (group["bin_left"] + group["bin_right"]) / 2.0
            ax.step(centers, group[layout.y], where="mid", color=_color(kind),
                    linestyle=dashes[max(0, len(dashes) - len(epochs) + rank)], label=f"{kind} epoch {epoch}")


def _draw_complex(ax, frame: pd.DataFrame, layout: Layout) -> None:
    ax.add_patch(Circle((0.0, 0.0), 1.0, fill=False, linestyle="--", linewidth=0.8, color="#555555"))
    series = frame.groupby(["kind", "percent"], sort=True) if "percent" in frame else frame.groupby("kind", sort=True)
    for i, (key, group) in enumerate(series):
        kind, label = (key[0], f"{key[0]} {key[1]:g}%") if isinstance(key, tuple) else (key, str(key))
        ax.scatter(group[layout.x], group[layout.y], s=10, color=_color(kind),
                   marker="osD^v<>"[i % 7], alpha=0.7, label=label)
    ax.set_aspect("equal", adjustable="datalim")
    ax.axhline(0.0, color="#bbbbbb", linewidth=0.5)


def _draw_matrix(ax, frame: pd.DataFrame, layout: Layout) -> None:
    """One vector heatmap per (kind, matrix), kinds down the rows."""
    fig = ax.figure
    title = ax.get_title()
    ax.set_axis_off()
    ax.set_title("")
    fig.suptitle(title)
    panels = list(frame.groupby(["kind", "matrix"], sort=True))
    kinds = sorted(frame["kind"].unique())
    names = sorted(frame["matrix"].unique(), reverse=True)
    grid = ax.get_subplotspec().subgridspec(len(kinds), len(names), hspace=0.5, wspace=0.4)
    for (kind, name), group in panels:
        sub = fig.add_subplot(grid[kinds.index(kind), names.index(name)])
        n_rows = int(group[layout.y].max()) + 1
        n_cols = int(group[layout.x].max()) + 1
        m = np.full((n_rows, n_cols), np.nan)
        m[group[layout.y].to_numpy(dtype=int), group[layout.x].to_numpy(dtype=int)] = group["value"].to_numpy(dtype=float)
        sub.pcolormesh(m, cmap="viridis", rasterized=False)
        sub.invert_yaxis()
        sub.set_aspect("equal")
        label = "|W|" if name == "W" else name
        sub.set_title(f"{kind} {label} (max {np.nanmax(m):.3g})", fontsize="small")
        sub.tick_params(labelsize="x-small")


_DRAWERS = {
    "line": _draw_line,
    "scatter": _draw_scatter,
    "hist": _draw_hist,
    "complex": _draw_complex,
    "matrix": _draw_matrix,
}


def _layout_for(frame: pd.DataFrame, style: Optional[str]) -> Layout:
    figures = frame["figure"].dropna().unique() if "figure" in frame else []
    layout = LAYOUTS.get(str(figures[0]), _DEFAULT_LAYOUT) if len(figures) else _DEFAULT_LAYOUT
    if style is not None:
        if style not in STYLES:
            raise InvalidInputError(f"unknown plot style {style!r}; choose from {', '.join(STYLES)}")
        layout = Layout(style, layout.x, layout.y, layout.xlabel, layout.ylabel, layout.ln_y)
    return layout


def render_svg(extract: Union[str, Path, pd.DataFrame], style: Optional[str] = None) -> str:
    """
    Render one figure extract to an SVG document.

    Args:
        extract: CSV path or an already loaded extract
        style: line, scatter, complex, hist or matrix; None follows the figure

    Raises:
        InvalidInputError: unknown style, or the columns the layout needs are missing
    """
    frame = extract if isinstance(extract, pd.DataFrame) else pd.read_csv(extract)
    layout = _layout_for(frame, style)
    title = str(frame["figure"].iloc[0]) if "figure" in frame and len(frame) else "empty extract"

    fig = Figure(figsize=(6.0, 4.5))
    ax = fig.subplots()
    ax.set_xlabel(layout.xlabel)
    ax.set_ylabel(layout.ylabel)
    ax.set_title(title)

    if frame.empty:
        ax.text(0.5, 0.5, "no data", ha="center", va="center", transform=ax.transAxes)
        logger.warning("Rendering an empty extract")
    else:
        needed = {layout.x, layout.y, "kind"}
        if layout.style == "matrix":
            needed |= {"matrix", "value"}
        missing = sorted(needed - set(frame.columns))
        if missing:
            raise InvalidInputError(f"extract lacks columns {missing} for a {layout.style} plot")
        _DRAWERS[layout.style](ax, frame, layout)
        if ax.get_legend_handles_labels()[0]:
            ax.legend(fontsize="small", frameon=False)

    buf = io.StringIO()
    with matplotlib.rc_context(_RC):
        fig.savefig(buf, format="svg", metadata={"Date": None})
    return buf.getvalue()
