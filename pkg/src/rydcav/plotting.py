"""Static SVG rendering of spectra and correlation maps.

Figures are drawn on a bare ``Figure`` with the SVG canvas, so no global
pyplot state is touched.  A fixed hash salt and a null date make the SVG
bytes reproducible.
"""

from __future__ import annotations

import matplotlib
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.colors import LogNorm
from matplotlib.figure import Figure
import numpy as np

from .grid import SpectralGrid

_RC = {"svg.hashsalt": "rydcav", "svg.fonttype": "path", "path.simplify": False}


def _save(fig: Figure, path) -> None:
    FigureCanvasSVG(fig)
    with matplotlib.rc_context(_RC):
        fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})


def heatmap(grid: SpectralGrid, path, title: str = "", overlay=None, overlay_axis: str = "y") -> None:
    """Log-scale colour map of ``|values|`` for a 2-D grid.

    ``overlay`` is a list of ``(x, y)`` curves drawn on top, e.g. the
    +/- polariton energies.
    """
    if len(grid.axes) != 2:
        raise ValueError("heatmap needs a 2-D grid")
    x, y = grid.axes
    z = np.abs(grid.values).T
    positive = z[z > 0]
    fig = Figure(figsize=(6.0, 5.0))
    ax = fig.add_subplot()
    if positive.size:
        norm = LogNorm(vmin=max(positive.min(), positive.max() * 1e-8), vmax=positive.max())
        mesh = ax.pcolormesh(x, y, np.where(z > 0, z, np.nan), norm=norm, shading="nearest", rasterized=False)
        fig.colorbar(mesh, ax=ax)
    for cx, cy in overlay or ():
        ax.plot(cx, cy, color="white", lw=0.6, ls="--")
    ax.set_xlim(x.min(), x.max())
    ax.set_ylim(y.min(), y.max())
    ax.set_xlabel(grid.axis_names[0])
    ax.set_ylabel(grid.axis_names[1])
    if title:
        ax.set_title(title)
    _save(fig, path)


def line_plot(x, curves: dict, path, xlabel: str, ylabel: str, title: str = "", logy: bool = False) -> None:
    fig = Figure(figsize=(6.0, 4.0))
    ax = fig.add_subplot()
    for label, y in curves.items():
        ax.plot(x, y, label=label, lw=1.0)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if len(curves) > 1:
        ax.legend(frameon=False)
    _save(fig, path)
