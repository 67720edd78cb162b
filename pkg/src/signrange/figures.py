"""Matplotlib renderings written alongside the delimited artifacts.

All figures go straight to files through the Agg backend with pinned
metadata, so identical inputs give identical bytes.
"""

from __future__ import annotations

from typing import Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

SCATTER_LIMIT = 200_000  # above this, render a density image instead


def _png_metadata() -> dict:
    from .fileio import TOOL_NAME, tool_version
    return {"Software": f"{TOOL_NAME} {tool_version()}"}


def _finish(fig, path) -> None:
    fig.savefig(path, dpi=130, metadata=_png_metadata())
    plt.close(fig)


def save_points_figure(path, points: np.ndarray, title: str,
                       extent: Optional[tuple[float, float, float, float]] = None) -> None:
    """Scatter for small clouds, 2-d histogram image for large ones."""
    fig, ax = plt.subplots(figsize=(6.0, 6.0))
    if points.size > SCATTER_LIMIT:
        rng = extent or (float(points.real.min()), float(points.real.max()),
                         float(points.imag.min()), float(points.imag.max()))
        hist, _, _ = np.histogram2d(points.real, points.imag, bins=512,
                                    range=((rng[0], rng[1]), (rng[2], rng[3])))
        ax.imshow(hist.T, origin="lower", extent=rng, cmap="viridis", aspect="equal")
    else:
        ax.plot(points.real, points.imag, ".", markersize=2, color="#30507a")
        ax.set_aspect("equal")
        if extent is not None:
            ax.set_xlim(extent[0], extent[1])
            ax.set_ylim(extent[2], extent[3])
    ax.set_xlabel("re")
    ax.set_ylabel("im")
    ax.set_title(title)
    _finish(fig, path)


def save_profile_figure(path, thetas, masses, title: str) -> None:
    fig, ax = plt.subplots(figsize=(6.5, 4.0))
    ax.plot(thetas, masses, "o-", markersize=3, color="#30507a")
    ax.set_xlabel("direction angle")
    ax.set_ylabel("directional mass")
    ax.set_title(title)
    _finish(fig, path)


def save_curve_figure(path, xs, ys, title: str, xlabel: str, ylabel: str,
                      logy: bool = False) -> None:
    fig, ax = plt.subplots(figsize=(6.5, 4.0))
    plot = ax.semilogy if logy else ax.plot
    plot(xs, ys, "o-", markersize=3, color="#30507a")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    _finish(fig, path)
