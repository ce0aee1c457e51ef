"""Matplotlib rendering for report artifacts.

Figures are written next to the delimited outputs. PNG metadata that would
change between runs (writer software, timestamps) is stripped so identical
inputs produce identical bytes.
"""
from __future__ import annotations

import os
import tempfile
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .metrics import QGrid

_SAVEFIG_KWARGS = {"dpi": 150, "metadata": {"Software": None}}


def _atomic_savefig(fig, path: Path) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".png.tmp")
    try:
        with os.fdopen(fd, "wb") as handle:
            fig.savefig(handle, format="png", **_SAVEFIG_KWARGS)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    finally:
        plt.close(fig)


def render_qgrid(grid: QGrid, path, title: str) -> None:
    """Heat map of a Q surface; signed surfaces get a symmetric diverging scale."""
    fig, ax = plt.subplots(figsize=(5.0, 4.2))
    lo = float(grid.values.min())
    hi = float(grid.values.max())
    if lo < -1e-6:
        bound = max(abs(lo), abs(hi))
        mesh = ax.pcolormesh(grid.re_axis, grid.im_axis, grid.values,
                             cmap="RdBu_r", vmin=-bound, vmax=bound, shading="nearest")
    else:
        mesh = ax.pcolormesh(grid.re_axis, grid.im_axis, grid.values,
                             cmap="viridis", vmin=0.0, shading="nearest")
    fig.colorbar(mesh, ax=ax)
    ax.set_xlabel("Re beta")
    ax.set_ylabel("Im beta")
    ax.set_title(title)
    ax.set_aspect("equal")
    fig.tight_layout()
    _atomic_savefig(fig, path)


def render_records(steps: Sequence[int], distances: Sequence[float],
                   seq_probs: Sequence[float], path) -> None:
    """Distance and accumulated probability against measurement count."""
    fig, (ax_d, ax_p) = plt.subplots(1, 2, figsize=(8.0, 3.4))
    ax_d.plot(steps, distances, marker="o")
    ax_d.set_xlabel("measurement")
    ax_d.set_ylabel("distance to target")
    ax_d.set_ylim(bottom=0.0)
    ax_d.set_xticks(list(steps))
    ax_p.plot(steps, seq_probs, marker="o", color="tab:orange")
    ax_p.set_xlabel("measurement")
    ax_p.set_ylabel("sequence probability")
    ax_p.set_ylim(0.0, 1.05)
    ax_p.set_xticks(list(steps))
    fig.tight_layout()
    _atomic_savefig(fig, path)
