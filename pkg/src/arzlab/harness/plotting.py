"""Figures written next to the CSV and data outputs."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from ..field import Field2D  # noqa: E402


def line_plot(path: Path, series, xlabel: str, ylabel: str, title: str = "",
              logx: bool = False, logy: bool = False) -> None:
    """``series`` is a list of ``(x, y, label)``."""
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    for x, y, label in series:
        y = np.asarray(y, dtype=float)
        if logy:
            y = np.where(y > 0, y, np.nan)
        ax.plot(x, y, label=label, lw=1.4)
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if len(series) > 1:
        ax.legend(frameon=False, fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata={"Software": None})
    plt.close(fig)


def field_plot(path: Path, fld: Field2D, title: str = "", label: str = "") -> None:
    """Space-time image of a field (``x`` horizontal, ``t`` vertical)."""
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    x, t = fld.x, fld.t
    im = ax.imshow(fld.values.T, origin="lower", aspect="auto", cmap="RdBu_r",
                   extent=(x[0], x[-1], t[0], t[-1]))
    fig.colorbar(im, ax=ax, label=label)
    ax.set_xlabel("x")
    ax.set_ylabel("t")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata={"Software": None})
    plt.close(fig)
