"""Sampled space-time fields, grid files and finite-difference helpers."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import DomainError

HEADER = "# x0 dx t0 dt frame_speed"


@dataclass
class Field2D:
    """Values on a uniform grid, indexed ``values[i_x, i_t]``.

    ``frame_speed`` is zero for lab-frame data and the drift speed for data
    stored in a frame moving with it (lab position = x + frame_speed * t).
    """

    values: np.ndarray
    x0: float
    dx: float
    t0: float
    dt: float
    frame_speed: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise DomainError("Field2D values must be two-dimensional")
        if not (self.dx > 0 and self.dt > 0):
            raise DomainError("Field2D needs dx > 0 and dt > 0")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("Field2D values must be finite")

    @property
    def shape(self):
        return self.values.shape

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.values.shape[0])

    @property
    def t(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.values.shape[1])

    def with_values(self, values) -> "Field2D":
        return replace(self, values=np.asarray(values, dtype=float))

    def same_grid(self, other: "Field2D", tol: float = 1e-12) -> bool:
        return (self.shape == other.shape
                and abs(self.x0 - other.x0) <= tol and abs(self.dx - other.dx) <= tol
                and abs(self.t0 - other.t0) <= tol and abs(self.dt - other.dt) <= tol)

    def d_dx(self) -> "Field2D":
        """Second-order x-derivative (one-sided at the edges)."""
        return self.with_values(np.gradient(self.values, self.dx, axis=0, edge_order=2))

    def d_dt(self) -> "Field2D":
        """Second-order t-derivative (one-sided at the edges)."""
        return self.with_values(np.gradient(self.values, self.dt, axis=1, edge_order=2))

    def save(self, path) -> None:
        """Write the grid file: two header lines, then one row per time level."""
        path = Path(path)
        with path.open("w") as fh:
            fh.write(HEADER + "\n")
            fh.write("# " + " ".join(_fmt(v) for v in
                                     (self.x0, self.dx, self.t0, self.dt, self.frame_speed)) + "\n")
            for j in range(self.values.shape[1]):
                fh.write(",".join(_fmt(v) for v in self.values[:, j]) + "\n")

    @classmethod
    def load(cls, path) -> "Field2D":
        lines = Path(path).read_text().splitlines()
        if not lines or lines[0].strip() != HEADER:
            raise DomainError(f"{path}: missing grid header")
        x0, dx, t0, dt, fs = (float(v) for v in lines[1].lstrip("#").split())
        rows = [np.array(ln.split(","), dtype=float) for ln in lines[2:] if ln.strip()]
        return cls(np.stack(rows, axis=1), x0, dx, t0, dt, fs)


def _fmt(v: float) -> str:
    return repr(float(v))


def uniform_axis(lo: float, hi: float, step: float) -> np.ndarray:
    """Points ``lo, lo+step, ...`` up to and including ``hi`` (rounded to the grid)."""
    n = int(round((hi - lo) / step))
    return lo + step * np.arange(n + 1)


def padded_axis(lo: float, hi: float, dx: float, max_speed: float, t_end: float,
                extra_cells: int = 4):
    """Grid for an explicit solver whose boundary must never reach ``[lo, hi]``.

    The window is widened by ``max_speed * t_end`` plus a few cells on each
    side.  Returns the padded grid and the slice selecting the window points.
    """
    pad_cells = int(math.ceil(max_speed * t_end / dx)) + extra_cells
    n_win = int(round((hi - lo) / dx)) + 1
    x = lo + dx * np.arange(-pad_cells, n_win + pad_cells)
    return x, slice(pad_cells, pad_cells + n_win)


def central_diff(values: np.ndarray, h: float, axis: int = 0) -> np.ndarray:
    """Second-order central difference, one-sided at the ends."""
    return np.gradient(values, h, axis=axis, edge_order=2)
