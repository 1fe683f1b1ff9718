"""Solvers for the damped wave equation with source.

    d_tt f + (l1 + l2) d_xt f + l1 l2 d_xx f + delta d_t f = S,
    f(x, 0) = f0(x),  d_t f(x, 0) = f1(x).

``solve_dwe_kernel`` evaluates the exact representation of the solution as
convolutions against the kernel ``V`` (end-corrected trapezoid quadrature
over the cone).
``fd_reference_dwe`` is an independent centered finite-difference scheme used
as an oracle.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.linalg import solve_banded

from .errors import ConfigurationError, DomainError, ResolutionWarning
from .field import Field2D, padded_axis, uniform_axis
from .kernel import DampedWaveCoeffs, kernel_v, kernel_v_deriv
from .profiles import Profile, zero

Source = Callable[[np.ndarray, float], np.ndarray]

_CHUNK = 4_000_000  # matrix entries per quadrature block


@dataclass
class DweProblem:
    coeffs: DampedWaveCoeffs
    f0: Profile = field(default_factory=zero)
    f1: Profile = field(default_factory=zero)
    source: Optional[Source] = None


@dataclass(frozen=True)
class GridSpec:
    """Output grid: ``x`` in ``[x_min, x_max]`` step ``dx``; ``t`` in ``[0, t_end]`` step ``dt``."""

    x_min: float
    x_max: float
    dx: float
    t_end: float
    dt: float

    def __post_init__(self):
        if not (self.dx > 0 and self.dt > 0 and self.x_max > self.x_min and self.t_end >= 0):
            raise ConfigurationError(f"invalid grid {self}")

    @property
    def x(self) -> np.ndarray:
        return uniform_axis(self.x_min, self.x_max, self.dx)

    @property
    def t(self) -> np.ndarray:
        return uniform_axis(0.0, self.t_end, self.dt)

    def halved(self) -> "GridSpec":
        return GridSpec(self.x_min, self.x_max, self.dx / 2, self.t_end, self.dt / 2)


_GREGORY = np.array([3 / 8, 7 / 6, 23 / 24])
_MIN_PANELS = 8


def _cone_nodes(lo: float, hi: float, step: float):
    """Uniform nodes on ``[lo, hi]`` with end-corrected trapezoid weights.

    The Gregory end corrections make the rule exact for cubics, so its error
    is ``O(h^4)`` and varies smoothly as the panel count changes with ``t``.
    """
    m = max(_MIN_PANELS, int(math.ceil((hi - lo) / step)))
    y = np.linspace(lo, hi, m + 1)
    w = np.full(m + 1, (hi - lo) / m)
    w[:3] *= _GREGORY
    w[-3:] *= _GREGORY[::-1]
    return y, w


def _convolve(x: np.ndarray, y: np.ndarray, kw: np.ndarray, g: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """``sum_j kw[j] * g(x - y[j])`` for every ``x``, in memory-bounded blocks."""
    out = np.empty_like(x)
    rows = max(1, _CHUNK // max(1, y.size))
    for i in range(0, x.size, rows):
        xs = x[i:i + rows]
        out[i:i + rows] = g(xs[:, None] - y[None, :]) @ kw
    return out


def _check_finite(p: Profile, x: np.ndarray, name: str):
    if not np.all(np.isfinite(p(x))):
        raise DomainError(f"{name} has non-finite values on the grid")


def kernel_solution(problem: DweProblem, x, times, quad_step: float) -> np.ndarray:
    """Kernel representation of the solution at arbitrary points.

    Parameters
    ----------
    problem : DweProblem
    x : array of positions
    times : array of non-negative times
    quad_step : maximum spacing of the quadrature nodes in ``y`` (and ``s``
        for the source term)

    Returns
    -------
    ndarray of shape ``(len(x), len(times))``
    """
    c = problem.coeffs
    l1, l2, d, w = c.lambda1, c.lambda2, c.delta, c.width
    x = np.asarray(x, dtype=float)
    times = np.asarray(times, dtype=float)
    f0, f1 = problem.f0, problem.f1
    has_f0 = not f0.is_zero()
    has_f1 = not f1.is_zero()

    def g1(z):
        out = f1(z) if has_f1 else np.zeros_like(z)
        if has_f0:
            out = out + d * f0(z) + (l1 + l2) * f0.derivative(z, 1)
        return out

    out = np.zeros((x.size, times.size))
    for j, t in enumerate(times):
        if t < 0:
            raise DomainError("times must be non-negative")
        if t == 0:
            out[:, j] = f0(x) if has_f0 else 0.0
            continue
        y, qw = _cone_nodes(l2 * t, l1 * t, quad_step)
        col = np.zeros_like(x)
        if has_f0 or has_f1:
            col += _convolve(x, y, kernel_v(y, t, c) * qw, g1)
        if has_f0:
            col += _convolve(x, y, kernel_v_deriv(y, t, 0, 1, c) * qw, f0)
            col += l1 * math.exp(-d * l1 * t / w) / w * f0(x - l1 * t)
            col -= l2 * math.exp(d * l2 * t / w) / w * f0(x - l2 * t)
        if problem.source is not None:
            col += _duhamel(problem.source, c, x, t, quad_step)
        out[:, j] = col
    return out


def _duhamel(S: Source, c: DampedWaveCoeffs, x: np.ndarray, t: float, step: float) -> np.ndarray:
    s_nodes, s_w = _cone_nodes(0.0, t, step)
    total = np.zeros_like(x)
    # the s = t node has a zero-width cone and contributes nothing
    for s, ws in zip(s_nodes[:-1], s_w[:-1]):
        tau = t - s
        y, qw = _cone_nodes(c.lambda2 * tau, c.lambda1 * tau, step)
        total += ws * _convolve(x, y, kernel_v(y, tau, c) * qw, lambda z: S(z, s))
    return total


def _resolution_check(problem: DweProblem, dx: float):
    if problem.f0.scale < 4 * dx:
        warnings.warn(f"f0 varies on a scale {problem.f0.scale} below 4*dx={4 * dx}",
                      ResolutionWarning, stacklevel=3)


def solve_dwe_kernel(problem: DweProblem, grid: GridSpec, quad_step: float | None = None,
                     frame_speed: float = 0.0) -> Field2D:
    """Sample the kernel representation of the solution on ``grid``.

    Quadrature nodes are spaced at most ``min(dx, quad_step)`` apart and the
    cone integrals are truncated exactly at ``l2 t`` and ``l1 t``.
    """
    _resolution_check(problem, grid.dx)
    step = grid.dx if quad_step is None else min(grid.dx, quad_step)
    x, t = grid.x, grid.t
    _check_finite(problem.f0, x, "f0")
    _check_finite(problem.f1, x, "f1")
    vals = kernel_solution(problem, x, t, step)
    return Field2D(vals, grid.x_min, grid.dx, 0.0, grid.dt, frame_speed)


def fd_reference_dwe(problem: DweProblem, grid: GridSpec, cfl: float = 0.9,
                     dt_internal: float | None = None) -> Field2D:
    """Centered second-order finite differences on a padded domain.

    The mixed and damping terms are centered in time, which makes each step
    a constant tridiagonal solve.  The domain is padded by
    ``max|lambda| * t_end`` so the zero boundary never influences the window.
    """
    c = problem.coeffs
    lmax = c.max_speed
    dt_max = cfl * grid.dx / lmax
    if dt_internal is None:
        sub = max(1, int(math.ceil(grid.dt / dt_max - 1e-12)))
        dt = grid.dt / sub
    else:
        if dt_internal > dt_max * (1 + 1e-12):
            raise ConfigurationError(f"CFL violated: dt={dt_internal} > {dt_max}")
        sub = int(round(grid.dt / dt_internal))
        if sub < 1 or abs(sub * dt_internal - grid.dt) > 1e-9 * grid.dt:
            raise ConfigurationError("internal step must divide the output step")
        dt = dt_internal
    x, win = padded_axis(grid.x_min, grid.x_max, grid.dx, lmax, grid.t_end)
    dx = grid.dx
    beta = c.lambda1 + c.lambda2
    pq = c.lambda1 * c.lambda2
    n_out = len(grid.t)
    out = np.empty((win.stop - win.start, n_out))

    def dxx(f):
        g = np.zeros_like(f)
        g[1:-1] = (f[2:] - 2 * f[1:-1] + f[:-2]) / dx**2
        return g

    def dx1(f):
        g = np.zeros_like(f)
        g[1:-1] = (f[2:] - f[:-2]) / (2 * dx)
        return g

    def src(tt):
        return problem.source(x, tt) if problem.source is not None else 0.0

    f_prev = problem.f0(x)
    v1 = problem.f1(x)
    ftt0 = src(0.0) - beta * dx1(v1) - pq * dxx(f_prev) - c.delta * v1
    f_cur = f_prev + dt * v1 + 0.5 * dt**2 * ftt0
    f_prev[0] = f_prev[-1] = f_cur[0] = f_cur[-1] = 0.0

    n = x.size
    diag = 1 / dt**2 + c.delta / (2 * dt)
    off = beta / (4 * dt * dx)
    ab = np.zeros((3, n))
    ab[0, 1:] = off      # coefficient of f_{i+1}
    ab[1, :] = diag
    ab[2, :-1] = -off    # coefficient of f_{i-1}
    ab[0, 1] = 0.0       # Dirichlet rows
    ab[2, -2] = 0.0
    ab[1, 0] = ab[1, -1] = 1.0

    out[:, 0] = f_prev[win]
    step_idx = 1
    total_steps = sub * (n_out - 1)
    for k in range(1, total_steps + 1):
        if k == 1:
            nxt = f_cur
        else:
            tn = (k - 1) * dt
            rhs = ((2 * f_cur - f_prev) / dt**2 - pq * dxx(f_cur) + c.delta / (2 * dt) * f_prev
                   + beta / (2 * dt) * dx1(f_prev) + src(tn))
            rhs[0] = rhs[-1] = 0.0
            nxt = solve_banded((1, 1), ab, rhs)
            f_prev, f_cur = f_cur, nxt
        if k % sub == 0:
            out[:, step_idx] = nxt[win]
            step_idx += 1
    return Field2D(out, grid.x_min, grid.dx, 0.0, grid.dt, 0.0)


def pde_residual(fld: Field2D, coeffs: DampedWaveCoeffs, source: Optional[Source] = None) -> float:
    """Sup norm of the centered-difference residual over the field interior."""
    f = fld.values
    if f.shape[0] < 5 or f.shape[1] < 5:
        raise DomainError("field too small for a residual (need at least 5x5)")
    h, k = fld.dx, fld.dt
    c = coeffs
    ftt = (f[1:-1, 2:] - 2 * f[1:-1, 1:-1] + f[1:-1, :-2]) / k**2
    fxx = (f[2:, 1:-1] - 2 * f[1:-1, 1:-1] + f[:-2, 1:-1]) / h**2
    fxt = (f[2:, 2:] - f[:-2, 2:] - f[2:, :-2] + f[:-2, :-2]) / (4 * h * k)
    ft = (f[1:-1, 2:] - f[1:-1, :-2]) / (2 * k)
    r = ftt + (c.lambda1 + c.lambda2) * fxt + c.lambda1 * c.lambda2 * fxx + c.delta * ft
    if source is not None:
        xs = fld.x[1:-1]
        r = r - np.stack([source(xs, tt) for tt in fld.t[1:-1]], axis=1)
    return float(np.max(np.abs(r)))
