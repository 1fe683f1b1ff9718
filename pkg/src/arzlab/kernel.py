"""Fundamental kernel of the damped wave operator.

The operator is

    d_tt f + (l1 + l2) d_xt f + l1 l2 d_xx f + delta d_t f

with characteristic speeds ``l1 > 0 > l2`` and damping ``delta > 0``.  Its
kernel is ``V(y, t) = exp(gamma1) I_0(gamma2) / (l1 - l2)``, supported on the
cone ``l2 t <= y <= l1 t``.

Everything here works with the squared Bessel argument
``s = gamma2**2``, a quadratic polynomial in ``(y, t)``.  That keeps the
formulas smooth across the cone edge (where ``gamma2`` has a square-root
singularity) and lets derivative stencils step outside the cone, where the
kernel continues as ``J_0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from .errors import DomainError, UnsupportedOrderError
from .specfun import I0_SECOND_DERIVATIVE_AT_ZERO, i0_sqrt, i0_sqrt_deriv

Side = Literal["lambda1", "lambda2"]
Reading = Literal["corrected", "lambda1_trace"]


@dataclass(frozen=True)
class DampedWaveCoeffs:
    """Speeds and damping of a damped wave operator."""

    lambda1: float
    lambda2: float
    delta: float

    def __post_init__(self):
        vals = (self.lambda1, self.lambda2, self.delta)
        if not all(math.isfinite(v) for v in vals):
            raise DomainError("coefficients must be finite")
        if not (self.lambda1 > 0 and self.lambda2 < 0 and self.delta > 0):
            raise DomainError("need lambda1 > 0, lambda2 < 0, delta > 0")

    @property
    def width(self) -> float:
        return self.lambda1 - self.lambda2

    @property
    def a0(self) -> float:
        """Gaussian rate ``delta / (l1 - l2)^2`` of the kernel inside the cone."""
        return self.delta / self.width**2

    @property
    def s_scale(self) -> float:
        # s = s_scale * (-(y - l1 t)(y - l2 t))
        return 4.0 * self.delta**2 * (-self.lambda1 * self.lambda2) / self.width**4

    @property
    def max_speed(self) -> float:
        return max(abs(self.lambda1), abs(self.lambda2))


@dataclass(frozen=True)
class KernelInternals:
    """Exponents of the kernel at one or more points."""

    gamma1: np.ndarray
    gamma2: np.ndarray
    s: np.ndarray


def _gamma1(y, t, c: DampedWaveCoeffs):
    l1, l2 = c.lambda1, c.lambda2
    return -2.0 * c.delta / c.width**2 * (-l1 * l2 * t + 0.5 * (l1 + l2) * y)


def _s(y, t, c: DampedWaveCoeffs):
    return c.s_scale * (-(y - c.lambda1 * t) * (y - c.lambda2 * t))


def _grad_gamma1(c: DampedWaveCoeffs):
    w2 = c.width**2
    return (-c.delta * (c.lambda1 + c.lambda2) / w2, 2.0 * c.delta * c.lambda1 * c.lambda2 / w2)


def _grad_s(y, t, c: DampedWaveCoeffs):
    l1, l2 = c.lambda1, c.lambda2
    ds_dy = c.s_scale * (-2.0 * y + (l1 + l2) * t)
    ds_dt = c.s_scale * ((l1 + l2) * y - 2.0 * l1 * l2 * t)
    return ds_dy, ds_dt


def kernel_internals(y, t, coeffs: DampedWaveCoeffs) -> KernelInternals:
    """``gamma1``, ``gamma2`` (zero outside the cone) and ``s = gamma2^2``."""
    y = np.asarray(y, dtype=float)
    t = np.asarray(t, dtype=float)
    s = _s(y, t, coeffs)
    return KernelInternals(_gamma1(y, t, coeffs), np.sqrt(np.maximum(s, 0.0)), s)


def f0_profile(z, coeffs: DampedWaveCoeffs):
    """Rate ``F_0(z) >= 0`` in ``gamma1 + gamma2 = -a0 y^2/t - t F_0(y/t)``."""
    l1, l2 = coeffs.lambda1, coeffs.lambda2
    z = np.asarray(z, dtype=float)
    zz = ((l1 + l2) * z - z * z) / (l1 * l2)
    pref = 2.0 * coeffs.delta * l1 * l2 / coeffs.width**2
    return pref * (-1.0 + 0.5 * zz + np.sqrt(np.maximum(1.0 - zz, 0.0)))


def g0_profile(z, coeffs: DampedWaveCoeffs):
    """``G_0(z) >= 0`` with ``gamma2(y, t) = t G_0(y/t)``."""
    z = np.asarray(z, dtype=float)
    return np.sqrt(np.maximum(_s(z, 1.0, coeffs), 0.0))


def _check_t(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("kernel requires t >= 0")
    return t


def _v_raw(y, t, c: DampedWaveCoeffs):
    m, e = i0_sqrt(_s(y, t, c))
    return np.exp(_gamma1(y, t, c) + e) * m / c.width


def _dv_raw(y, t, c: DampedWaveCoeffs):
    """Analytic ``(dV/dy, dV/dt)`` at any real ``(y, t)``."""
    s = _s(y, t, c)
    m0, e = i0_sqrt(s)
    m1, _ = i0_sqrt_deriv(s)
    g1y, g1t = _grad_gamma1(c)
    sy, st = _grad_s(y, t, c)
    pref = np.exp(_gamma1(y, t, c) + e) / c.width
    return pref * (g1y * m0 + sy * m1), pref * (g1t * m0 + st * m1)


def kernel_v(y, t, coeffs: DampedWaveCoeffs):
    """The kernel ``V(y, t)``; ``y`` may lie outside the cone.

    Examples
    --------
    >>> c = DampedWaveCoeffs(1.0, -1.0, 1.0)
    >>> round(float(kernel_v(0.0, 2.0, c)), 7)
    0.232888
    """
    y = np.asarray(y, dtype=float)
    t = _check_t(t)
    out = _v_raw(y, t, coeffs)
    return float(out) if out.ndim == 0 else out


def kernel_v_boundary(t, side: Side, coeffs: DampedWaveCoeffs):
    """Closed-form trace of ``V`` on the edge ``y = lambda_i t``."""
    t = _check_t(t)
    c = coeffs
    if side == "lambda1":
        out = np.exp(-c.delta * c.lambda1 * t / c.width) / c.width
    elif side == "lambda2":
        out = np.exp(c.delta * c.lambda2 * t / c.width) / c.width
    else:
        raise ValueError(f"unknown side {side!r}")
    return float(out) if np.ndim(out) == 0 else out


def kernel_v_boundary_derivs(t, side: Side, coeffs: DampedWaveCoeffs, reading: Reading = "corrected"):
    """Closed-form ``(dV/dt, dV/dy)`` on a cone edge.

    ``reading`` only affects the ``lambda2`` edge.  ``"corrected"`` multiplies
    by the trace on that same edge.  ``"lambda1_trace"`` multiplies by the
    ``lambda1`` trace instead; it is kept so the two can be compared against
    finite differences.
    """
    c = coeffs
    t = _check_t(t)
    l1, l2, d, w = c.lambda1, c.lambda2, c.delta, c.width
    i2 = I0_SECOND_DERIVATIVE_AT_ZERO
    base_t = 2.0 * d * l1 * l2 / w**2
    base_y = -d * (l1 + l2) / w**2
    if side == "lambda1":
        v = kernel_v_boundary(t, "lambda1", c)
        dt = base_t * (1.0 - i2 * d * l1 * t / w) * v
        dy = (base_y + 2.0 * d**2 * l1 * l2 * t * i2 / w**3) * v
    elif side == "lambda2":
        if reading == "corrected":
            v = kernel_v_boundary(t, "lambda2", c)
        elif reading == "lambda1_trace":
            v = kernel_v_boundary(t, "lambda1", c)
        else:
            raise ValueError(f"unknown reading {reading!r}")
        dt = base_t * (1.0 + i2 * d * l2 * t / w) * v
        dy = (base_y - 2.0 * d**2 * l1 * l2 * t * i2 / w**3) * v
    else:
        raise ValueError(f"unknown side {side!r}")
    return dt, dy


def _richardson(f: Callable[[float], np.ndarray], h) -> np.ndarray:
    d1 = (f(h) - f(-h)) / (2.0 * h)
    d2 = (f(h / 2) - f(-h / 2)) / h
    return (4.0 * d2 - d1) / 3.0


def kernel_v_deriv(y, t, k: int, n: int, coeffs: DampedWaveCoeffs):
    """``d_y^k d_t^n V`` for ``k + n <= 2``.

    First derivatives are analytic.  Second derivatives are Richardson
    extrapolated central differences of the analytic first derivatives with
    step ``max(1e-5, 1e-5 t)``.
    """
    if k < 0 or n < 0 or k + n > 2:
        raise UnsupportedOrderError(f"derivative order (k={k}, n={n}) not supported")
    y = np.asarray(y, dtype=float)
    t = _check_t(t)
    c = coeffs
    if k + n == 0:
        out = _v_raw(y, t, c)
    elif k + n == 1:
        dy, dt = _dv_raw(y, t, c)
        out = dy if k == 1 else dt
    else:
        h = np.maximum(1e-5, 1e-5 * t)
        if k == 2:
            out = _richardson(lambda e: _dv_raw(y + e, t, c)[0], h)
        elif n == 2:
            out = _richardson(lambda e: _dv_raw(y, t + e, c)[1], h)
        else:
            out = _richardson(lambda e: _dv_raw(y + e, t, c)[1], h)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class ConeGrid:
    """Uniform sampling of the cone ``l2 t <= y <= l1 t`` for ``0 <= t <= t_max``."""

    t_max: float
    n_t: int = 201
    n_y: int = 201

    def refined(self) -> "ConeGrid":
        return ConeGrid(self.t_max, 2 * self.n_t - 1, 2 * self.n_y - 1)

    def points(self, coeffs: DampedWaveCoeffs):
        t = np.linspace(0.0, self.t_max, self.n_t)
        u = np.linspace(0.0, 1.0, self.n_y)
        T, U = np.meshgrid(t, u, indexing="ij")
        Y = coeffs.lambda2 * T + coeffs.width * T * U
        return Y, T


@dataclass(frozen=True)
class KernelBoundReport:
    constant: float
    argmax_y: float
    argmax_t: float
    a: float


def verify_kernel_bound(k: int, n: int, coeffs: DampedWaveCoeffs, grid: ConeGrid,
                        a: float | None = None) -> KernelBoundReport:
    """Empirical constant in the Gaussian cone bound for ``d_y^k d_t^n V``.

    Returns the sup over ``grid`` of
    ``|d^k d^n V| (1+t)^{1/2 + k/2 + n} exp(a y^2 / (1+t))`` with ``a`` defaulting
    to half the kernel's Gaussian rate.
    """
    if a is None:
        a = 0.5 * coeffs.a0
    Y, T = grid.points(coeffs)
    d = np.abs(kernel_v_deriv(Y, T, k, n, coeffs))
    weight = (1.0 + T) ** (0.5 + 0.5 * k + n) * np.exp(a * Y**2 / (1.0 + T))
    ratio = d * weight
    idx = np.unravel_index(int(np.argmax(ratio)), ratio.shape)
    return KernelBoundReport(float(ratio[idx]), float(Y[idx]), float(T[idx]), a)


_D1 = ((-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0))             # / 12h
_D2 = ((-2, -1.0), (-1, 16.0), (0, -30.0), (1, 16.0), (2, -1.0))  # / 12h^2


def kernel_pde_residual(y, t, h: float, coeffs: DampedWaveCoeffs) -> np.ndarray:
    """Fourth-order finite-difference residual of the operator applied to ``V``.

    Stencils may leave the cone; the smooth continuation of ``V`` is used
    there, so the residual at interior points measures the formula itself.
    """
    y = np.asarray(y, dtype=float)
    t = np.asarray(t, dtype=float)
    c = coeffs

    def v(dy, dt):
        return _v_raw(y + dy * h, t + dt * h, c)

    vt = sum(w * v(0, i) for i, w in _D1) / (12 * h)
    vtt = sum(w * v(0, i) for i, w in _D2) / (12 * h * h)
    vyy = sum(w * v(i, 0) for i, w in _D2) / (12 * h * h)
    vyt = sum(wi * wj * v(i, j) for i, wi in _D1 for j, wj in _D1) / (144 * h * h)
    return vtt + (c.lambda1 + c.lambda2) * vyt + c.lambda1 * c.lambda2 * vyy + c.delta * vt


def random_cone_points(n: int, t_lo: float, t_hi: float, coeffs: DampedWaveCoeffs,
                       rng: np.random.Generator, margin: float = 0.05):
    """``n`` points with ``t`` uniform in ``[t_lo, t_hi]`` strictly inside the cone."""
    t = rng.uniform(t_lo, t_hi, n)
    u = rng.uniform(margin, 1.0 - margin, n)
    return coeffs.lambda2 * t + coeffs.width * t * u, t
