"""The ARZ system linearized about a constant state.

In the frame moving with the drift speed ``lambda*`` the perturbations
``q(x, t) = rho(x + lambda* t, t)`` and ``v(x, t) = u(x + lambda* t, t)`` obey

    d_t q + l1 d_x q + rho0 d_x v = 0,
    d_t v + l2 d_x v + (U_f q + v) / tau = 0,

and each of ``q`` and ``v`` separately solves the damped wave equation with
speeds ``(l1, l2)`` and damping ``1/tau``.  :func:`solve_linear_arz` uses that
decoupling together with the kernel solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.optimize import minimize_scalar

from .arz import ArzParams, CharSpeeds, characteristic_speeds
from .dwe import DweProblem, GridSpec, kernel_solution, pde_residual
from .envelopes import Weight, envelope_f_grid, envelope_g
from .errors import ConfigurationError, DomainError, FitError, UnsupportedOrderError
from .field import Field2D, padded_axis
from .fitting import DecayFit, fit_power_law
from .kernel import DampedWaveCoeffs
from .profiles import MAX_ORDER, Profile


def _dprof(p: Profile, k: int) -> Profile:
    """The ``k``-th derivative of a profile, as a profile."""
    if k == 0:
        return p
    return Profile(lambda x, j: p.deriv(x, j + k) if j + k <= MAX_ORDER else _too_high(j + k),
                   p.support, p.scale, f"d{k}{p.name}")


def _too_high(order):
    raise UnsupportedOrderError(f"profile derivative of order {order} not available")


def wave_coeffs(params: ArzParams, speeds: CharSpeeds | None = None) -> DampedWaveCoeffs:
    sp = speeds or characteristic_speeds(params)
    return DampedWaveCoeffs(sp.lambda1_0, sp.lambda2_0, 1.0 / params.tau)


def moving_frame_problems(rho_i: Profile, u_i: Profile, params: ArzParams, k: int = 0):
    """Damped wave problems for ``d_x^k q`` and ``d_x^k v``.

    Initial time derivatives come from the first-order system at ``t = 0``.
    """
    sp = characteristic_speeds(params)
    c = wave_coeffs(params, sp)
    r, u = _dprof(rho_i, k), _dprof(u_i, k)
    r1, u1 = _dprof(rho_i, k + 1), _dprof(u_i, k + 1)
    q1 = r1 * (-sp.lambda1_0) + u1 * (-params.rho0)
    v1 = u1 * (-sp.lambda2_0) + (r * params.uf + u) * (-1.0 / params.tau)
    return DweProblem(c, f0=r, f1=q1), DweProblem(c, f0=u, f1=v1)


def linear_fields_at(rho_i: Profile, u_i: Profile, params: ArzParams, x, times,
                     k: int = 0, quad_step: float = 0.05):
    """``(d_x^k q, d_x^k v)`` at moving-frame points ``x`` and ``times``."""
    pq, pv = moving_frame_problems(rho_i, u_i, params, k)
    return (kernel_solution(pq, x, times, quad_step), kernel_solution(pv, x, times, quad_step))


@dataclass
class LinearSolution:
    """Moving-frame fields ``q``, ``v`` and lab-frame ``rho``, ``u`` on one grid.

    ``xderiv`` maps ``k`` to the pair of ``d_x^k`` fields when they were
    computed exactly; otherwise derivatives fall back to finite differences.
    """

    q: Field2D
    v: Field2D
    params: ArzParams
    speeds: CharSpeeds
    rho_i: Profile
    u_i: Profile
    xderiv: dict = field(default_factory=dict)

    @property
    def lambda_star(self) -> float:
        return self.speeds.lambda_star

    def _to_lab(self, f: Field2D) -> Field2D:
        ls = self.lambda_star
        if ls == 0.0:
            return Field2D(f.values.copy(), f.x0, f.dx, f.t0, f.dt, 0.0)
        x = f.x
        out = np.empty_like(f.values)
        for j, t in enumerate(f.t):
            out[:, j] = np.interp(x - ls * t, x, f.values[:, j], left=0.0, right=0.0)
        return Field2D(out, f.x0, f.dx, f.t0, f.dt, 0.0)

    @property
    def rho(self) -> Field2D:
        return self._to_lab(self.q)

    @property
    def u(self) -> Field2D:
        return self._to_lab(self.v)

    def derivative(self, k: int, n: int) -> tuple[np.ndarray, np.ndarray]:
        """``d_t^n d_x^k`` of ``(q, v)`` on the grid.

        Time derivatives are rewritten through the first-order system, so
        only ``x``-derivatives of order ``k + n`` are needed.
        """
        if k < 0 or n < 0 or k + n > 2:
            raise UnsupportedOrderError(f"(k={k}, n={n}) not supported")
        if n == 0:
            return self._xder(k)
        l1, l2 = self.speeds.lambda1_0, self.speeds.lambda2_0
        r0, uf, tau = self.params.rho0, self.params.uf, self.params.tau
        qa, va = self.derivative(k + 1, n - 1)
        qb, vb = self.derivative(k, n - 1)
        return -l1 * qa - r0 * va, -l2 * va - (uf * qb + vb) / tau

    def _xder(self, k: int):
        if k in self.xderiv:
            fq, fv = self.xderiv[k]
            return fq.values, fv.values
        q, v = self.q.values, self.v.values
        for _ in range(k):
            q = np.gradient(q, self.q.dx, axis=0, edge_order=2)
            v = np.gradient(v, self.v.dx, axis=0, edge_order=2)
        return q, v


def solve_linear_arz(rho_i: Profile, u_i: Profile, params: ArzParams, grid: GridSpec,
                     x_derivs: int = 0, quad_step: float | None = None) -> LinearSolution:
    """Kernel solution of the linearized system in the moving frame.

    ``x_derivs`` additionally computes ``d_x^k q`` and ``d_x^k v`` for
    ``k <= x_derivs`` from differentiated data, which makes all envelope
    checks with ``k + n <= x_derivs`` free of finite-difference error.
    """
    sp = characteristic_speeds(params)
    step = grid.dx if quad_step is None else min(quad_step, grid.dx)
    x, t = grid.x, grid.t
    derivs = {}
    for k in range(x_derivs + 1):
        qv, vv = linear_fields_at(rho_i, u_i, params, x, t, k, step)
        derivs[k] = (Field2D(qv, grid.x_min, grid.dx, 0.0, grid.dt, sp.lambda_star),
                     Field2D(vv, grid.x_min, grid.dx, 0.0, grid.dt, sp.lambda_star))
    q, v = derivs[0]
    return LinearSolution(q, v, params, sp, rho_i, u_i, derivs)


def fd_reference_linear(rho_i: Profile, u_i: Profile, params: ArzParams, grid: GridSpec,
                        cfl: float = 0.9) -> LinearSolution:
    """First-order upwind solution of the lab-frame linear system.

    The advective part is split into characteristic variables
    ``rho + u / h'(rho0)`` (speed ``U(rho0)``) and ``u`` (speed
    ``U(rho0) - rho0 h'(rho0)``); the relaxation is applied exactly over each
    step with ``rho`` frozen.
    """
    sp = characteristic_speeds(params)
    hp = float(params.pressure.dh(params.rho0))
    c1 = float(params.equilibrium_speed(params.rho0))
    c2 = c1 - params.rho0 * hp
    cmax = max(abs(c1), abs(c2), 1e-14)
    sub = max(1, int(math.ceil(grid.dt * cmax / (cfl * grid.dx) - 1e-12)))
    dt = grid.dt / sub
    if dt * cmax > cfl * grid.dx * (1 + 1e-12):
        raise ConfigurationError("CFL violated")
    xs, win = padded_axis(grid.x_min, grid.x_max, grid.dx, cmax, grid.t_end)
    rho = rho_i(xs).astype(float)
    u = u_i(xs).astype(float)
    nt = len(grid.t)
    out_r = np.empty((win.stop - win.start, nt))
    out_u = np.empty_like(out_r)
    out_r[:, 0], out_u[:, 0] = rho[win], u[win]
    decay = math.exp(-dt / params.tau)

    def upwind(f, c):
        g = np.empty_like(f)
        nu = c * dt / grid.dx
        if c >= 0:
            g[1:] = f[1:] - nu * (f[1:] - f[:-1])
            g[0] = f[0]
        else:
            g[:-1] = f[:-1] - nu * (f[1:] - f[:-1])
            g[-1] = f[-1]
        return g

    col = 1
    for step in range(1, sub * (nt - 1) + 1):
        w1 = upwind(rho + u / hp, c1)
        w2 = upwind(u, c2)
        u = w2
        rho = w1 - w2 / hp
        u = -params.uf * rho + (u + params.uf * rho) * decay
        if step % sub == 0:
            out_r[:, col], out_u[:, col] = rho[win], u[win]
            col += 1
    lab_r = Field2D(out_r, grid.x_min, grid.dx, 0.0, grid.dt, 0.0)
    lab_u = Field2D(out_u, grid.x_min, grid.dx, 0.0, grid.dt, 0.0)
    q, v = _to_moving(lab_r, sp.lambda_star), _to_moving(lab_u, sp.lambda_star)
    return LinearSolution(q, v, params, sp, rho_i, u_i, {})


def _to_moving(f: Field2D, ls: float) -> Field2D:
    return to_moving_frame(f, ls, +1)


def to_moving_frame(lab: Field2D, lambda_star: float, sign: int = +1) -> Field2D:
    """``q(x, t) = rho(x + sign * lambda_star * t, t)`` by linear interpolation.

    ``sign=+1`` is the convention used throughout this package; ``-1`` is
    kept so the two readings can be compared.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    s = sign * lambda_star
    if s == 0.0:
        return Field2D(lab.values, lab.x0, lab.dx, lab.t0, lab.dt, lambda_star)
    x = lab.x
    out = np.empty_like(lab.values)
    for j, t in enumerate(lab.t):
        out[:, j] = np.interp(x + s * t, x, lab.values[:, j], left=0.0, right=0.0)
    return Field2D(out, lab.x0, lab.dx, lab.t0, lab.dt, s)


def decoupling_residual(lab: Field2D, params: ArzParams, sign: int = +1) -> float:
    """Damped wave residual of a lab-frame density after the frame shift.

    Only the part of the window that stays inside the lab window after the
    shift enters the sup.
    """
    sp = characteristic_speeds(params)
    q = to_moving_frame(lab, sp.lambda_star, sign)
    crop = int(math.ceil(abs(sp.lambda_star) * float(lab.t[-1]) / lab.dx)) + 2
    inner = Field2D(q.values[crop:q.values.shape[0] - crop], q.x0 + crop * q.dx, q.dx, q.t0, q.dt)
    return pde_residual(inner, wave_coeffs(params, sp))


def default_linear_rates(params: ArzParams) -> tuple[float, float]:
    """``(a_L, b_L)``: half the kernel Gaussian rate and the slower edge decay rate."""
    c = wave_coeffs(params)
    b = c.delta * min(c.lambda1, -c.lambda2) / c.width
    return 0.5 * c.a0, b


@dataclass
class EnvelopeCheck:
    constant: float
    argmax_x: float
    argmax_t: float
    k: int
    n: int


def _ratio(left, right, x, t, rel_floor):
    scale = float(np.max(right)) if right.size else 0.0
    lscale = float(np.max(left)) if left.size else 0.0
    if lscale == 0.0:
        return 0.0, math.nan, math.nan
    # near the edge of the support both sides vanish faster than any power and
    # their quotient is dominated by discretization error
    relevant = left >= rel_floor * lscale
    mask = right > 1e-12 * scale
    stray = relevant & ~mask
    if np.any(stray):
        i, j = np.argwhere(stray)[0]
        return math.inf, float(x[i]), float(t[j])
    mask &= relevant
    ratio = np.where(mask, left / np.where(mask, right, 1.0), 0.0)
    i, j = np.unravel_index(int(np.argmax(ratio)), ratio.shape)
    return float(ratio[i, j]), float(x[i]), float(t[j])


def weight_sum(rho_i: Profile, u_i: Profile, order: int):
    """``x -> sum_{j <= order} |rho_i^(j)(x)| + |u_i^(j)(x)|``."""
    def f(x):
        out = np.zeros_like(np.asarray(x, dtype=float))
        for j in range(order + 1):
            out = out + np.abs(rho_i.derivative(x, j)) + np.abs(u_i.derivative(x, j))
        return out
    return f


def verify_linear_envelope(sol: LinearSolution, k: int, n: int, a_L: float | None = None,
                           b_L: float | None = None, t_min: float = 0.0,
                           w_i=None, rel_floor: float = 1e-6) -> EnvelopeCheck:
    """Empirical constant in the pointwise bound for the linear solution.

    The right side is ``F`` with exponent ``1/2 + k/2 + n`` over
    ``[l2 t, l1 t]`` applied to ``|rho_i| + |u_i|``, plus the two edge terms
    ``G`` with rate ``b_L`` applied to the sum of ``|rho_i^(j)| + |u_i^(j)|``
    for ``j <= k + n`` (or the callable ``w_i`` when given).  Points where
    the left side is below ``rel_floor`` times its maximum are skipped.
    """
    if k + n > 2:
        raise UnsupportedOrderError(f"(k={k}, n={n}) not supported")
    da, db = default_linear_rates(sol.params)
    a_L = da if a_L is None else a_L
    b_L = db if b_L is None else b_L
    l1, l2 = sol.speeds.lambda1_0, sol.speeds.lambda2_0
    dq, dv = sol.derivative(k, n)
    left = np.abs(dq) + np.abs(dv)
    x, t = sol.q.x, sol.q.t
    dx = sol.q.dx
    t_max = float(t[-1])
    # weight on an extended grid aligned with the solution grid
    xe, win = padded_axis(float(x[0]), float(x[-1]), dx, max(l1, -l2), t_max, extra_cells=8)
    w0 = weight_sum(sol.rho_i, sol.u_i, 0)(xe)
    wfun = weight_sum(sol.rho_i, sol.u_i, k + n) if w_i is None else w_i
    wk = Weight(float(xe[0]), dx, np.asarray(wfun(xe), dtype=float))
    gamma = 0.5 + 0.5 * k + n
    right = np.zeros_like(left)
    for j, tj in enumerate(t):
        f = envelope_f_grid(w0, dx, float(tj), a_L, gamma, l1, l2)[win]
        g = math.exp(-b_L * tj) * (wk(x - l1 * tj) + wk(x - l2 * tj))
        right[:, j] = f + g
    keep = t >= t_min
    K, ax, at = _ratio(left[:, keep], right[:, keep], x, t[keep], rel_floor)
    return EnvelopeCheck(K, ax, at, k, n)


# --- diffusion wave -------------------------------------------------------------

Normalization = Literal["inverse_nu", "unit_mass"]


@dataclass(frozen=True)
class DiffusionWave:
    """Gaussian centered at ``lambda_star (1+t)`` with variance ``2 nu (1+t)``.

    ``normalization="inverse_nu"`` uses the prefactor ``m / (4 pi nu sqrt(1+t))``;
    ``"unit_mass"`` uses ``m / sqrt(4 pi nu (1+t))`` so the total mass is ``m``.
    """

    m: float
    nu: float
    lambda_star: float = 0.0
    normalization: Normalization = "unit_mass"

    def __post_init__(self):
        if not self.nu > 0:
            raise DomainError("diffusion coefficient must be positive")
        if self.normalization not in ("inverse_nu", "unit_mass"):
            raise ValueError(f"unknown normalization {self.normalization!r}")


def gaussian_diffusion_wave(x, t, wave: DiffusionWave, l: int = 0):
    """``d_x^l theta(x, t)`` for ``l in {0, 1}``."""
    x = np.asarray(x, dtype=float)
    s = 1.0 + np.asarray(t, dtype=float)
    if np.any(s <= 0):
        raise DomainError("need 1 + t > 0")
    if wave.normalization == "inverse_nu":
        pref = wave.m / (4 * math.pi * wave.nu * np.sqrt(s))
    else:
        pref = wave.m / np.sqrt(4 * math.pi * wave.nu * s)
    z = x - wave.lambda_star * s
    g = pref * np.exp(-z * z / (4 * wave.nu * s))
    if l == 0:
        return g
    if l == 1:
        return -z / (2 * wave.nu * s) * g
    raise UnsupportedOrderError("only l <= 1 is supported")


def nu_chapman_enskog(params: ArzParams) -> float:
    """Effective diffusion ``-tau l1 l2`` of the relaxed linear system."""
    sp = characteristic_speeds(params)
    return -params.tau * sp.lambda1_0 * sp.lambda2_0


def fit_nu(sol: LinearSolution, m: float, t0: float, bounds=(1e-3, 10.0)) -> float:
    """``nu`` minimizing the sup mismatch at the grid time nearest ``t0``."""
    rho = sol.rho
    j = int(np.argmin(np.abs(rho.t - t0)))
    tj = float(rho.t[j])
    x = rho.x

    def cost(nu):
        th = gaussian_diffusion_wave(x, tj, DiffusionWave(m, nu, sol.lambda_star, "unit_mass"))
        return float(np.max(np.abs(rho.values[:, j] - th)))

    res = minimize_scalar(cost, bounds=bounds, method="bounded", options={"xatol": 1e-8})
    return float(res.x)


@dataclass
class DiffusionComparison:
    fit: DecayFit | None
    target: float
    times: np.ndarray
    norms: np.ndarray
    p: float
    l: int


def _norm(vals, dx, p):
    if math.isinf(p):
        return float(np.max(np.abs(vals)))
    return float((np.sum(np.abs(vals) ** p) * dx) ** (1.0 / p))


def compare_to_diffusion_wave(sol: LinearSolution, wave: DiffusionWave, p: float = math.inf,
                              l: int = 0, t_min_end: float = 50.0) -> DiffusionComparison:
    """Fit the decay of ``||d_x^l (rho - theta)||_p`` over the last decade of times.

    The theoretical target exponent is ``-1 - l/2 + 1/(2p)``.
    """
    if l not in (0, 1):
        raise UnsupportedOrderError("only l <= 1 is supported")
    rho = sol.rho
    t = rho.t
    t_end = float(t[-1])
    if t_end < t_min_end:
        raise FitError(f"solution only reaches t={t_end}; need t >= {t_min_end}")
    if l == 0:
        vals = rho.values
    else:
        vals = sol._to_lab(Field2D(sol._xder(1)[0], rho.x0, rho.dx, rho.t0, rho.dt, 0.0)).values
    sel = t >= t_end / 10.0
    norms = []
    for j in np.flatnonzero(sel):
        th = gaussian_diffusion_wave(rho.x, t[j], wave, l)
        norms.append(_norm(vals[:, j] - th, rho.dx, p))
    norms = np.array(norms)
    target = -1.0 - 0.5 * l + (0.0 if math.isinf(p) else 1.0 / (2 * p))
    fit = None if np.all(norms == 0) else fit_power_law(t[sel], norms)
    return DiffusionComparison(fit, target, t[sel], norms, p, l)
