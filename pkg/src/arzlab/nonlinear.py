"""Upwind simulator for the nonlinear ARZ perturbation system.

In the frame moving with the drift speed the perturbation ``(q, v)`` obeys

    d_t q + l1 d_x q + (rho0 + q) d_x v = 0,
    d_t v + l2 d_x v + (U_f q + v) / tau = 0,

with the pointwise speeds of :func:`arzlab.arz.nonlinear_speeds`.  Each step
is a Strang split: half a step of exact relaxation, one upwind advection step
(``q`` with ``l1``, ``v`` with ``l2``, centered coupling), half a step of exact
relaxation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .arz import ArzParams, DensityRangeError, characteristic_speeds, nonlinear_speeds, omega_terms
from .dwe import GridSpec
from .envelopes import Weight, envelope_f_grid, envelope_g_grid
from .errors import ConfigurationError, ResolutionWarning, UnsupportedOrderError
from .field import Field2D, padded_axis
from .fitting import DecayFit, fit_exponential, fit_power_law
from .linear import _ratio, default_linear_rates
from .profiles import Profile


@dataclass(frozen=True)
class SimState:
    q: np.ndarray
    v: np.ndarray
    t: float
    params: ArzParams
    dx: float


@dataclass(frozen=True)
class DecayTable:
    """Decay exponents ``gamma(k, n)`` for derivatives of order ``k + n <= 2``."""

    nu: float = 0.05

    def __post_init__(self):
        if not (0 < self.nu < 0.125):
            raise ConfigurationError("nu must lie in (0, 1/8)")

    def gamma(self, k: int, n: int) -> float:
        if (k, n) == (0, 0):
            return 0.5
        if (k, n) == (1, 0):
            return 1.0 - self.nu
        if (k, n) == (0, 1):
            return 1.5 - self.nu
        if k + n == 2 and k >= 0 and n >= 0:
            return 1.0 - self.nu
        raise UnsupportedOrderError(f"(k={k}, n={n}) not in the table")


def _relax(q, v, params: ArzParams, dt: float):
    # exact solution of d_t v = -(U_f q + v)/tau with q frozen
    return -params.uf * q + (v + params.uf * q) * math.exp(-dt / params.tau)


def _upwind_diff(f, speed, dx):
    """Sign-aware one-sided difference of ``f``; edge cells copy their neighbour."""
    back = np.empty_like(f)
    fwd = np.empty_like(f)
    back[1:] = f[1:] - f[:-1]
    back[0] = 0.0
    fwd[:-1] = f[1:] - f[:-1]
    fwd[-1] = 0.0
    return np.where(speed >= 0, back, fwd) / dx


def _central_diff(f, dx):
    g = np.zeros_like(f)
    g[1:-1] = (f[2:] - f[:-2]) / (2 * dx)
    return g


def step(state: SimState, dt: float, cfl: float = 0.9) -> SimState:
    """One Strang-split step.  Raises on CFL violation or a density breach."""
    p = state.params
    q, v = state.q, _relax(state.q, state.v, p, 0.5 * dt)
    l1, l2 = nonlinear_speeds(q, v, p)
    smax = float(max(np.max(np.abs(l1)), np.max(np.abs(l2))))
    if dt * smax > cfl * state.dx * (1 + 1e-12):
        raise ConfigurationError(f"CFL violated: dt*max|lambda| = {dt * smax} > {cfl}*dx")
    qn = q - dt * (l1 * _upwind_diff(q, l1, state.dx) + (p.rho0 + q) * _central_diff(v, state.dx))
    vn = v - dt * l2 * _upwind_diff(v, l2, state.dx)
    vn = _relax(qn, vn, p, 0.5 * dt)
    if np.any(p.rho0 + qn <= 0) or np.any(p.rho0 + qn >= 1):
        raise DensityRangeError(f"rho0 + q left (0, 1) at t = {state.t + dt}")
    return SimState(qn, vn, state.t + dt, p, state.dx)


def data_size(rho_i: Profile, u_i: Profile, x: np.ndarray) -> float:
    """Combined ``W^{2,1}`` and ``C^2`` size of the initial data, on the grid ``x``."""
    dx = float(x[1] - x[0])
    tot = 0.0
    for prof in (rho_i, u_i):
        for j in range(3):
            d = np.abs(prof.derivative(x, j))
            tot += float(np.sum(d) * dx + np.max(d))
    return tot


@dataclass
class Trajectory:
    """Snapshots of ``(q, v)`` on the output window and run diagnostics."""

    q: Field2D
    v: Field2D
    params: ArzParams
    rho_i: Profile
    u_i: Profile
    mass: np.ndarray
    epsilon: float
    status: str = "ok"
    message: str = ""
    lambda1_max: float = math.nan
    lambda2_min: float = math.nan
    steps: int = 0
    dt: float = 0.0

    @property
    def times(self) -> np.ndarray:
        return self.q.t

    @property
    def diverged(self) -> bool:
        return self.status != "ok"

    def derivative(self, k: int, n: int):
        """``d_t^n d_x^k`` of ``(q, v)`` on the snapshot grid.

        ``x``-derivatives are centered differences on each snapshot; time
        derivatives are rewritten through the equations first.
        """
        if k < 0 or n < 0 or k + n > 2:
            raise UnsupportedOrderError(f"(k={k}, n={n}) not supported")
        dx = self.q.dx
        p = self.params

        def ddx(f, m=1):
            for _ in range(m):
                f = np.gradient(f, dx, axis=0, edge_order=2)
            return f

        q, v = self.q.values, self.v.values
        if n == 0:
            return ddx(q, k), ddx(v, k)
        qx, vx = ddx(q), ddx(v)
        l1, l2 = nonlinear_speeds(q, v, p)
        rho = p.rho0 + q
        qt = -l1 * qx - rho * vx
        vt = -l2 * vx - (p.uf * q + v) / p.tau
        if (k, n) == (0, 1):
            return qt, vt
        if (k, n) == (1, 1):
            return ddx(qt), ddx(vt)
        # (0, 2): differentiate the right-hand sides in time
        qxt, vxt = ddx(qt), ddx(vt)
        dl2 = -(p.pressure.dh(rho) + rho * p.pressure.d2h(rho))
        qtt = -vt * qx - l1 * qxt - qt * vx - rho * vxt
        vtt = -(dl2 * qt + vt) * vx - l2 * vxt - (p.uf * qt + vt) / p.tau
        return qtt, vtt

    def sup_decay(self) -> np.ndarray:
        """``sup_x |q(., t)|`` per snapshot."""
        return np.max(np.abs(self.q.values), axis=0)


def simulate(rho_i: Profile, u_i: Profile, params: ArzParams, grid: GridSpec,
             cfl: float = 0.9, growth_limit: float = 10.0, speed_margin: float = 0.2) -> Trajectory:
    """Run the simulator to ``grid.t_end`` and record snapshots every ``grid.dt``.

    The computational domain is the window padded by ``(1 + speed_margin)``
    times the frozen speeds over ``t_end``, so the boundary never reaches the
    window.  Mass is integrated over the whole domain at every snapshot.
    Blow-up (sup growth beyond ``growth_limit`` times the initial size),
    density breaches and speeds beyond the margin end the run early with a
    report instead of an exception.
    """
    sp = characteristic_speeds(params)
    cmax = max(sp.lambda1_0, -sp.lambda2_0) * (1 + speed_margin)
    xs, win = padded_axis(grid.x_min, grid.x_max, grid.dx, cmax, grid.t_end, extra_cells=8)
    dx = grid.dx
    eps = data_size(rho_i, u_i, xs)
    if eps > 0.05 * min(sp.lambda1_0, -sp.lambda2_0):
        warnings.warn(f"data size {eps:.3g} is outside the small-data regime", ResolutionWarning,
                      stacklevel=2)
    q0 = np.asarray(rho_i(xs), dtype=float)
    v0 = np.asarray(u_i(xs), dtype=float)
    state = SimState(q0, v0, 0.0, params, dx)
    size0 = float(np.max(np.abs(q0)) + np.max(np.abs(v0)))
    sub = max(1, int(math.ceil(grid.dt * cmax / (cfl * dx) - 1e-12)))
    dt = grid.dt / sub
    t_out = grid.t
    nw = win.stop - win.start
    qs = np.zeros((nw, t_out.size))
    vs = np.zeros((nw, t_out.size))
    mass = np.full(t_out.size, math.nan)
    qs[:, 0], vs[:, 0] = q0[win], v0[win]
    mass[0] = float(np.sum(q0) * dx)
    l1m, l2m = (float(np.max(a)) if i == 0 else float(np.min(a))
                for i, a in enumerate(nonlinear_speeds(q0, v0, params)))
    status, msg, n_steps = "ok", "", 0
    for j in range(1, t_out.size):
        try:
            for _ in range(sub):
                state = step(state, dt, cfl)
                n_steps += 1
        except DensityRangeError as exc:
            status, msg = "density-breach", str(exc)
            break
        except ConfigurationError as exc:
            # speeds outgrew the margin the step size and padding were built for
            status, msg = "speed-limit", str(exc)
            break
        l1, l2 = nonlinear_speeds(state.q, state.v, params)
        l1m, l2m = max(l1m, float(np.max(l1))), min(l2m, float(np.min(l2)))
        qs[:, j], vs[:, j] = state.q[win], state.v[win]
        mass[j] = float(np.sum(state.q) * dx)
        size = float(np.max(np.abs(state.q)) + np.max(np.abs(state.v)))
        if not math.isfinite(size) or (size0 > 0 and size > growth_limit * size0):
            status, msg = "diverged", f"sup norm {size:.3g} exceeded {growth_limit} x initial at t={state.t:.4g}"
            break
    if status != "ok":
        keep = j + 1 if status == "diverged" else j
        qs, vs, mass = qs[:, :max(keep, 1)], vs[:, :max(keep, 1)], mass[:max(keep, 1)]
    qf = Field2D(qs, grid.x_min, dx, 0.0, grid.dt, sp.lambda_star)
    vf = Field2D(vs, grid.x_min, dx, 0.0, grid.dt, sp.lambda_star)
    return Trajectory(qf, vf, params, rho_i, u_i, mass, eps, status, msg, l1m, l2m, n_steps, dt)


def data_weight(rho_i: Profile, u_i: Profile):
    """``x -> sum_{j <= 2} |rho_i^(j)(x)| + |u_i^(j)(x)|``."""
    def w(x):
        out = np.zeros_like(np.asarray(x, dtype=float))
        for j in range(3):
            out = out + np.abs(rho_i.derivative(x, j)) + np.abs(u_i.derivative(x, j))
        return out
    return w


@dataclass
class NonlinearEnvelopeCheck:
    constant: float
    argmax_x: float
    argmax_t: float
    k: int
    n: int
    gamma: float


def verify_nonlinear_envelope(traj: Trajectory, k: int, n: int, table: DecayTable | None = None,
                              a: float | None = None, b: float | None = None,
                              delta: float | None = None, t_min: float = 5.0,
                              rel_floor: float = 1e-4) -> NonlinearEnvelopeCheck:
    """Empirical constant for the widened-cone envelope of the nonlinear solution.

    Right side: ``F`` with exponent ``gamma(k, n)`` over
    ``[(l2 - delta) t, (l1 + delta) t]`` plus ``G`` with rate ``b`` and window
    ``delta t`` along both frozen speeds, both applied to the weight of
    :func:`data_weight`.  Defaults: ``a`` half the kernel Gaussian rate,
    ``b`` the slower kernel edge rate, ``delta = 0.1 l1``.

    The first-order scheme smears the flat edges of compactly supported data
    ahead of the exact solution, so early times (``t < t_min``) and points
    below ``rel_floor`` times the maximum of the left side are skipped.
    """
    table = table or DecayTable()
    gam = table.gamma(k, n)
    sp = characteristic_speeds(traj.params)
    l1, l2 = sp.lambda1_0, sp.lambda2_0
    da, db = default_linear_rates(traj.params)
    a = da if a is None else a
    b = db if b is None else b
    delta = 0.1 * l1 if delta is None else delta
    dq, dv = traj.derivative(k, n)
    left = np.abs(dq) + np.abs(dv)
    x, t = traj.q.x, traj.q.t
    dx = traj.q.dx
    xe, win = padded_axis(float(x[0]), float(x[-1]), dx, max(l1, -l2) + delta, float(t[-1]),
                          extra_cells=8)
    wf = data_weight(traj.rho_i, traj.u_i)
    wg = wf(xe)
    wt = Weight(float(xe[0]), dx, wg)
    right = np.zeros_like(left)
    for j, tj in enumerate(t):
        f = envelope_f_grid(wg, dx, float(tj), a, gam, l1 + delta, l2 - delta)[win]
        g = envelope_g_grid(x, wt, float(tj), b, delta, l1) + envelope_g_grid(x, wt, float(tj), b, delta, l2)
        right[:, j] = f + g
    keep = t >= t_min
    K, ax, at = _ratio(left[:, keep], right[:, keep], x, t[keep], rel_floor)
    return NonlinearEnvelopeCheck(K, ax, at, k, n, gam)


@dataclass
class RayReport:
    speed: float
    origin: float
    kind: str  # "power" on the drift ray, "exponential" elsewhere
    fit: DecayFit | None
    times: np.ndarray
    values: np.ndarray
    truncated: bool = False


def localization_probe(traj: Trajectory, speeds, t_min: float = 10.0, t_max: float | None = None,
                       origins=(0.0,), tol: float = 1e-12) -> list[RayReport]:
    """Sample ``|q|`` along rays ``x = x0 + (lambda - lambda*) t`` of the moving frame.

    The drift ray ``lambda = lambda*`` gets a power-law fit, every other ray
    a log-linear fit.  Rays that leave the window are truncated with a warning.
    """
    ls = traj.q.frame_speed
    x, t = traj.q.x, traj.q.t
    t_max = float(t[-1]) if t_max is None else t_max
    sel = (t >= t_min) & (t <= t_max)
    out = []
    for x0 in origins:
        for lam in speeds:
            pos = x0 + (lam - ls) * t[sel]
            inside = (pos >= x[0]) & (pos <= x[-1])
            trunc = not bool(np.all(inside))
            if trunc:
                warnings.warn(f"ray {lam} from {x0} leaves the window", ResolutionWarning, stacklevel=2)
            cols = np.flatnonzero(sel)[inside]
            vals = np.abs([np.interp(p, x, traj.q.values[:, c]) for p, c in zip(pos[inside], cols)])
            tt = t[cols]
            drift = abs(lam - ls) <= tol
            fit = None
            if np.count_nonzero(vals) >= 3:
                fit = fit_power_law(tt, vals) if drift else fit_exponential(tt, vals)
            out.append(RayReport(lam, x0, "power" if drift else "exponential", fit, tt, vals, trunc))
    return out


def mass_outside_cones(traj: Trajectory, centers, margin: float, t: float) -> float:
    """``int |q|`` outside the union of ``[c - margin t, c + margin t]`` at the snapshot nearest ``t``."""
    j = int(np.argmin(np.abs(traj.q.t - t)))
    tj = float(traj.q.t[j])
    x = traj.q.x
    inside = np.zeros(x.size, dtype=bool)
    for c in centers:
        inside |= np.abs(x - c) <= margin * tj
    return float(np.sum(np.abs(traj.q.values[~inside, j])) * traj.q.dx)


def omega1_sup(traj: Trajectory) -> np.ndarray:
    """``sup_x |Omega_1|`` per snapshot, with centered spatial differences."""
    q, v = traj.q.values, traj.v.values
    qx = np.gradient(q, traj.q.dx, axis=0, edge_order=2)
    vx = np.gradient(v, traj.q.dx, axis=0, edge_order=2)
    om = omega_terms(q, v, qx, vx, traj.params)
    return np.max(np.abs(om.omega1), axis=0)
