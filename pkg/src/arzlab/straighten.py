"""Near-identity change of variables that straightens the characteristics.

``H1`` and ``H2`` solve ``(d_t + l_i d_x) H_i = l_i^0 - l_i`` with zero data.
From them

    h1~ = (l2^0 H1 - l1^0 H2) / (l2^0 - l1^0),   h2~ = (H1 - H2) / (l2^0 - l1^0),

and ``(x, t) -> (y, nu) = (x + h1~, t + h2~)``.  In the new variables a
solution of ``P f + delta d_t f + w d_x f = 0``, with
``P = d_tt + (l1 + l2) d_xt + l1 l2 d_xx``, solves the constant-coefficient
damped wave equation up to the remainders ``R1 d_nu g + R2 d_y g``.

Second derivatives of ``h`` never need to be formed: ``P H1`` and ``P H2``
reduce to first derivatives of ``H_i`` and of the speeds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .arz import ArzParams, characteristic_speeds, nonlinear_speeds, omega_terms
from .errors import ConfigurationError, InversionError, MapInvalidError
from .field import Field2D

NEAR_IDENTITY_BOUND = 0.5


def _dx(a, h):
    return np.gradient(a, h, axis=0, edge_order=2)


def _dt(a, k):
    return np.gradient(a, k, axis=1, edge_order=2)


def solve_transport_h(lambda_field: Field2D, lambda0: float, cfl: float = 0.9) -> Field2D:
    """Upwind solution of ``(d_t + lambda d_x) H = lambda0 - lambda``, ``H(., 0) = 0``.

    ``lambda`` is linear in time between the columns of ``lambda_field``;
    each output interval is split into enough substeps for the CFL bound.
    Inflow boundaries use a zero-gradient closure.
    """
    lam = lambda_field.values
    dx, dt_out = lambda_field.dx, lambda_field.dt
    nx, nt = lam.shape
    smax = float(np.max(np.abs(lam))) if lam.size else 0.0
    sub = max(1, int(math.ceil(dt_out * smax / (cfl * dx) - 1e-12)))
    dt = dt_out / sub
    if dt * smax > cfl * dx * (1 + 1e-12):
        raise ConfigurationError("CFL violated")
    H = np.zeros(nx)
    out = np.zeros((nx, nt))
    for j in range(nt - 1):
        a, b = lam[:, j], lam[:, j + 1]
        for m in range(sub):
            th = m / sub
            lt = (1 - th) * a + th * b
            back = np.empty(nx)
            fwd = np.empty(nx)
            back[0] = 0.0
            back[1:] = H[1:] - H[:-1]
            fwd[-1] = 0.0
            fwd[:-1] = H[1:] - H[:-1]
            grad = np.where(lt >= 0, back, fwd) / dx
            H = H - dt * lt * grad + dt * (lambda0 - lt)
        out[:, j + 1] = H
    return lambda_field.with_values(out)


def transport_residual(H: Field2D, lambda_field: Field2D, lambda0: float) -> float:
    """Sup over the interior of ``|d_t H + lambda d_x H - (lambda0 - lambda)|``."""
    r = _dt(H.values, H.dt) + lambda_field.values * _dx(H.values, H.dx) - (lambda0 - lambda_field.values)
    return float(np.max(np.abs(r[1:-1, 1:-1])))


@dataclass
class StraighteningMap:
    H1: Field2D
    H2: Field2D
    h1_tilde: Field2D
    h2_tilde: Field2D
    lambda1_0: float
    lambda2_0: float
    delta0: float
    near_identity: float = 0.0

    def forward(self, x, t):
        """``(y, nu)`` at arbitrary points by bilinear interpolation."""
        (a, _, _), (b, _, _) = _bilinear_many(self, np.asarray(x, float), np.asarray(t, float))
        return np.asarray(x, float) + a, np.asarray(t, float) + b

    def jacobian_det(self) -> np.ndarray:
        h1, h2 = self.h1_tilde, self.h2_tilde
        return ((1 + _dx(h1.values, h1.dx)) * (1 + _dt(h2.values, h2.dt))
                - _dt(h1.values, h1.dt) * _dx(h2.values, h2.dx))


def build_map(H1: Field2D, H2: Field2D, lambda1_0: float, lambda2_0: float, delta0: float,
              bound: float = NEAR_IDENTITY_BOUND) -> StraighteningMap:
    """Assemble ``h1~``, ``h2~`` and check that the map is close to the identity.

    Raises :class:`MapInvalidError` if the summed first derivatives of the
    ``h~`` reach ``bound`` or if ``d_t h2 < 1/2`` somewhere.
    """
    if not H1.same_grid(H2):
        raise ConfigurationError("H1 and H2 must share a grid")
    den = lambda2_0 - lambda1_0
    h1 = H1.with_values((lambda2_0 * H1.values - lambda1_0 * H2.values) / den)
    h2 = H1.with_values((H1.values - H2.values) / den)
    dx, dt = H1.dx, H1.dt
    size = (np.abs(_dt(h1.values, dt)) + np.abs(_dx(h1.values, dx))
            + np.abs(_dt(h2.values, dt)) + np.abs(_dx(h2.values, dx)))
    sup = float(np.max(size)) if size.size else 0.0
    if not sup < bound:
        raise MapInvalidError(f"map is not near the identity: sup of first derivatives {sup:.4g} >= {bound}")
    if np.any(1 + _dt(h2.values, dt) < 0.5):
        raise MapInvalidError("d_t h2 dropped below 1/2")
    return StraighteningMap(H1, H2, h1, h2, lambda1_0, lambda2_0, delta0, sup)


def _cell(f: Field2D, x, t):
    nx, nt = f.values.shape
    fx = (x - f.x0) / f.dx
    ft = (t - f.t0) / f.dt
    i = np.clip(np.floor(fx).astype(int), 0, nx - 2)
    j = np.clip(np.floor(ft).astype(int), 0, nt - 2)
    return i, j, fx - i, ft - j


def _bilinear(f: Field2D, x, t):
    """Value and exact partial derivatives of the bilinear interpolant."""
    i, j, a, b = _cell(f, x, t)
    v = f.values
    f00, f10, f01, f11 = v[i, j], v[i + 1, j], v[i, j + 1], v[i + 1, j + 1]
    val = (1 - a) * (1 - b) * f00 + a * (1 - b) * f10 + (1 - a) * b * f01 + a * b * f11
    ddx = ((1 - b) * (f10 - f00) + b * (f11 - f01)) / f.dx
    ddt = ((1 - a) * (f01 - f00) + a * (f11 - f10)) / f.dt
    return val, ddx, ddt


def _bilinear_many(m: StraighteningMap, x, t):
    return _bilinear(m.h1_tilde, x, t), _bilinear(m.h2_tilde, x, t)


def interpolate(f: Field2D, x, t):
    """Bilinear interpolation of a field (clamped to the boundary cells)."""
    return _bilinear(f, np.asarray(x, float), np.asarray(t, float))[0]


@dataclass
class Inversion:
    x: np.ndarray
    t: np.ndarray
    iterations: int
    residual: float


def invert_map(m: StraighteningMap, y, nu, tol: float = 1e-10, max_iter: int = 25) -> Inversion:
    """Solve ``x + h1~(x, t) = y``, ``t + h2~(x, t) = nu`` by Newton iteration.

    The bilinear interpolant is differentiated exactly, and the iteration
    starts from ``(x, t) = (y, nu)``.
    """
    y = np.asarray(y, dtype=float)
    nu = np.asarray(nu, dtype=float)
    x, t = y.copy(), nu.copy()
    res = math.inf
    for it in range(1, max_iter + 1):
        (a, ax, at), (b, bx, bt) = _bilinear_many(m, x, t)
        r1 = x + a - y
        r2 = t + b - nu
        res = float(np.max(np.abs(np.concatenate([np.ravel(r1), np.ravel(r2)])))) if r1.size else 0.0
        if res <= tol:
            return Inversion(x, t, it, res)
        j11, j12, j21, j22 = 1 + ax, at, bx, 1 + bt
        det = j11 * j22 - j12 * j21
        x = x - (j22 * r1 - j12 * r2) / det
        t = t - (-j21 * r1 + j11 * r2) / det
    (a, _, _), (b, _, _) = _bilinear_many(m, x, t)
    res = float(max(np.max(np.abs(x + a - y)), np.max(np.abs(t + b - nu))))
    if res <= tol:
        return Inversion(x, t, max_iter, res)
    raise InversionError(f"inversion did not converge: residual {res:.3g} after {max_iter} iterations")


@dataclass
class SpeedFields:
    """Pointwise speeds and their first derivatives on the map grid."""

    l1: np.ndarray
    l2: np.ndarray
    l1_t: np.ndarray
    l1_x: np.ndarray
    l2_t: np.ndarray
    l2_x: np.ndarray


def speed_fields(q: Field2D, v: Field2D, params: ArzParams) -> SpeedFields:
    """Speeds of a trajectory; time derivatives are taken through the equations."""
    qv, vv = q.values, v.values
    qx, vx = _dx(qv, q.dx), _dx(vv, v.dx)
    l1, l2 = nonlinear_speeds(qv, vv, params)
    rho = params.rho0 + qv
    qt = -l1 * qx - rho * vx
    vt = -l2 * vx - (params.uf * qv + vv) / params.tau
    dl2 = -(params.pressure.dh(rho) + rho * params.pressure.d2h(rho))
    return SpeedFields(l1, l2, vt, vx, dl2 * qt + vt, dl2 * qx + vx)


@dataclass
class Remainders:
    R1: Field2D
    R2: Field2D
    B1: np.ndarray
    B2: np.ndarray
    A1: np.ndarray
    A2: np.ndarray


def _h_derivs(m: StraighteningMap, sp: SpeedFields):
    """First derivatives of ``h1``, ``h2``; time derivatives of ``H_i`` from their equations."""
    dx = m.H1.dx
    H1x, H2x = _dx(m.H1.values, dx), _dx(m.H2.values, dx)
    H1t = m.lambda1_0 - sp.l1 - sp.l1 * H1x
    H2t = m.lambda2_0 - sp.l2 - sp.l2 * H2x
    den = m.lambda2_0 - m.lambda1_0
    h1x = 1 + (m.lambda2_0 * H1x - m.lambda1_0 * H2x) / den
    h1t = (m.lambda2_0 * H1t - m.lambda1_0 * H2t) / den
    h2x = (H1x - H2x) / den
    h2t = 1 + (H1t - H2t) / den
    return H1x, H2x, h1x, h1t, h2x, h2t


def remainder_terms(m: StraighteningMap, sp: SpeedFields, delta, w_coef,
                    naive: bool = False) -> Remainders:
    """``R1`` and ``R2`` from first derivatives only.

    With ``naive=True`` the terms ``P h_i`` are instead formed from
    centered second differences of the ``h~`` grids (a cross-check).
    Raises :class:`MapInvalidError` when ``|B1 B2| < 0.1`` anywhere.
    """
    H1x, H2x, h1x, h1t, h2x, h2t = _h_derivs(m, sp)
    B1 = h2t + sp.l1 * h2x
    B2 = h2t + sp.l2 * h2x
    A1 = h1t + sp.l1 * h1x
    A2 = h1t + sp.l2 * h1x
    BB = B1 * B2
    if np.any(np.abs(BB) < 0.1):
        raise MapInvalidError(f"degenerate map: min |B1 B2| = {float(np.min(np.abs(BB))):.3g}")
    den = m.lambda2_0 - m.lambda1_0
    if naive:
        dx, dt = m.H1.dx, m.H1.dt

        def P(f):
            return (_dt(_dt(f, dt), dt) + (sp.l1 + sp.l2) * _dx(_dt(f, dt), dx)
                    + sp.l1 * sp.l2 * _dx(_dx(f, dx), dx))

        Ph1, Ph2 = P(m.h1_tilde.values), P(m.h2_tilde.values)
    else:
        PH1 = -(sp.l1_t + sp.l2 * sp.l1_x) * (1 + H1x)
        PH2 = -(sp.l2_t + sp.l1 * sp.l2_x) * (1 + H2x)
        Ph1 = (m.lambda2_0 * PH1 - m.lambda1_0 * PH2) / den
        Ph2 = (PH1 - PH2) / den
    R1 = (Ph2 + delta * h2t + w_coef * h2x) / BB - m.delta0
    R2 = (Ph1 + delta * h1t + w_coef * h1x) / BB
    return Remainders(m.H1.with_values(R1), m.H1.with_values(R2), B1, B2, A1, A2)


def straighten_trajectory(q: Field2D, v: Field2D, params: ArzParams, cfl: float = 0.9):
    """Map and remainders for the ``v`` equation of a simulated trajectory.

    Returns ``(map, speeds, remainders)``; for ``v`` the damping is
    ``1/tau`` and the first-order coefficient is ``Omega_1``.
    """
    cs = characteristic_speeds(params)
    sp = speed_fields(q, v, params)
    H1 = solve_transport_h(q.with_values(sp.l1), cs.lambda1_0, cfl)
    H2 = solve_transport_h(q.with_values(sp.l2), cs.lambda2_0, cfl)
    m = build_map(H1, H2, cs.lambda1_0, cs.lambda2_0, 1.0 / params.tau)
    qx, vx = _dx(q.values, q.dx), _dx(v.values, v.dx)
    om = omega_terms(q.values, v.values, qx, vx, params).omega1
    rem = remainder_terms(m, sp, 1.0 / params.tau, om)
    return m, sp, rem


def transformed_residual(f: Field2D, m: StraighteningMap, rem: Remainders,
                         y, nu) -> float:
    """Residual of the straightened equation for ``g = f o pi`` on a ``(y, nu)`` grid.

    ``g`` is built by inverting the map and interpolating ``f`` bilinearly;
    the residual of
    ``g_nn + (l1+l2) g_yn + l1 l2 g_yy + (delta0 + R1) g_n + R2 g_y``
    (frozen speeds) is measured by centered differences over the interior.
    """
    y = np.asarray(y, dtype=float)
    nu = np.asarray(nu, dtype=float)
    Y, N = np.meshgrid(y, nu, indexing="ij")
    inv = invert_map(m, Y, N)
    g = interpolate(f, inv.x, inv.t)
    r1 = interpolate(rem.R1, inv.x, inv.t)
    r2 = interpolate(rem.R2, inv.x, inv.t)
    hy, hn = y[1] - y[0], nu[1] - nu[0]
    c = g[1:-1, 1:-1]
    g_nn = (g[1:-1, 2:] - 2 * c + g[1:-1, :-2]) / hn**2
    g_yy = (g[2:, 1:-1] - 2 * c + g[:-2, 1:-1]) / hy**2
    g_yn = (g[2:, 2:] - g[:-2, 2:] - g[2:, :-2] + g[:-2, :-2]) / (4 * hy * hn)
    g_n = (g[1:-1, 2:] - g[1:-1, :-2]) / (2 * hn)
    g_y = (g[2:, 1:-1] - g[:-2, 1:-1]) / (2 * hy)
    l1, l2 = m.lambda1_0, m.lambda2_0
    res = (g_nn + (l1 + l2) * g_yn + l1 * l2 * g_yy + (m.delta0 + r1[1:-1, 1:-1]) * g_n
           + r2[1:-1, 1:-1] * g_y)
    return float(np.max(np.abs(res)))


def product_identity_defect(m: StraighteningMap, sp: SpeedFields) -> float:
    """``sup |A1 - l1^0 B1| + |A2 - l2^0 B2|`` with all derivatives taken on the grid."""
    h1, h2 = m.h1_tilde, m.h2_tilde
    dx, dt = h1.dx, h1.dt
    h1x, h1t = 1 + _dx(h1.values, dx), _dt(h1.values, dt)
    h2x, h2t = _dx(h2.values, dx), 1 + _dt(h2.values, dt)
    d1 = (h1t + sp.l1 * h1x) - m.lambda1_0 * (h2t + sp.l1 * h2x)
    d2 = (h1t + sp.l2 * h1x) - m.lambda2_0 * (h2t + sp.l2 * h2x)
    return float(np.max(np.abs(d1[:, 1:-1]) + np.abs(d2[:, 1:-1])))
