"""Aw-Rascle-Zhang model: parameters, pressure laws and characteristic speeds.

The model is written for a perturbation ``(q, v)`` of a constant state
``(rho0, U(rho0))`` in the frame moving with the equilibrium drift speed:

    d_t q + l1 d_x q + (rho0 + q) d_x v = 0
    d_t v + l2 d_x v + (U_f q + v) / tau = 0

with ``l1 = rho0 U_f + v`` and ``l2 = rho0 U_f - (rho0+q) h'(rho0+q) + v``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal, Optional

import numpy as np

from .errors import ConfigurationError, DomainError, SubcharacteristicError


class DensityRangeError(DomainError):
    """Total density left the open interval (0, 1)."""


@dataclass(frozen=True)
class PressureLaw:
    """A pressure ``h(rho)`` with analytic first and second derivatives."""

    name: str
    h: Callable[[np.ndarray], np.ndarray]
    dh: Callable[[np.ndarray], np.ndarray]
    d2h: Callable[[np.ndarray], np.ndarray]
    g_closed_form: Optional[Callable[[np.ndarray, float], np.ndarray]] = None


def log_pressure(c: float = 1.0) -> PressureLaw:
    """``h(rho) = -c ln(1 - rho)``."""
    return PressureLaw(
        name=f"log(c={c})",
        h=lambda r: -c * np.log1p(-np.asarray(r, dtype=float)),
        dh=lambda r: c / (1.0 - np.asarray(r, dtype=float)),
        d2h=lambda r: c / (1.0 - np.asarray(r, dtype=float)) ** 2,
        # integral of h'(nu)/nu from cref to rho
        g_closed_form=lambda r, cref: c * (np.log(r / (1 - r)) - math.log(cref / (1 - cref))),
    )


def power_pressure(c: float = 1.0, gamma: float = 1.0) -> PressureLaw:
    """``h(rho) = c rho^gamma / (1 - rho)``."""
    g = gamma

    def h(r):
        r = np.asarray(r, dtype=float)
        return c * r**g / (1 - r)

    def dh(r):
        r = np.asarray(r, dtype=float)
        return c * (g * r ** (g - 1) / (1 - r) + r**g / (1 - r) ** 2)

    def d2h(r):
        r = np.asarray(r, dtype=float)
        return c * (g * (g - 1) * r ** (g - 2) / (1 - r) + 2 * g * r ** (g - 1) / (1 - r) ** 2
                    + 2 * r**g / (1 - r) ** 3)

    return PressureLaw(f"power(c={c},gamma={gamma})", h, dh, d2h)


def pressure_from_name(name: str, c: float = 1.0, gamma: float = 1.0) -> PressureLaw:
    name = name.strip().lower()
    if name in ("log", "logarithmic"):
        return log_pressure(c)
    if name in ("power", "rational"):
        return power_pressure(c, gamma)
    raise ConfigurationError(f"unknown pressure law {name!r}; choose 'log' or 'power'")


@dataclass(frozen=True)
class ArzParams:
    rho0: float
    uf: float
    tau: float
    pressure: PressureLaw

    def __post_init__(self):
        if not (0.0 < self.rho0 < 1.0):
            raise ConfigurationError("rho0 must lie in (0, 1)")
        if not (self.uf > 0 and self.tau > 0):
            raise ConfigurationError("uf and tau must be positive")

    def equilibrium_speed(self, rho):
        """``U(rho) = U_f (1 - rho)``."""
        return self.uf * (1.0 - np.asarray(rho, dtype=float))


@dataclass(frozen=True)
class CharSpeeds:
    lambda1_0: float
    lambda2_0: float
    lambda_star: float
    s_cc: float


def characteristic_speeds(params: ArzParams, require_stable: bool = True) -> CharSpeeds:
    """Frozen speeds at the constant state and the drift speed.

    Raises :class:`SubcharacteristicError` when ``h'(rho0) - U_f <= 0`` unless
    ``require_stable`` is false.
    """
    r0, uf = params.rho0, params.uf
    hp = float(params.pressure.dh(r0))
    s_cc = hp - uf
    if require_stable and not s_cc > 0:
        raise SubcharacteristicError(f"sub-characteristic condition fails: h'(rho0) - U_f = {s_cc}")
    return CharSpeeds(
        lambda1_0=r0 * uf,
        lambda2_0=r0 * (uf - hp),
        lambda_star=float(params.equilibrium_speed(r0)) - r0 * uf,
        s_cc=s_cc,
    )


def _total_density(q, params: ArzParams) -> np.ndarray:
    rho = params.rho0 + np.asarray(q, dtype=float)
    if np.any(rho <= 0) or np.any(rho >= 1):
        raise DensityRangeError("rho0 + q left (0, 1)")
    return rho


def nonlinear_speeds(q, v, params: ArzParams):
    """Pointwise ``(lambda1, lambda2)`` of the perturbation system."""
    rho = _total_density(q, params)
    v = np.asarray(v, dtype=float)
    base = params.rho0 * params.uf
    l1 = base + v
    l2 = base - rho * params.pressure.dh(rho) + v
    return l1, l2


@dataclass
class OmegaTerms:
    omega1: np.ndarray
    omega2: np.ndarray
    omega3: np.ndarray


def omega_terms(q, v, q_x, v_x, params: ArzParams, q_t=None, v_t=None,
                mode: Literal["semi-discrete", "direct"] = "semi-discrete") -> OmegaTerms:
    """Coefficients that couple the second-order equations for ``q`` and ``v``.

    ``omega1`` multiplies ``d_x v`` in the equation for ``v``; ``omega2`` adds to
    the damping and ``omega3`` multiplies ``d_x q`` in the equation for ``q``.
    In ``"semi-discrete"`` mode time derivatives of ``(q, v)`` are replaced by
    space derivatives through the first-order system; in ``"direct"`` mode the
    supplied ``q_t``, ``v_t`` are used.
    """
    arrs = [np.asarray(a, dtype=float) for a in (q, v, q_x, v_x)]
    if mode == "direct":
        if q_t is None or v_t is None:
            raise ValueError("direct mode needs q_t and v_t")
        arrs += [np.asarray(q_t, dtype=float), np.asarray(v_t, dtype=float)]
    shapes = {a.shape for a in arrs}
    if len(shapes) != 1:
        raise ValueError(f"mismatched field shapes {shapes}")
    q, v, q_x, v_x = arrs[:4]
    rho = _total_density(q, params)
    l1, l2 = nonlinear_speeds(q, v, params)
    relax = (params.uf * q + v) / params.tau
    if mode == "semi-discrete":
        q_t = -l1 * q_x - rho * v_x
        v_t = -l2 * v_x - relax
    else:
        q_t, v_t = arrs[4], arrs[5]
    dl2_drho = -(params.pressure.dh(rho) + rho * params.pressure.d2h(rho))
    l2_t = dl2_drho * q_t + v_t
    l2_x = dl2_drho * q_x + v_x
    tail = (v - params.uf * q) / params.tau
    return OmegaTerms(l2_t + l1 * l2_x + tail, v_x.copy(), tail + l2 * v_x)


def conservative_diagnostics(rho, u, params: ArzParams, c: float | None = None, n_panels: int = 200):
    """``G(rho) = rho * int_c^rho h'(nu)/nu dnu`` and ``w = u + G(rho)``.

    ``rho`` is the total density.  The integral is a composite Simpson rule
    with ``n_panels`` panels between ``c`` (default ``rho0``) and ``rho``.
    """
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0):
        raise DomainError("density must be positive")
    if c is None:
        c = params.rho0
    if not (0 < c < 1):
        raise DomainError("reference density must lie in (0, 1)")
    n = n_panels + (n_panels % 2)
    s = np.linspace(0.0, 1.0, n + 1)
    wts = np.ones(n + 1)
    wts[1:-1:2] = 4.0
    wts[2:-1:2] = 2.0
    wts /= 3.0 * n
    nu = c + (rho[..., None] - c) * s
    integrand = params.pressure.dh(nu) / nu
    integral = (rho - c) * (integrand @ wts)
    G = rho * integral
    return G, np.asarray(u, dtype=float) + G
