"""Modified Bessel functions of the first kind, orders zero and one.

Values are produced in exponentially scaled form, ``e^{-x} I_nu(x)``, so that
the kernel code never has to form ``e^{x}`` for large arguments.  Below
``SWITCH`` the convergent power series is summed; above it the large-argument
expansion is used with optimal truncation.

The kernel of the damped wave operator is an entire function of the squared
argument ``s = x**2``.  :func:`i0_sqrt` and :func:`i0_sqrt_deriv` evaluate
``I_0(sqrt(s))`` and its ``s``-derivative for any real ``s``; for ``s < 0`` they
continue analytically to ``J_0(sqrt(-s))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

from .errors import DomainError

SWITCH = 15.0
OVERFLOW_ARG = 700.0
I0_SECOND_DERIVATIVE_AT_ZERO = 0.5

_N_SERIES = 64
_N_ASYMPTOTIC = 40

# (n!)^2 and n!(n+1)! for the series, precomputed once
_FACT = np.array([math.factorial(n) for n in range(_N_SERIES + 1)], dtype=float)
_INV_I0_DEN = 1.0 / (_FACT[:_N_SERIES] ** 2)
_INV_I1_DEN = 1.0 / (_FACT[:_N_SERIES] * _FACT[1:_N_SERIES + 1])


@dataclass(frozen=True)
class BesselEval:
    """Result of a scalar Bessel evaluation.

    ``scaled_value`` is always finite.  ``value`` is formed on demand and
    raises ``OverflowError`` when the argument exceeds ``OVERFLOW_ARG``.
    """

    x: float
    scaled_value: float
    regime: str

    @property
    def value(self) -> float:
        if self.x > OVERFLOW_ARG:
            raise OverflowError(f"unscaled Bessel value overflows for x={self.x}")
        return self.scaled_value * math.exp(self.x)


def _check_nonneg(x):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("Bessel argument must be finite")
    if np.any(arr < 0):
        raise DomainError("Bessel argument must be non-negative")
    return arr


def _series_sum(x2q: np.ndarray, inv_den: np.ndarray) -> np.ndarray:
    # Horner in (x/2)^2; all terms are positive so there is no cancellation.
    acc = np.zeros_like(x2q)
    for c in inv_den[::-1]:
        acc = acc * x2q + c
    return acc


def _asymptotic_scaled(x: np.ndarray, order: int) -> np.ndarray:
    """``e^{-x} I_order(x)`` from the large-argument expansion.

    Terms are accumulated while they keep shrinking in magnitude, which is the
    optimal truncation of the divergent series.
    """
    mu = 4.0 * order * order
    term = np.ones_like(x)
    total = np.ones_like(x)
    active = np.ones(x.shape, dtype=bool)
    prev = np.abs(term)
    for k in range(1, _N_ASYMPTOTIC):
        term = term * (-(mu - (2 * k - 1) ** 2) / (k * 8.0 * x))
        mag = np.abs(term)
        active &= mag < prev
        total = np.where(active, total + term, total)
        prev = mag
    return total / np.sqrt(2.0 * np.pi * x)


def _series_scaled_i0(x: np.ndarray) -> np.ndarray:
    return np.exp(-x) * _series_sum((x / 2.0) ** 2, _INV_I0_DEN)


def _series_scaled_i1(x: np.ndarray) -> np.ndarray:
    return np.exp(-x) * (x / 2.0) * _series_sum((x / 2.0) ** 2, _INV_I1_DEN)


def i0e(x) -> np.ndarray:
    """Vectorised ``e^{-x} I_0(x)`` for ``x >= 0``."""
    x = _check_nonneg(x)
    small = x < SWITCH
    xs = np.where(small, x, 0.0)
    xl = np.where(small, SWITCH, x)
    return np.where(small, _series_scaled_i0(xs), _asymptotic_scaled(xl, 0))


def i1e(x) -> np.ndarray:
    """Vectorised ``e^{-x} I_1(x)`` for ``x >= 0``."""
    x = _check_nonneg(x)
    small = x < SWITCH
    xs = np.where(small, x, 0.0)
    xl = np.where(small, SWITCH, x)
    return np.where(small, _series_scaled_i1(xs), _asymptotic_scaled(xl, 1))


def _scalar(x, fn) -> BesselEval:
    arr = _check_nonneg(x)
    if arr.ndim != 0:
        raise DomainError("scalar argument expected; use i0e/i1e for arrays")
    xv = float(arr)
    regime = "series" if xv < SWITCH else "asymptotic"
    return BesselEval(x=xv, scaled_value=float(fn(xv)), regime=regime)


def bessel_i0(x: float) -> BesselEval:
    """Evaluate ``I_0(x)`` for a scalar ``x >= 0``.

    Examples
    --------
    >>> round(bessel_i0(1.0).value, 10)
    1.2660658778
    """
    return _scalar(x, i0e)


def bessel_i1(x: float) -> BesselEval:
    """Evaluate ``I_1(x) = I_0'(x)`` for a scalar ``x >= 0``."""
    return _scalar(x, i1e)


def bessel_ratio(x):
    """``I_1(x) / I_0(x)``, in ``[0, 1)`` and nondecreasing in ``x``.

    Accepts scalars or arrays; the scaling factors cancel so the ratio is
    finite for every non-negative argument.
    """
    arr = _check_nonneg(x)
    out = i1e(arr) / i0e(arr)
    return float(out) if out.ndim == 0 else out


def series_i0(x) -> np.ndarray:
    """Unscaled power-series ``I_0`` (reference route, any ``x`` up to ~700)."""
    x = _check_nonneg(x)
    return _series_sum((x / 2.0) ** 2, _INV_I0_DEN) if np.all(x < 30) else _long_series(x, 0)


def series_i1(x) -> np.ndarray:
    """Unscaled power-series ``I_1`` (reference route)."""
    x = _check_nonneg(x)
    if np.all(x < 30):
        return (x / 2.0) * _series_sum((x / 2.0) ** 2, _INV_I1_DEN)
    return _long_series(x, 1)


def asymptotic_scaled(x, order: int) -> np.ndarray:
    """Large-argument expansion of ``e^{-x} I_order(x)`` used above ``SWITCH``."""
    x = _check_nonneg(x)
    if np.any(x == 0):
        raise DomainError("asymptotic expansion needs x > 0")
    return _asymptotic_scaled(x, order)


def _long_series(x: np.ndarray, order: int) -> np.ndarray:
    # Term recursion without precomputed factorials, for arguments where the
    # fixed-length series is too short.
    q = (x / 2.0) ** 2
    term = np.ones_like(x) if order == 0 else x / 2.0
    total = term.copy()
    for n in range(1, 400):
        term = term * q / (n * (n + order))
        total = total + term
    return total


# --- entire functions of s = x^2 -------------------------------------------

_SMALL_S = 1e-8


def i0_sqrt(s):
    """Return ``(m, e)`` with ``I_0(sqrt(s)) = m * exp(e)``.

    For ``s >= 0`` the exponent is ``sqrt(s)`` and ``m = e^{-sqrt(s)} I_0``;
    for ``s < 0`` the exponent is zero and ``m = J_0(sqrt(-s))``.
    """
    s = np.asarray(s, dtype=float)
    pos = s >= 0
    r = np.sqrt(np.abs(s))
    rp = np.where(pos, r, 0.0)
    m = np.where(pos, i0e(rp), _sp.j0(np.where(pos, 0.0, r)))
    return m, np.where(pos, r, 0.0)


def i0_sqrt_deriv(s):
    """Return ``(m, e)`` with ``d/ds I_0(sqrt(s)) = m * exp(e)``.

    The derivative is ``I_1(r) / (2 r)`` with ``r = sqrt(s)``, equal to 1/4 at
    ``s = 0``; on the negative axis it is ``J_1(r) / (2 r)`` with
    ``r = sqrt(-s)``.  The exponent matches :func:`i0_sqrt`.
    """
    s = np.asarray(s, dtype=float)
    pos = s >= 0
    r = np.sqrt(np.abs(s))
    rp = np.where(pos, r, 0.0)
    small = rp < SWITCH
    # I_1(r)/(2r) straight from the series, so r -> 0 needs no division
    ser = np.exp(-rp) * 0.5 * _series_sum((rp / 2.0) ** 2, _INV_I1_DEN) / 2.0
    big = _asymptotic_scaled(np.where(small, SWITCH, rp), 1) / (2.0 * np.where(small, SWITCH, rp))
    mpos = np.where(small, ser, big)
    rn = np.where(pos, 1.0, r)
    tiny = rn < 1e-4
    jn = np.where(tiny, 0.25 - rn**2 / 32.0, _sp.j1(rn) / (2.0 * rn))
    m = np.where(pos, mpos, jn)
    return m, np.where(pos, r, 0.0)
