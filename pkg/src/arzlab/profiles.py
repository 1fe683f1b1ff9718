"""Initial-data profiles with derivatives.

Families: ``gaussian``, ``bump`` (a smooth cutoff equal to one on ``[-1, 1]``
and zero outside ``[-2, 2]``), ``indicator`` and ``two_bump``.  Profiles
support addition and scalar multiplication so composite data can be built
without losing analytic derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import sympy as sym

MAX_ORDER = 4

Deriv = Callable[[np.ndarray, int], np.ndarray]


def _fd_derivative(f: Callable[[np.ndarray], np.ndarray], x: np.ndarray, k: int, h: float) -> np.ndarray:
    # 4th-order central stencils
    if k == 0:
        return f(x)
    if k == 1:
        return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h)
    if k == 2:
        return (-f(x - 2 * h) + 16 * f(x - h) - 30 * f(x) + 16 * f(x + h) - f(x + 2 * h)) / (12 * h * h)
    return (_fd_derivative(f, x + h, k - 1, h) - _fd_derivative(f, x - h, k - 1, h)) / (2 * h)


@dataclass(frozen=True)
class Profile:
    """A real profile ``x -> value`` with derivatives up to ``MAX_ORDER``.

    ``support`` is a bounding interval for compactly supported profiles and
    ``None`` otherwise.  ``scale`` is the shortest length over which the
    profile varies, used for resolution warnings.
    """

    deriv: Deriv
    support: tuple[float, float] | None = None
    scale: float = 1.0
    name: str = "profile"

    def __call__(self, x) -> np.ndarray:
        return self.derivative(x, 0)

    def derivative(self, x, k: int = 1) -> np.ndarray:
        if k < 0 or k > MAX_ORDER:
            raise ValueError(f"derivative order {k} not available")
        return self.deriv(np.asarray(x, dtype=float), k)

    def shifted(self, x0: float) -> "Profile":
        sup = None if self.support is None else (self.support[0] + x0, self.support[1] + x0)
        return Profile(lambda x, k: self.deriv(x - x0, k), sup, self.scale, f"{self.name}@{x0}")

    def __add__(self, other: "Profile") -> "Profile":
        if self.support is None or other.support is None:
            sup = None
        else:
            sup = (min(self.support[0], other.support[0]), max(self.support[1], other.support[1]))
        return Profile(lambda x, k: self.deriv(x, k) + other.deriv(x, k), sup,
                       min(self.scale, other.scale), f"{self.name}+{other.name}")

    def __mul__(self, c: float) -> "Profile":
        c = float(c)
        return Profile(lambda x, k: c * self.deriv(x, k), self.support, self.scale, self.name)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return self.name == "zero"


def zero() -> Profile:
    return Profile(lambda x, k: np.zeros_like(x), (0.0, 0.0), np.inf, "zero")


def gaussian(amplitude: float = 1.0, center: float = 0.0, width: float = 1.0) -> Profile:
    """``amplitude * exp(-((x - center) / width)^2)`` with exact derivatives."""

    def d(x, k):
        z = (x - center) / width
        # d^k/dz^k e^{-z^2} = (-1)^k H_k(z) e^{-z^2}, physicists' Hermite polynomials
        hk = np.polynomial.hermite.hermval(z, [0] * k + [1])
        return amplitude * (-1) ** k * hk * np.exp(-z * z) / width**k

    return Profile(d, None, width, "gaussian")


def _build_transition():
    s = sym.Symbol("s")
    psi = lambda u: sym.exp(-1 / u)
    tr = psi(s) / (psi(s) + psi(1 - s))
    return [sym.lambdify(s, sym.diff(tr, s, k), "numpy") for k in range(MAX_ORDER + 1)]


_TRANSITION = _build_transition()
_EDGE = 1e-3  # exp(-1/s) underflows to zero well before this


def _transition(s: np.ndarray, k: int) -> np.ndarray:
    """Smooth step from 0 (s <= 0) to 1 (s >= 1) and its derivatives."""
    out = np.zeros_like(s)
    if k == 0:
        out[s >= 1 - _EDGE] = 1.0
    inner = (s > _EDGE) & (s < 1 - _EDGE)
    if np.any(inner):
        with np.errstate(over="ignore", under="ignore", invalid="ignore"):
            out[inner] = _TRANSITION[k](s[inner])
    return out


def smooth_cutoff(x, k: int = 0) -> np.ndarray:
    """The cutoff ``chi``: one on ``[-1, 1]``, zero outside ``[-2, 2]``, C-infinity."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    if k == 0:
        out[np.abs(x) <= 1] = 1.0
    right = (x > 1) & (x < 2)
    left = (x < -1) & (x > -2)
    out[right] = (-1) ** k * _transition(2.0 - x[right], k)
    out[left] = _transition(2.0 + x[left], k)
    return out


def bump(amplitude: float = 1.0, center: float = 0.0) -> Profile:
    """``amplitude * chi(x - center)``, supported in ``[center-2, center+2]``."""
    return Profile(lambda x, k: amplitude * smooth_cutoff(x - center, k),
                   (center - 2.0, center + 2.0), 0.25, "bump")


def indicator(amplitude: float = 1.0, lo: float = -1.0, hi: float = 1.0) -> Profile:
    """Indicator of ``[lo, hi]``; derivatives are taken as zero."""

    def d(x, k):
        if k > 0:
            return np.zeros_like(x)
        return np.where((x >= lo) & (x <= hi), amplitude, 0.0)

    return Profile(d, (lo, hi), 0.0, "indicator")


def two_bump(amplitude: float, separation: float) -> Profile:
    """``amplitude * (chi(x - A) + chi(x + A))``."""
    p = bump(amplitude, separation) + bump(amplitude, -separation)
    return Profile(p.deriv, p.support, p.scale, "two_bump")


def sampled(x: np.ndarray, values: np.ndarray, h: float | None = None) -> Profile:
    """Linear interpolation of samples with zero extension; FD derivatives."""
    x = np.asarray(x, dtype=float)
    values = np.asarray(values, dtype=float)
    step = float(x[1] - x[0]) if h is None else h

    def f(z):
        return np.interp(z, x, values, left=0.0, right=0.0)

    return Profile(lambda z, k: _fd_derivative(f, z, k, step), (float(x[0]), float(x[-1])), step, "sampled")


def from_callable(f: Callable[[np.ndarray], np.ndarray], h: float = 1e-3,
                  support: tuple[float, float] | None = None, scale: float = 1.0) -> Profile:
    """Wrap a plain function; derivatives by 4th-order central differences."""
    return Profile(lambda x, k: _fd_derivative(f, x, k, h), support, scale, "callable")


FAMILIES = ("gaussian", "bump", "indicator", "two-bump")


def make_profile(family: str, amplitude: float = 1.0, centers: Sequence[float] = (0.0,),
                 width: float = 1.0, separation: float = 0.0) -> Profile:
    """Build a profile from a family name, as used in experiment configs."""
    family = family.strip().lower()
    if amplitude == 0.0:
        return zero()
    if family == "gaussian":
        parts = [gaussian(amplitude, c, width) for c in centers]
    elif family == "bump":
        parts = [bump(amplitude, c) for c in centers]
    elif family == "indicator":
        parts = [indicator(amplitude, c - width, c + width) for c in centers]
    elif family in ("two-bump", "two_bump"):
        return two_bump(amplitude, separation)
    else:
        raise ValueError(f"unknown profile family {family!r}; choose from {FAMILIES}")
    out = parts[0]
    for p in parts[1:]:
        out = out + p
    return out
