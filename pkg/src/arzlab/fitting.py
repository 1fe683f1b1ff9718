"""Least-squares decay-rate fits."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FitError


@dataclass(frozen=True)
class DecayFit:
    exponent: float
    intercept: float
    n_points: int
    kind: str  # "power" (log-log against 1+t) or "exponential" (log-linear against t)


def _usable(t, values, min_points):
    t = np.asarray(t, dtype=float)
    v = np.abs(np.asarray(values, dtype=float))
    ok = np.isfinite(v) & (v > 0)
    if ok.sum() < min_points:
        raise FitError(f"only {int(ok.sum())} usable samples, need {min_points}")
    return t[ok], v[ok]


def fit_power_law(t, values, min_points: int = 3) -> DecayFit:
    """Slope of ``log|values|`` against ``log(1+t)``."""
    t, v = _usable(t, values, min_points)
    slope, icpt = np.polyfit(np.log1p(t), np.log(v), 1)
    return DecayFit(float(slope), float(icpt), t.size, "power")


def fit_exponential(t, values, min_points: int = 3) -> DecayFit:
    """Slope of ``log|values|`` against ``t``."""
    t, v = _usable(t, values, min_points)
    slope, icpt = np.polyfit(t, np.log(v), 1)
    return DecayFit(float(slope), float(icpt), t.size, "exponential")
