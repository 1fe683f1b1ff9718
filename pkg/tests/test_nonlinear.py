import math
import warnings

import numpy as np
import pytest

from arzlab.arz import ArzParams, DensityRangeError, log_pressure
from arzlab.dwe import GridSpec
from arzlab.errors import ConfigurationError, ResolutionWarning, UnsupportedOrderError
from arzlab.linear import fd_reference_linear
from arzlab.nonlinear import (DecayTable, SimState, localization_probe, mass_outside_cones, simulate, step,
                              verify_nonlinear_envelope)
from arzlab.profiles import bump, zero

P = ArzParams(0.5, 1.0, 1.0, log_pressure())


def run(amp, grid, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ResolutionWarning)
        return simulate(bump(amp), zero(), P, grid, **kw)


@pytest.mark.parametrize("q0", [0.01, -0.2, 0.3])
def test_uniform_relaxation_exact(q0):
    st = SimState(np.full(16, q0), np.zeros(16), 0.0, P, 0.1)
    for _ in range(50):
        st = step(st, 0.02)
    exact = -P.uf * q0 * (1 - math.exp(-st.t / P.tau))
    assert np.max(np.abs(st.v - exact)) <= 1e-12
    assert np.all(st.q == q0)


def test_step_errors():
    st = SimState(np.zeros(8), np.zeros(8), 0.0, P, 0.1)
    with pytest.raises(ConfigurationError):
        step(st, 1.0)
    # strong compression around a dense cell pushes rho0 + q past 1 in one step
    st = SimState(np.array([0.0, 0.0, 0.45, 0.0, 0.0]), np.array([0.0, 5.0, 0.0, -5.0, 0.0]), 0.0, P, 0.1)
    with pytest.raises(DensityRangeError):
        step(st, 0.004)


def test_small_data_matches_linear_oracle():
    g = GridSpec(-10, 10, 0.02, 5.0, 1.0)
    tr = run(1e-5, g)
    lin = fd_reference_linear(bump(1e-5), zero(), P, g)
    rel = np.max(np.abs(tr.q.values - lin.q.values)) / np.max(np.abs(lin.q.values))
    assert rel < 0.02


def test_mass_and_status():
    tr = run(0.01, GridSpec(-20, 20, 0.02, 10, 1.0))
    assert tr.status == "ok" and not tr.diverged
    assert np.max(np.abs(tr.mass - tr.mass[0])) <= 1e-3 * abs(tr.mass[0])


def test_breach_reported_not_raised():
    tr = run(0.45, GridSpec(-10, 10, 0.05, 20, 1.0))
    assert tr.status in ("density-breach", "diverged", "speed-limit")
    assert tr.diverged and tr.message
    assert tr.q.values.shape[1] < 21


def test_time_derivative_via_equations():
    tr = run(0.01, GridSpec(-10, 10, 0.01, 2.0, 0.01))
    qt, _ = tr.derivative(0, 1)
    fd = np.gradient(tr.q.values, tr.q.dt, axis=1)
    assert np.max(np.abs(qt[50:-50, 5:-5] - fd[50:-50, 5:-5])) < 0.05 * np.max(np.abs(qt))


def test_decay_table():
    t = DecayTable(0.05)
    assert t.gamma(0, 0) == 0.5 and t.gamma(0, 1) == pytest.approx(1.45)
    with pytest.raises(ConfigurationError):
        DecayTable(0.2)
    with pytest.raises(UnsupportedOrderError):
        t.gamma(3, 0)


def test_envelope_and_localization_tools():
    tr = run(0.01, GridSpec(-30, 30, 0.02, 30, 1.0))
    r = verify_nonlinear_envelope(tr, 0, 0)
    assert math.isfinite(r.constant)
    rays = localization_probe(tr, [0.0, 0.25], t_min=5, t_max=30)
    assert rays[0].kind == "power" and rays[1].kind == "exponential"
    assert -0.8 < rays[0].fit.exponent < -0.2
    assert mass_outside_cones(tr, [0.0], 10.0, 30) == 0.0
