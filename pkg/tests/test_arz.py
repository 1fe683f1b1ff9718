import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from arzlab.arz import (ArzParams, DensityRangeError, characteristic_speeds, log_pressure, nonlinear_speeds,
                        omega_terms, power_pressure, pressure_from_name)
from arzlab.errors import ConfigurationError, SubcharacteristicError

LAWS = [log_pressure(1.0), log_pressure(0.4), power_pressure(1.0, 1.0), power_pressure(0.5, 2.0)]


@given(st.floats(0.05, 0.95), st.sampled_from(LAWS))
def test_pressure_derivatives(r, law):
    h = 1e-6
    assert law.dh(r) == pytest.approx((law.h(r + h) - law.h(r - h)) / (2 * h), rel=1e-6)
    assert law.d2h(r) == pytest.approx((law.dh(r + h) - law.dh(r - h)) / (2 * h), rel=1e-6)


def test_speeds_reference_state():
    sp = characteristic_speeds(ArzParams(0.5, 1.0, 1.0, log_pressure()))
    assert (sp.lambda1_0, sp.lambda2_0, sp.lambda_star, sp.s_cc) == pytest.approx((0.5, -0.5, 0.0, 1.0))


@given(st.floats(0.05, 0.95), st.floats(0.05, 0.9))
def test_equilibrium_speed_between_frozen_speeds(rho0, frac):
    # U_f below h'(rho0) keeps the sub-characteristic condition
    law = log_pressure()
    uf = frac * float(law.dh(rho0))
    p = ArzParams(rho0, uf, 1.0, law)
    sp = characteristic_speeds(p)
    # speeds are relative to the drift frame, so the drift speed sits at zero
    assert sp.lambda2_0 < 0 < sp.lambda1_0
    assert sp.lambda_star + sp.lambda1_0 == pytest.approx(float(p.equilibrium_speed(rho0)))


def test_subcharacteristic_violation():
    p = ArzParams(0.5, 3.0, 1.0, log_pressure())
    with pytest.raises(SubcharacteristicError):
        characteristic_speeds(p)
    assert characteristic_speeds(p, require_stable=False).s_cc == pytest.approx(-1.0)


def test_param_validation():
    with pytest.raises(ConfigurationError):
        ArzParams(1.5, 1.0, 1.0, log_pressure())
    with pytest.raises(ConfigurationError):
        ArzParams(0.5, 1.0, 0.0, log_pressure())
    with pytest.raises(ConfigurationError):
        pressure_from_name("quadratic")


def test_nonlinear_speeds_reduce_to_frozen():
    p = ArzParams(0.5, 1.0, 1.0, log_pressure())
    l1, l2 = nonlinear_speeds(np.zeros(3), np.zeros(3), p)
    assert np.allclose(l1, 0.5) and np.allclose(l2, -0.5)
    with pytest.raises(DensityRangeError):
        nonlinear_speeds(np.array([0.6]), np.zeros(1), p)


def test_omega_modes_agree_on_exact_time_derivatives():
    p = ArzParams(0.5, 1.0, 1.0, log_pressure())
    x = np.linspace(-3, 3, 61)
    q, v = 0.01 * np.exp(-x**2), 0.005 * np.exp(-(x - 0.5) ** 2)
    qx, vx = np.gradient(q, x), np.gradient(v, x)
    l1, l2 = nonlinear_speeds(q, v, p)
    qt = -l1 * qx - (0.5 + q) * vx
    vt = -l2 * vx - (p.uf * q + v) / p.tau
    a = omega_terms(q, v, qx, vx, p)
    b = omega_terms(q, v, qx, vx, p, qt, vt, mode="direct")
    assert np.allclose(a.omega1, b.omega1) and np.allclose(a.omega3, b.omega3)
    with pytest.raises(ValueError):
        omega_terms(q, v, qx, vx, p, mode="direct")
