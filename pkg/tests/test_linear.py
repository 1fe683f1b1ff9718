import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from arzlab.arz import ArzParams, log_pressure
from arzlab.dwe import GridSpec
from arzlab.errors import DomainError, SubcharacteristicError, UnsupportedOrderError
from arzlab.linear import (DiffusionWave, decoupling_residual, default_linear_rates, fd_reference_linear,
                           gaussian_diffusion_wave, linear_fields_at, nu_chapman_enskog, solve_linear_arz,
                           to_moving_frame, verify_linear_envelope)
from arzlab.profiles import bump, gaussian, zero

P = ArzParams(0.5, 1.0, 1.0, log_pressure())
P_DRIFT = ArzParams(0.3, 1.0, 1.0, log_pressure())  # lambda* = 0.4


def test_reference_constants():
    assert nu_chapman_enskog(P) == pytest.approx(0.25)
    # a0 = delta / (l1 - l2)^2 = 1 and both edges have speed 1/2
    a, b = default_linear_rates(P)
    assert a == pytest.approx(0.5) and b == pytest.approx(0.5)


def test_mass_is_conserved():
    x = np.arange(-60, 60 + 1e-9, 0.05)
    q, _ = linear_fields_at(gaussian(0.01), zero(), P, x, np.array([5.0, 40.0]), 0, 0.05)
    assert np.sum(q, axis=0) * 0.05 == pytest.approx([0.01 * math.sqrt(math.pi)] * 2, rel=1e-6)


@pytest.mark.parametrize("params", [P, P_DRIFT])
def test_kernel_agrees_with_upwind_oracle(params):
    rho_i, u_i = gaussian(0.01), gaussian(0.005, 0.5)
    errs = []
    for dx in (0.04, 0.02):
        g = GridSpec(-8, 8, dx, 3.0, 0.5)
        k = solve_linear_arz(rho_i, u_i, params, g)
        f = fd_reference_linear(rho_i, u_i, params, g)
        inner = slice(40, -40)  # away from the interpolation edge of the frame shift
        errs.append(float(np.max(np.abs(k.rho.values[inner] - f.rho.values[inner]))))
    assert errs[1] < errs[0]
    assert errs[1] < 5e-4


def test_frame_sign_convention():
    # the shift is an exact number of cells, so only the scheme error remains
    ls = 0.4
    res = {}
    for dx in (0.04, 0.02):
        lab = fd_reference_linear(gaussian(0.01), zero(), P_DRIFT, GridSpec(-15, 15, dx, 6, dx / ls)).rho
        res[dx] = (decoupling_residual(lab, P_DRIFT, +1), decoupling_residual(lab, P_DRIFT, -1))
    assert res[0.02][0] < 0.6 * res[0.04][0]
    assert res[0.02][1] > 100 * res[0.02][0]


def test_to_moving_frame_round_trip():
    x = np.linspace(-5, 5, 101)
    lab = np.exp(-(x[:, None] - 0.4 * np.array([0.0, 1.0, 2.0])[None, :]) ** 2)
    from arzlab.field import Field2D
    q = to_moving_frame(Field2D(lab, -5, 0.1, 0, 1.0), 0.4)
    assert np.allclose(q.values[30:70, 2], np.exp(-x[30:70] ** 2), atol=1e-2)
    with pytest.raises(ValueError):
        to_moving_frame(Field2D(lab, -5, 0.1, 0, 1.0), 0.4, sign=2)


def test_time_derivatives_via_system():
    g = GridSpec(-8, 8, 0.02, 2.0, 0.02)
    s = solve_linear_arz(bump(0.01), zero(), P, g, x_derivs=2)
    qt, vt = s.derivative(0, 1)
    fdq = np.gradient(s.q.values, g.dt, axis=1)
    assert np.max(np.abs(qt[:, 5:-5] - fdq[:, 5:-5])) < 1e-3 * np.max(np.abs(qt))
    qtt, _ = s.derivative(0, 2)
    fdqq = np.gradient(np.gradient(s.q.values, g.dt, axis=1), g.dt, axis=1)
    assert np.max(np.abs(qtt[:, 5:-5] - fdqq[:, 5:-5])) < 1e-2 * np.max(np.abs(qtt))
    with pytest.raises(UnsupportedOrderError):
        s.derivative(2, 1)


def test_envelope_constant_finite():
    g = GridSpec(-12, 12, 0.025, 10, 1.0)
    s = solve_linear_arz(bump(0.01), zero(), P, g, x_derivs=1)
    for k, n in [(0, 0), (1, 0), (0, 1)]:
        r = verify_linear_envelope(s, k, n)
        assert math.isfinite(r.constant) and r.constant > 0


def test_subcharacteristic_rejected():
    with pytest.raises(SubcharacteristicError):
        solve_linear_arz(gaussian(0.01), zero(), ArzParams(0.5, 3.0, 1.0, log_pressure()),
                         GridSpec(-1, 1, 0.1, 1, 1))


@settings(max_examples=30)
@given(st.floats(0.01, 10.0), st.floats(0.05, 2.0), st.floats(0.0, 50.0), st.floats(-1.0, 1.0))
def test_diffusion_wave_mass(m, nu, t, ls):
    w = DiffusionWave(m, nu, ls, "unit_mass")
    c = ls * (1 + t)
    sd = math.sqrt(2 * nu * (1 + t))
    mass, _ = integrate.quad(lambda x: float(gaussian_diffusion_wave(np.array([x]), t, w)[0]),
                             c - 12 * sd, c + 12 * sd, limit=200)
    assert mass == pytest.approx(m, rel=1e-8)
    wp = DiffusionWave(m, nu, ls, "inverse_nu")
    assert float(gaussian_diffusion_wave(np.array([c]), t, wp)[0]) == pytest.approx(
        m / (4 * math.pi * nu * math.sqrt(1 + t)))


def test_diffusion_wave_derivative_and_errors():
    w = DiffusionWave(1.0, 0.3, 0.2)
    x = np.linspace(-3, 3, 13)
    h = 1e-6
    fd = (gaussian_diffusion_wave(x + h, 2.0, w) - gaussian_diffusion_wave(x - h, 2.0, w)) / (2 * h)
    assert np.allclose(gaussian_diffusion_wave(x, 2.0, w, l=1), fd, rtol=1e-6, atol=1e-10)
    with pytest.raises(DomainError):
        DiffusionWave(1.0, 0.0)
    with pytest.raises(UnsupportedOrderError):
        gaussian_diffusion_wave(x, 1.0, w, l=2)
