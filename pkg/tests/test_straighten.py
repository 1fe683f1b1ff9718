import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arzlab.arz import ArzParams, characteristic_speeds, log_pressure
from arzlab.dwe import GridSpec
from arzlab.errors import MapInvalidError, ResolutionWarning
from arzlab.field import Field2D
from arzlab.nonlinear import simulate
from arzlab.profiles import bump, zero
from arzlab.straighten import (build_map, invert_map, product_identity_defect, remainder_terms, solve_transport_h,
                               straighten_trajectory, transport_residual)

P = ArzParams(0.5, 1.0, 1.0, log_pressure())


def traj(dx, amp=0.01):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ResolutionWarning)
        return simulate(bump(amp), zero(), P, GridSpec(-12, 12, dx, 12, dx))


@pytest.fixture(scope="module")
def mapped():
    tr = traj(0.04)
    m, sp, rem = straighten_trajectory(tr.q, tr.v, P)
    return tr, m, sp, rem


def test_zero_perturbation_gives_identity():
    z = Field2D(np.zeros((41, 11)), -2, 0.1, 0, 0.1)
    m, sp, rem = straighten_trajectory(z, z, P)
    assert m.near_identity == 0.0
    y, nu = m.forward(np.array([0.3]), np.array([0.5]))
    assert y[0] == 0.3 and nu[0] == 0.5
    assert np.max(np.abs(rem.R1.values)) < 1e-14 and np.max(np.abs(rem.R2.values)) < 1e-14


def test_transport_solution_constant_speed():
    # constant lambda: H = (lambda0 - lambda) t exactly
    lam = Field2D(np.full((21, 6), 0.3), 0, 0.1, 0, 0.1)
    H = solve_transport_h(lam, 0.5)
    assert np.allclose(H.values, 0.2 * H.t[None, :])
    assert transport_residual(H, lam, 0.5) < 1e-12


def test_map_near_identity(mapped):
    tr, m, sp, rem = mapped
    assert m.near_identity < 0.5
    det = m.jacobian_det()
    assert np.all(np.abs(det - 1) < 0.2)
    assert np.max(np.abs(rem.R1.values) + np.abs(rem.R2.values)) <= 0.1
    assert np.all(m.h2_tilde.values[:, 0] == 0)


@settings(max_examples=30, deadline=None)
@given(st.floats(-8, 8), st.floats(1, 11))
def test_round_trip(mapped, y, nu):
    _, m, _, _ = mapped
    inv = invert_map(m, np.array([y]), np.array([nu]))
    Y, N = m.forward(inv.x, inv.t)
    assert abs(Y[0] - y) <= 1e-9 and abs(N[0] - nu) <= 1e-9


def test_naive_remainders_agree(mapped):
    tr, m, sp, rem = mapped
    naive = remainder_terms(m, sp, 1 / P.tau, 0.0 * sp.l1, naive=True)
    exact = remainder_terms(m, sp, 1 / P.tau, 0.0 * sp.l1)
    inner = (slice(5, -5), slice(5, -5))
    assert np.max(np.abs(naive.R1.values[inner] - exact.R1.values[inner])) < 0.05


def test_product_identity_converges():
    d = []
    for dx in (0.08, 0.04):
        tr = traj(dx)
        m, sp, _ = straighten_trajectory(tr.q, tr.v, P)
        d.append(product_identity_defect(m, sp))
    assert d[1] < d[0]


def test_invalid_map_rejected():
    cs = characteristic_speeds(P)
    H = Field2D(np.outer(np.sin(np.linspace(0, 20, 41)), np.linspace(0, 5, 11)), 0, 0.1, 0, 0.1)
    with pytest.raises(MapInvalidError):
        build_map(H, H.with_values(-H.values), cs.lambda1_0, cs.lambda2_0, 1.0)
