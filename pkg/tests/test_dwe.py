import math

import numpy as np
import pytest

from arzlab.dwe import DweProblem, GridSpec, fd_reference_dwe, kernel_solution, pde_residual, solve_dwe_kernel
from arzlab.errors import ConfigurationError, DomainError
from arzlab.kernel import DampedWaveCoeffs
from arzlab.profiles import gaussian, zero

C = DampedWaveCoeffs(2.0, -0.5, 1.3)


def sup_diff(a, b):
    return float(np.max(np.abs(a.values - b.values)))


@pytest.mark.parametrize("which", ["f1", "f0"])
def test_kernel_matches_fd_and_converges(which):
    g = gaussian(1.0)
    prob = DweProblem(C, f0=g if which == "f0" else zero(), f1=g if which == "f1" else zero())
    errs = []
    for dx in (0.04, 0.02):
        grid = GridSpec(-8, 8, dx, 3.0, 0.5)
        errs.append(sup_diff(solve_dwe_kernel(prob, grid), fd_reference_dwe(prob, grid)))
    assert errs[1] < 1e-3
    assert errs[1] < errs[0]


def test_duhamel_source_matches_fd():
    src = lambda x, t: np.exp(-x**2) * math.cos(t)  # noqa: E731
    prob = DweProblem(C, source=src)
    grid = GridSpec(-6, 6, 0.05, 2.0, 0.5)
    k = solve_dwe_kernel(prob, grid, quad_step=0.05)
    f = fd_reference_dwe(prob, grid)
    assert sup_diff(k, f) < 2e-3 * np.max(np.abs(f.values))


def test_initial_condition_and_residual():
    prob = DweProblem(C, f0=gaussian(1.0))
    x = np.linspace(-3, 3, 7)
    assert np.allclose(kernel_solution(prob, x, np.array([0.0]), 0.01)[:, 0], np.exp(-x**2))
    fld = solve_dwe_kernel(prob, GridSpec(-4, 4, 0.02, 1.0, 0.02), quad_step=0.01)
    assert pde_residual(fld, C) < 5e-3


def test_grid_and_cfl_validation():
    with pytest.raises(ConfigurationError):
        GridSpec(1, 0, 0.1, 1, 0.1)
    prob = DweProblem(C, f1=gaussian(1.0))
    with pytest.raises(ConfigurationError):
        fd_reference_dwe(prob, GridSpec(-2, 2, 0.1, 1, 0.5), dt_internal=0.5)
    with pytest.raises(DomainError):
        kernel_solution(prob, np.zeros(3), np.array([-1.0]), 0.1)
