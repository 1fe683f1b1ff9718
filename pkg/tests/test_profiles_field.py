import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arzlab.errors import DomainError
from arzlab.field import Field2D, padded_axis, uniform_axis
from arzlab.profiles import FAMILIES, bump, gaussian, make_profile, two_bump, zero


@pytest.mark.parametrize("prof", [gaussian(0.3, 0.5, 1.2), bump(2.0, -0.3)])
def test_profile_derivatives_match_differences(prof):
    x = np.linspace(-2.5, 2.5, 41)
    h = 1e-4
    for k in range(1, 4):
        fd = (prof.derivative(x + h, k - 1) - prof.derivative(x - h, k - 1)) / (2 * h)
        assert np.allclose(prof.derivative(x, k), fd, rtol=1e-5, atol=1e-5 * (10 ** k))


def test_bump_shape():
    b = bump(1.0)
    assert np.allclose(b(np.array([-1.0, 0.0, 1.0])), 1.0)
    assert np.all(b(np.array([-2.0, -3.0, 2.0, 5.0])) == 0.0)
    assert b.support == (-2.0, 2.0)


def test_two_bump_and_algebra():
    p = two_bump(0.5, 10.0)
    assert p(np.array([10.0, -10.0, 0.0])) == pytest.approx([0.5, 0.5, 0.0])
    s = gaussian(1.0) + 2 * gaussian(1.0)
    assert s(np.array([0.0]))[0] == pytest.approx(3.0)
    assert zero().is_zero()
    with pytest.raises(ValueError):
        gaussian(1.0).derivative(0.0, 9)


def test_make_profile():
    assert make_profile("gaussian", 0.0).is_zero()
    assert make_profile("bump", 1.0, [0.0, 5.0])(np.array([5.0]))[0] == pytest.approx(1.0)
    with pytest.raises(ValueError):
        make_profile("square", 1.0)
    assert "bump" in FAMILIES


@settings(max_examples=25)
@given(nx=st.integers(2, 6), nt=st.integers(5, 9), x0=st.floats(-5, 5), dx=st.floats(1e-3, 1.0),
       fs=st.floats(0.0, 2.0))
def test_field_round_trip(nx, nt, x0, dx, fs, tmp_path_factory):
    rng = np.random.default_rng(nx * nt)
    f = Field2D(rng.normal(size=(nx, nt)), x0, dx, 0.0, 0.25, fs)
    path = tmp_path_factory.mktemp("g") / "f.grid"
    f.save(path)
    g = Field2D.load(path)
    assert np.array_equal(f.values, g.values)
    assert (g.x0, g.dx, g.dt, g.frame_speed) == (f.x0, f.dx, f.dt, f.frame_speed)


def test_field_validation():
    with pytest.raises(DomainError):
        Field2D(np.zeros(3), 0, 1, 0, 1)
    with pytest.raises(DomainError):
        Field2D(np.full((2, 2), np.nan), 0, 1, 0, 1)


def test_axes():
    assert uniform_axis(0, 1, 0.25).tolist() == [0, 0.25, 0.5, 0.75, 1.0]
    x, win = padded_axis(-1, 1, 0.5, 1.0, 2.0, extra_cells=1)
    assert x[win].tolist() == [-1, -0.5, 0, 0.5, 1.0]
    assert x[0] == pytest.approx(-3.5)
