import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from arzlab.errors import FitError
from arzlab.fitting import fit_exponential, fit_power_law


@given(st.floats(-3.0, 0.0), st.floats(1e-3, 1e3))
def test_power_law_recovered(p, a):
    t = np.geomspace(1, 100, 10)
    f = fit_power_law(t, a * (1 + t) ** p)
    assert f.exponent == pytest.approx(p, abs=1e-9)
    assert f.kind == "power"


@given(st.floats(-2.0, 0.0))
def test_exponential_recovered(r):
    t = np.linspace(0, 10, 8)
    assert fit_exponential(t, 3 * np.exp(r * t)).exponent == pytest.approx(r, abs=1e-9)


def test_needs_three_points():
    with pytest.raises(FitError):
        fit_power_law([1, 2, 3], [1.0, 0.0, np.nan])
