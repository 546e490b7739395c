import numpy as np
import pytest
from hypothesis import given, strategies as st

from phototherm import taxis
from phototherm.errors import NoRootError

import fixtures


def test_switch_intensity_reference_values():
    for chi, gc in fixtures.GC_OF_CHI.items():
        assert taxis.critical_intensity(chi) == pytest.approx(gc, abs=1e-10)


def test_derivative_at_origin_is_closed_form():
    # amplitudes of the two sine terms: 1.2*pi - 0.05*pi
    assert taxis.taxis_derivative(0.0, 0.0) == pytest.approx(1.15 * np.pi,
                                                             rel=1e-14)


def test_value_sign_flips_at_switch():
    for chi in (-0.485, 0.0, 0.5):
        gc = taxis.critical_intensity(chi)
        assert taxis.taxis_value(gc - 1e-6, chi) > 0.0
        assert taxis.taxis_value(gc + 1e-6, chi) < 0.0


def test_vectorized_matches_scalar():
    g = np.linspace(0.05, 1.0, 7)
    for fn in (taxis.taxis_value, taxis.taxis_derivative,
               taxis.taxis_second_derivative):
        vec = fn(g, 0.3)
        scal = np.array([fn(x, 0.3) for x in g])
        np.testing.assert_allclose(vec, scal, rtol=1e-15)


@given(st.floats(0.05, 1.0), st.floats(-1.1, 1.1))
def test_derivative_matches_finite_difference(g, chi):
    h = 1e-6
    fd = (taxis.taxis_value(g + h, chi) - taxis.taxis_value(g - h, chi)) / (2 * h)
    assert taxis.taxis_derivative(g, chi) == pytest.approx(fd, rel=1e-5,
                                                           abs=1e-7)


@given(st.floats(0.05, 1.0), st.floats(-1.1, 1.1))
def test_second_derivative_matches_finite_difference(g, chi):
    h = 1e-5
    fd = (taxis.taxis_derivative(g + h, chi)
          - taxis.taxis_derivative(g - h, chi)) / (2 * h)
    assert taxis.taxis_second_derivative(g, chi) == pytest.approx(
        fd, rel=1e-4, abs=1e-5)


@given(st.floats(-1.1, 1.1))
def test_chi_roundtrip_through_switch_intensity(chi):
    gc = taxis.critical_intensity(chi)
    assert taxis.chi_from_Gc(gc) == pytest.approx(chi, abs=1e-8)


def test_unattainable_switch_intensity_rejected():
    with pytest.raises(NoRootError):
        taxis.chi_from_Gc(0.95)
    with pytest.raises(NoRootError):
        taxis.chi_from_Gc(0.2)


def test_out_of_range_steepness_warns():
    with pytest.warns(UserWarning):
        taxis.check_chi(2.0)
