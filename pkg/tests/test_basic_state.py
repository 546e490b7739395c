import numpy as np
import pytest
from scipy.integrate import simpson

from phototherm import taxis
from phototherm.basic_state import solve_basic_state, sublayer_location
from phototherm.errors import InvalidParameterError

import fixtures

# expected sublayer maxima (value, location) per nominal switch label
MAXIMA = {0.8: (8.6364, 0.9999), 0.68: (3.4211, 0.8812),
          0.65: (2.5395, 0.7485), 0.63: (2.2433, 0.5135)}


@pytest.fixture(scope="module", params=sorted(MAXIMA))
def labeled_state(request):
    gc = request.param
    p = fixtures.half(gc, 0.0)
    return gc, p, solve_basic_state(p, M=2000)


def test_sublayer_maxima(labeled_state):
    gc, _, b = labeled_state
    loc, val = sublayer_location(b)
    want_val, want_loc = MAXIMA[gc]
    assert val == pytest.approx(want_val, rel=1e-3)
    assert loc == pytest.approx(want_loc, abs=2e-3)


def test_unit_mean_concentration(labeled_state):
    _, _, b = labeled_state
    assert abs(simpson(b.nb, x=b.x3) - 1.0) <= 1e-8


def test_swimming_balance_residual(labeled_state):
    # steady flux balance: dn_b/dx3 = U_s T(G_b) n_b, checked with a
    # central difference on the solved grid
    _, p, b = labeled_state
    dn = (b.nb[2:] - b.nb[:-2]) / (b.x3[2:] - b.x3[:-2])
    rhs = p.U_s * b.T_b[1:-1] * b.nb[1:-1]
    scale = np.max(np.abs(rhs))
    assert np.max(np.abs(dn - rhs)) <= 5e-5 * scale


def test_optical_path_consistency(labeled_state):
    # tau integrates -n_b from the top, so tau(1) = 0 and G_b(1) = I0
    _, p, b = labeled_state
    assert b.tau[-1] == 0.0
    assert b.G_b[-1] == pytest.approx(p.I0, rel=1e-14)
    assert b.tau[0] == pytest.approx(-1.0, abs=1e-9)


def test_peak_sits_where_taxis_vanishes(labeled_state):
    gc, p, b = labeled_state
    loc, _ = sublayer_location(b)
    if loc >= 0.999:  # peak pinned to the wall, no interior zero
        return
    gb = p.I0 * np.exp(p.hbar * np.interp(loc, b.x3, b.tau))
    assert taxis.taxis_value(gb, p.chi) == pytest.approx(0.0, abs=5e-3)


def test_grid_refinement_drift():
    p = fixtures.half(0.68, 0.0)
    coarse = sublayer_location(solve_basic_state(p, M=1000))
    fine = sublayer_location(solve_basic_state(p, M=2000))
    assert fine[1] == pytest.approx(coarse[1], rel=5e-4)
    assert fine[0] == pytest.approx(coarse[0], abs=5e-4)


def test_interpolant_matches_finer_solution():
    p = fixtures.half(0.68, 0.0)
    b = solve_basic_state(p, M=500)
    b_fine = solve_basic_state(p, M=5000)
    nb, _, lam, _, tb = b.profiles_at(0.5)
    nb_f, _, lam_f, _, tb_f = b_fine.profiles_at(0.5)
    assert nb == pytest.approx(nb_f, rel=1e-6)
    assert lam == pytest.approx(lam_f, rel=1e-5)
    assert tb == pytest.approx(tb_f, rel=1e-6)


def test_sublayer_rises_with_switch_intensity():
    locs = []
    for gc in (0.63, 0.65, 0.68, 0.8):
        b = solve_basic_state(fixtures.half(gc, 0.0), M=1000)
        locs.append(sublayer_location(b)[0])
    assert all(x < y for x, y in zip(locs, locs[1:]))


def test_no_swimming_gives_uniform_suspension():
    p = fixtures.no_swimming(0.0)
    b = solve_basic_state(p, M=800)
    np.testing.assert_allclose(b.nb, 1.0, atol=1e-10)
    np.testing.assert_allclose(b.G_b, p.I0 * np.exp(p.hbar * (b.x3 - 1.0)),
                               rtol=1e-9)
    loc, val = sublayer_location(b)
    assert loc == 1.0 and val == pytest.approx(1.0, abs=1e-10)


def test_profiles_reject_outside_layer():
    b = solve_basic_state(fixtures.half(0.65, 0.0), M=500)
    with pytest.raises(InvalidParameterError):
        b.profiles_at(1.5)
