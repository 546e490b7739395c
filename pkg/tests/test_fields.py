import numpy as np
import pytest

from phototherm import fields, oracle
from phototherm.errors import ConvergenceError, InvalidParameterError
from phototherm.stability import solve_growth_rate

import fixtures

CRIT = fixtures.DEEP_CRITICAL
CRIT_HALF = fixtures.HALF065_CRITICAL


@pytest.fixture(scope="module")
def deep_mode(deep_state):
    p, b = deep_state
    return fields.extract_eigenmode(CRIT["a_c"], CRIT["Ra_c"],
                                    1j * CRIT["omega_c"], p, b)


@pytest.fixture(scope="module")
def half065_mode(half065_state):
    p, b = half065_state
    return fields.extract_eigenmode(CRIT_HALF["a_c"], CRIT_HALF["Ra_c"],
                                    1j * CRIT_HALF["omega_c"], p, b)


def test_mode_is_rank_deficient_and_normalized(deep_mode):
    m = deep_mode
    assert m.sigma_ratio <= 1e-8
    i = np.argmax(np.abs(m.w))
    assert abs(m.w[i]) == pytest.approx(1.0, abs=1e-12)
    assert m.w[i].imag == pytest.approx(0.0, abs=1e-12)
    assert m.w[i].real > 0.0


def test_boundary_residuals(deep_mode, deep_state):
    p, b = deep_state
    res = deep_mode.bc_residuals(p, b)
    assert max(res.values()) <= 1e-6


def test_concentration_is_minus_flux_gradient(deep_mode):
    assert np.array_equal(deep_mode.nhat, -deep_mode.Np)


def test_matches_collocation_eigenvector(deep_mode, deep_state):
    p, b = deep_state
    m = deep_mode
    op = oracle.build_operator(m.a, m.Ra, p, b, Ncheb=64)
    _, w_c, _, _ = oracle.eigenvector(op, m.gamma)
    # align phase and scale where the collocation profile peaks
    j = int(np.argmax(np.abs(w_c)))
    w_c = w_c / w_c[j]
    w_s = np.array([m.profile_at(m.w, float(z)) for z in op.z])
    w_s = w_s / w_s[j]
    assert np.max(np.abs(w_s - w_c)) <= 1e-3


def test_frame_streamfunction_consistency(deep_mode):
    # w = d psi / d x1 on the rendered grid
    f = fields.render_frame(deep_mode, t=0.0, nx=256, nz=65)
    dx = f.x1[1] - f.x1[0]
    dpsi = np.gradient(f.psi, dx, axis=1, edge_order=2)
    err = np.max(np.abs(dpsi - f.w)) / np.max(np.abs(f.w))
    assert err <= 0.01


def test_frame_walls(deep_mode):
    f = fields.render_frame(deep_mode, t=0.0, nx=64, nz=33)
    # bottom rows vanish identically: the basis columns satisfy the
    # bottom conditions exactly, so the recombination does too
    assert np.max(np.abs(f.psi[0])) == 0.0
    assert np.max(np.abs(f.w[0])) == 0.0
    # top rows are only as clean as the null vector of the top matrix
    assert np.max(np.abs(f.psi[-1])) <= 1e-6
    assert np.max(np.abs(f.w[-1])) <= 1e-6


def test_neutral_frames_repeat_bit_identically(deep_mode):
    period = 2 * np.pi / abs(deep_mode.gamma.imag)
    for t0 in (0.0, period):
        f0 = fields.render_frame(deep_mode, t=t0, nx=48, nz=25)
        f1 = fields.render_frame(deep_mode, t=t0 + period, nx=48, nz=25)
        for name in ("psi", "w", "n", "T"):
            assert np.array_equal(getattr(f0, name), getattr(f1, name))


def test_quarter_period_shifts_quarter_wavelength(deep_mode):
    period = 2 * np.pi / abs(deep_mode.gamma.imag)
    nx = 64
    f0 = fields.render_frame(deep_mode, t=0.0, nx=nx, nz=17)
    f1 = fields.render_frame(deep_mode, t=period / 4.0, nx=nx, nz=17)
    np.testing.assert_allclose(f1.w, np.roll(f0.w, -nx // 4, axis=1),
                               atol=1e-9 * np.max(np.abs(f0.w)))


def test_conjugate_mode_mirrors_frames(deep_mode):
    m2 = fields.conjugate_mode(deep_mode)
    fa = fields.render_frame(deep_mode, t=0.0, nx=48, nz=25)
    fb = fields.render_frame(m2, t=0.0, nx=48, nz=25)

    def reflect(F):
        return np.concatenate([F[:, :1], F[:, :0:-1]], axis=1)

    np.testing.assert_allclose(fb.w, reflect(fa.w), atol=1e-11)
    np.testing.assert_allclose(fb.psi, -reflect(fa.psi), atol=1e-11)


def test_probe_orbit_closes_for_neutral_mode(deep_mode):
    period = 2 * np.pi / abs(deep_mode.gamma.imag)
    ts = fields.time_series(deep_mode, np.array([0.0, period, 2 * period]))
    scale = np.max(np.hypot(ts.Tp, ts.dTp / abs(deep_mode.gamma.imag)))
    assert abs(ts.Tp[1] - ts.Tp[0]) <= 1e-8 * scale
    assert abs(ts.dTp[2] - ts.dTp[0]) <= 1e-8 * scale * abs(deep_mode.gamma.imag)


def test_probe_frequency_lands_in_one_bin(deep_mode):
    period = 2 * np.pi / abs(deep_mode.gamma.imag)
    n, cycles = 512, 8
    t = np.linspace(0.0, cycles * period, n, endpoint=False)
    ts = fields.time_series(deep_mode, t)
    spec = np.abs(np.fft.rfft(ts.Tp))
    freqs = np.fft.rfftfreq(n, d=t[1] - t[0])
    f_peak = freqs[np.argmax(spec[1:]) + 1]
    f_true = abs(deep_mode.gamma.imag) / (2 * np.pi)
    assert abs(f_peak - f_true) <= freqs[1] + 1e-12


def test_damped_mode_decays_by_growth_factor(deep_state):
    p, b = deep_state
    a, ra = CRIT["a_c"], 0.98 * CRIT["Ra_c"]
    g = solve_growth_rate(a, ra, p, b)
    assert g.real < 0.0
    assert abs(g.imag) > 1.0
    m = fields.extract_eigenmode(a, ra, g, p, b)
    period = 2 * np.pi / abs(g.imag)
    # probe the phase with the strongest signal to keep the ratio stable
    t8 = np.linspace(0.0, period, 8, endpoint=False)
    i = int(np.argmax(np.abs(fields.time_series(m, t8).Tp)))
    ts = fields.time_series(m, np.array([t8[i], t8[i] + period]))
    assert ts.Tp[1] / ts.Tp[0] == pytest.approx(np.exp(g.real * period),
                                                rel=1e-6)


def test_marginal_updraft_is_single_signed(half065_mode):
    # top wall noise is bounded by the null-vector residual
    assert np.min(half065_mode.w.real) >= -1e-5


def test_growth_scan_above_threshold(deep_state):
    p, b = deep_state
    scan = fields.most_unstable_wavenumber(90.0, p, b, n_scan=13)
    assert not scan.stable
    assert scan.gamma_star.real > 0.0
    assert 1.5 <= scan.a_star <= 2.6
    assert scan.refined


def test_growth_scan_below_threshold(deep_state):
    p, b = deep_state
    scan = fields.most_unstable_wavenumber(50.0, p, b, n_scan=9)
    assert scan.stable
    assert scan.gamma_star.real < 0.0


def test_far_from_root_raises(deep_state):
    p, b = deep_state
    with pytest.raises(ConvergenceError):
        fields.extract_eigenmode(2.0, 100.0, 2.5 + 0.0j, p, b)


def test_frame_grid_floor(deep_mode):
    with pytest.raises(InvalidParameterError):
        fields.render_frame(deep_mode, nx=8, nz=33)


def test_probe_outside_layer_rejected(deep_mode):
    with pytest.raises(InvalidParameterError):
        fields.time_series(deep_mode, np.array([0.0]), probe=(0.0, 1.5))
