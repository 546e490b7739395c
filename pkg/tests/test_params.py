import pytest

from phototherm import taxis
from phototherm.errors import InvalidParameterError
from phototherm.params import (DimensionalParams, Params,
                               dimensionless_from_dimensional)

# tabulated suspension at half-centimeter depth
TABLE = dict(H=0.5, nu=1e-2, D=5e-4, alpha_f=2e-3, n_bar=1e6, U_c=1e-2,
             cell_volume=5e-10, density_ratio=5e-2, beta=3.4e-4,
             delta_T=-1.0)


def test_table_conversion():
    p = dimensionless_from_dimensional(DimensionalParams(**TABLE), chi=0.0)
    assert p.Pr == pytest.approx(5.0)
    assert p.Le == pytest.approx(4.0)
    assert p.U_s == pytest.approx(10.0)
    assert p.hbar == pytest.approx(0.5)
    buoy = 980.0 * 0.5**3 / (1e-2 * 2e-3)
    assert p.R_T == pytest.approx(3.4e-4 * -1.0 * buoy)
    assert p.Ra == pytest.approx(1e6 * 5e-10 * 5e-2 * buoy)


def test_depth_scaling():
    deep = dimensionless_from_dimensional(
        DimensionalParams(**{**TABLE, "H": 1.0}), chi=0.0)
    assert deep.U_s == pytest.approx(20.0)
    assert deep.hbar == pytest.approx(1.0)
    # buoyancy groups scale with depth cubed
    shallow = dimensionless_from_dimensional(DimensionalParams(**TABLE),
                                             chi=0.0)
    assert deep.Ra / shallow.Ra == pytest.approx(8.0)


def test_swimming_group_identity():
    d = DimensionalParams(**TABLE)
    p = dimensionless_from_dimensional(d, chi=0.0)
    assert p.U_s == pytest.approx(p.Le * d.U_c * d.H / d.alpha_f)


def test_chi_and_gc_stay_consistent():
    p = Params(R_T=0.0, Le=4, Pr=5, U_s=15, hbar=0.5, chi=0.1285)
    assert p.G_c == pytest.approx(taxis.critical_intensity(0.1285), abs=1e-12)
    q = Params(R_T=0.0, Le=4, Pr=5, U_s=15, hbar=0.5, G_c=0.65)
    assert taxis.critical_intensity(q.chi) == pytest.approx(0.65, abs=1e-10)


def test_requires_exactly_one_taxis_handle():
    with pytest.raises(InvalidParameterError):
        Params(R_T=0.0, Le=4, Pr=5, U_s=15, hbar=0.5)


def test_with_recomputes_the_paired_value():
    p = Params(R_T=0.0, Le=4, Pr=5, U_s=15, hbar=0.5, chi=0.0)
    q = p.with_(chi=0.5)
    assert q.G_c == pytest.approx(taxis.critical_intensity(0.5), abs=1e-12)
    r = p.with_(G_c=0.7)
    assert taxis.critical_intensity(r.chi) == pytest.approx(0.7, abs=1e-10)
    s = p.with_(R_T=-250.0)
    assert s.chi == p.chi and s.G_c == p.G_c


def test_range_validation():
    good = dict(R_T=0.0, Le=4, Pr=5, U_s=15, hbar=0.5, chi=0.0)
    for bad in (dict(Le=0.0), dict(Pr=-1.0), dict(hbar=0.0),
                dict(U_s=-1.0), dict(I0=0.0)):
        with pytest.raises(InvalidParameterError):
            Params(**{**good, **bad})


def test_basic_state_key_ignores_diffusion_groups():
    p = Params(R_T=0.0, Le=4, Pr=5, U_s=15, hbar=0.5, chi=0.0)
    assert p.basic_state_key() == p.with_(R_T=-500.0, Le=1.0,
                                          Pr=50.0).basic_state_key()
    assert p.basic_state_key() != p.with_(hbar=1.0).basic_state_key()


def test_dimensional_validation():
    with pytest.raises(InvalidParameterError):
        DimensionalParams(**{**TABLE, "D": 0.0})
