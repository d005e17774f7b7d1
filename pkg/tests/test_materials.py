import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from levitherm.materials import (
    Geometry,
    MaterialSpec,
    absorption_chi,
    cm_polarizability,
    dressed_polarizability,
    get_material,
    load_database,
    permittivity,
)
from levitherm.phys_core import CONST, DomainError, NumericalError


@pytest.fixture
def gold():
    return get_material("gold")


def test_permittivity_drude_form(gold):
    w = 2e15
    expected = 1 - gold.omega_pl**2 / (w**2 + 1j * gold.gamma_d * w)
    assert permittivity(gold, w) == pytest.approx(expected, rel=1e-14)


def test_metal_polarizability_static_limit(gold):
    geo = Geometry.from_nm(20)
    a = cm_polarizability(gold, geo, 1.0)
    assert a.real == pytest.approx(3 * CONST.eps0 * geo.volume, rel=1e-9)


def test_dressed_absorption_equals_bare_over_denominator(gold):
    # Im(a/(1-ika)) - k|a/(1-ika)|^2 reduces to Im(a)/|1-ika|^2
    geo = Geometry.from_nm(80)
    w = np.linspace(2e15, 1.5e16, 9)
    a = np.asarray(cm_polarizability(gold, geo, w))
    k = w**3 / (6 * math.pi * CONST.eps0 * CONST.c**3)
    chi = absorption_chi(dressed_polarizability(a, w), w)
    assert np.allclose(chi, a.imag / np.abs(1 - 1j * k * a) ** 2, rtol=1e-9)


@given(st.floats(1e12, 5e16), st.sampled_from(["gold", "silica"]), st.floats(5.0, 250.0))
def test_passive_particle_absorbs(w, name, R):
    mat = get_material(name)
    a = cm_polarizability(mat, Geometry.from_nm(R), w)
    assert absorption_chi(dressed_polarizability(a, w), w) >= 0


def test_gain_medium_rejected():
    with pytest.raises(NumericalError, match="active medium"):
        absorption_chi(-1e-30j, 1e15)


def test_geometry_checks():
    with pytest.raises(DomainError):
        Geometry(0.0)
    with pytest.warns(UserWarning):
        Geometry.from_nm(400)
    assert Geometry.from_nm(10).volume == pytest.approx(4 / 3 * math.pi * 1e-24)


def test_material_dict_strict(gold):
    d = gold.to_dict()
    assert MaterialSpec.from_dict(d) == gold
    with pytest.raises(DomainError, match="colour"):
        MaterialSpec.from_dict({**d, "colour": "yellow"})
    d.pop("rho")
    with pytest.raises(DomainError, match="rho"):
        MaterialSpec.from_dict(d)


def test_material_validation(gold):
    with pytest.raises(DomainError):
        MaterialSpec(**{**gold.to_dict(), "omega_pl": -1.0})


def test_database_round_trip(tmp_path, gold):
    import json

    path = tmp_path / "db.json"
    path.write_text(json.dumps({"au": gold.to_dict()}))
    assert load_database(path)["au"] == gold
    assert set(load_database()) == {"gold", "silica"}
    with pytest.raises(DomainError, match="unknown material"):
        get_material("unobtainium")


def test_silica_has_no_restoring_frequency():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert get_material("silica").omega_1 == 0.0
