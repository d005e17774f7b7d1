import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from levitherm import fed
from levitherm.materials import Geometry, get_material
from levitherm.phys_core import CONST, DomainError


@pytest.fixture(scope="module")
def gold():
    return get_material("gold")


def test_no_net_power_at_field_temperature(gold):
    assert fed.radiated_power(gold, Geometry.from_nm(50), 300.0, 300.0) == 0.0
    assert fed.PowerTable(gold, Geometry.from_nm(50), 300.0, 1000.0)(300.0) == 0.0


@given(st.floats(10.0, 2000.0))
@settings(max_examples=15, deadline=None)
def test_power_sign_follows_temperature_difference(T):
    gold = get_material("gold")
    P = fed.radiated_power(gold, Geometry.from_nm(50), T, 300.0)
    assert math.copysign(1.0, P) == math.copysign(1.0, T - 300.0) or T == 300.0


def test_table_matches_adaptive_quadrature(gold):
    geo = Geometry.from_nm(50)
    table = fed.PowerTable(gold, geo, 300.0, 1000.0)
    for T in (350.0, 600.0, 1000.0):
        assert table(T) == pytest.approx(fed.radiated_power(gold, geo, T, 300.0), rel=1e-6)


def test_small_particles_emit_in_proportion_to_volume(gold):
    p10 = fed.radiated_power(gold, Geometry.from_nm(10), 1000.0, 300.0)
    p20 = fed.radiated_power(gold, Geometry.from_nm(20), 1000.0, 300.0)
    assert p20 / p10 == pytest.approx(8.0, rel=1e-3)


def test_frequency_cutoff_scales_with_hotter_body():
    assert fed.omega_max(1000, 300) == pytest.approx(fed.omega_max(300, 1000))
    x = CONST.hbar * fed.omega_max(1000, 300) / (CONST.kB * 1000)
    assert math.exp(-x) < 1e-17


@pytest.fixture(scope="module")
def cooling(gold):
    run = fed.FedRun(gold, Geometry.from_nm(50), 1000.0, 300.0, tuple(np.linspace(0, 40, 81)))
    return run, fed.fed_thermalize(run)


def test_cooling_is_monotone_towards_field(cooling):
    _, s = cooling
    assert s.T[0] == 1000.0
    assert np.all(np.diff(s.T) < 0) and np.all(s.T > 300.0)


def test_energy_bookkeeping(cooling):
    run, s = cooling
    P = run.power
    t_end = s.t[-1]
    emitted = integrate.quad(lambda x: P(float(s.dense(x)[0])), 0.0, t_end, limit=200, epsrel=1e-9)[0]
    lost = run.heat_capacity * (run.T0 - s.T[-1])
    assert emitted == pytest.approx(lost, rel=1e-4)


def test_initial_slope_sets_cooling_time(cooling):
    run, s = cooling
    tau = run.cooling_time()
    h = 1e-4 * tau
    slope = (float(s.dense(h)[0]) - s.T[0]) / h
    assert slope == pytest.approx(-(run.T0 - run.T_EM) / tau, rel=1e-3)


def test_field_temperature_is_fixed_point(gold):
    run = fed.FedRun(gold, Geometry.from_nm(50), 300.0, 300.0, (0.0, 1.0, 2.0))
    s = fed.fed_thermalize(run)
    assert np.all(s.T == 300.0)
    assert run.cooling_time() == math.inf


def test_cold_particle_warms(gold):
    run = fed.FedRun(gold, Geometry.from_nm(50), 100.0, 300.0, tuple(np.linspace(0, 20, 11)))
    T = fed.fed_thermalize(run).T
    assert np.all(np.diff(T) > 0) and T[-1] < 300.0


def test_heat_capacity(gold):
    geo = Geometry.from_nm(50)
    run = fed.FedRun(gold, geo, 1000.0, 300.0, (0.0, 1.0))
    assert run.heat_capacity == pytest.approx(gold.rho * geo.volume * gold.c_bulk)


@pytest.mark.parametrize("kw", [
    dict(T0=-1.0), dict(t_grid=(0.0,)), dict(t_grid=(1.0, 0.5)), dict(t_grid=(-1.0, 1.0)), dict(ode_rel_tol=2.0),
])
def test_run_validation(gold, kw):
    args = dict(material=gold, geometry=Geometry.from_nm(50), T0=1000.0, T_EM=300.0, t_grid=(0.0, 1.0))
    args.update(kw)
    with pytest.raises(DomainError):
        fed.FedRun(**args)
