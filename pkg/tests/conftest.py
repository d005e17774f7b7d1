import math

import pytest

from levitherm.matching import ModelParams, TemperatureSet, reference_params
from levitherm.materials import Geometry
from levitherm.phys_core import CONST

# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


def synthetic_params(**kw) -> ModelParams:
    """Moderately coupled model whose time scales all fit in one ODE run."""
    Omega = 1e15
    Gamma = 0.3 * Omega
    omega_q = Omega**2 / Gamma
    base = dict(
        Omega=Omega,
        omega_theta=0.2 * Omega,
        g=0.08 * Omega,
        gamma_I=0.005 * Omega,
        q2_over_m=6 * math.pi * CONST.c**3 * CONST.eps0 / omega_q,
        volume=1e-22,
    )
    base.update(kw)
    return ModelParams(**base)


@pytest.fixture
def synthetic():
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return synthetic_params()


@pytest.fixture(scope="session")
def gold50():
    return reference_params("gold", Geometry.from_nm(50), 1e-7)


@pytest.fixture(scope="session")
def gold10():
    return reference_params("gold", Geometry.from_nm(10), 1e-7)


@pytest.fixture(scope="session")
def hot_particle():
    return TemperatureSet.particle_field(1000.0, 300.0)
