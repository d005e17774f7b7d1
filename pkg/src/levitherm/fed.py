"""Quasi-equilibrium radiative cooling: dipole thermal emission and the temperature ODE."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import integrate

from .materials import Geometry, MaterialSpec, absorption_chi, cm_polarizability, dressed_polarizability
from .phys_core import CONST, DomainError, NumericalError, QuadratureSpec, quad_adaptive

__all__ = ["FedRun", "FedSeries", "radiated_power", "fed_thermalize", "omega_max", "PowerTable"]

FED_QUAD = QuadratureSpec(rel_tol=1e-10)
# hbar*w/kT at which the occupation drops below 1e-18
_X_MAX = math.log1p(1e18)
_X_CAP = 60.0


def omega_max(T: float, T_EM: float) -> float:
    return min(_X_MAX, _X_CAP) * CONST.kB * max(T, T_EM) / CONST.hbar


def _check_temps(T, T_EM):
    if not (T > 0 and T_EM > 0):
        raise DomainError("temperatures must be positive")


def _emission_factor(mat: MaterialSpec, geo: Geometry, w):
    """hbar chi(w) w^4 / (pi^2 eps0 c^3)."""
    alpha = cm_polarizability(mat, geo, w)
    chi = absorption_chi(dressed_polarizability(alpha, w), w)
    return CONST.hbar * chi * np.asarray(w, dtype=float) ** 4 / (math.pi**2 * CONST.eps0 * CONST.c**3)


def _occupation_difference(T, T_EM, w):
    a = CONST.hbar * w / CONST.kB
    with np.errstate(over="ignore"):
        return 1.0 / np.expm1(a / T) - 1.0 / np.expm1(a / T_EM)


def radiated_power(mat: MaterialSpec, geo: Geometry, T: float, T_EM: float,
                   quad: QuadratureSpec = FED_QUAD) -> float:
    """Net power (W) emitted by the particle at T into a field at T_EM."""
    _check_temps(T, T_EM)
    if T == T_EM:
        return 0.0
    w_hi = omega_max(T, T_EM)
    w_th = CONST.kB * min(T, T_EM) / CONST.hbar
    pts = tuple(sorted({w_th * k for k in (0.1, 1.0, 3.0, 10.0) if w_th * k < w_hi}))
    spec = QuadratureSpec(quad.rel_tol, quad.abs_tol, quad.max_subdivisions, pts)

    def f(w):
        if w <= 0:
            return 0.0
        return float(_emission_factor(mat, geo, w) * _occupation_difference(T, T_EM, w))

    return quad_adaptive(f, 0.0, w_hi, spec)


class PowerTable:
    """P(T) from a fixed log-frequency grid: the emission factor is computed once.

    Composite Simpson in ln(w); only the occupation numbers change with T.
    """

    def __init__(self, mat: MaterialSpec, geo: Geometry, T_EM: float, T_hi: float, points: int = 4001):
        if points % 2 == 0:
            points += 1
        w_hi = omega_max(T_hi, T_EM)
        w_lo = 1e-5 * w_hi
        u = np.linspace(math.log(w_lo), math.log(w_hi), points)
        self.w = np.exp(u)
        simpson = np.ones(points)
        simpson[1:-1:2], simpson[2:-1:2] = 4.0, 2.0
        self._weights = simpson * (u[1] - u[0]) / 3.0 * self.w * _emission_factor(mat, geo, self.w)
        self.T_EM = T_EM
        self._a = CONST.hbar * self.w / CONST.kB
        with np.errstate(over="ignore"):
            self._n_em = 1.0 / np.expm1(self._a / T_EM)

    def __call__(self, T: float) -> float:
        if T == self.T_EM:
            return 0.0
        with np.errstate(over="ignore"):
            n = 1.0 / np.expm1(self._a / T)
        return float(np.dot(self._weights, n - self._n_em))


@dataclass(frozen=True)
class FedRun:
    material: MaterialSpec
    geometry: Geometry
    T0: float
    T_EM: float
    t_grid: tuple
    quad: QuadratureSpec = FED_QUAD
    ode_rel_tol: float = 1e-6

    def __post_init__(self):
        _check_temps(self.T0, self.T_EM)
        t = np.asarray(self.t_grid, dtype=float)
        if t.ndim != 1 or t.size < 2:
            raise DomainError("t_grid needs at least two times")
        if t[0] < 0 or np.any(np.diff(t) <= 0):
            raise DomainError("t_grid must start at t >= 0 and increase strictly")
        if not 0 < self.ode_rel_tol < 1:
            raise DomainError("ode_rel_tol must lie in (0, 1)")
        object.__setattr__(self, "t_grid", tuple(float(x) for x in t))

    @property
    def heat_capacity(self) -> float:
        """rho * V * C in J/K."""
        return self.material.rho * self.geometry.volume * self.material.c_bulk

    @cached_property
    def power(self) -> PowerTable:
        return PowerTable(self.material, self.geometry, self.T_EM, max(self.T0, self.T_EM))

    def cooling_time(self) -> float:
        """Initial-slope time scale rho V C |T0 - T_EM| / |P(T0)|."""
        if self.T0 == self.T_EM:
            return math.inf
        return self.heat_capacity * abs(self.T0 - self.T_EM) / abs(self.power(self.T0))


@dataclass
class FedSeries:
    t: np.ndarray
    T: np.ndarray
    run: FedRun
    dense: object = field(default=None, repr=False)


def fed_thermalize(run: FedRun) -> FedSeries:
    """Integrate rho V C dT/dt = -P(T) over run.t_grid with an embedded RK 4(5) scheme."""
    t = np.asarray(run.t_grid)
    if run.T0 == run.T_EM:
        return FedSeries(t, np.full(t.size, run.T0), run)
    P = run.power
    cap = run.heat_capacity

    def rhs(_, y):
        return [-P(y[0]) / cap]

    sol = integrate.solve_ivp(
        rhs, (t[0], t[-1]), [run.T0], method="RK45", t_eval=t,
        rtol=run.ode_rel_tol, atol=1e-9 * run.T_EM, dense_output=True,
    )
    if sol.status != 0:
        raise NumericalError(f"temperature integration failed: {sol.message}", estimate=(sol.t, sol.y[0]))
    return FedSeries(sol.t, sol.y[0], run, sol.sol)
