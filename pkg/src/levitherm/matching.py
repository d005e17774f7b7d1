"""Map material data onto the five minimal-model parameters.

Only the ratio q^2/m of the optical oscillator is ever needed, so the
charge and the two oscillator masses are never stored.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, replace

import numpy as np

from .materials import Geometry, MaterialSpec
from .phys_core import CONST, DomainError, NumericalError

__all__ = [
    "ModelParams",
    "TemperatureSet",
    "match_model",
    "reference_params",
    "g_upper_bound",
    "em_coupling_ratio",
    "model_polarizability",
    "optical_range_polarizability",
    "phonon_frequency_scale",
    "TABLE_ROWS",
]

# Reference matched values per material: (Omega/2pi [Hz], gamma_I/Omega,
# q2/m per nm^3 [C^2/kg], omega_theta/Omega)
TABLE_ROWS = {
    "gold": (1.57e15, 1.0e-3, 1.08e-5, 1.8e-3),
    "silica": (3.39e15, 1.8e-3, 5.13e-5, 2.0e-3),
}

ITB_CUTOFF_FACTOR = 50.0
EM_CUTOFF_FACTOR = 10.0


@dataclass(frozen=True)
class ModelParams:
    Omega: float
    omega_theta: float
    g: float
    gamma_I: float
    q2_over_m: float
    volume: float
    itb_cutoff: float | None = None
    em_cutoff: float | None = None

    def __post_init__(self):
        for key in ("Omega", "omega_theta", "g", "gamma_I", "q2_over_m", "volume"):
            if not getattr(self, key) > 0:
                raise DomainError(f"{key} must be positive")
        if not (self.g < self.omega_theta < self.Omega):
            raise DomainError("need g < omega_theta < Omega")
        if self.g / self.omega_theta > 0.1 or self.omega_theta / self.Omega > 0.1:
            warnings.warn("frequency hierarchy g << omega_theta << Omega is weak", stacklevel=3)
        if self.itb_cutoff is None:
            object.__setattr__(self, "itb_cutoff", ITB_CUTOFF_FACTOR * self.omega_theta)
        if self.em_cutoff is None:
            object.__setattr__(self, "em_cutoff", EM_CUTOFF_FACTOR * self.Omega)
        if not (self.itb_cutoff > 0 and self.em_cutoff > 0):
            raise DomainError("cutoffs must be positive")

    @property
    def omega_q(self) -> float:
        return 6.0 * math.pi * CONST.c**3 * CONST.eps0 / self.q2_over_m

    @property
    def Gamma_EM(self) -> float:
        return self.Omega**2 / self.omega_q

    @property
    def damping(self) -> float:
        """Total optical damping rate Gamma_EM + 4*gamma_I."""
        return self.Gamma_EM + 4.0 * self.gamma_I

    @property
    def coupling(self) -> float:
        """2*Omega*omega_theta*g^2, the product entering every coupled kernel."""
        return 2.0 * self.Omega * self.omega_theta * self.g**2

    @property
    def odf_overdamped(self) -> bool:
        return self.damping >= 2.0 * self.Omega

    def with_g(self, g: float) -> "ModelParams":
        return replace(self, g=g)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(omega_q=self.omega_q, Gamma_EM=self.Gamma_EM)
        return d


@dataclass(frozen=True)
class TemperatureSet:
    T_EM: float
    T_Omega: float
    T_theta: float
    T_gamma: float

    def __post_init__(self):
        for key in ("T_EM", "T_Omega", "T_theta", "T_gamma"):
            if not getattr(self, key) > 0:
                raise DomainError(f"{key} must be positive")

    @classmethod
    def particle_field(cls, T_particle: float, T_EM: float) -> "TemperatureSet":
        return cls(T_EM, T_particle, T_particle, T_particle)

    @classmethod
    def uniform(cls, T: float) -> "TemperatureSet":
        return cls(T, T, T, T)

    @staticmethod
    def beta(T: float) -> float:
        return 1.0 / (CONST.kB * T)

    @property
    def beta_EM(self) -> float:
        return self.beta(self.T_EM)

    @property
    def beta_Omega(self) -> float:
        return self.beta(self.T_Omega)

    @property
    def beta_theta(self) -> float:
        return self.beta(self.T_theta)

    @property
    def beta_gamma(self) -> float:
        return self.beta(self.T_gamma)


def _solve_omega(target_sq: float, omega_theta: float, g: float) -> float:
    # Omega^2 + 2*omega_theta*g^2/Omega = target_sq, largest positive root
    a = 2.0 * omega_theta * g**2
    x_min = (a / 2.0) ** (1.0 / 3.0)
    if x_min**2 + a / x_min > target_sq:
        raise NumericalError("unphysical coupling")
    x = math.sqrt(target_sq)
    for _ in range(100):
        f = x * x + a / x - target_sq
        df = 2.0 * x - a / (x * x)
        step = f / df
        x -= step
        if abs(step) <= 1e-16 * x:
            break
    return x


def match_model(mat: MaterialSpec, geo: Geometry, g: float, **kw) -> ModelParams:
    """Matched parameters for a material sphere at coupling ``g`` (rad/s)."""
    if not g > 0:
        raise DomainError("g must be positive")
    omega_theta = CONST.kB * mat.theta_E / CONST.hbar
    Omega = _solve_omega(mat.omega_1**2 + mat.omega_pl**2 / 3.0, omega_theta, g)
    return ModelParams(
        Omega=Omega,
        omega_theta=omega_theta,
        g=g,
        gamma_I=mat.gamma_d / 4.0,
        q2_over_m=CONST.eps0 * geo.volume * mat.omega_pl**2,
        volume=geo.volume,
        **kw,
    )


def reference_params(name: str, geo: Geometry, g_over_Omega: float, **kw) -> ModelParams:
    """Parameters taken directly from the reference table row for ``name``."""
    try:
        f_hz, gi, q2, wt = TABLE_ROWS[name]
    except KeyError:
        raise DomainError(f"no reference row for {name!r}") from None
    Omega = 2.0 * math.pi * f_hz
    R_nm = geo.radius * 1e9
    return ModelParams(
        Omega=Omega,
        omega_theta=wt * Omega,
        g=g_over_Omega * Omega,
        gamma_I=gi * Omega,
        q2_over_m=q2 * R_nm**3,
        volume=geo.volume,
        **kw,
    )


def g_upper_bound(p: ModelParams, delta: float | None = None) -> float:
    """Largest coupling (rad/s) keeping the internal mode resolved within ``delta``."""
    if delta is None:
        delta = p.omega_theta / 2.0
    if not (0 < delta <= p.omega_theta / 2.0):
        raise DomainError("delta must lie in (0, omega_theta/2]")
    ratio = (p.omega_theta / p.Omega) * math.sqrt(
        (2.0 / math.pi) * (p.gamma_I / p.Omega) * (delta / p.omega_theta)
    )
    return ratio * p.Omega


def em_coupling_ratio(p: ModelParams, T_EM: float) -> tuple[float, bool]:
    """gamma_e/Omega estimate and whether it is below 1e-2 (weak coupling)."""
    if not T_EM > 0:
        raise DomainError("T_EM must be positive")
    v_wpl2 = p.q2_over_m / CONST.eps0
    x = CONST.kB * T_EM / (CONST.hbar * p.Omega)
    ratio = x**2 * math.sqrt(v_wpl2 * p.Omega / (2.0 * math.pi * CONST.c**3))
    return ratio, ratio < 1e-2


def model_polarizability(p: ModelParams, omega):
    w = np.asarray(omega, dtype=float)
    if np.any(w <= 0):
        raise DomainError("omega must be positive")
    if np.any(np.abs(w - p.omega_theta) < 1e-9 * p.omega_theta):
        raise DomainError("IDF pole")
    # omega^2 - omega_theta^2 factored to keep precision near the pole
    d = (w - p.omega_theta) * (w + p.omega_theta)
    inv = p.Omega**2 - w**2 - 4j * p.gamma_I * w + p.coupling / d
    out = p.q2_over_m / inv
    return out if np.ndim(out) else complex(out)


def optical_range_polarizability(p: ModelParams, omega):
    w = np.asarray(omega, dtype=float)
    inv = p.Omega**2 - w**2 - 4j * p.gamma_I * w + 2.0 * p.omega_theta * p.g**2 / p.Omega
    out = p.q2_over_m / inv
    return out if np.ndim(out) else complex(out)


def phonon_frequency_scale(R: float, c_s: float) -> float:
    if not (R > 0 and c_s > 0):
        raise DomainError("R and c_s must be positive")
    return math.pi * c_s / R
