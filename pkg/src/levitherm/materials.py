"""Permittivity models, dipole polarizabilities and the built-in material table."""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, fields
from importlib import resources
from pathlib import Path

import numpy as np

from .phys_core import CONST, DomainError, NumericalError

__all__ = [
    "MaterialSpec",
    "Geometry",
    "permittivity",
    "cm_polarizability",
    "dressed_polarizability",
    "absorption_chi",
    "load_database",
    "get_material",
]


@dataclass(frozen=True)
class MaterialSpec:
    name: str
    omega_pl: float
    omega_1: float
    gamma_d: float
    theta_E: float
    rho: float
    c_bulk: float
    c_sound: float

    def __post_init__(self):
        if not self.omega_pl > 0:
            raise DomainError("omega_pl must be positive")
        if not self.omega_1 >= 0:
            raise DomainError("omega_1 must be non-negative")
        for key in ("gamma_d", "theta_E", "rho", "c_bulk", "c_sound"):
            if not getattr(self, key) > 0:
                raise DomainError(f"{key} must be positive")

    @classmethod
    def from_dict(cls, data: dict) -> "MaterialSpec":
        known = {f.name for f in fields(cls)}
        for key in data:
            if key not in known:
                raise DomainError(f"unknown material key: {key!r}")
        missing = known - set(data)
        if missing:
            raise DomainError(f"missing material keys: {sorted(missing)}")
        return cls(**{k: (data[k] if k == "name" else float(data[k])) for k in known})

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Geometry:
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise DomainError("radius must be positive")
        if self.radius > 300e-9:
            warnings.warn("radius above 300 nm strains the dipole approximation", stacklevel=3)

    @property
    def volume(self) -> float:
        return 4.0 * math.pi / 3.0 * self.radius**3

    @classmethod
    def from_nm(cls, radius_nm: float) -> "Geometry":
        return cls(radius_nm * 1e-9)


def _check_omega(omega):
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise DomainError("omega must be positive")
    return omega


def _out(x):
    return x if np.ndim(x) else complex(x)


def permittivity(mat: MaterialSpec, omega):
    """Drude-Lorentz eps = 1 + w_pl^2 / (w_1^2 - w^2 - i*gamma_d*w)."""
    w = _check_omega(omega)
    return _out(1.0 + mat.omega_pl**2 / (mat.omega_1**2 - w**2 - 1j * mat.gamma_d * w))


def cm_polarizability(mat: MaterialSpec, geo: Geometry, omega, eps0: float = CONST.eps0):
    """Clausius-Mossotti polarizability 3*eps0*V*(eps-1)/(eps+2), SI units."""
    eps = np.asarray(permittivity(mat, omega))
    if np.any(eps == -2):
        raise NumericalError("lossless resonance")
    return _out(3.0 * eps0 * geo.volume * (eps - 1.0) / (eps + 2.0))


def _rr_factor(omega):
    return np.asarray(omega, dtype=float) ** 3 / (6.0 * math.pi * CONST.eps0 * CONST.c**3)


def dressed_polarizability(alpha, omega):
    """Radiation-reaction corrected alpha / (1 - i*alpha*w^3/(6*pi*eps0*c^3))."""
    alpha = np.asarray(alpha, dtype=complex)
    return _out(alpha / (1.0 - 1j * alpha * _rr_factor(omega)))


def absorption_chi(alpha_tilde, omega, check: bool = True):
    """Absorption weight Im(alpha~) - w^3 |alpha~|^2 / (6*pi*eps0*c^3).

    With ``check`` set, a value below -1e-9 of the larger of its two parts
    raises "active medium" (a passive particle can only absorb).
    """
    at = np.asarray(alpha_tilde, dtype=complex)
    rad = _rr_factor(omega) * np.abs(at) ** 2
    chi = at.imag - rad
    if check:
        scale = np.maximum(np.abs(at.imag), rad)
        if np.any(chi < -1e-9 * scale):
            raise NumericalError("active medium", estimate=chi)
    return chi if np.ndim(chi) else float(chi)


def load_database(path: str | Path | None = None) -> dict[str, MaterialSpec]:
    """Read a material table; the packaged gold/silica file when ``path`` is None."""
    if path is None:
        text = resources.files("levitherm").joinpath("data/materials.json").read_text()
    else:
        text = Path(path).read_text()
    raw = json.loads(text)
    if not isinstance(raw, dict):
        raise DomainError("material database must be a JSON object")
    return {key: MaterialSpec.from_dict(val) for key, val in raw.items()}


def get_material(name: str) -> MaterialSpec:
    db = load_database()
    try:
        return db[name]
    except KeyError:
        raise DomainError(f"unknown material {name!r}; known: {sorted(db)}") from None
