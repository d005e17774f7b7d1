"""Strict JSON run configuration shared by the command-line subcommands."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .materials import Geometry, MaterialSpec, get_material
from .matching import ModelParams, TemperatureSet, match_model, reference_params, TABLE_ROWS
from .phys_core import DomainError, QuadratureSpec

__all__ = ["RunConfig", "TimeGrid", "Temperatures", "QuadSettings", "load_config"]


def _strict(cls, data, where: str):
    if not isinstance(data, dict):
        raise DomainError(f"{where} must be a JSON object")
    known = {f.name for f in fields(cls)}
    for key in data:
        if key not in known:
            raise DomainError(f"unknown key {key!r} in {where}")
    return cls(**data)


@dataclass(frozen=True)
class TimeGrid:
    min: float | None = None
    max: float | None = None
    points: int = 60
    spacing: str = "log"

    def __post_init__(self):
        if self.spacing not in ("log", "linear"):
            raise DomainError("t_grid.spacing must be 'log' or 'linear'")
        if not (isinstance(self.points, int) and self.points >= 2):
            raise DomainError("t_grid.points must be an integer >= 2")
        lo, hi = self.min, self.max
        if lo is not None and lo < 0:
            raise DomainError("t_grid.min must be non-negative")
        if self.spacing == "log" and lo is not None and lo <= 0:
            raise DomainError("log-spaced t_grid needs min > 0")
        if lo is not None and hi is not None and not hi > lo:
            raise DomainError("t_grid.max must exceed t_grid.min")

    def build(self, default_min: float, default_max: float) -> np.ndarray:
        lo = default_min if self.min is None else self.min
        hi = default_max if self.max is None else self.max
        if not hi > lo:
            raise DomainError("t_grid.max must exceed t_grid.min")
        if self.spacing == "log":
            return np.geomspace(lo, hi, self.points)
        return np.linspace(lo, hi, self.points)


@dataclass(frozen=True)
class Temperatures:
    T_EM: float = 300.0
    T_Omega: float = 1000.0
    T_theta: float = 1000.0
    T_gamma: float = 1000.0

    def to_set(self) -> TemperatureSet:
        return TemperatureSet(self.T_EM, self.T_Omega, self.T_theta, self.T_gamma)


@dataclass(frozen=True)
class QuadSettings:
    rel_tol: float = 1e-6
    abs_tol: float = 0.0
    max_subdivisions: int = 500

    def to_spec(self) -> QuadratureSpec:
        return QuadratureSpec(self.rel_tol, self.abs_tol, self.max_subdivisions)


@dataclass(frozen=True)
class RunConfig:
    material: str | dict = "gold"
    radius_nm: float = 50.0
    g_over_Omega: float = 1e-7
    params: str = "table"
    temperatures: Temperatures = field(default_factory=Temperatures)
    t_grid: TimeGrid = field(default_factory=TimeGrid)
    quad: QuadSettings = field(default_factory=QuadSettings)
    output: str | None = None
    format: str = "csv"

    def __post_init__(self):
        if self.format not in ("csv", "json"):
            raise DomainError("format must be 'csv' or 'json'")
        if self.params not in ("table", "matched"):
            raise DomainError("params must be 'table' or 'matched'")
        if not self.radius_nm > 0:
            raise DomainError("radius_nm must be positive")
        if not self.g_over_Omega > 0:
            raise DomainError("g_over_Omega must be positive")
        # validate everything that can be checked without computing
        self.material_spec()
        self.temperatures.to_set()
        self.quad.to_spec()
        if self.params == "table" and self.material_name not in TABLE_ROWS:
            raise DomainError(f"no table row for {self.material_name!r}; use params='matched'")

    @property
    def material_name(self) -> str:
        return self.material if isinstance(self.material, str) else self.material.get("name", "custom")

    def material_spec(self) -> MaterialSpec:
        if isinstance(self.material, str):
            return get_material(self.material)
        return MaterialSpec.from_dict(self.material)

    def geometry(self) -> Geometry:
        return Geometry.from_nm(self.radius_nm)

    def model(self) -> ModelParams:
        geo = self.geometry()
        if self.params == "table":
            return reference_params(self.material_name, geo, self.g_over_Omega)
        mat = self.material_spec()
        # g is specified relative to Omega; Omega itself depends on g only at O(g^2)
        Omega0 = match_model(mat, geo, 1e-30).Omega
        return match_model(mat, geo, self.g_over_Omega * Omega0)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise DomainError("config must be a JSON object")
        data = dict(data)
        for key, sub in (("temperatures", Temperatures), ("t_grid", TimeGrid), ("quad", QuadSettings)):
            if key in data:
                data[key] = _strict(sub, data[key], key)
        return _strict(cls, data, "config")


def load_config(path: str | Path) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise DomainError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise DomainError(f"invalid JSON in {path}: {exc}") from None
    return RunConfig.from_dict(raw)
