"""Canned configurations that regenerate the data behind each reference figure."""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable

import numpy as np

from . import energy, fed
from .materials import Geometry, get_material
from .matching import ITB_CUTOFF_FACTOR, TemperatureSet, reference_params
from .output import csv_text, gnuplot_script, render_png, write_text
from .phys_core import CONST, QuadratureSpec
from .propagators import kappa_slow

__all__ = ["FIGURES", "FigureData", "run_figure"]

T_HOT, T_FIELD = 1000.0, 300.0


@dataclass
class FigureData:
    header: list[str]
    columns: list
    title: str
    ylabel: str
    logx: bool = False
    logy: bool = False
    dashed: tuple[str, ...] = ()


def fig1(rel_tol: float) -> FigureData:
    gold = get_material("gold")
    radii = (10, 50, 100, 200)
    t = np.linspace(0.0, 40.0, 201)
    cols, names = [t], ["t_s"]
    for R in radii:
        run = fed.FedRun(gold, Geometry.from_nm(R), T_HOT, T_FIELD, tuple(t))
        cols.append(fed.fed_thermalize(run).T)
        names.append(f"T_R{R}nm_K")
    return FigureData(names, cols, "gold, quasi-equilibrium cooling", "T (K)")


def fig3(rel_tol: float) -> FigureData:
    base = reference_params("gold", Geometry.from_nm(50), 1e-9)
    quad = QuadratureSpec(rel_tol=rel_tol)
    T = np.geomspace(10.0, 2000.0, 40)
    cols, names = [T], ["T_K"]
    for ratio in (1.0e-3, 1.8e-3, 4.0e-3):
        # the phonon-bath cutoff follows omega_theta, so rebuild rather than copy it
        p = replace(base, omega_theta=ratio * base.Omega, itb_cutoff=ITB_CUTOFF_FACTOR * ratio * base.Omega)
        theta = CONST.hbar * p.omega_theta / CONST.kB
        c = [energy.specific_heat(p, 1 / (CONST.kB * x), quad) / (3 * CONST.kB) for x in T]
        e = [energy.einstein_specific_heat(theta, 1 / (CONST.kB * x)) / (3 * CONST.kB) for x in T]
        cols += [np.array(c), np.array(e)]
        names += [f"C_wt{ratio:g}", f"C_einstein_wt{ratio:g}"]
    dashed = tuple(n for n in names if "einstein" in n)
    return FigureData(names, cols, "gold, heat capacity at g = 1e-9 Omega", "C / 3kB", logx=True, dashed=dashed)


def _evolution(material: str, radii, couplings, rel_tol: float, with_fed: bool) -> FigureData:
    temps = TemperatureSet.particle_field(T_HOT, T_FIELD)
    quad = QuadratureSpec(rel_tol=rel_tol)
    models = [reference_params(material, Geometry.from_nm(R), g) for R in radii for g in couplings]
    t_lo = min(energy.t_max(p) for p in models) / 10.0
    t_hi = max(40.0 / kappa_slow(p) for p in models)
    t = np.geomspace(t_lo, t_hi, 60)
    cols, names = [t], ["t_s"]
    for p in models:
        curve = energy.internal_energy_curve(p, temps, t, quad)
        cols.append(curve.u_eff_temp)
        R_nm = round((3 * p.volume / (4 * np.pi)) ** (1 / 3) * 1e9)
        names.append(f"u_over_3kB_R{R_nm}nm_g{p.g / p.Omega:g}")
    dashed = ()
    if with_fed:
        run = fed.FedRun(get_material(material), Geometry.from_nm(radii[0]), T_HOT, T_FIELD, tuple(t))
        cols.append(fed.fed_thermalize(run).T)
        names.append("T_fed_K")
        dashed = ("T_fed_K",)
    return FigureData(names, cols, f"{material}, internal energy", "u / 3kB (K)", logx=True, dashed=dashed)


def fig4_gold(rel_tol: float) -> FigureData:
    return _evolution("gold", (50,), (1e-9, 1e-8, 1e-7), rel_tol, True)


def fig4_silica(rel_tol: float) -> FigureData:
    return _evolution("silica", (50,), (1e-9, 1e-8, 1e-7), rel_tol, True)


def fig5(rel_tol: float) -> FigureData:
    return _evolution("silica", (25, 50, 100), (1e-9,), rel_tol, False)


FIGURES: dict[str, Callable[[float], FigureData]] = {
    "fig1": fig1,
    "fig3": fig3,
    "fig4_gold": fig4_gold,
    "fig4_silica": fig4_silica,
    "fig5": fig5,
}


def run_figure(name: str, outdir: Path, rel_tol: float = 1e-6) -> list[Path]:
    data = FIGURES[name](rel_tol)
    outdir = Path(outdir)
    csv_path, gp_path, png_path = (outdir / f"{name}{ext}" for ext in (".csv", ".gp", ".png"))
    write_text(csv_text(data.header, data.columns), csv_path)
    write_text(gnuplot_script(csv_path.name, data.header, data.title, data.logx, data.logy), gp_path)
    render_png(png_path, data.header, data.columns, data.title, data.logx, data.logy, data.ylabel, data.dashed)
    return [csv_path, gp_path, png_path]
