"""Command-line front end: ``levitherm <subcommand> [options]``.

Exit codes: 0 success, 1 invalid input, 2 numerical failure.  Data goes to
``--output`` or standard output; diagnostics go to standard error.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import energy, fed, matching, propagators
from .config import RunConfig, load_config
from .figures import FIGURES, run_figure
from .materials import cm_polarizability
from .output import csv_text, json_text, write_text
from .phys_core import CONST, DomainError, NumericalError

log = logging.getLogger("levitherm")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise DomainError(message)


def _common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", help="JSON run configuration")
    sp.add_argument("--material", help="material name from the built-in table")
    sp.add_argument("--radius-nm", type=float)
    sp.add_argument("--g", type=float, dest="g_over_Omega", help="coupling in units of Omega")
    sp.add_argument("--params", choices=("table", "matched"))
    sp.add_argument("--T-particle", type=float, help="initial particle temperature (K)")
    sp.add_argument("--T-em", type=float, help="field temperature (K)")
    sp.add_argument("--rel-tol", type=float)
    sp.add_argument("--t-min", type=float)
    sp.add_argument("--t-max", type=float)
    sp.add_argument("--points", type=int)
    sp.add_argument("--spacing", choices=("log", "linear"))
    sp.add_argument("--output", "-o")
    sp.add_argument("--format", choices=("csv", "json"))


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="levitherm", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, text in (
        ("fed", "quasi-equilibrium temperature curve"),
        ("match", "matched model parameters for a material sphere"),
        ("polarizability", "Drude sphere versus matched oscillator around Omega"),
        ("poles", "poles and residues of a kernel"),
        ("evolve", "internal energy versus time"),
        ("uinf", "stationary internal energy"),
        ("cv", "specific heat versus field temperature"),
        ("shorttime", "short-time expansion against the full evolution"),
    ):
        _common(sub.add_parser(name, help=text))
    sub.choices["poles"].add_argument(
        "--kernel", default="G_theta",
        choices=("G_theta", "G_Omega", "G_NP", "G_theta_G_Omega", "radiation_reaction"),
    )
    for name in ("cv",):
        sub.choices[name].add_argument("--T-min", type=float)
        sub.choices[name].add_argument("--T-max", type=float)
    fig = sub.add_parser("figure", help="canned data, gnuplot script and PNG for one figure")
    fig.add_argument("name", choices=sorted(FIGURES))
    fig.add_argument("--outdir", default="figures")
    fig.add_argument("--rel-tol", type=float, default=1e-6)
    return p


def resolve_config(args) -> RunConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    upd = {}
    for key in ("material", "radius_nm", "g_over_Omega", "params", "output", "format"):
        val = getattr(args, key, None)
        if val is not None:
            upd[key] = val
    temps = cfg.temperatures
    if args.T_particle is not None:
        temps = replace(temps, T_Omega=args.T_particle, T_theta=args.T_particle, T_gamma=args.T_particle)
    if args.T_em is not None:
        temps = replace(temps, T_EM=args.T_em)
    grid = cfg.t_grid
    for flag, key in (("t_min", "min"), ("t_max", "max"), ("points", "points"), ("spacing", "spacing")):
        val = getattr(args, flag)
        if val is not None:
            grid = replace(grid, **{key: val})
    quad = cfg.quad if args.rel_tol is None else replace(cfg.quad, rel_tol=args.rel_tol)
    return replace(cfg, temperatures=temps, t_grid=grid, quad=quad, **upd)


def _emit(cfg: RunConfig, header, columns, payload=None) -> None:
    if cfg.format == "json":
        data = payload if payload is not None else {h: np.asarray(c) for h, c in zip(header, columns)}
        write_text(json_text(data), cfg.output)
    else:
        write_text(csv_text(header, columns), cfg.output)


def cmd_match(cfg: RunConfig, args) -> int:
    mat, geo = cfg.material_spec(), cfg.geometry()
    p = cfg.model() if cfg.params == "matched" else matching.match_model(
        mat, geo, cfg.g_over_Omega * matching.match_model(mat, geo, 1e-30).Omega)
    R = cfg.radius_nm
    payload = {
        "material": cfg.material_name,
        "radius_nm": R,
        "Omega_rad_s": p.Omega,
        "Omega_Hz": p.Omega / (2 * math.pi),
        "gamma_I_over_Omega": p.gamma_I / p.Omega,
        "q2_over_m": p.q2_over_m,
        "q2_over_m_per_nm3": p.q2_over_m / R**3,
        "omega_theta_over_Omega": p.omega_theta / p.Omega,
        "g_over_Omega": p.g / p.Omega,
        "g_max_over_Omega": matching.g_upper_bound(p) / p.Omega,
        "omega_q_rad_s": p.omega_q,
        "Gamma_EM_over_Omega": p.Gamma_EM / p.Omega,
        "t_max_s": energy.t_max(p),
        "odf_overdamped": p.odf_overdamped,
    }
    write_text(json_text(payload), cfg.output)
    return 0


def cmd_polarizability(cfg: RunConfig, args) -> int:
    mat, geo = cfg.material_spec(), cfg.geometry()
    Omega0 = matching.match_model(mat, geo, 1e-30).Omega
    p = matching.match_model(mat, geo, cfg.g_over_Omega * Omega0)
    w = np.linspace(0.7 * p.Omega, 1.3 * p.Omega, args.points or 201)
    a = np.asarray(cm_polarizability(mat, geo, w))
    b = np.asarray(matching.model_polarizability(p, w))
    dev = np.abs(b - a) / np.abs(a)
    header = ["omega_rad_s", "re_alpha_sphere", "im_alpha_sphere", "re_alpha_model", "im_alpha_model", "rel_dev"]
    _emit(cfg, header, [w, a.real, a.imag, b.real, b.imag, dev])
    log.info("max relative deviation %.3e", dev.max())
    return 0


def cmd_poles(cfg: RunConfig, args) -> int:
    p = cfg.model()
    if args.kernel == "radiation_reaction":
        r, runaway = propagators.rr_poles(p)
        payload = {"kernel": args.kernel, "runaway": runaway,
                   "poles": [{"re": z.real, "im": z.imag} for z in r],
                   "omega_q": p.omega_q, "Gamma_EM": p.Gamma_EM}
    else:
        k = {
            "G_theta": propagators.g_theta_laplace,
            "G_Omega": propagators.g_omega_laplace,
            "G_NP": propagators.g_np_laplace,
            "G_theta_G_Omega": propagators.g_theta_g_omega_laplace,
        }[args.kernel](p)
        f = propagators.to_exp_sum(k)
        terms = [
            {"offset_re": o.real, "offset_im": o.imag, "carrier": v,
             "residue_re": c.real, "residue_im": c.imag, "power": int(n)}
            for c, o, v, n in zip(f.residues, f.offsets, f.carriers, f.powers)
        ]
        payload = {"kernel": args.kernel, "runaway": f.runaway, "terms": terms,
                   "kappa_slow": f.slowest_rate()}
    write_text(json_text(payload), cfg.output)
    return 0


def _energy_grid(cfg: RunConfig, p) -> np.ndarray:
    kappa = propagators.kappa_slow(p)
    return cfg.t_grid.build(energy.t_max(p) / 10.0, 40.0 / kappa)


def cmd_evolve(cfg: RunConfig, args) -> int:
    p = cfg.model()
    curve = energy.internal_energy_curve(p, cfg.temperatures.to_set(), _energy_grid(cfg, p), cfg.quad.to_spec())
    _emit(cfg, ["t_s", "u_J", "T_eff_K"], [curve.t, curve.u, curve.u_eff_temp])
    log.info("u0 = %.6e J, u_inf = %.6e J", curve.u0, curve.u_inf)
    if curve.failed:
        for t, msg in curve.failed:
            log.error("t = %.6e s: %s", t, msg)
        return 2
    return 0


def cmd_uinf(cfg: RunConfig, args) -> int:
    p = cfg.model()
    ts = cfg.temperatures.to_set()
    u = energy.u_infinity(p, ts.beta_EM, ts.beta_gamma, cfg.quad.to_spec())
    u0 = energy.initial_energy(p, ts)
    _emit(cfg, ["u0_J", "u_inf_J", "T_eff_K"], [[u0], [u], [energy.effective_temperature(u)]],
          {"u0_J": u0, "u_inf_J": u, "T_eff_K": energy.effective_temperature(u)})
    return 0


def cmd_cv(cfg: RunConfig, args) -> int:
    p = cfg.model()
    theta = CONST.hbar * p.omega_theta / CONST.kB
    lo = args.T_min if args.T_min is not None else 0.1 * theta
    hi = args.T_max if args.T_max is not None else 10.0 * theta
    if not 0 < lo < hi:
        raise DomainError("need 0 < T-min < T-max")
    n = args.points if args.points is not None else 30
    T = np.geomspace(lo, hi, n)
    c = np.empty(n)
    e = np.empty(n)
    quad = cfg.quad.to_spec()
    for i, Ti in enumerate(T):
        b = 1.0 / (CONST.kB * Ti)
        c[i] = energy.specific_heat(p, b, quad) / (3 * CONST.kB)
        e[i] = energy.einstein_specific_heat(theta, b) / (3 * CONST.kB)
    _emit(cfg, ["T_K", "C_over_3kB", "C_einstein_over_3kB"], [T, c, e])
    log.info("max relative deviation from the Einstein model %.3e", np.max(np.abs(c / e - 1)))
    return 0


def cmd_shorttime(cfg: RunConfig, args) -> int:
    p = cfg.model()
    ts = cfg.temperatures.to_set()
    tm = energy.t_max(p)
    t = cfg.t_grid.build(tm / 100.0, 2.0 * tm)
    short = np.asarray(energy.short_time_change(p, ts, t))
    full = np.array([energy.energy_change(p, ts, x, cfg.quad.to_spec()) for x in t])
    _emit(cfg, ["t_s", "du_short_J", "du_full_J"], [t, short, full])
    log.info("t_max = %.6e s", tm)
    return 0


def cmd_fed(cfg: RunConfig, args) -> int:
    mat, geo = cfg.material_spec(), cfg.geometry()
    ts = cfg.temperatures
    run = fed.FedRun(mat, geo, ts.T_theta, ts.T_EM, (0.0, 1.0))
    tau = run.cooling_time()
    hi = 8.0 * tau if math.isfinite(tau) else 1.0
    grid = cfg.t_grid
    if args.spacing is None and cfg.t_grid.spacing == "log" and grid.min is None:
        grid = replace(grid, spacing="linear")
    t = grid.build(0.0 if grid.spacing == "linear" else hi * 1e-4, hi)
    series = fed.fed_thermalize(replace(run, t_grid=tuple(t), quad=cfg.quad.to_spec()))
    _emit(cfg, ["t_s", "T_K"], [series.t, series.T])
    return 0


def cmd_figure(args) -> int:
    for path in run_figure(args.name, Path(args.outdir), rel_tol=args.rel_tol):
        log.info("wrote %s", path)
    return 0


COMMANDS = {
    "fed": cmd_fed,
    "match": cmd_match,
    "polarizability": cmd_polarizability,
    "poles": cmd_poles,
    "evolve": cmd_evolve,
    "uinf": cmd_uinf,
    "cv": cmd_cv,
    "shorttime": cmd_shorttime,
}


def run(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, format="levitherm: %(message)s", level=logging.INFO)
    try:
        args = build_parser().parse_args(argv)
        if args.verbose:
            log.setLevel(logging.DEBUG)
        if args.command == "figure":
            return cmd_figure(args)
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg, args)
    except DomainError as exc:
        log.error("invalid input: %s", exc)
        return 1
    except NumericalError as exc:
        log.error("numerical failure: %s", exc)
        if exc.estimate is not None:
            log.error("best estimate: %s (error bound %s)", exc.estimate, exc.error)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
