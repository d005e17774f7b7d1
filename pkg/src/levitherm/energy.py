"""Internal energy of the phonon-like mode: full evolution and limits.

Mass factors cancel throughout.  With V = G_theta * G_Omega (time-domain
convolution, inverse Laplace of 1/(P*Q - c)) and W = dV/dt the energy is

    u(t) = (3 hbar / 4 w_t) coth_t [G''^2 + 2 w_t^2 G'^2 + w_t^4 G^2]
         + (3/2) hbar w_t g^2 coth_O [V''^2 + w_t^2 V'^2 + Omega^2 (V'^2 + w_t^2 V^2)]
         + (3 Omega w_t g^2 / pi) int_0^inf dw sum_src weight_src(w)
               [|Phi_W(w, t)|^2 + w_t^2 |Phi_V(w, t)|^2]

where Phi_f(w, t) is the transform of f over the window [0, t].  At t -> inf
the last line becomes the stationary integral computed by ``u_infinity``.
"""

from __future__ import annotations

import cmath
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .matching import ModelParams, TemperatureSet
from .phys_core import (
    CONST,
    DomainError,
    ExpSum,
    NumericalError,
    QuadratureError,
    QuadratureSpec,
    exp_sum_eval,
    thermal_coth,
    windowed_fourier,
    windowed_fourier_parts,
)
from .propagators import g_theta_g_omega_laplace, g_theta_laplace, to_exp_sum
from .thermal_kernels import NoiseSpectrum, noise_sources

__all__ = [
    "EnergyCurve",
    "ENERGY_QUAD",
    "initial_energy",
    "internal_energy",
    "energy_terms",
    "energy_change",
    "internal_energy_curve",
    "short_time_energy",
    "short_time_change",
    "t_max",
    "u_infinity",
    "specific_heat",
    "einstein_specific_heat",
    "effective_temperature",
    "default_time_grid",
    "long_time",
]

ENERGY_QUAD = QuadratureSpec(rel_tol=1e-6)
LONG_TIME_FACTOR = 20.0
# panels with (width * t) above this are integrated with the oscillation split off
OSC_THRESHOLD = 50.0
# upper integration limit in units of the largest cutoff
TAIL_CUTOFFS = 60.0


def _u_mode(omega: float, beta: float) -> float:
    return 1.5 * CONST.hbar * omega * thermal_coth(beta, omega)


def initial_energy(p: ModelParams, temps: TemperatureSet) -> float:
    """(3/2) hbar w_t coth(beta_theta hbar w_t / 2)."""
    return _u_mode(p.omega_theta, temps.beta_theta)


def t_max(p: ModelParams) -> float:
    """Time of the short-time energy maximum, (4/3) / (4 gamma_I + Omega^2/omega_q)."""
    return (4.0 / 3.0) / p.damping


def short_time_change(p: ModelParams, temps: TemperatureSet, t):
    """(w_t g^2/Omega) u_Omega0 t^2 [1 - damping t/2], the change from u0."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("t must be non-negative")
    uO = _u_mode(p.Omega, temps.beta_Omega)
    out = p.omega_theta * p.g**2 / p.Omega * uO * t**2 * (1.0 - p.damping * t / 2.0)
    return out if out.ndim else float(out)


def short_time_energy(p: ModelParams, temps: TemperatureSet, t):
    """Cubic short-time expansion u0 + (w_t g^2/Omega) u_Omega0 t^2 [1 - damping t/2]."""
    return initial_energy(p, temps) + short_time_change(p, temps, t)


def long_time(p: ModelParams) -> float:
    """Operational 'long time' LONG_TIME_FACTOR / kappa_slow."""
    return LONG_TIME_FACTOR / _kernels(p)[0].slowest_rate()


def default_time_grid(p: ModelParams, points: int = 60) -> np.ndarray:
    if points < 2:
        raise DomainError("need at least two grid points")
    kappa = _kernels(p)[0].slowest_rate()
    return np.geomspace(t_max(p) / 10.0, 40.0 / kappa, points)


# --------------------------------------------------------------------------
# kernels shared by all routes


_KERNEL_CACHE: dict = {}


def _kernels(p: ModelParams) -> tuple[ExpSum, ExpSum]:
    """(G_theta, V) exponential sums, memoized per parameter set."""
    hit = _KERNEL_CACHE.get(p)
    if hit is None:
        hit = (to_exp_sum(g_theta_laplace(p)), to_exp_sum(g_theta_g_omega_laplace(p)))
        if len(_KERNEL_CACHE) > 64:
            _KERNEL_CACHE.clear()
        _KERNEL_CACHE[p] = hit
    return hit


def _small_expm1(u: complex) -> complex:
    if abs(u) < 1e-3:
        return u * (1 + u / 2 * (1 + u / 3 * (1 + u / 4 * (1 + u / 5))))
    return cmath.exp(u) - 1.0


def _small_log1p(u: complex) -> complex:
    if abs(u) < 1e-3:
        return u * (1 - u * (1 / 2 - u * (1 / 3 - u * (1 / 4 - u / 5))))
    return cmath.log(1.0 + u)


def _theta_pair_shifts(p: ModelParams, G: ExpSum):
    """For each internal-mode pole: (carrier, offset, log(r/r0)), or None when unanchored.

    r0 = 1/(2i nu) is the free residue; the ratio is evaluated from
    r = 1 / (P'(p) (1 + eta)), eta = c Q'(p) / (P'(p) Q(p)^2), never by subtraction.
    """
    idx = [k for k in range(len(G)) if G.carriers[k] != 0.0]
    if len(idx) != 2 or np.any(G.powers != 0):
        return None
    out = []
    for k in idx:
        nu, d = float(G.carriers[k]), complex(G.offsets[k])
        s = 1j * nu + d
        Q = s * s + p.damping * s + p.Omega**2
        dQ = 2 * s + p.damping
        eta = p.coupling * dQ / (2 * s * Q * Q)
        # r/r0 = 1 / ((1 + d/(i nu)) (1 + eta))
        log_ratio = -_small_log1p(d / (1j * nu)) - _small_log1p(eta)
        out.append((nu, d, log_ratio))
    return out, [k for k in range(len(G)) if k not in idx]


def _relaxation_change(p, temps, G, t):
    """Relaxation term minus its initial value, free of cancellation at weak coupling.

    G = G0 + dG with G0 = sin(w t)/w; the change of the bracket
    G''^2 + 2w^2 G'^2 + w^4 G^2 is 2 (G0'' dG'' + 2w^2 G0' dG' + w^4 G0 dG)
    plus the same quadratic form in dG.
    """
    w = p.omega_theta
    coth = thermal_coth(temps.beta_theta, w)
    split = _theta_pair_shifts(p, G)
    if split is None:
        g0, g1, g2 = (exp_sum_eval(G, t, k) for k in range(3))
        return 0.75 * CONST.hbar / w * coth * (g2 * g2 + 2 * w * w * g1 * g1 + w**4 * g0 * g0) - _u_mode(w, temps.beta_theta)
    pairs, fast = split
    dg = [0j, 0j, 0j]
    for nu, d, log_ratio in pairs:
        p0 = 1j * nu
        r0 = 1.0 / (2.0 * p0)
        carrier = cmath.exp(1j * nu * t)
        edt = cmath.exp(d * t)
        em1 = _small_expm1(d * t)
        for n in range(3):
            eps_n = _small_expm1(log_ratio + n * _small_log1p(d / p0))
            dg[n] += r0 * p0**n * carrier * (em1 + eps_n * edt)
    for k in fast:
        r, s = complex(G.residues[k]), complex(G.poles[k])
        e = cmath.exp(s * t)
        for n in range(3):
            dg[n] += r * s**n * e
    d0, d1, d2 = (z.real for z in dg)
    ph = cmath.exp(1j * w * t)
    g0, g1, g2 = ph.imag / w, ph.real, -w * ph.imag
    cross = 2.0 * (g2 * d2 + 2 * w * w * g1 * d1 + w**4 * g0 * d0)
    quad = d2 * d2 + 2 * w * w * d1 * d1 + w**4 * d0 * d0
    return 0.75 * CONST.hbar / w * coth * (cross + quad)


def _odf_term(p, temps, V, t):
    v0, v1, v2 = (exp_sum_eval(V, t, k) for k in range(3))
    w = p.omega_theta
    coth = thermal_coth(temps.beta_Omega, p.Omega)
    bracket = v2 * v2 + w * w * v1 * v1 + p.Omega**2 * (v1 * v1 + w * w * v0 * v0)
    return 1.5 * CONST.hbar * w * p.g**2 * coth * bracket


def _prefactor(p: ModelParams) -> float:
    return 3.0 * p.Omega * p.omega_theta * p.g**2 / math.pi


# --------------------------------------------------------------------------
# frequency panels


def _geometric_edges(lo: float, hi: float, ratio: float = 2.0) -> list[float]:
    edges = [lo]
    while edges[-1] * ratio < hi:
        edges.append(edges[-1] * ratio)
    edges.append(hi)
    return edges


def _resonance_offset(p: ModelParams, offsets, carriers) -> float:
    """Position of the internal-mode resonance relative to w_t, in the panel variable x.

    The coupling pulls the resonance a few ulp-scale hertz away from w_t;
    the peak panels must sit on it, not on w_t itself.
    """
    best, x0 = math.inf, 0.0
    for o, v in zip(offsets, carriers):
        o, v = complex(o), float(v)
        # transform peaks at w = -v - Im(o); carriers equal to -w_t cancel exactly
        x = -o.imag if v == -p.omega_theta else (-v - p.omega_theta) - o.imag
        if abs(x) < best:
            best, x0 = abs(x), x
    return x0


def _panels(p: ModelParams, h0: float, center: float = 0.0) -> list[tuple[float, float, float]]:
    """(carrier, a, b) panels covering (0, inf) with the integration variable x = w - carrier.

    Panels refine geometrically towards ``center`` (the resonance, in x).
    """
    wt = p.omega_theta
    half = 0.5 * wt
    h0 = min(h0, half / 4.0)
    out = [(wt, center - h0, center + h0)]
    right = _geometric_edges(h0, half - center)
    left = _geometric_edges(h0, half + center)
    for a, b in zip(right[:-1], right[1:]):
        out.append((wt, center + a, center + b))
    for a, b in zip(left[:-1], left[1:]):
        out.append((wt, center - b, center - a))
    for k in range(4):
        out.append((0.0, k * half / 4.0, (k + 1) * half / 4.0))
    w_end = TAIL_CUTOFFS * max(p.em_cutoff, p.itb_cutoff)
    high = _geometric_edges(3.0 * half, w_end)
    for a, b in zip(high[:-1], high[1:]):
        out.append((0.0, a, b))
    return out


def _quad(fun, a, b, spec: QuadratureSpec, epsabs: float, **kw) -> tuple[float, float]:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err, *info = integrate.quad(
            fun, a, b, epsabs=epsabs, epsrel=spec.rel_tol, limit=spec.max_subdivisions,
            full_output=1, **kw,
        )
    failed = len(info) >= 2 and isinstance(info[1], str)
    if failed and err > max(epsabs, 10 * spec.rel_tol * abs(val)):
        raise QuadratureError(
            f"panel [{a:.4e}, {b:.4e}] did not converge: estimate {val:.6e}, error {err:.3e}",
            estimate=val, error=err,
        )
    return val, err


# --------------------------------------------------------------------------
# finite-window fluctuation term


class _WindowTransform:
    """Scalar evaluation of Phi_V and Phi_W for a kernel with simple poles."""

    def __init__(self, V: ExpSum, t: float):
        self.t = t
        self.res = [complex(r) for r in V.residues]
        self.off = [complex(o) for o in V.offsets]
        self.car = [float(c) for c in V.carriers]
        self.pole = [complex(s) for s in V.poles]
        self._phase_cache: dict = {}

    def direct(self, x: float, carrier: float) -> tuple[complex, complex]:
        t = self.t
        pv = pw = 0j
        for r, o, v, s in zip(self.res, self.off, self.car, self.pole):
            sig = o + 1j * ((v + carrier) + x)
            z = sig * t
            if abs(z) < 0.5:
                term, acc, n = 1.0 + 0j, 0j, 1
                while True:
                    acc += term / n
                    term *= z / n
                    n += 1
                    if abs(term) < 1e-17 or n > 30:
                        break
                e = t * acc
            else:
                e = (cmath.exp(z) - 1.0) / sig
            pv += r * e
            pw += r * s * e
        return pv, pw

    def _phases(self, carrier: float):
        ph = self._phase_cache.get(carrier)
        if ph is None:
            ph = [cmath.exp(o * self.t) * cmath.exp(1j * ((v + carrier) * self.t)) for o, v in zip(self.off, self.car)]
            self._phase_cache[carrier] = ph
        return ph

    def parts(self, x: float, carrier: float):
        """(A_V, B_V, A_W, B_W) with Phi = exp(i x t) A - B."""
        av = bv = aw = bw = 0j
        for r, o, v, s, ph in zip(self.res, self.off, self.car, self.pole, self._phases(carrier)):
            inv = 1.0 / (o + 1j * ((v + carrier) + x))
            av += r * ph * inv
            bv += r * inv
            aw += r * s * ph * inv
            bw += r * s * inv
        return av, bv, aw, bw


class _GenericWindow:
    """Fallback through the vectorized windowed transforms (kernels with repeated poles)."""

    def __init__(self, V: ExpSum, t: float):
        self.V, self.W, self.t = V, V.derivative(), t

    def direct(self, x, carrier):
        return windowed_fourier(self.V, x, self.t, carrier), windowed_fourier(self.W, x, self.t, carrier)

    def parts(self, x, carrier):
        av, bv = windowed_fourier_parts(self.V, x, self.t, carrier)
        aw, bw = windowed_fourier_parts(self.W, x, self.t, carrier)
        return complex(av), complex(bv), complex(aw), complex(bw)


def _fluctuation_term(p, sources, V, t, spec, u_ref):
    if t == 0:
        return 0.0
    kappa = V.slowest_rate()
    wt2 = p.omega_theta**2
    pref = _prefactor(p)
    tr = _WindowTransform(V, t) if np.all(V.powers == 0) else _GenericWindow(V, t)
    epsabs = spec.rel_tol * u_ref / pref / 8.0

    def weight(w):
        return sum(src.weight_scalar(w) for src in sources) if w > 0 else 0.0

    total = 0.0
    center = _resonance_offset(p, V.offsets, V.carriers)
    for carrier, a, b in _panels(p, min(kappa, 1.0 / t), center):
        if (b - a) * t <= OSC_THRESHOLD:
            def f(x, c=carrier):
                w = weight(c + x)
                if w == 0.0:
                    return 0.0
                pv, pw = tr.direct(x, c)
                return w * (abs(pw) ** 2 + wt2 * abs(pv) ** 2)

            total += _quad(f, a, b, spec, epsabs)[0]
            continue

        def smooth(x, c=carrier):
            w = weight(c + x)
            if w == 0.0:
                return 0.0
            av, bv, aw, bw = tr.parts(x, c)
            return w * (abs(aw) ** 2 + abs(bw) ** 2 + wt2 * (abs(av) ** 2 + abs(bv) ** 2))

        def cross(x, c=carrier):
            w = weight(c + x)
            if w == 0.0:
                return 0j
            av, bv, aw, bw = tr.parts(x, c)
            return w * (aw * bw.conjugate() + wt2 * av * bv.conjugate())

        s_val = _quad(smooth, a, b, spec, epsabs)[0]
        c_cos = _quad(lambda x: cross(x).real, a, b, spec, epsabs, weight="cos", wvar=t)[0]
        c_sin = _quad(lambda x: cross(x).imag, a, b, spec, epsabs, weight="sin", wvar=t)[0]
        total += s_val - 2.0 * (c_cos - c_sin)
    return pref * total


def internal_energy(p: ModelParams, temps: TemperatureSet, t: float, quad: QuadratureSpec = ENERGY_QUAD) -> float:
    """Internal energy (J) of the three-dimensional internal mode at time ``t``."""
    if not t >= 0:
        raise DomainError("t must be non-negative")
    if t == 0:
        return initial_energy(p, temps)
    terms = energy_terms(p, temps, t, quad)
    return terms["initial"] + energy_change_from_terms(terms)


def energy_change_from_terms(terms: dict) -> float:
    return terms["relaxation_change"] + terms["odf_initial"] + terms["fluctuation"]


def energy_terms(p: ModelParams, temps: TemperatureSet, t: float,
                 quad: QuadratureSpec = ENERGY_QUAD) -> dict[str, float]:
    """Initial energy and the three changes to it at ``t``, kept apart.

    At weak coupling the change is far below double precision of the total,
    so every change is evaluated without subtracting the initial value.
    """
    if not t >= 0:
        raise DomainError("t must be non-negative")
    u0 = initial_energy(p, temps)
    if t == 0:
        return {"initial": u0, "relaxation_change": 0.0, "odf_initial": 0.0, "fluctuation": 0.0}
    G, V = _kernels(p)
    sources = noise_sources(p, temps.beta_EM, temps.beta_gamma)
    u_ref = u0 + _u_mode(p.omega_theta, temps.beta_EM)
    return {
        "initial": u0,
        "relaxation_change": float(_relaxation_change(p, temps, G, t)),
        "odf_initial": float(_odf_term(p, temps, V, t)),
        "fluctuation": float(_fluctuation_term(p, sources, V, t, quad, u_ref)),
    }


def energy_change(p: ModelParams, temps: TemperatureSet, t: float,
                  quad: QuadratureSpec = ENERGY_QUAD) -> float:
    """u(t) - u(0) evaluated without cancellation."""
    return energy_change_from_terms(energy_terms(p, temps, t, quad))


# --------------------------------------------------------------------------
# stationary limit


def _anchored_roots(p: ModelParams) -> tuple[list[complex], list[float]]:
    V = _kernels(p)[1]
    if np.all(V.powers == 0) and len(V) == 4:
        return [complex(o) for o in V.offsets], [float(c) for c in V.carriers]
    den = np.asarray(g_theta_g_omega_laplace(p).denominator)
    r = np.roots(den)
    return [complex(z) for z in r], [0.0] * len(r)


def _stationary_integral(p: ModelParams, weight, quad: QuadratureSpec, scale: float) -> float:
    """int_0^inf weight(w) (w^2 + w_t^2) |G_theta G_Omega|^2 dw via the root product."""
    offs, cars = _anchored_roots(p)
    wt = p.omega_theta
    kappa = abs(max(o.real for o in offs))
    epsabs = quad.rel_tol * scale

    def f(x, c):
        w = c + x
        if w <= 0:
            return 0.0
        den = 1.0
        for o, v in zip(offs, cars):
            # -i w - root, with the carrier cancelled before adding x
            den *= abs(-o - 1j * ((v + c) + x)) ** 2
        return weight(w) * (w * w + wt * wt) / den

    total = 0.0
    for carrier, a, b in _panels(p, kappa, _resonance_offset(p, offs, cars)):
        total += _quad(lambda x, c=carrier: f(x, c), a, b, quad, epsabs)[0]
    return total


def u_infinity(p: ModelParams, beta_EM: float, beta_gamma: float, quad: QuadratureSpec = ENERGY_QUAD) -> float:
    """Stationary internal energy (J) reached under the field and phonon-bath noise."""
    sources = noise_sources(p, beta_EM, beta_gamma)
    pref = _prefactor(p)
    scale = _u_mode(p.omega_theta, min(beta_EM, beta_gamma)) / pref / 8.0
    val = _stationary_integral(p, lambda w: sum(s.weight_scalar(w) for s in sources), quad, scale)
    return pref * val


def specific_heat(p: ModelParams, beta_EM: float, quad: QuadratureSpec = ENERGY_QUAD,
                  beta_gamma: float | None = None) -> float:
    """C = -k_B beta^2 du_inf/dbeta_EM (J/K), differentiated under the integral."""
    if not beta_EM > 0:
        raise DomainError("beta_EM must be positive")
    em = noise_sources(p, beta_EM, beta_gamma or beta_EM)[0]
    pref = _prefactor(p)
    scale = 3.0 * CONST.kB / (CONST.kB * beta_EM**2) / pref * 1e-3
    val = _stationary_integral(p, em.dweight_dbeta_scalar, quad, scale)
    return -CONST.kB * beta_EM**2 * pref * val


def einstein_specific_heat(theta_E: float, beta: float) -> float:
    """3 k_B x^2 e^x / (e^x - 1)^2 with x = hbar w_t beta, w_t = k_B theta_E / hbar."""
    if not theta_E > 0:
        raise DomainError("theta_E must be positive")
    if not beta > 0:
        raise DomainError("beta must be positive")
    x = CONST.kB * theta_E * beta
    if x > 1400:
        return 0.0
    e = math.exp(-x)
    return 3.0 * CONST.kB * x * x * e / (1.0 - e) ** 2


def effective_temperature(u):
    """u / 3k_B: an energy rescaling, not an equilibrium temperature."""
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0):
        raise DomainError("u must be positive")
    out = u / (3.0 * CONST.kB)
    return out if out.ndim else float(out)


# --------------------------------------------------------------------------
# curves


@dataclass
class EnergyCurve:
    t: np.ndarray
    u: np.ndarray
    u_eff_temp: np.ndarray
    params: ModelParams
    temps: TemperatureSet
    quad: QuadratureSpec
    u0: float
    u_inf: float
    du: np.ndarray = None
    failed: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failed


def _point(args):
    p, temps, t, quad = args
    try:
        return energy_change(p, temps, t, quad), None
    except NumericalError as exc:
        return float("nan"), str(exc)


def _workers() -> int:
    raw = os.environ.get("LEVITHERM_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise DomainError(f"LEVITHERM_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise DomainError("LEVITHERM_THREADS must be at least 1")
    return n


def internal_energy_curve(p: ModelParams, temps: TemperatureSet, t_grid=None,
                          quad: QuadratureSpec = ENERGY_QUAD) -> EnergyCurve:
    """Energy at every grid time; points are independent and may run in worker processes."""
    t = default_time_grid(p) if t_grid is None else np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise DomainError("t_grid must be a non-empty 1-D sequence")
    if np.any(np.diff(t) <= 0):
        raise DomainError("t_grid must be strictly increasing")
    if np.any(t < 0):
        raise DomainError("t_grid must be non-negative")
    jobs = [(p, temps, float(x), quad) for x in t]
    n = min(_workers(), len(jobs))
    if n > 1:
        with ProcessPoolExecutor(max_workers=n) as ex:
            results = list(ex.map(_point, jobs))
    else:
        results = [_point(j) for j in jobs]
    u0 = initial_energy(p, temps)
    du = np.array([r[0] for r in results])
    u = u0 + du
    failed = [(float(t[i]), r[1]) for i, r in enumerate(results) if r[1] is not None]
    u_inf = u_infinity(p, temps.beta_EM, temps.beta_gamma, quad)
    with np.errstate(invalid="ignore"):
        teff = u / (3.0 * CONST.kB)
    return EnergyCurve(t, u, teff, p, temps, quad, u0, u_inf, du, failed)
