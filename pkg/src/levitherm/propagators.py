"""Laplace-domain retarded kernels and their inversion to exponential sums.

The coupled kernels all have a denominator of the form P(s)*Q(s) - c with
P(s) = s^2 + w_theta^2 (internal mode), Q(s) = s^2 + Gamma*s + Omega^2
(optical mode) and c = 2*Omega*w_theta*g^2.  For realistic couplings c is
some 30 orders of magnitude below the coefficients of the expanded quartic,
so the roots are found as perturbations of the known roots of P and Q,
with the offset of each root computed directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .matching import ModelParams
from .phys_core import CONST, DomainError, ExpSum, NumericalError, roots, thermal_coth

__all__ = [
    "LaplaceKernel",
    "g_omega_laplace",
    "g_theta_laplace",
    "g_theta_g_omega_laplace",
    "g_np_laplace",
    "free_idf_kernels",
    "to_exp_sum",
    "rr_poles",
    "markov_damping",
    "kappa_slow",
    "quadratic_roots",
]

LABELS = ("G_Omega", "G_theta", "G_theta_free", "H_theta_free", "G_NP", "G_theta_G_Omega")


@dataclass(frozen=True)
class LaplaceKernel:
    """Rational kernel numerator(s)/denominator(s), coefficients highest power first.

    ``factored`` optionally holds (p_roots, q_roots, c) with
    denominator = prod(s - p) * prod(s - q) - c; ``numerator_is_q`` marks
    kernels whose numerator equals prod(s - q).
    """

    numerator: tuple
    denominator: tuple
    label: str
    factored: tuple | None = None
    numerator_is_q: bool = False

    def __post_init__(self):
        if self.label not in LABELS:
            raise DomainError(f"unknown kernel label {self.label!r}")
        num = np.trim_zeros(np.asarray(self.numerator, dtype=float), "f")
        den = np.trim_zeros(np.asarray(self.denominator, dtype=float), "f")
        if den.size == 0:
            raise DomainError("empty polynomial")
        if num.size >= den.size:
            raise DomainError("kernel must be strictly proper")
        object.__setattr__(self, "numerator", tuple(num))
        object.__setattr__(self, "denominator", tuple(den))

    def __call__(self, s):
        s = np.asarray(s, dtype=complex)
        return np.polyval(self.numerator, s) / np.polyval(self.denominator, s)


def quadratic_roots(b: float, c: float) -> np.ndarray:
    """Roots of s^2 + b*s + c without cancellation (real b, c)."""
    disc = 0.25 * b * b - c
    if disc < 0:
        im = math.sqrt(-disc)
        return np.array([-0.5 * b + 1j * im, -0.5 * b - 1j * im])
    big = -0.5 * b - math.copysign(math.sqrt(disc), b if b != 0 else 1.0)
    small = c / big if big != 0 else 0.0
    return np.array([big + 0j, small + 0j])


def _coupled(p: ModelParams, damping: float, label: str, numerator_is_q: bool) -> LaplaceKernel:
    P = (1.0, 0.0, p.omega_theta**2)
    Q = (1.0, damping, p.Omega**2)
    den = np.polymul(P, Q)
    den[-1] -= p.coupling
    pr = np.array([1j * p.omega_theta, -1j * p.omega_theta])
    qr = quadratic_roots(damping, p.Omega**2)
    num = Q if numerator_is_q else (1.0,)
    return LaplaceKernel(num, tuple(den), label, (pr, qr, p.coupling), numerator_is_q)


def g_omega_laplace(p: ModelParams) -> LaplaceKernel:
    return LaplaceKernel((1.0,), (1.0, p.damping, p.Omega**2), "G_Omega")


def g_theta_laplace(p: ModelParams) -> LaplaceKernel:
    return _coupled(p, p.damping, "G_theta", numerator_is_q=True)


def g_theta_g_omega_laplace(p: ModelParams) -> LaplaceKernel:
    """Product G_theta(s)*G_Omega(s) = 1/(P*Q - c)."""
    return _coupled(p, p.damping, "G_theta_G_Omega", numerator_is_q=False)


def g_np_laplace(p: ModelParams) -> LaplaceKernel:
    """Particle propagator with only the internal Ohmic damping 4*gamma_I."""
    k = _coupled(p, 4.0 * p.gamma_I, "G_NP", numerator_is_q=False)
    # numerator is P(s) = s^2 + w_theta^2
    return LaplaceKernel((1.0, 0.0, p.omega_theta**2), k.denominator, "G_NP", k.factored, False)


def free_idf_kernels(p: ModelParams, beta_theta: float) -> tuple[LaplaceKernel, LaplaceKernel]:
    if not beta_theta > 0:
        raise DomainError("beta_theta must be positive")
    w = p.omega_theta
    G0 = LaplaceKernel((1.0,), (1.0, 0.0, w * w), "G_theta_free")
    coth = thermal_coth(beta_theta, w)
    H0 = LaplaceKernel((coth / w, 0.0), (1.0, 0.0, w * w), "H_theta_free")
    return G0, H0


# --------------------------------------------------------------------------
# inversion


def _perturbed_root(base: complex, other: complex, partner, c: float):
    """Offset d with (d)(base - other + d) * partner(base + d) = c."""
    gap = base - other
    d = 0j
    for _ in range(60):
        d_new = c / ((gap + d) * partner(base + d))
        if abs(d_new - d) <= 1e-15 * abs(d_new):
            d = d_new
            break
        d = d_new
    return d


def _structured_inverse(k: LaplaceKernel) -> ExpSum | None:
    pr, qr, c = k.factored
    if abs(pr[0] - pr[1]) == 0 or abs(qr[0] - qr[1]) == 0:
        return None

    def P(s):
        return (s - pr[0]) * (s - pr[1])

    def Q(s):
        return (s - qr[0]) * (s - qr[1])

    num = np.asarray(k.numerator, dtype=complex)
    res, off, car = [], [], []
    for i in range(2):
        base, other = pr[i], pr[1 - i]
        d = _perturbed_root(base, other, Q, c)
        if abs(d) > 1e-3 * abs(base - other):
            return None
        s = base + d
        Ps = d * (base - other + d)
        Qs = Q(s)
        dD = (2 * s - pr[0] - pr[1]) * Qs + Ps * (2 * s - qr[0] - qr[1])
        Ns = Qs if k.numerator_is_q else np.polyval(num, s)
        if base.real == 0:
            car.append(base.imag)
            off.append(d)
        else:
            car.append(0.0)
            off.append(s)
        res.append(Ns / dD)
    for i in range(2):
        base, other = qr[i], qr[1 - i]
        e = _perturbed_root(base, other, P, c)
        if abs(e) > 1e-3 * abs(base - other):
            return None
        s = base + e
        Qs = e * (base - other + e)
        Ps = P(s)
        dD = (2 * s - pr[0] - pr[1]) * Qs + Ps * (2 * s - qr[0] - qr[1])
        Ns = Qs if k.numerator_is_q else np.polyval(num, s)
        car.append(0.0)
        off.append(s)
        res.append(Ns / dD)
    return ExpSum(res, off, car, None, runaway=any(np.real(off) > 0))


def _generic_inverse(k: LaplaceKernel) -> ExpSum:
    num = np.asarray(k.numerator, dtype=complex)
    den = np.asarray(k.denominator, dtype=complex)
    lead = den[0]
    r = roots(den)
    groups: list[list[complex]] = []
    for z in r:
        for grp in groups:
            if abs(grp[0] - z) <= 1e-9 * max(1.0, abs(z)):
                grp.append(z)
                break
        else:
            groups.append([z])
    res, poles, powers = [], [], []
    for gi, grp in enumerate(groups):
        z = complex(np.mean(grp))
        others = [complex(np.mean(g)) for j, g in enumerate(groups) for _ in g if j != gi]
        rest = lead * np.prod([z - o for o in others]) if others else lead
        if len(grp) == 1:
            res.append(np.polyval(num, z) / rest)
            poles.append(z)
            powers.append(0)
        elif len(grp) == 2:
            Nz = np.polyval(num, z)
            dN = np.polyval(np.polyder(num), z) if num.size > 1 else 0.0
            R = Nz / rest
            dR = (dN - Nz * sum(1.0 / (z - o) for o in others)) / rest
            # R/(s-z)^2 -> R t e^{zt};  dR/(s-z) -> dR e^{zt}
            res += [R, dR]
            poles += [z, z]
            powers += [1, 0]
        else:
            raise NumericalError("confluent poles")
    runaway = any(np.real(poles) > 0)
    return ExpSum(res, poles, None, powers, runaway=runaway)


def to_exp_sum(k: LaplaceKernel) -> ExpSum:
    """Residue inversion of a strictly proper kernel."""
    f = _structured_inverse(k) if k.factored is not None else None
    if f is None:
        f = _generic_inverse(k)
    if k.label in ("G_theta", "G_Omega", "G_theta_G_Omega") and np.any(f.offsets.real >= 0):
        raise NumericalError("unstable matched model")
    return f


def rr_poles(p: ModelParams) -> tuple[np.ndarray, bool]:
    """Roots of -s^3/omega_q + s^2 + Omega^2 and whether a runaway root exists."""
    gamma_rr = 1.0 / p.omega_q
    r = roots([-gamma_rr, 1.0, 0.0, p.Omega**2])
    return r, bool(np.any(r.real > 0))


def markov_damping(p: ModelParams) -> float:
    return p.q2_over_m * p.Omega**2 / (6.0 * math.pi * CONST.c**3 * CONST.eps0)


def kappa_slow(p: ModelParams) -> float:
    return to_exp_sum(g_theta_laplace(p)).slowest_rate()
