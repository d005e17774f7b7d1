"""Spectral weights of the electromagnetic field and the internal phonon bath.

Every weight is returned in mass-reduced form: the oscillator masses that
appear in the bath couplings and in the internal energy cancel, so the
noise weight of a source is simply hbar * rate * w * coth(beta*hbar*w/2)
with rate = Gamma_EM (field) or 4*gamma_I (phonon bath).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .matching import ModelParams
from .phys_core import CONST, DomainError, ExpSum, exp_sum_eval, thermal_coth

__all__ = [
    "NoiseSpectrum",
    "itb_spectral_density",
    "itb_noise_weight",
    "em_markov_spectrum",
    "odf_initial_kernel",
    "noise_sources",
]

SOURCES = ("EM", "ITB")


def _omega(omega):
    w = np.asarray(omega, dtype=float)
    if np.any(w <= 0):
        raise DomainError("omega must be positive")
    return w


def _out(x):
    return x if np.ndim(x) else float(x)


def itb_spectral_density(p: ModelParams, omega):
    """Ohmic density (2*gamma_I/pi) * w * exp(-w/cutoff), per unit oscillator mass."""
    w = _omega(omega)
    return _out(2.0 * p.gamma_I / math.pi * w * np.exp(-w / p.itb_cutoff))


def itb_noise_weight(p: ModelParams, beta_gamma: float, omega):
    """Fluctuation weight of the phonon bath: 2*pi*hbar*coth * J(w)."""
    w = _omega(omega)
    J = np.asarray(itb_spectral_density(p, w))
    return _out(2.0 * math.pi * CONST.hbar * thermal_coth(beta_gamma, w) * J)


def em_markov_spectrum(p: ModelParams, beta_EM: float, omega):
    """Markovian field weight hbar * Gamma_EM * w * coth(beta*hbar*w/2).

    No cutoff is applied here; the energy integrals attach the separate
    regulator exp(-w/em_cutoff) (see ``NoiseSpectrum``).
    """
    w = _omega(omega)
    return _out(CONST.hbar * p.Gamma_EM * w * thermal_coth(beta_EM, w))


@dataclass(frozen=True)
class NoiseSpectrum:
    """One noise source as it enters the energy integrals, cutoff included."""

    source: str
    rate: float
    beta: float
    cutoff: float

    def __post_init__(self):
        if self.source not in SOURCES:
            raise DomainError(f"unknown noise source {self.source!r}")
        if not (self.rate >= 0 and self.beta > 0 and self.cutoff > 0):
            raise DomainError("rate must be non-negative, beta and cutoff positive")

    def weight(self, omega):
        w = _omega(omega)
        return _out(CONST.hbar * self.rate * w * thermal_coth(self.beta, w) * np.exp(-w / self.cutoff))

    def weight_scalar(self, w: float) -> float:
        # hot path inside scalar quadratures
        x = self.beta * CONST.hbar * w
        coth = 1.0 + 2.0 / math.expm1(x) if x < 700 else 1.0
        return CONST.hbar * self.rate * w * coth * math.exp(-w / self.cutoff)

    def dweight_dbeta_scalar(self, w: float) -> float:
        """Derivative of the weight with respect to beta, analytic."""
        y = 0.5 * self.beta * CONST.hbar * w
        if y > 350:
            return 0.0
        e = math.exp(-2.0 * y)
        inv_sinh2 = 4.0 * e / (1.0 - e) ** 2
        dcoth = -0.5 * CONST.hbar * w * inv_sinh2
        return CONST.hbar * self.rate * w * dcoth * math.exp(-w / self.cutoff)


def noise_sources(p: ModelParams, beta_EM: float, beta_gamma: float) -> tuple[NoiseSpectrum, NoiseSpectrum]:
    return (
        NoiseSpectrum("EM", p.Gamma_EM, beta_EM, p.em_cutoff),
        NoiseSpectrum("ITB", 4.0 * p.gamma_I, beta_gamma, p.itb_cutoff),
    )


def odf_initial_kernel(p: ModelParams, beta_Omega: float, G_Omega: ExpSum, lam, lam_p):
    """Two-time kernel of the initial optical-mode state.

    hbar * coth(beta*hbar*Omega/2) * [dG(l) dG(l') + Omega^2 G(l) G(l')].
    The internal energy carries it with the factor 3*omega_theta*g^2/2.
    """
    lam = np.asarray(lam, dtype=float)
    lam_p = np.asarray(lam_p, dtype=float)
    if np.any(lam < 0) or np.any(lam_p < 0):
        raise DomainError("times must be non-negative")
    pref = CONST.hbar * thermal_coth(beta_Omega, p.Omega)
    g1, d1 = exp_sum_eval(G_Omega, lam), exp_sum_eval(G_Omega, lam, 1)
    g2, d2 = exp_sum_eval(G_Omega, lam_p), exp_sum_eval(G_Omega, lam_p, 1)
    return _out(pref * (d1 * d2 + p.Omega**2 * g1 * g2))
