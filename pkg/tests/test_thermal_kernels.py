import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from levitherm.phys_core import CONST, DomainError, ExpSum
from levitherm.propagators import g_omega_laplace, to_exp_sum
from levitherm.thermal_kernels import (
    NoiseSpectrum,
    em_markov_spectrum,
    itb_noise_weight,
    itb_spectral_density,
    noise_sources,
    odf_initial_kernel,
)


def test_itb_density_is_ohmic_at_low_frequency(gold50):
    w = 1e-6 * gold50.itb_cutoff
    assert itb_spectral_density(gold50, w) == pytest.approx(2 * gold50.gamma_I / math.pi * w, rel=1e-5)


@given(st.floats(1e10, 1e16), st.floats(1.0, 3000.0))
def test_bath_weight_matches_source_weight(w, T):
    import warnings

    from levitherm.materials import Geometry
    from levitherm.matching import reference_params

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        p = reference_params("gold", Geometry.from_nm(50), 1e-7)
    beta = 1 / (CONST.kB * T)
    itb = noise_sources(p, beta, beta)[1]
    assert itb.weight(w) == pytest.approx(itb_noise_weight(p, beta, w), rel=1e-12)


def test_field_weight_classical_limit(gold50):
    T = 1e6
    w = 1e-3 * gold50.omega_theta
    expected = 2 * gold50.Gamma_EM * CONST.kB * T
    assert em_markov_spectrum(gold50, 1 / (CONST.kB * T), w) == pytest.approx(expected, rel=1e-6)


def test_field_weight_zero_point_limit(gold50):
    w = gold50.Omega
    assert em_markov_spectrum(gold50, 1e30, w) == pytest.approx(CONST.hbar * gold50.Gamma_EM * w, rel=1e-12)


@given(st.floats(1e11, 1e17), st.floats(1e18, 1e23))
def test_scalar_and_vector_weights_agree(w, beta):
    s = NoiseSpectrum("EM", 3.0e15, beta, 1e17)
    assert s.weight_scalar(w) == pytest.approx(float(s.weight(w)), rel=1e-12)


@given(st.floats(1e12, 1e15), st.floats(5.0, 3000.0))
def test_beta_derivative_against_difference(w, T):
    beta = 1 / (CONST.kB * T)
    s = NoiseSpectrum("ITB", 1e13, beta, 1e15)
    h = 1e-5 * beta
    up = NoiseSpectrum("ITB", 1e13, beta + h, 1e15).weight_scalar(w)
    dn = NoiseSpectrum("ITB", 1e13, beta - h, 1e15).weight_scalar(w)
    fd = (up - dn) / (2 * h)
    # once coth is within rounding of 1 the difference is pure noise
    noise = 1e-10 * abs(s.weight_scalar(w)) / beta
    assert s.dweight_dbeta_scalar(w) == pytest.approx(fd, rel=1e-5, abs=noise)


def test_source_validation():
    with pytest.raises(DomainError):
        NoiseSpectrum("phonon", 1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        NoiseSpectrum("EM", 1.0, 0.0, 1.0)
    with pytest.raises(DomainError):
        NoiseSpectrum("EM", 1.0, 1.0, 1.0).weight(-1.0)


def test_sources_carry_model_rates(gold50):
    em, itb = noise_sources(gold50, 1e20, 2e20)
    assert (em.rate, em.beta, em.cutoff) == (gold50.Gamma_EM, 1e20, gold50.em_cutoff)
    assert (itb.rate, itb.beta, itb.cutoff) == (4 * gold50.gamma_I, 2e20, gold50.itb_cutoff)


def test_odf_initial_kernel_at_origin(gold10):
    G = to_exp_sum(g_omega_laplace(gold10))
    beta = 1 / (CONST.kB * 1000)
    coth = 1 / math.tanh(beta * CONST.hbar * gold10.Omega / 2)
    # G(0) = 0 and G'(0) = 1 leave only hbar coth
    assert odf_initial_kernel(gold10, beta, G, 0.0, 0.0) == pytest.approx(CONST.hbar * coth, rel=1e-9)


def test_odf_initial_kernel_is_symmetric(gold10):
    G = to_exp_sum(g_omega_laplace(gold10))
    a, b = np.array([1e-16, 3e-16]), np.array([2e-16, 5e-17])
    assert np.allclose(odf_initial_kernel(gold10, 1e20, G, a, b), odf_initial_kernel(gold10, 1e20, G, b, a))
    with pytest.raises(DomainError):
        odf_initial_kernel(gold10, 1e20, G, -1.0, 0.0)


def test_odf_initial_kernel_accepts_any_expsum(gold10):
    f = ExpSum([0.5j, -0.5j], [-1.0 + 1j, -1.0 - 1j])
    assert np.isfinite(odf_initial_kernel(gold10, 1e20, f, 0.3, 0.2))
