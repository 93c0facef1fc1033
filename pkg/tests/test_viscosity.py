import math

import numpy as np
import pytest
from scipy import special

from oscillotex import (
    ConstantPhase,
    Cosine,
    OneSided,
    PhaseOnly,
    PhaseTexture1D,
    PronySpectrum,
    SmoothDefect,
    SpanwiseTexture,
    TwoLayerPhase,
    bessel_j,
    bessel_tail,
    laplace_quadrature,
)
from oscillotex.viscosity import phase_factor_partial_sum

# roundoff allowance for comparisons whose certified bound can drop below
# the float evaluation noise of the quantities being compared
RND = 16.0 * np.finfo(float).eps


# ---------------------------------------------------------------------------
# Relaxation spectra
# ---------------------------------------------------------------------------

def test_spectrum_validation():
    with pytest.raises(ValueError):
        PronySpectrum(terms=())
    with pytest.raises(ValueError):
        PronySpectrum(terms=((-1.0, 1.0),))
    with pytest.raises(ValueError):
        PronySpectrum(terms=((1.0, -2.0),))
    with pytest.raises(ValueError):
        PronySpectrum(terms=((0.0, 1.0), (0.0, 2.0)))


def test_complex_viscosity_closed_forms():
    s = PronySpectrum(terms=((1.0, 1.0),))
    assert s.complex_viscosity(1.0) == pytest.approx(0.5 - 0.5j, abs=1e-15)
    s = PronySpectrum(terms=((2.0, 4.0),))
    assert s.complex_viscosity(1.0) == pytest.approx(2.0 / (4.0 + 1j), abs=1e-15)
    s = PronySpectrum(terms=((1.0, 1.0), (0.5, 3.0)))
    assert s.complex_viscosity(2.0) == pytest.approx(
        1.0 / (1.0 + 2j) + 0.5 / (3.0 + 2j), abs=1e-15)
    with pytest.raises(ValueError):
        s.complex_viscosity(0.0)


def test_complex_viscosity_real_part_nonnegative():
    rng = np.random.default_rng(11)
    for _ in range(300):
        terms = tuple((float(rng.uniform(0.0, 10.0)),
                       float(10.0 ** rng.uniform(-2.0, 2.0)))
                      for _ in range(int(rng.integers(1, 5))))
        if not any(c > 0.0 for c, _ in terms):
            continue
        omega = float(10.0 ** rng.uniform(-2.0, 2.0))
        mu = PronySpectrum(terms=terms).complex_viscosity(omega)
        assert mu.real >= 0.0
        assert mu.imag <= 0.0  # every term sits in the lower half plane


def test_kernel_and_zero_frequency_limit():
    s = PronySpectrum(terms=((2.0, 1.0), (1.0, 4.0)))
    assert s.kernel(0.0) == pytest.approx(3.0)
    assert s.kernel(1.0) == pytest.approx(2.0 * math.exp(-1.0) + math.exp(-4.0))
    assert s.zero_frequency_viscosity() == pytest.approx(2.0 + 0.25)
    with pytest.raises(ValueError):
        s.kernel(-0.1)
    with pytest.raises(ValueError):
        PronySpectrum(terms=((1.0, 0.0),)).zero_frequency_viscosity()


def test_laplace_oracle_matches_closed_forms():
    s = PronySpectrum(terms=((1.0, 1.0),))
    val = laplace_quadrature(s, 1.0, s_max=40.0, n_points=100001)
    assert abs(val - (0.5 - 0.5j)) <= 1e-8
    s = PronySpectrum(terms=((2.0, 4.0),))
    assert abs(laplace_quadrature(s, 1.0) - 2.0 / (4.0 + 1j)) <= 1e-8


def test_laplace_oracle_cross_checks_viscosity():
    rng = np.random.default_rng(5)
    for _ in range(15):
        terms = tuple((float(rng.uniform(0.1, 5.0)),
                       float(rng.uniform(0.5, 20.0)))
                      for _ in range(int(rng.integers(1, 4))))
        s = PronySpectrum(terms=terms)
        omega = float(rng.uniform(0.5, 5.0))
        assert abs(laplace_quadrature(s, omega)
                   - s.complex_viscosity(omega)) <= 1e-8


def test_laplace_oracle_tail_guard():
    s = PronySpectrum(terms=((1.0, 1.0),))
    with pytest.raises(ValueError):
        laplace_quadrature(s, 1.0, s_max=5.0)  # kernel tail not negligible
    with pytest.raises(ValueError):
        laplace_quadrature(PronySpectrum(terms=((1.0, 0.0),)), 1.0)


def test_passivity_margin_reference_values():
    s = PronySpectrum(terms=((1.0, 1.0),))
    assert s.passivity_margin(1.0, 1.0) == pytest.approx(0.5, abs=1e-15)
    assert s.passivity_margin(1.0, 2.0) == 0.0
    s = PronySpectrum(terms=((1.0, 1.0), (0.5, 3.0)))
    assert s.passivity_margin(2.0, 1.0) == pytest.approx(0.3, abs=1e-15)
    with pytest.raises(ValueError):
        s.passivity_margin(1.0, 0.0)


def test_passivity_margin_is_lower_bound():
    """The margin must hold for every (spectrum, omega, r0) combination.

    The adversarial regime is omega**2 < r0 * r_max, where the retained
    rate function r/(r**2 + omega**2) dips below its value at r0; the
    bound takes the endpoint minimum, so it survives there too.
    """
    rng = np.random.default_rng(23)
    for _ in range(500):
        terms = tuple((float(rng.uniform(1e-3, 10.0)),
                       float(10.0 ** rng.uniform(math.log10(0.05),
                                                 math.log10(20.0))))
                      for _ in range(int(rng.integers(1, 5))))
        s = PronySpectrum(terms=terms)
        omega = float(10.0 ** rng.uniform(-2.0, 2.0))
        re_mu = s.complex_viscosity(omega).real
        for r0 in (min(r for _, r in terms), 2.0 * min(r for _, r in terms),
                   float(10.0 ** rng.uniform(-2.0, 2.0))):
            margin = s.passivity_margin(omega, r0)
            assert margin >= 0.0
            scale = max(1.0, re_mu, margin)
            assert margin <= re_mu + RND * scale


# ---------------------------------------------------------------------------
# Phase textures mu0 * exp(i phi(y))
# ---------------------------------------------------------------------------

def _defect_texture(eps=0.01, n=257, ell=0.5, H=1.0):
    y = np.linspace(0.0, H, n)
    chi = np.where(y <= ell, 0.5 * (1.0 + np.cos(math.pi * np.minimum(
        y / ell, 1.0))), 0.0)
    return PhaseTexture1D(mu0=1.0, H=H, profile=SmoothDefect(eps=eps, chi=chi,
                                                             ell=ell))


def test_mu_star_has_unit_magnitude_everywhere():
    y = np.linspace(0.0, 1.0, 101)
    for tex in (PhaseTexture1D(mu0=2.0, H=1.0, profile=ConstantPhase(0.4)),
                PhaseTexture1D(mu0=2.0, H=1.0,
                               profile=TwoLayerPhase(0.3, -0.2, 0.4)),
                _defect_texture()):
        mu = tex.mu_star(y * tex.H)
        assert np.max(np.abs(np.abs(mu) - tex.mu0)) <= 4.0 * np.finfo(float).eps * tex.mu0


def test_phase_texture_profiles():
    tex = PhaseTexture1D(mu0=1.0, H=2.0, profile=TwoLayerPhase(0.3, -0.2, 0.8))
    assert tex.phi(0.5) == pytest.approx(0.3)
    assert tex.phi(1.5) == pytest.approx(-0.2)
    assert tex.profile.phase_jump == pytest.approx(0.5)
    assert tex.passivity_delta() == pytest.approx(math.cos(0.3))
    dtex = _defect_texture(eps=0.2)
    assert dtex.phi(0.0) == pytest.approx(0.2)      # bump peak at the wall
    assert dtex.phi(0.9) == 0.0                      # beyond the support
    with pytest.raises(ValueError):
        dtex.mu_star(-0.1)


def test_phase_texture_validation():
    with pytest.raises(ValueError):
        PhaseTexture1D(mu0=0.0, H=1.0, profile=ConstantPhase(0.0))
    with pytest.raises(ValueError):
        # cos(phi) <= 0 somewhere: passivity lost
        PhaseTexture1D(mu0=1.0, H=1.0, profile=ConstantPhase(2.0))
    with pytest.raises(ValueError):
        # defect samples must vanish beyond the declared support
        PhaseTexture1D(mu0=1.0, H=1.0,
                       profile=SmoothDefect(eps=0.1, chi=np.ones(11), ell=0.3))
    with pytest.raises(ValueError):
        SmoothDefect(eps=0.1, chi=np.array([0.0, 1.5, 0.0]), ell=0.5)


def test_phase_gradient_number():
    assert PhaseTexture1D(1.0, 1.0, ConstantPhase(0.2)).phase_gradient_number(1.0) == 0.0
    assert math.isinf(PhaseTexture1D(1.0, 1.0,
                                     TwoLayerPhase(0.1, 0.2, 0.5)).phase_gradient_number(1.0))
    # linear-in-samples defect: slope eps * max|diff| / h
    chi = np.array([1.0, 0.5, 0.0, 0.0, 0.0])
    tex = PhaseTexture1D(1.0, 1.0, SmoothDefect(eps=0.2, chi=chi, ell=0.5))
    assert tex.phase_gradient_number(2.0) == pytest.approx(2.0 * 0.2 * 0.5 / 0.25)


# ---------------------------------------------------------------------------
# Bessel functions and the reconstruction bound
# ---------------------------------------------------------------------------

def test_bessel_j_frozen_oracle_values():
    # reference values computed with scipy.special.jv
    assert bessel_j(0, 0.3) == pytest.approx(0.9776262465382961, abs=1e-15)
    assert bessel_j(1, 0.2) == pytest.approx(0.09950083263923602, abs=1e-15)
    assert bessel_j(2, 0.7) == pytest.approx(0.0587869443641917, abs=1e-15)
    assert bessel_j(3, 0.5) == pytest.approx(0.002563729994587244, abs=1e-15)
    assert bessel_j(5, 1.0) == pytest.approx(0.00024975773021123466, abs=1e-16)
    assert bessel_j(4, 0.1) == pytest.approx(2.6028648545684057e-07, abs=1e-20)


def test_bessel_j_matches_scipy_live():
    rng = np.random.default_rng(17)
    for _ in range(100):
        n = int(rng.integers(-8, 9))
        x = float(rng.uniform(0.0, 2.0))
        assert bessel_j(n, x) == pytest.approx(float(special.jv(n, x)),
                                               abs=1e-14)


def test_bessel_negative_order_symmetry():
    for n in range(1, 6):
        for x in (0.1, 0.5, 1.3):
            assert bessel_j(-n, x) == (-1.0) ** n * bessel_j(n, x)
    assert bessel_j(0, 0.0) == 1.0
    assert bessel_j(3, 0.0) == 0.0


def test_bessel_tail_reference_magnitudes():
    assert bessel_tail(0.0, 0) == 0.0
    assert bessel_tail(0.1, 2) < 1e-4
    assert bessel_tail(0.5, 8) < 1e-10
    with pytest.raises(ValueError):
        bessel_tail(0.1, -1)


def test_bessel_tail_monotone_and_dominates_true_tail():
    for eps in (0.1, 0.3, 0.7):
        prev = math.inf
        for band in range(0, 9):
            tail = bessel_tail(eps, band)
            assert tail <= prev
            prev = tail
            # dominates an explicitly summed stretch of the true tail
            true_tail = 2.0 * sum(abs(float(special.jv(n, eps)))
                                  for n in range(band + 1, band + 40))
            assert tail >= true_tail - RND


def test_phase_only_reconstruction_error_within_tail():
    theta = np.linspace(0.0, 2.0 * math.pi, 64, endpoint=False)
    for eps in (0.1, 0.2, 0.5):
        target = np.exp(1j * eps * np.cos(theta))
        for band in (2, 4, 8):
            err = float(np.max(np.abs(
                phase_factor_partial_sum(eps, band, theta) - target)))
            # RND covers the float summation noise of the partial sum; the
            # certified truncation bound itself can sit below one ulp
            assert err <= bessel_tail(eps, band) + RND


# ---------------------------------------------------------------------------
# Spanwise texture families
# ---------------------------------------------------------------------------

def _texture(family, baseline=None, L_z=2.0 * math.pi):
    if baseline is None:
        baseline = np.ones(9, dtype=complex)
    return SpanwiseTexture(baseline=baseline, family=family, L_z=L_z)


def test_family_validation():
    with pytest.raises(ValueError):
        OneSided(eps=-0.1, m0=1)
    with pytest.raises(ValueError):
        Cosine(eps=1.2, m0=1)
    with pytest.raises(ValueError):
        PhaseOnly(eps=math.pi / 2, m0=1)
    with pytest.raises(ValueError):
        Cosine(eps=0.1, m0=0)
    with pytest.raises(ValueError):
        PhaseOnly(eps=0.1, m0=1, band=0)
    # the amplitude families admit the closed boundary eps = 1
    OneSided(eps=1.0, m0=1)
    Cosine(eps=1.0, m0=2)


def test_coefficients_are_exact_zeros_outside_band():
    tex = _texture(OneSided(eps=0.3, m0=2))
    assert tex.coefficient_weight(0) == 1.0
    assert tex.coefficient_weight(2) == 0.3
    for n in (-2, -1, 1, 3, 4, 5):
        assert tex.coefficient_weight(n) == 0.0

    tex = _texture(Cosine(eps=0.4, m0=1))
    assert tex.coefficient_weight(1) == 0.2
    assert tex.coefficient_weight(-1) == 0.2
    for n in (-3, -2, 2, 3):
        assert tex.coefficient_weight(n) == 0.0

    tex = _texture(PhaseOnly(eps=0.5, m0=2, band=2))
    for q in (-2, -1, 1, 2):
        assert tex.coefficient_weight(2 * q) == (1j) ** q * bessel_j(q, 0.5)
    assert tex.coefficient_weight(1) == 0.0    # between harmonics
    assert tex.coefficient_weight(6) == 0.0    # beyond the band
    base = tex.baseline
    assert np.array_equal(tex.fourier_coefficient(2),
                          tex.coefficient_weight(2) * base)


def test_coupling_terms_and_diagonal_renormalization():
    offsets, extra = _texture(Cosine(eps=0.4, m0=3)).coupling_terms()
    assert offsets == [(-3, 0.2 + 0j), (3, 0.2 + 0j)]
    assert extra == 0.0

    offsets, extra = _texture(OneSided(eps=0.3, m0=1)).coupling_terms()
    assert offsets == [(1, 0.3 + 0j)]

    offsets, extra = _texture(PhaseOnly(eps=0.5, m0=1, band=2)).coupling_terms()
    assert [n for n, _ in offsets] == [-2, -1, 1, 2]
    assert extra == pytest.approx(bessel_j(0, 0.5) - 1.0)


def test_passivity_check_reference_margins():
    margin, ok = _texture(Cosine(eps=0.1, m0=1)).passivity_check()
    assert ok and margin == pytest.approx(0.9)

    margin, ok = _texture(OneSided(eps=1.0, m0=1)).passivity_check()
    assert not ok and margin == pytest.approx(0.0)

    base = np.full(9, np.exp(0.25j * math.pi))
    margin, ok = _texture(OneSided(eps=0.5, m0=1), baseline=base).passivity_check()
    assert ok and margin == pytest.approx(math.sqrt(2.0) / 2.0 - 0.5)

    # real positive baseline reduces the phase-only rule to mu * cos(eps)
    margin, ok = _texture(PhaseOnly(eps=0.3, m0=1)).passivity_check()
    assert ok and margin == pytest.approx(math.cos(0.3))


def test_spanwise_texture_validation():
    with pytest.raises(ValueError):
        _texture(Cosine(eps=0.1, m0=1), baseline=np.full(9, -1.0 + 0j))
    with pytest.raises(ValueError):
        _texture(Cosine(eps=0.1, m0=1), L_z=0.0)
    tex = _texture(Cosine(eps=0.1, m0=3), L_z=math.pi)
    assert tex.k0 == pytest.approx(6.0)
    assert tex.wavenumber(-3) == pytest.approx(-6.0)
