"""Constitutive models for oscillatory shear with spatial viscosity textures.

Three ingredient families live here:

* discrete relaxation spectra (weights and decay rates) whose Laplace
  transform gives the frequency-domain complex viscosity, with dissipation
  guaranteed nonnegative for any admissible spectrum,
* one-dimensional phase textures mu(y) = mu0 * exp(i*phi(y)) at fixed
  magnitude, the constitutive objects the wall-layer and channel examples
  are built from,
* spanwise-periodic texture families over a cross-section profile, carrying
  their exact spanwise Fourier coefficients for the mode-coupling solver.

Everything is immutable after construction and safe to share across threads.
Units are a consistent nondimensional system throughout; nothing here
converts units.
"""

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "PronySpectrum",
    "laplace_quadrature",
    "ConstantPhase",
    "TwoLayerPhase",
    "SmoothDefect",
    "PhaseTexture1D",
    "OneSided",
    "Cosine",
    "PhaseOnly",
    "SpanwiseTexture",
    "bessel_j",
    "bessel_tail",
]


# ---------------------------------------------------------------------------
# Bessel functions of integer order, small-argument regime.
# ---------------------------------------------------------------------------

def bessel_j(n, x):
    """Bessel function J_n(x) by the ascending power series.

    Terms are accumulated until the next one is below 1e-16 relative to the
    running sum, which converges fast for the moderate arguments (|x| <= ~2)
    used by the phase-only texture family.

    Parameters
    ----------
    n : int
        Integer order, any sign.
    x : float
        Argument.

    Returns
    -------
    float
    """
    n = int(n)
    if n < 0:
        # J_{-n}(x) = (-1)^n J_n(x)
        return (-1.0) ** (-n) * bessel_j(-n, x)
    if x == 0.0:
        return 1.0 if n == 0 else 0.0
    half = 0.5 * x
    # leading term (x/2)^n / n!
    term = half**n / math.factorial(n)
    total = term
    k = 0
    while True:
        k += 1
        term *= -(half * half) / (k * (n + k))
        total += term
        if abs(term) <= 1e-16 * abs(total) and k >= 2:
            return total


def bessel_tail(eps, n_band):
    """Certified upper bound on sum_{|n| > n_band} |J_n(eps)|.

    Evaluates the terms of the two-sided tail explicitly and closes the sum
    with the bound |J_n(x)| <= (x/2)^n / n!, so the return value is always
    an upper bound for the true tail. Monotone nonincreasing in ``n_band``.
    """
    if n_band < 0:
        raise ValueError("n_band must be >= 0")
    eps = float(abs(eps))
    if eps == 0.0:
        return 0.0
    half = 0.5 * eps
    total = 0.0
    n = n_band
    while True:
        n += 1
        envelope = half**n / math.factorial(n)
        if envelope < 1e-18:
            # geometric closure of the remaining envelope sum
            ratio = half / (n + 1)
            total += envelope * ratio / (1.0 - ratio)
            break
        total += abs(bessel_j(n, eps))
    return 2.0 * total


# ---------------------------------------------------------------------------
# Relaxation spectra.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PronySpectrum:
    """Discrete nonnegative relaxation spectrum.

    ``terms`` is a sequence of (weight, rate) pairs defining the memory
    kernel g(s) = sum_j c_j * exp(-r_j * s). Nonnegative weights make the
    kernel completely monotone, which is exactly what guarantees
    Re mu(omega) >= 0 at every frequency.

    Continuous spectra are expected to be quadratured into discrete form by
    the caller before entry; no fitting happens here.
    """

    terms: tuple = field(default_factory=tuple)

    def __post_init__(self):
        terms = tuple((float(c), float(r)) for c, r in self.terms)
        if not terms:
            raise ValueError("spectrum needs at least one (weight, rate) term")
        for c, r in terms:
            if c < 0.0 or r < 0.0:
                raise ValueError("weights and rates must be nonnegative")
        if not any(c > 0.0 for c, _ in terms):
            raise ValueError("spectrum needs at least one positive weight")
        object.__setattr__(self, "terms", terms)

    def kernel(self, s):
        """Memory kernel g(s) = sum_j c_j exp(-r_j s) for s >= 0."""
        s = np.asarray(s, dtype=float)
        if np.any(s < 0.0):
            raise ValueError("kernel argument must be nonnegative")
        out = np.zeros_like(s, dtype=float)
        for c, r in self.terms:
            out = out + c * np.exp(-r * s)
        return out if out.ndim else float(out)

    def complex_viscosity(self, omega):
        """Complex viscosity sum_j c_j / (r_j + i*omega) at omega > 0.

        The real part equals sum_j c_j r_j / (r_j^2 + omega^2) and is
        nonnegative for every admissible spectrum.
        """
        omega = float(omega)
        if omega <= 0.0:
            raise ValueError("omega must be positive")
        return sum(c / complex(r, omega) for c, r in self.terms)

    def zero_frequency_viscosity(self):
        """Zero-frequency limit sum_j c_j / r_j (kernel mass)."""
        if any(r == 0.0 and c > 0.0 for c, r in self.terms):
            raise ValueError("zero rate with positive weight has no finite limit")
        return sum(c / r for c, r in self.terms if c > 0.0)

    def passivity_margin(self, omega, r0):
        """Certified lower bound for Re mu(omega) from spectral mass above r0.

        Each retained term contributes c * f(r) with f(r) = r / (r^2 + w^2).
        f rises on [0, w] and falls beyond, so on the interval spanned by the
        retained rates its minimum sits at an endpoint: f(r) >= min(f(r0),
        f(r_max)) for every r in [r0, r_max]. The bound is therefore

            min(f(r0), f(r_max)) * sum_{r_j >= r0} c_j,

        which collapses to the familiar f(r0) * mass form whenever all
        retained rates stay below w^2 / r0. May be zero if no spectral mass
        sits at or above r0.
        """
        omega = float(omega)
        r0 = float(r0)
        if r0 <= 0.0:
            raise ValueError("r0 must be positive")
        retained = [(c, r) for c, r in self.terms if r >= r0]
        if not retained:
            return 0.0
        mass = sum(c for c, r in retained)
        r_max = max(r for _, r in retained)
        w2 = omega * omega
        f_lo = r0 / (r0 * r0 + w2)
        f_hi = r_max / (r_max * r_max + w2)
        return min(f_lo, f_hi) * mass


def laplace_quadrature(spectrum, omega, s_max=None, n_points=None):
    """Oracle evaluation of the kernel's Laplace transform at i*omega.

    Composite Simpson quadrature of integral_0^{s_max} g(s) exp(-i omega s) ds.
    Used as an independent cross-check of ``PronySpectrum.complex_viscosity``;
    agreement is limited only by the quadrature error.

    Raises
    ------
    ValueError
        If the kernel tail beyond ``s_max`` is not negligible,
        g(s_max) >= 1e-14 * g(0).
    """
    omega = float(omega)
    positive_rates = [r for c, r in spectrum.terms if c > 0.0]
    r_min = min(positive_rates) if positive_rates else 0.0
    if s_max is None:
        if r_min <= 0.0:
            raise ValueError("cannot choose s_max for a nondecaying kernel")
        s_max = 34.0 / r_min
    s_max = float(s_max)
    if spectrum.kernel(s_max) >= 1e-14 * spectrum.kernel(0.0):
        raise ValueError("kernel tail beyond s_max is not negligible")
    if n_points is None:
        # resolve both the kernel decay and the oscillation
        n_points = max(20001, int(40.0 * abs(omega) * s_max))
    n = int(n_points)
    if n % 2 == 0:
        n += 1
    s = np.linspace(0.0, s_max, n)
    f = spectrum.kernel(s) * np.exp(-1j * omega * s)
    h = s[1] - s[0]
    w = np.ones(n)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return complex(h / 3.0 * np.dot(w, f))


# ---------------------------------------------------------------------------
# One-dimensional phase textures mu(y) = mu0 * exp(i*phi(y)).
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstantPhase:
    """Spatially constant phase phi(y) = phi0."""

    phi0: float = 0.0

    def phi(self, y):
        return np.full_like(np.asarray(y, dtype=float), self.phi0)


@dataclass(frozen=True)
class TwoLayerPhase:
    """Piecewise constant phase: phi1 below y_c, phi2 at and above it."""

    phi1: float
    phi2: float
    y_c: float

    def phi(self, y):
        y = np.asarray(y, dtype=float)
        return np.where(y < self.y_c, self.phi1, self.phi2)

    @property
    def phase_jump(self):
        return abs(self.phi2 - self.phi1)


@dataclass(frozen=True)
class SmoothDefect:
    """Sampled defect phase phi(y) = eps * chi(y).

    ``chi`` holds uniform samples of the defect shape on [0, H] with values
    in [0, 1], interpolated piecewise linearly between samples, identically
    zero beyond the declared support length ``ell``.
    """

    eps: float
    chi: np.ndarray
    ell: float

    def __post_init__(self):
        chi = np.asarray(self.chi, dtype=float)
        if chi.ndim != 1 or chi.size < 2:
            raise ValueError("chi must be a 1d sample array with >= 2 points")
        if np.any(chi < -1e-12) or np.any(chi > 1.0 + 1e-12):
            raise ValueError("chi samples must lie in [0, 1]")
        chi = np.clip(chi, 0.0, 1.0)
        chi.setflags(write=False)
        object.__setattr__(self, "chi", chi)
        object.__setattr__(self, "eps", float(self.eps))
        object.__setattr__(self, "ell", float(self.ell))

    def chi_at(self, y, H):
        """Piecewise linear interpolation of the samples over [0, H]."""
        grid = np.linspace(0.0, H, self.chi.size)
        return np.interp(np.asarray(y, dtype=float), grid, self.chi)

    def phi_on(self, y, H):
        return self.eps * self.chi_at(y, H)


@dataclass(frozen=True)
class PhaseTexture1D:
    """Fixed-magnitude complex viscosity profile mu0 * exp(i*phi(y)) on [0, H].

    The passivity number ``delta`` = min_y cos(phi) must be positive: the
    real part of the viscosity then stays at or above mu0 * delta everywhere.
    """

    mu0: float
    H: float
    profile: object  # ConstantPhase | TwoLayerPhase | SmoothDefect

    def __post_init__(self):
        if self.mu0 <= 0.0 or self.H <= 0.0:
            raise ValueError("mu0 and H must be positive")
        if isinstance(self.profile, SmoothDefect):
            chi = self.profile.chi
            grid = np.linspace(0.0, self.H, chi.size)
            # one straddling sample at the support edge is tolerated
            beyond = grid > self.profile.ell + self.H / (chi.size - 1)
            if np.any(chi[beyond] != 0.0):
                raise ValueError("defect samples must vanish beyond ell")
        if self.passivity_delta() <= 0.0:
            raise ValueError("phase profile violates passivity: cos(phi) <= 0")

    def phi(self, y):
        y = np.asarray(y, dtype=float)
        if isinstance(self.profile, SmoothDefect):
            return self.profile.phi_on(y, self.H)
        return self.profile.phi(y)

    def mu_star(self, y):
        """Complex viscosity at height y, 0 <= y <= H."""
        y_arr = np.asarray(y, dtype=float)
        if np.any(y_arr < 0.0) or np.any(y_arr > self.H):
            raise ValueError("y outside [0, H]")
        out = self.mu0 * np.exp(1j * self.phi(y_arr))
        return out if out.ndim else complex(out)

    def passivity_delta(self, n_samples=4097):
        """min_y cos(phi(y)) over a dense uniform sampling."""
        y = np.linspace(0.0, self.H, n_samples)
        return float(np.min(np.cos(self.phi(y))))

    def phase_gradient_number(self, L):
        """Dimensionless phase sharpness L * ess-sup |phi'|.

        Piecewise constant profiles report infinity; the jump magnitude is
        available on the profile itself. Sampled defects use the maximum
        one-sided difference quotient of their stored samples.
        """
        if isinstance(self.profile, ConstantPhase):
            return 0.0
        if isinstance(self.profile, TwoLayerPhase):
            return math.inf
        chi = self.profile.chi
        h = self.H / (chi.size - 1)
        slope = float(np.max(np.abs(np.diff(chi)))) / h
        return L * abs(self.profile.eps) * slope


# ---------------------------------------------------------------------------
# Spanwise-periodic texture families.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OneSided:
    """Single-harmonic one-sided modulation 1 + eps * exp(i k0 z)."""

    eps: float
    m0: int

    def __post_init__(self):
        _check_family(self.eps, self.m0, 1.0, inclusive=True)


@dataclass(frozen=True)
class Cosine:
    """Symmetric cosine modulation 1 + eps * cos(k0 z)."""

    eps: float
    m0: int

    def __post_init__(self):
        _check_family(self.eps, self.m0, 1.0, inclusive=True)


@dataclass(frozen=True)
class PhaseOnly:
    """Phase-only modulation exp(i eps cos(k0 z)), band-limited to |n| <= band.

    The exact spanwise coefficients are i^n J_n(eps); ``band`` controls how
    many are retained. The omitted mass is bounded by ``bessel_tail``, which
    is how a band for a target accuracy should be chosen.
    """

    eps: float
    m0: int
    band: int = 2

    def __post_init__(self):
        _check_family(self.eps, self.m0, 0.5 * math.pi)
        if int(self.band) < 1:
            raise ValueError("band must be >= 1")
        object.__setattr__(self, "band", int(self.band))


def _check_family(eps, m0, eps_cap, inclusive=False):
    # the closed upper end lets boundary cases construct so the passivity
    # check can report their zero margin instead of never seeing them
    if inclusive:
        ok = 0.0 <= eps <= eps_cap
    else:
        ok = 0.0 <= eps < eps_cap
    if not ok:
        bracket = "]" if inclusive else ")"
        raise ValueError(f"eps must lie in [0, {eps_cap:g}{bracket}")
    if int(m0) < 1:
        raise ValueError("m0 must be a positive integer")


@dataclass(frozen=True)
class SpanwiseTexture:
    """Cross-section baseline profile plus a z-periodic texture family.

    ``baseline`` is the complex viscosity profile sampled at the cross-section
    grid nodes. The texture multiplies it by a periodic factor in z whose
    spanwise Fourier coefficients are exact and sparse, so multiplication by
    the texture acts on spanwise modes as a finite set of index shifts.
    """

    baseline: np.ndarray
    family: object  # OneSided | Cosine | PhaseOnly
    L_z: float

    def __post_init__(self):
        base = np.asarray(self.baseline, dtype=complex)
        if base.ndim != 1 or base.size < 2:
            raise ValueError("baseline must be a 1d node-sample array")
        if np.any(base.real <= 0.0):
            raise ValueError("baseline must have positive real part")
        if self.L_z <= 0.0:
            raise ValueError("L_z must be positive")
        base.setflags(write=False)
        object.__setattr__(self, "baseline", base)
        object.__setattr__(self, "L_z", float(self.L_z))

    @property
    def eps(self):
        return self.family.eps

    @property
    def m0(self):
        return self.family.m0

    @property
    def k0(self):
        return 2.0 * math.pi * self.m0 / self.L_z

    def wavenumber(self, m):
        """Spanwise wavenumber of mode m on the period L_z."""
        return 2.0 * math.pi * m / self.L_z

    def coefficient_weight(self, n):
        """Scalar weight w_n with mu_hat_n(y) = w_n * baseline(y).

        Exact zeros outside the family band; for the phase-only family the
        weights at multiples of m0 are i^q J_q(eps) and requests between
        harmonics return zero rather than raising.
        """
        n = int(n)
        fam = self.family
        if isinstance(fam, OneSided):
            if n == 0:
                return 1.0 + 0.0j
            if n == fam.m0:
                return complex(fam.eps)
            return 0.0j
        if isinstance(fam, Cosine):
            if n == 0:
                return 1.0 + 0.0j
            if abs(n) == fam.m0:
                return complex(0.5 * fam.eps)
            return 0.0j
        if isinstance(fam, PhaseOnly):
            if n % fam.m0 != 0:
                return 0.0j
            q = n // fam.m0
            if abs(q) > fam.band:
                return 0.0j
            return (1j) ** q * bessel_j(q, fam.eps)
        raise TypeError(f"unknown texture family {type(fam).__name__}")

    def fourier_coefficient(self, n):
        """Spanwise coefficient profile mu_hat_n(y) on the baseline nodes."""
        return self.coefficient_weight(n) * self.baseline

    def coupling_terms(self):
        """Active off-diagonal (mode_offset, weight) pairs, plus the
        diagonal renormalization weight for the phase-only family.

        Returns
        -------
        offsets : list of (int, complex)
        diagonal_extra : complex
            Weight of the extra diagonal term relative to the baseline
            (J_0(eps) - 1 for phase-only, 0 otherwise).
        """
        fam = self.family
        if isinstance(fam, OneSided):
            offsets = [(fam.m0, complex(fam.eps))]
        elif isinstance(fam, Cosine):
            offsets = [(-fam.m0, complex(0.5 * fam.eps)),
                       (fam.m0, complex(0.5 * fam.eps))]
        elif isinstance(fam, PhaseOnly):
            offsets = []
            for q in range(-fam.band, fam.band + 1):
                if q == 0:
                    continue
                offsets.append((q * fam.m0, (1j) ** q * bessel_j(q, fam.eps)))
        else:
            raise TypeError(f"unknown texture family {type(fam).__name__}")
        offsets = [(n, w) for n, w in sorted(offsets) if w != 0.0]
        diagonal_extra = 0.0j
        if isinstance(fam, PhaseOnly):
            diagonal_extra = complex(bessel_j(0, fam.eps) - 1.0)
        return offsets, diagonal_extra

    def passivity_check(self):
        """Family-specific sufficient passivity margin.

        Returns (margin, ok). One-sided: min Re(mu) - eps |mu|. Cosine:
        (1 - eps) * min Re(mu). Phase-only: uniform phase-headroom rule
        min |mu| * sin(delta0 - eps) with delta0 = pi/2 - max |arg mu|,
        which reduces to min mu * cos(eps) for a real positive baseline.
        Each margin is sufficient, not necessary; a nonpositive margin
        reports ok=False without raising.
        """
        base = self.baseline
        fam = self.family
        if isinstance(fam, OneSided):
            margin = float(np.min(base.real - fam.eps * np.abs(base)))
        elif isinstance(fam, Cosine):
            margin = float((1.0 - fam.eps) * np.min(base.real))
        elif isinstance(fam, PhaseOnly):
            delta0 = 0.5 * math.pi - float(np.max(np.abs(np.angle(base))))
            margin = float(np.min(np.abs(base))) * math.sin(delta0 - fam.eps)
        else:
            raise TypeError(f"unknown texture family {type(fam).__name__}")
        return margin, margin > 0.0


def phase_factor_partial_sum(eps, band, k0z):
    """Band-limited reconstruction sum_{|q|<=band} i^q J_q(eps) e^{i q k0 z}.

    Test helper for the reconstruction bound: the pointwise error against
    exp(i eps cos(k0 z)) is at most ``bessel_tail(eps, band)``.
    """
    k0z = np.asarray(k0z, dtype=float)
    total = np.zeros_like(k0z, dtype=complex)
    for q in range(-band, band + 1):
        total = total + (1j) ** q * bessel_j(q, eps) * np.exp(1j * q * k0z)
    return total
