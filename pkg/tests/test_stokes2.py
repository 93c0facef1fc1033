import cmath
import math

import numpy as np
import pytest

from oscillotex.stokes2 import (
    DefectShape,
    HalfSpaceSetup,
    baseline_profile,
    impedance_positivity,
    solve_halfspace,
    wall_impedance_numeric,
    zw1_chiprime_form,
    zw1_perturbative,
)

MU0 = 1.0
RHO = 1.0
OMEGA = 2.0
ELL = 0.2
K0 = 1.0 + 1.0j  # sqrt(i * 2 * 1 / 1), principal root


def _setup(kind, eps=0.0, n=512):
    return HalfSpaceSetup.build(mu0=MU0, rho=RHO, omega=OMEGA, eps=eps,
                                shape=DefectShape(kind, ELL), n_cells=n)


# ---------------------------------------------------------------------------
# Shapes and setup validation
# ---------------------------------------------------------------------------

def test_shape_profiles_and_support():
    top = DefectShape("tophat", 0.5)
    assert top.chi(0.2) == 1.0 and top.chi(0.7) == 0.0
    assert top.support_end == 0.5 and top.has_edge

    ramp = DefectShape("ramp", 0.5)
    assert ramp.chi(0.0) == 1.0
    assert ramp.chi(0.25) == pytest.approx(0.5)
    assert ramp.chi(0.6) == 0.0
    assert ramp.has_edge

    ex = DefectShape("exp", 0.5)
    assert ex.chi(0.5) == pytest.approx(math.exp(-1.0))
    assert ex.support_end == pytest.approx(20.0)  # 40 decay lengths
    assert not ex.has_edge

    with pytest.raises(ValueError):
        DefectShape("box", 0.5)
    with pytest.raises(ValueError):
        DefectShape("tophat", 0.0)
    with pytest.raises(ValueError):
        top.chi(-0.1)


def test_setup_validation():
    assert _setup("tophat").k0 == pytest.approx(K0)
    with pytest.raises(ValueError):
        HalfSpaceSetup.build(mu0=MU0, rho=RHO, omega=OMEGA, eps=0.3)
    with pytest.raises(ValueError):
        HalfSpaceSetup.build(mu0=MU0, rho=RHO, omega=OMEGA, eps=1.6,
                             shape=DefectShape("tophat", ELL))
    with pytest.raises(ValueError):
        HalfSpaceSetup.build(mu0=MU0, rho=RHO, omega=OMEGA, U_w=0.0)
    with pytest.raises(ValueError):
        HalfSpaceSetup.build(mu0=0.0, rho=RHO, omega=OMEGA)
    assert _setup("tophat").stokes_thickness == pytest.approx(1.0)


def test_edge_lands_on_a_node_and_grid_ignores_eps():
    for eps in (0.0, 0.1, 0.4):
        for kind in ("tophat", "ramp"):
            s = _setup(kind, eps=eps)
            j = round(ELL / s.grid.h)
            assert s.grid.nodes[j] == pytest.approx(ELL, abs=1e-14)
    # an eps sweep must live on one grid so differences are eps-only
    g0 = _setup("tophat", eps=0.0).grid
    g1 = _setup("tophat", eps=0.45).grid
    assert g0 == g1


# ---------------------------------------------------------------------------
# Baseline impedance
# ---------------------------------------------------------------------------

def test_untextured_impedance_converges_to_mu0_k0():
    errs = []
    for n in (256, 512, 1024):
        s = HalfSpaceSetup.build(mu0=MU0, rho=RHO, omega=OMEGA, n_cells=n)
        errs.append(abs(wall_impedance_numeric(s) - MU0 * K0))
    assert errs[-1] <= 2e-4
    assert 3.4 <= errs[0] / errs[1] <= 4.7   # O(h^2) on a fixed-H family
    sol = solve_halfspace(_setup("tophat"))
    y = sol.problem.grid.nodes
    base = baseline_profile(_setup("tophat"), y)
    assert float(np.max(np.abs(sol.u - base))) <= 2e-4


# ---------------------------------------------------------------------------
# First-order impedance shift zw1 against closed forms
# ---------------------------------------------------------------------------
#
# The leading texture response is i mu0 k0^2 * Integral chi(s) e^{-2 k0 s} ds
# for small eps; each shape below has that integral in closed form.

def test_tophat_zw1_matches_closed_form_exactly():
    s = _setup("tophat")
    exact = 1j * MU0 * K0 * (1.0 - cmath.exp(-2.0 * K0 * ELL)) / 2.0
    z1 = zw1_perturbative(s)
    # piecewise-constant chi: the per-segment quadrature is exact
    assert abs(z1 - exact) <= 1e-12 * abs(exact)
    # integration-by-parts dual of the same integral
    assert abs(zw1_chiprime_form(s) - z1) <= 1e-12 * abs(exact)


def test_exp_zw1_converges_second_order():
    exact = 1j * MU0 * K0 ** 2 / (1.0 / ELL + 2.0 * K0)
    errs = []
    for n in (512, 2048):
        errs.append(abs(zw1_perturbative(_setup("exp", n=n)) - exact)
                    / abs(exact))
    assert errs[0] <= 5e-3       # measured 3.1e-3
    assert errs[1] <= 5e-4       # measured 2.0e-4
    assert 12.0 <= errs[0] / errs[1] <= 20.0


def test_ramp_zw1_converges():
    # integral of (1 - s/ell) e^{-2 k0 s} over the support, antiderivative
    # evaluated at both ends
    c = K0
    integral = 1.0 / (2.0 * c) - (1.0 - cmath.exp(-2.0 * c * ELL)) / (
        4.0 * c ** 2 * ELL)
    exact = 1j * MU0 * K0 ** 2 * integral
    errs = []
    for n in (512, 2048):
        errs.append(abs(zw1_perturbative(_setup("ramp", n=n)) - exact)
                    / abs(exact))
    assert errs[0] <= 3e-3       # measured 1.4e-3
    assert errs[1] <= 3e-4       # measured 8.1e-5


# ---------------------------------------------------------------------------
# Finite-amplitude cross-checks
# ---------------------------------------------------------------------------

def test_tophat_impedance_matches_two_layer_transmission_line():
    """A tophat defect is a uniform layer over a uniform half space.

    The exact wall impedance is then the loaded-line input impedance
    Zc1 (Z0 + Zc1 tanh(k1 ell)) / (Zc1 + Z0 tanh(k1 ell)) with
    Zc1 = mu1 k1 the layer impedance and Z0 = mu0 k0 the half-space load.
    """
    eps = 0.3
    mu1 = MU0 * cmath.exp(1j * eps)
    k1 = cmath.sqrt(1j * OMEGA * RHO / mu1)
    if k1.real < 0.0:
        k1 = -k1
    zc1 = mu1 * k1
    z0 = MU0 * K0
    t = cmath.tanh(k1 * ELL)
    exact = zc1 * (z0 + zc1 * t) / (zc1 + z0 * t)
    errs = []
    for n in (512, 2048):
        errs.append(abs(wall_impedance_numeric(_setup("tophat", eps=eps, n=n))
                        - exact) / abs(exact))
    assert errs[0] <= 3e-4       # measured 1.6e-4
    assert errs[1] <= 2e-5       # measured 9.7e-6


def test_difference_quotient_approaches_zw1():
    n = 2048
    z1 = zw1_perturbative(_setup("tophat", n=n))
    gaps = []
    for eps in (0.1, 0.05):
        dq = (wall_impedance_numeric(_setup("tophat", eps=eps, n=n))
              - wall_impedance_numeric(_setup("tophat", eps=0.0, n=n))) / eps
        gaps.append(abs(dq - z1))
    assert gaps[1] < gaps[0]               # first-order coefficient
    assert gaps[1] <= 0.05 * abs(z1)


def test_impedance_positivity_report():
    s = _setup("ramp", eps=0.4)
    omegas = [0.5, 1.0, 2.0, 4.0]
    rep = impedance_positivity(s, omegas)
    assert rep["ok"]
    assert rep["failures"] == []
    assert list(rep["omegas"]) == omegas
    assert min(rep["margins"]) == rep["min_margin"] > 0.0
    assert rep["max_power_residual"] <= 1e-12
