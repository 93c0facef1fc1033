import cmath
import math

import numpy as np
import pytest
from scipy.linalg import expm

from oscillotex.couette import (
    ExceptionalCompatibilityError,
    Layer,
    LayerStack,
    operator_matrix,
    profile_states,
    stack_solve,
    tau_correction_first_order,
    transfer_matrix,
)
from oscillotex.solvers1d import Grid1D, shear_wavenumber
from oscillotex.viscosity import ConstantPhase, PhaseTexture1D


def _draw(rng):
    mu = rng.uniform(0.5, 3.0) * np.exp(1j * rng.uniform(-1.3, 1.3))
    return (complex(mu), float(rng.uniform(0.2, 2.0)),
            float(rng.uniform(0.1, 5.0)), float(rng.uniform(0.05, 0.8)))


# ---------------------------------------------------------------------------
# Transfer matrix
# ---------------------------------------------------------------------------

def test_transfer_matrix_is_matrix_exponential():
    """T across a layer equals expm(delta * B), B = [[0, 1/mu], [iwr, 0]].

    Measured worst relative gap 4.1e-16 over the same draw family.
    """
    rng = np.random.default_rng(3)
    for _ in range(50):
        mu, rho, omega, delta = _draw(rng)
        b = np.array([[0.0, 1.0 / mu], [1j * omega * rho, 0.0]], dtype=complex)
        expected = expm(delta * b)
        got = transfer_matrix(mu, rho, omega, delta)
        assert float(np.max(np.abs(got - expected))) <= 1e-12 * float(
            np.max(np.abs(expected)))


def test_transfer_matrix_unimodular_and_group_property():
    rng = np.random.default_rng(41)
    for _ in range(50):
        mu, rho, omega, delta = _draw(rng)
        # keep |k delta| moderate so det is testable against roundoff
        k = shear_wavenumber(omega, rho, mu)
        if abs(k) * delta > 3.6:
            continue
        t = transfer_matrix(mu, rho, omega, delta)
        assert abs(np.linalg.det(t) - 1.0) <= 1e-12
        d1 = 0.4 * delta
        split = transfer_matrix(mu, rho, omega, delta - d1) @ transfer_matrix(
            mu, rho, omega, d1)
        assert float(np.max(np.abs(split - t))) <= 1e-12 * float(
            np.max(np.abs(t)))
    assert np.allclose(transfer_matrix(1.0 + 0.2j, 1.0, 1.0, 0.0), np.eye(2))
    with pytest.raises(ValueError):
        transfer_matrix(-1.0 + 0j, 1.0, 1.0, 0.5)
    with pytest.raises(ValueError):
        transfer_matrix(1.0, 1.0, 1.0, -0.1)


# ---------------------------------------------------------------------------
# Layered solve
# ---------------------------------------------------------------------------

def test_single_layer_traction_closed_form():
    mu, rho, omega, h = 1.5 * np.exp(0.3j), 0.9, 2.2, 0.7
    stack = LayerStack(layers=(Layer(thickness=h, mu=mu),), rho=rho,
                       omega=omega, U_w=1.0 - 0.5j)
    out = stack_solve(stack)
    k = shear_wavenumber(omega, rho, mu)
    exact = mu * k * stack.U_w / cmath.sinh(k * h)
    assert abs(out["tau_bottom"] - exact) <= 1e-12 * abs(exact)
    assert out["top_mismatch"] <= 1e-12
    assert out["states"][0, 0] == 0.0
    assert out["states"][0, -1] == pytest.approx(stack.U_w)


def test_stack_validation():
    with pytest.raises(ValueError):
        Layer(thickness=0.0, mu=1.0)
    with pytest.raises(ValueError):
        Layer(thickness=0.5, mu=-1.0 + 0j)
    with pytest.raises(ValueError):
        LayerStack(layers=(), rho=1.0, omega=1.0, U_w=1.0)
    with pytest.raises(TypeError):
        LayerStack(layers=(0.5,), rho=1.0, omega=1.0, U_w=1.0)
    with pytest.raises(ValueError):
        LayerStack(layers=(Layer(0.5, 1.0),), rho=0.0, omega=1.0, U_w=1.0)


def test_two_layer_traction_matches_fd_at_second_order():
    """Independent check: flux-form FD solve of the same channel.

    The stack answer is exact, so the FD gap must shrink as O(h^2);
    the coarse/fine error ratio for doubled resolution sits near 4.
    """
    from oscillotex.solvers1d import (DirichletTop, FluxFormProblem,
                                      solve_bvp, wall_traction)
    lays = (Layer(thickness=0.4, mu=1.0 + 0.3j), Layer(thickness=0.6, mu=2.0 - 0.4j))
    stack = LayerStack(layers=lays, rho=1.1, omega=1.7, U_w=1.0)
    exact = stack_solve(stack)["tau_bottom"]
    errs = []
    for n in (200, 400):
        grid = Grid1D(H=1.0, N=n)
        mu_mid = np.where(grid.midpoints < 0.4, lays[0].mu, lays[1].mu)
        p = FluxFormProblem(grid=grid, mu_mid=mu_mid, rho=1.1, omega=1.7,
                            u_bottom=0.0, top=DirichletTop(1.0))
        # drive from the top: traction at the bottom wall
        errs.append(abs(wall_traction(solve_bvp(p), "bottom") - exact))
    assert errs[1] <= 1e-4
    assert 3.3 <= errs[0] / errs[1] <= 4.7


def test_profile_is_continuous_across_interfaces():
    lays = (Layer(0.3, 1.0 + 0.2j), Layer(0.5, 0.7 - 0.3j), Layer(0.2, 2.0))
    stack = LayerStack(layers=lays, rho=1.0, omega=2.0, U_w=1.0)
    ys, us, taus = profile_states(stack, per_layer=200)
    # no jumps anywhere: both u and tau are transmitted state components
    assert float(np.max(np.abs(np.diff(us)))) <= 0.05
    assert float(np.max(np.abs(np.diff(taus)))) <= 0.2
    assert us[0] == 0.0
    assert us[-1] == pytest.approx(stack.U_w)
    out = stack_solve(stack)
    js = np.searchsorted(ys, out["interfaces"][1:-1])
    for col, j in enumerate(js, start=1):
        assert us[j] == pytest.approx(out["states"][0, col], abs=1e-12)


# ---------------------------------------------------------------------------
# First-order traction correction
# ---------------------------------------------------------------------------

def _stack_for_phase(eps, chi_fn, n_layers=4000, mu_bar=1.0, rho=1.0,
                     omega=3.0, H=1.0, U_w=1.0):
    d = H / n_layers
    mids = (np.arange(n_layers) + 0.5) * d
    lays = tuple(Layer(thickness=d, mu=mu_bar * cmath.exp(1j * eps * chi_fn(s)))
                 for s in mids)
    return LayerStack(layers=lays, rho=rho, omega=omega, U_w=U_w)


@pytest.mark.parametrize("chi_fn, frozen", [
    (lambda s: 1.0, 0.09253474 + 1.13094731j),
    (lambda s: 0.5 * (1.0 - math.cos(2.0 * math.pi * s)),
     0.09523796 + 0.51643893j),
])
def test_tau_correction_matches_difference_quotient(chi_fn, frozen):
    """Central difference of the exact layered answer at eps = 1e-4.

    Measured relative gaps 1.05e-7 and 1.38e-7 for the two profiles
    (quadrature plus the thin-layer staircase both enter).
    """
    H = 1.0
    s = np.linspace(0.0, H, 2001)
    chi = np.array([chi_fn(v) for v in s])
    corr = tau_correction_first_order(1.0, 1.0, 3.0, H, 1.0, chi)
    assert corr == pytest.approx(frozen, abs=5e-7)
    eps = 1e-4
    tau_p = stack_solve(_stack_for_phase(+eps, chi_fn))["tau_bottom"]
    tau_m = stack_solve(_stack_for_phase(-eps, chi_fn))["tau_bottom"]
    dq = (tau_p - tau_m) / (2.0 * eps)
    assert abs(dq - corr) <= 1e-5 * abs(corr)


def test_tau_correction_validation():
    with pytest.raises(ValueError):
        tau_correction_first_order(-1.0, 1.0, 1.0, 1.0, 1.0, np.ones(11))


# ---------------------------------------------------------------------------
# Interior operator block
# ---------------------------------------------------------------------------

def test_operator_matrix_against_hand_rows():
    grid = Grid1D(H=1.0, N=8)
    rng = np.random.default_rng(19)
    mu = rng.uniform(0.5, 2.0, 8) + 1j * rng.uniform(-0.4, 0.4, 8)
    ops = operator_matrix(mu, grid, rho=0.9, omega=1.4)
    a = ops["A_phi"]
    h2 = grid.h ** 2
    assert a.shape == (7, 7)
    for i in range(7):
        assert a[i, i] == pytest.approx((mu[i] + mu[i + 1]) / h2)
    for i in range(6):
        assert a[i, i + 1] == pytest.approx(-mu[i + 1] / h2)
        assert a[i + 1, i] == pytest.approx(-mu[i + 1] / h2)
    assert np.allclose(ops["L"], a + 1j * 1.4 * 0.9 * np.eye(7))
    assert ops["h"] == grid.h


def test_operator_matrix_texture_equivalence_and_phase_ray():
    grid = Grid1D(H=1.0, N=32)
    tex = PhaseTexture1D(mu0=1.3, H=1.0, profile=ConstantPhase(0.5))
    from_tex = operator_matrix(tex, grid, rho=1.0, omega=2.0)
    from_arr = operator_matrix(tex.mu_star(grid.midpoints), grid,
                               rho=1.0, omega=2.0)
    assert np.array_equal(from_tex["A_phi"], from_arr["A_phi"])
    # constant phase: A_phi = e^{i phi} * (real SPD stiffness), so every
    # eigenvalue sits on the ray arg = phi
    eig = np.linalg.eigvals(from_tex["A_phi"])
    assert float(np.max(np.abs(np.angle(eig) - 0.5))) <= 1e-10
    assert float(np.min(np.abs(eig))) > 0.0
    with pytest.raises(ValueError):
        operator_matrix(np.ones(5), grid, rho=1.0, omega=1.0)
    with pytest.raises(TypeError):
        operator_matrix(np.ones(32), "grid", rho=1.0, omega=1.0)
