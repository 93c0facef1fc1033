"""Executable acceptance criteria.

Each criterion is a self-contained check with pinned parameters and
tolerances; ``oscillotex verify`` and the test suite both run them
through :func:`run_criterion`, so there is exactly one definition of
what "passing" means. The quick suite is the subset that finishes in
under a minute; the full suite runs everything.
"""

import math
import time
from dataclasses import dataclass

import numpy as np

from .couette import Layer, LayerStack, operator_matrix, stack_solve, transfer_matrix
from .diagnostics import (
    OperatorHandle,
    nonnormality_metric,
    numerical_range_sample,
    sideband_ratios,
    transfer_norm,
    transfer_norm_leading,
)
from .solvers1d import (
    DirichletTop,
    FluxFormProblem,
    Grid1D,
    RobinTop,
    power_residual,
    shear_wavenumber,
    solve_bvp,
    wall_traction,
)
from .stokes2 import (
    DefectShape,
    HalfSpaceSetup,
    impedance_positivity,
    wall_impedance_numeric,
    zw1_chiprime_form,
    zw1_perturbative,
)
from .toeplitz import (
    BlockSystemSpec,
    assemble_blocks,
    block_norm,
    conservative_sideband_bound,
    smallness_certificate,
    solve_direct,
    solve_neumann,
    vec_norm,
    verify_support,
)
from .viscosity import (
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
    phase_factor_partial_sum,
)

__all__ = ["CriterionResult", "CRITERIA", "QUICK_SET", "run_criterion",
           "run_suite"]


@dataclass(frozen=True)
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float


def _slope(xs, ys):
    """Least-squares slope of log y against log x."""
    return float(np.polyfit(np.log(np.asarray(xs, dtype=float)),
                            np.log(np.asarray(ys, dtype=float)), 1)[0])


# ---------------------------------------------------------------------------
# 1. Newtonian half-space baseline: impedance value and convergence order.
# ---------------------------------------------------------------------------

def criterion_1():
    def z_of(n):
        setup = HalfSpaceSetup.build(mu0=1.0, rho=1.0, omega=2.0, n_cells=n)
        return wall_impedance_numeric(setup)

    z = z_of(512)
    arg_err = abs(float(np.angle(z)) - math.pi / 4.0)
    val_err = abs(z - (1.0 + 1.0j))
    ns = (128, 256, 512, 1024)
    errs = [abs(z_of(n) - (1.0 + 1.0j)) for n in ns]
    order = _slope([1.0 / n for n in ns], errs)
    passed = arg_err <= 2e-3 and val_err <= 5e-3 and abs(order - 2.0) <= 0.1
    return passed, (f"|arg Z - pi/4| = {arg_err:.2e}, |Z - (1+i)| = "
                    f"{val_err:.2e}, order {order:.3f}")


# ---------------------------------------------------------------------------
# 2. Perturbative impedance: finite-difference slope and dual-form identity.
# ---------------------------------------------------------------------------

def criterion_2():
    shape = DefectShape(kind="tophat", ell=0.2)

    def setup_at(eps):
        return HalfSpaceSetup.build(mu0=1.0, rho=1.0, omega=2.0, eps=eps,
                                    shape=shape, n_cells=2048)

    base = setup_at(0.0)
    z0 = wall_impedance_numeric(base)
    z1 = zw1_perturbative(base)
    dual_err = abs(z1 - zw1_chiprime_form(base))
    eps_list = (1e-4, 3e-4, 1e-3, 3e-3)
    resid = [abs((wall_impedance_numeric(setup_at(e)) - z0) / e - z1)
             for e in eps_list]
    slope = _slope(eps_list, resid)
    passed = abs(slope - 1.0) <= 0.15 and dual_err <= 1e-10
    return passed, (f"residual slope {slope:.3f}, dual-form gap "
                    f"{dual_err:.2e}")


# ---------------------------------------------------------------------------
# 3. Passivity of the wall impedance over a frequency sweep.
# ---------------------------------------------------------------------------

def criterion_3():
    omegas = np.geomspace(0.2, 20.0, 25)
    worst_margin = math.inf
    worst_power = 0.0

    newtonian = HalfSpaceSetup.build(mu0=1.0, rho=1.0, omega=1.0)
    defect = HalfSpaceSetup.build(mu0=1.0, rho=1.0, omega=1.0, eps=0.3,
                                  shape=DefectShape(kind="tophat", ell=0.2))
    for setup in (newtonian, defect):
        rep = impedance_positivity(setup, omegas)
        worst_margin = min(worst_margin, rep["min_margin"])
        worst_power = max(worst_power, rep["max_power_residual"])
        if not rep["ok"]:
            return False, f"positivity failures: {rep['failures']}"

    # Constant-complex texture: mu = mu0 * exp(i phi0) everywhere.
    mu = 1.0 * np.exp(0.4j)
    for omega in omegas:
        k = shear_wavenumber(omega, 1.0, mu)
        y_max = 12.0 / k.real
        grid = Grid1D(y_max, 512)
        problem = FluxFormProblem(grid=grid,
                                  mu_mid=np.full(grid.N, mu), rho=1.0,
                                  omega=float(omega), u_bottom=1.0 + 0.0j,
                                  top=RobinTop(k))
        sol = solve_bvp(problem)
        z = -wall_traction(sol, "bottom")
        worst_margin = min(worst_margin, z.real + 1e-10 * abs(z))
        res = power_residual(sol)
        worst_power = max(worst_power, abs(res["re_residual"]),
                          abs(res["im_residual"]))

    passed = worst_margin >= 0.0 and worst_power <= 1e-12
    return passed, (f"min margin {worst_margin:.2e}, max power residual "
                    f"{worst_power:.2e}")


# ---------------------------------------------------------------------------
# 4. Couette transfer matrices: det, FD convergence, single-layer closed form.
# ---------------------------------------------------------------------------

def criterion_4():
    rng = np.random.default_rng(20260815)
    worst_det = 0.0
    # ranges keep |k| * delta <= ~3.6 so the det identity is testable in
    # double precision (cosh^2 cancellation grows like exp(2 |k| delta))
    for _ in range(100):
        mu = rng.uniform(0.5, 3.0) * np.exp(1j * rng.uniform(-1.3, 1.3))
        t = transfer_matrix(mu, rng.uniform(0.2, 2.0),
                            rng.uniform(0.1, 5.0), rng.uniform(0.05, 0.8))
        worst_det = max(worst_det, abs(np.linalg.det(t) - 1.0))

    mu1 = np.exp(0.3j)
    mu2 = np.exp(-0.2j)
    stack = LayerStack(layers=(Layer(thickness=0.4, mu=mu1),
                               Layer(thickness=0.6, mu=mu2)),
                       rho=1.0, omega=3.0, U_w=1.0 + 0.0j)
    tau_exact = stack_solve(stack)["tau_bottom"]
    errs = []
    ns = (80, 160, 320, 640)
    for n in ns:
        grid = Grid1D(1.0, n)
        mu_mid = np.where(grid.midpoints < 0.4, mu1, mu2)
        problem = FluxFormProblem(grid=grid, mu_mid=mu_mid, rho=1.0,
                                  omega=3.0, u_bottom=0.0 + 0.0j,
                                  top=DirichletTop(1.0 + 0.0j))
        tau_fd = wall_traction(solve_bvp(problem), "bottom")
        errs.append(abs(tau_fd - tau_exact))
    order = _slope([1.0 / n for n in ns], errs)

    single = LayerStack(layers=(Layer(thickness=1.0, mu=mu1),),
                        rho=1.0, omega=3.0, U_w=1.0 + 0.0j)
    k = shear_wavenumber(3.0, 1.0, mu1)
    closed = mu1 * k / np.sinh(k * 1.0)
    single_err = abs(stack_solve(single)["tau_bottom"] - closed) / abs(closed)

    passed = (worst_det <= 1e-12 and abs(order - 2.0) <= 0.15
              and single_err <= 1e-12)
    return passed, (f"max |det T - 1| = {worst_det:.2e}, FD order "
                    f"{order:.3f}, single-layer gap {single_err:.2e}")


# ---------------------------------------------------------------------------
# 5. Non-normality dichotomy: exact zero for constant phase, O(eps) defect.
# ---------------------------------------------------------------------------

def _delta_nn_of(texture, n=256, rho=1.0, omega=1.0):
    grid = Grid1D(texture.H, n)
    a = operator_matrix(texture, grid, rho, omega)["A_phi"]
    return nonnormality_metric(
        OperatorHandle(a, np.full(n - 1, grid.h), label="A_phi"))


def criterion_5():
    const = PhaseTexture1D(mu0=1.0, H=1.0, profile=ConstantPhase(phi0=0.3))
    d_const = _delta_nn_of(const)

    nodes = np.linspace(0.0, 1.0, 257)
    ell = 0.5
    chi = np.where(nodes <= ell,
                   0.5 * (1.0 + np.cos(math.pi * np.minimum(nodes / ell, 1.0))),
                   0.0)
    eps_list = (1e-3, 3e-3, 1e-2, 3e-2)
    vals = []
    for eps in eps_list:
        tex = PhaseTexture1D(mu0=1.0, H=1.0,
                             profile=SmoothDefect(eps=eps, chi=chi, ell=ell))
        vals.append(_delta_nn_of(tex))
    slope = _slope(eps_list, vals)
    passed = (d_const <= 1e-12 and all(v > 0.0 for v in vals)
              and abs(slope - 1.0) <= 0.15)
    return passed, (f"constant-phase Delta_nn = {d_const:.2e}, defect slope "
                    f"{slope:.3f}")


# ---------------------------------------------------------------------------
# 6. Numerical-range sector and resolvent distance bound.
# ---------------------------------------------------------------------------

def criterion_6():
    tex = PhaseTexture1D(mu0=1.0, H=1.0,
                         profile=TwoLayerPhase(phi1=0.3, phi2=-0.2, y_c=0.4))
    grid = Grid1D(1.0, 128)
    a = operator_matrix(tex, grid, 1.0, 1.0)["A_phi"]
    op = OperatorHandle(a, np.full(127, grid.h), label="A_phi")
    probes = (-1.0 + 0.0j, -10.0 + 0.0j, 2.0j, -5.0j, -3.0 - 4.0j)
    rng = numerical_range_sample(op, n_angles=256, sector_tan=math.tan(0.3),
                                 probes=probes, tol=1e-10)
    sector_ok = rng["sector"]["ok"]
    res_ok = all(c["ok"] for c in rng["resolvent_checks"])
    passed = sector_ok and res_ok
    return passed, (f"sector excess {rng['sector']['max_excess']:.2e}, "
                    f"{len(rng['resolvent_checks'])} resolvent probes "
                    f"{'ok' if res_ok else 'FAILED'}")


# ---------------------------------------------------------------------------
# 7. Perfect decoupling at eps = 0.
# ---------------------------------------------------------------------------

def _uniform_spec(family, m_modes=8, n=200, omega=1.0, height=1.0):
    grid = Grid1D(height, n)
    base = np.ones(n + 1, dtype=complex)
    texture = SpanwiseTexture(baseline=base, family=family,
                              L_z=2.0 * math.pi)
    return BlockSystemSpec(M=m_modes, grid=grid, texture=texture, rho=1.0,
                           omega=omega)


def criterion_7():
    spec = _uniform_spec(Cosine(eps=0.0, m0=1))
    sol = solve_direct(assemble_blocks(spec))
    mean = vec_norm(spec, sol.modes[0])
    side = max(vec_norm(spec, sol.modes[m]) for m in spec.modes if m != 0)
    passed = side <= 1e-13 * mean
    return passed, f"max offmode/mean = {side / mean:.2e}"


# ---------------------------------------------------------------------------
# 8. Sideband scaling laws and triangular reachability.
# ---------------------------------------------------------------------------

def criterion_8():
    base_sol = solve_direct(assemble_blocks(_uniform_spec(Cosine(0.0, 1))))
    u0_base = base_sol.modes[0]
    norm0 = vec_norm(base_sol.spec, u0_base)

    eps_list = np.geomspace(1e-4, 1e-2, 5)
    r_plus, r_minus, mean_dev = [], [], []
    for eps in eps_list:
        spec = _uniform_spec(Cosine(float(eps), 1))
        sol = solve_direct(assemble_blocks(spec))
        rp, rm = sideband_ratios(sol)
        r_plus.append(rp)
        r_minus.append(rm)
        mean_dev.append(vec_norm(spec, sol.modes[0] - u0_base) / norm0)
    sp = _slope(eps_list, r_plus)
    sm = _slope(eps_list, r_minus)
    s0 = _slope(eps_list, mean_dev)

    one_spec = _uniform_spec(OneSided(1e-3, 1))
    one = solve_direct(assemble_blocks(one_spec))
    down = vec_norm(one_spec, one.modes[-1]) / norm0
    drift = vec_norm(one_spec, one.modes[0] - u0_base) / norm0

    passed = (abs(sp - 1.0) <= 0.05 and abs(sm - 1.0) <= 0.05
              and abs(s0 - 2.0) <= 0.1 and down <= 1e-12 and drift <= 1e-12)
    return passed, (f"R+ slope {sp:.3f}, R- slope {sm:.3f}, mean-dev slope "
                    f"{s0:.3f}, one-sided down/drift {down:.1e}/{drift:.1e}")


# ---------------------------------------------------------------------------
# 9/10. Neumann certification test matrix.
# ---------------------------------------------------------------------------

def _test_matrix():
    """Shipped converging configurations for the series certificates."""
    configs = [
        ("cosine eps=1e-4 m0=1", Cosine(1e-4, 1)),
        ("cosine eps=3e-4 m0=1", Cosine(3e-4, 1)),
        ("onesided eps=2e-4 m0=1", OneSided(2e-4, 1)),
        ("phaseonly eps=2e-4 m0=1", PhaseOnly(2e-4, 1, band=1)),
        ("cosine eps=2e-4 m0=2", Cosine(2e-4, 2)),
    ]
    out = []
    for label, family in configs:
        spec = _uniform_spec(family, m_modes=4, n=40)
        out.append((label, spec, assemble_blocks(spec)))
    return out


def criterion_9():
    worst_gap = -math.inf
    for label, spec, blocks in _test_matrix():
        cert = smallness_certificate(blocks)
        if not cert.converges:
            return False, f"{label}: certificate unexpectedly diverges"
        direct = solve_direct(blocks)
        for order in (1, 2, 3, 4):
            approx = solve_neumann(blocks, order)
            err = block_norm(spec, {m: approx.modes[m] - direct.modes[m]
                                    for m in spec.modes})
            bound = cert.remainder_bound(order)
            worst_gap = max(worst_gap, err - bound)
            if err > bound:
                return False, (f"{label}: order {order} error {err:.2e} "
                               f"exceeds bound {bound:.2e}")
        support = verify_support(solve_neumann(blocks, 4), max_order=4,
                                 rel_tol=1e-13)
        if not support["ok"]:
            return False, f"{label}: support leaked outside reachable sets"
    return True, f"worst (error - bound) = {worst_gap:.2e} over the matrix"


def criterion_10():
    for label, spec, blocks in _test_matrix():
        report = conservative_sideband_bound(blocks)
        direct = solve_direct(blocks)
        for m, bound in report["bounds"].items():
            actual = vec_norm(spec, direct.modes[m])
            if actual > bound * (1.0 + 1e-10):
                return False, (f"{label}: |u_{m}| = {actual:.2e} exceeds "
                               f"bound {bound:.2e}")

    spec = _uniform_spec(Cosine(1e-4, 1))
    blocks = assemble_blocks(spec)
    t_direct = transfer_norm(blocks)
    t_lead = transfer_norm_leading(blocks)
    rel = max(abs(a - b) / abs(a) for a, b in zip(t_direct, t_lead))
    passed = rel <= 0.01
    return passed, f"T+- two-way relative gap {rel:.2e}"


# ---------------------------------------------------------------------------
# 11. Bessel reconstruction bound and mean-coefficient scaling.
# ---------------------------------------------------------------------------

def criterion_11():
    theta = np.linspace(0.0, 2.0 * math.pi, 64, endpoint=False)
    # The certified truncation bound can fall below the roundoff floor of
    # evaluating a ~17-term complex partial sum in doubles (measured floor
    # ~3e-16 against a 1e-17 tail at band 8); allow for that evaluation
    # noise explicitly so only truncation error is tested against the tail.
    rnd = 16.0 * np.finfo(float).eps
    worst = -math.inf
    for eps in (0.1, 0.2, 0.5):
        target = np.exp(1j * eps * np.cos(theta))
        for band in (2, 4, 8):
            err = float(np.max(np.abs(
                phase_factor_partial_sum(eps, band, theta) - target)))
            tail = bessel_tail(eps, band)
            worst = max(worst, err - tail - rnd)
            if err > tail + rnd:
                return False, (f"eps={eps}, band={band}: error {err:.2e} "
                               f"exceeds tail bound {tail:.2e} + roundoff")
    eps_small = (0.05, 0.1, 0.2, 0.4)
    slope = _slope(eps_small, [abs(bessel_j(0, e) - 1.0) for e in eps_small])
    passed = abs(slope - 2.0) <= 0.1
    return passed, (f"worst (err - tail) = {worst:.2e}, J0 deficit slope "
                    f"{slope:.3f}")


# ---------------------------------------------------------------------------
# 12. Kernel admissibility: positivity, oracle agreement, margin bound.
# ---------------------------------------------------------------------------

def criterion_12():
    rng = np.random.default_rng(7)
    min_re = math.inf
    worst_margin_gap = math.inf
    for _ in range(1000):
        n_terms = int(rng.integers(1, 5))
        terms = tuple((float(rng.uniform(1e-3, 10.0)),
                       float(10.0 ** rng.uniform(math.log10(0.05),
                                                 math.log10(20.0))))
                      for _ in range(n_terms))
        spectrum = PronySpectrum(terms=terms)
        omega = float(10.0 ** rng.uniform(-2.0, 2.0))
        mu = spectrum.complex_viscosity(omega)
        min_re = min(min_re, mu.real)
        r_min = min(r for _, r in terms)
        for r0 in (r_min, 2.0 * r_min):
            margin = spectrum.passivity_margin(omega, r0)
            # at r0 = r_min with one term the bound is an equality; the two
            # sides go through different float expressions, so normalize the
            # gap by the magnitude and leave a few-ulp allowance
            scale = max(1.0, mu.real, margin)
            worst_margin_gap = min(worst_margin_gap,
                                   (mu.real - margin) / scale)

    worst_oracle = 0.0
    for _ in range(40):
        n_terms = int(rng.integers(1, 4))
        terms = tuple((float(rng.uniform(0.1, 5.0)),
                       float(rng.uniform(0.5, 20.0)))
                      for _ in range(n_terms))
        spectrum = PronySpectrum(terms=terms)
        omega = float(rng.uniform(0.5, 5.0))
        gap = abs(spectrum.complex_viscosity(omega)
                  - laplace_quadrature(spectrum, omega))
        worst_oracle = max(worst_oracle, gap)

    rnd = 16.0 * np.finfo(float).eps
    passed = (min_re >= 0.0 and worst_margin_gap >= -rnd
              and worst_oracle <= 1e-8)
    return passed, (f"min Re mu = {min_re:.2e}, margin slack "
                    f"{worst_margin_gap:.2e}, oracle gap {worst_oracle:.2e}")


# ---------------------------------------------------------------------------
# Registry and runners.
# ---------------------------------------------------------------------------

CRITERIA = (
    (1, "Newtonian Stokes-II baseline", criterion_1),
    (2, "perturbative impedance", criterion_2),
    (3, "impedance passivity sweep", criterion_3),
    (4, "Couette transfer matrices", criterion_4),
    (5, "non-normality dichotomy", criterion_5),
    (6, "numerical-range sector", criterion_6),
    (7, "Toeplitz decoupling null", criterion_7),
    (8, "sideband scalings", criterion_8),
    (9, "Neumann certification", criterion_9),
    (10, "conservative sideband bound", criterion_10),
    (11, "Bessel reconstruction", criterion_11),
    (12, "kernel admissibility", criterion_12),
)

QUICK_SET = (1, 3, 4, 5, 7, 11, 12)


def run_criterion(number):
    """Run one criterion by number, trapping exceptions into a failure."""
    for num, title, fn in CRITERIA:
        if num == number:
            t0 = time.perf_counter()
            try:
                passed, detail = fn()
            except Exception as exc:  # a crash is a failed criterion
                passed, detail = False, f"exception: {exc!r}"
            return CriterionResult(number=num, title=title, passed=passed,
                                   detail=detail,
                                   seconds=time.perf_counter() - t0)
    raise ValueError(f"no criterion numbered {number}")


def run_suite(suite):
    if suite == "quick":
        numbers = QUICK_SET
    elif suite == "full":
        numbers = tuple(num for num, _, _ in CRITERIA)
    else:
        raise ValueError("suite must be 'quick' or 'full'")
    return [run_criterion(n) for n in numbers]
