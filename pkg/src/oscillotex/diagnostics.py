"""Operator and signature diagnostics for textured oscillatory shear.

Gains, non-normality, numerical-range geometry, pseudospectra, sideband
observables, wall-traction Fourier signatures, and corner-local field
functionals. Everything here consumes discrete operators or solved mode
fields produced elsewhere; nothing assembles physics.

Norm discipline: all operator norms are weighted 2-norms. An operator is
always conjugated by the square root of its diagonal weight before any
SVD, so reported gains are inner-product honest; with uniform weights
the conjugation is the identity, but it is applied unconditionally
rather than special-cased.
"""

import math
from dataclasses import dataclass

import numpy as np

from .toeplitz import resolvent_block, vec_norm

__all__ = [
    "OperatorHandle",
    "SignatureRecord",
    "SIGNATURE_CSV_HEADER",
    "PSEUDOSPECTRUM_CSV_HEADER",
    "resolvent_gain",
    "dissipation_weighted_gain",
    "nonnormality_metric",
    "numerical_range_sample",
    "pseudospectrum_grid",
    "sideband_ratios",
    "spanwise_energy_fraction",
    "transfer_norm",
    "transfer_norm_leading",
    "modal_wall_flux",
    "traction_signature",
    "unwrap_sweep",
    "corner_functionals",
]


@dataclass(frozen=True)
class OperatorHandle:
    """Dense matrix plus the diagonal weights of its inner product."""

    matrix: np.ndarray
    norm_weight: np.ndarray
    label: str = ""

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("matrix must be square")
        w = np.asarray(self.norm_weight, dtype=float)
        if w.shape != (m.shape[0],):
            raise ValueError("norm_weight must match the matrix dimension")
        if np.any(w <= 0.0):
            raise ValueError("weights must be strictly positive")
        m = m.copy()
        w = w.copy()
        m.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "norm_weight", w)

    @property
    def n(self):
        return self.matrix.shape[0]

    def weighted(self):
        """W^{1/2} A W^{-1/2}: the matrix in the orthonormalized basis."""
        s = np.sqrt(self.norm_weight)
        return (s[:, None] * self.matrix) / s[None, :]


def resolvent_gain(op):
    """Largest singular value of op^{-1} in the weighted norm.

    Computed as 1/sigma_min of the weighted matrix; a singular operator
    returns the infinite-gain sentinel math.inf instead of raising.
    """
    sigma = np.linalg.svd(op.weighted(), compute_uv=False)
    smallest = float(sigma[-1])
    if smallest == 0.0:
        return math.inf
    return 1.0 / smallest


def dissipation_weighted_gain(op, d_op_matrix, d_weight):
    """Largest singular value of (D o op^{-1}) between weighted spaces.

    ``d_op_matrix`` maps the operator's solution space to a derivative
    space (possibly rectangular); ``d_weight`` carries the derivative
    space's quadrature weights. Returns sigma_max of
    W_D^{1/2} D A^{-1} W^{-1/2}; a singular A yields math.inf.
    """
    d = np.asarray(d_op_matrix, dtype=complex)
    wd = np.asarray(d_weight, dtype=float)
    if d.shape != (wd.size, op.n):
        raise ValueError("derivative map shape incompatible with operator")
    if np.any(wd <= 0.0):
        raise ValueError("derivative weights must be strictly positive")
    s_in = np.sqrt(op.norm_weight)
    try:
        x = np.linalg.solve(op.matrix, np.diag(1.0 / s_in))
    except np.linalg.LinAlgError:
        return math.inf
    mapped = (np.sqrt(wd)[:, None] * d) @ x
    return float(np.linalg.svd(mapped, compute_uv=False)[0])


def nonnormality_metric(op):
    """Normalized commutator size ||A*A - AA*|| / ||A||^2, weighted adjoint.

    Zero exactly for normal operators; scale-free (invariant under
    A -> cA) and invariant under weighted-unitary basis changes, which is
    what makes it a fair texture-to-texture comparison number.
    """
    b = op.weighted()
    bh = b.conj().T
    comm = bh @ b - b @ bh
    top = float(np.linalg.svd(comm, compute_uv=False)[0])
    scale = float(np.linalg.svd(b, compute_uv=False)[0])
    if scale == 0.0:
        return 0.0
    return top / (scale * scale)


def numerical_range_sample(op, n_angles=256, sector_tan=None, probes=(),
                           tol=1e-10):
    """Supporting-point sample of the numerical range with checks.

    For each rotation angle theta the extreme eigenpair of the Hermitian
    part of e^{i theta} A yields a boundary support value
    c(theta) = max Re(e^{i theta} z) over the range, and the extreme
    eigenvector's Rayleigh quotient is an attained point of the range.

    The optional sector check asserts |Im z| <= sector_tan * Re z + tol
    at every sampled point. Each probe lambda is tested against the
    resolvent bound in its certified form: the support function gives the
    lower bound d(lambda) = max_theta (Re(e^{i theta} lambda) - c(theta))
    on the distance to the range, and the check asserts
    sigma_min(A - lambda) >= d(lambda), i.e. the resolvent norm is at
    most 1/d. Sampling the hull more finely can only sharpen d, never
    produce a spurious failure.

    Returns a dict with ``points``, ``support_values``, ``angles``,
    ``sector`` (or None), and ``resolvent_checks``.
    """
    if n_angles < 8:
        raise ValueError("n_angles must be >= 8")
    b = op.weighted()
    angles = np.linspace(0.0, 2.0 * math.pi, n_angles, endpoint=False)
    points = np.empty(n_angles, dtype=complex)
    support = np.empty(n_angles, dtype=float)
    for i, theta in enumerate(angles):
        rotated = np.exp(1j * theta) * b
        herm = 0.5 * (rotated + rotated.conj().T)
        vals, vecs = np.linalg.eigh(herm)
        v = vecs[:, -1]
        support[i] = float(vals[-1])
        points[i] = complex(np.vdot(v, b @ v))

    sector = None
    if sector_tan is not None:
        excess = np.abs(points.imag) - sector_tan * points.real
        sector = {
            "tan_bound": float(sector_tan),
            "max_excess": float(np.max(excess)),
            "ok": bool(np.max(excess) <= tol),
        }

    checks = []
    eye = np.eye(op.n)
    for lam in probes:
        lam = complex(lam)
        dist_lower = float(np.max(np.cos(angles) * lam.real
                                  - np.sin(angles) * lam.imag - support))
        # Re(e^{i theta} lam) = cos(theta) Re lam - sin(theta) Im lam
        dist_lower = max(dist_lower, 0.0)
        sigma = float(np.linalg.svd(b - lam * eye, compute_uv=False)[-1])
        checks.append({
            "lambda": lam,
            "sigma_min": sigma,
            "dist_lower_bound": dist_lower,
            "ok": bool(sigma >= dist_lower - tol),
        })
    return {"angles": angles, "points": points, "support_values": support,
            "sector": sector, "resolvent_checks": checks}


PSEUDOSPECTRUM_CSV_HEADER = ("re_lambda", "im_lambda", "sigma_min")


def pseudospectrum_grid(op, lambdas):
    """sigma_min(A - lambda I) in the weighted norm over a grid of lambda.

    ``lambdas`` is any complex array; the result has the same shape and
    is filled in deterministic row-major order.
    """
    b = op.weighted()
    eye = np.eye(op.n)
    lam = np.asarray(lambdas, dtype=complex)
    out = np.empty(lam.shape, dtype=float)
    flat_in = lam.ravel()
    flat_out = out.ravel()
    for i in range(flat_in.size):
        sigma = np.linalg.svd(b - flat_in[i] * eye, compute_uv=False)
        flat_out[i] = float(sigma[-1])
    return out


# ---------------------------------------------------------------------------
# Mode-solution observables.
# ---------------------------------------------------------------------------

def _mode_measure(sol, m, norm):
    spec = sol.spec
    v = sol.modes[m]
    if norm == "l2":
        return vec_norm(spec, v)
    if norm == "energy":
        h = spec.grid.h
        padded = np.concatenate(([0.0], v, [0.0]))
        dv = np.diff(padded) / h
        kappa = spec.wavenumber(m)
        return math.sqrt(h * float(np.vdot(dv, dv).real)
                         + kappa * kappa * h * float(np.vdot(v, v).real))
    raise ValueError("norm must be 'l2' or 'energy'")


def sideband_ratios(sol, norm="l2"):
    """(R_plus, R_minus): first-sideband to mean-mode norm ratios."""
    m0 = sol.spec.texture.m0
    mean = _mode_measure(sol, 0, norm)
    if mean == 0.0:
        raise ValueError("mean mode vanishes: sideband ratios undefined")
    return (_mode_measure(sol, m0, norm) / mean,
            _mode_measure(sol, -m0, norm) / mean)


def spanwise_energy_fraction(sol):
    """Fraction of solution energy carried by nonzero spanwise modes."""
    total = 0.0
    off = 0.0
    for m in sol.spec.modes:
        e = vec_norm(sol.spec, sol.modes[m]) ** 2
        total += e
        if m != 0:
            off += e
    if total == 0.0:
        raise ValueError("all-zero solution: energy fraction undefined")
    return off / total


def transfer_norm(blocks):
    """(T_plus, T_minus): norms of the (+-m0, 0) blocks of the inverse.

    The uniform grid weight conjugation cancels for blocks mapping one
    mode's interior space to another's, so the weighted norm is the plain
    spectral norm of the dense inverse block.
    """
    m0 = blocks.spec.texture.m0
    if not blocks.offsets:
        return 0.0, 0.0
    t_plus = float(np.linalg.svd(resolvent_block(blocks, m0, 0),
                                 compute_uv=False)[0])
    t_minus = float(np.linalg.svd(resolvent_block(blocks, -m0, 0),
                                  compute_uv=False)[0])
    return t_plus, t_minus


def transfer_norm_leading(blocks):
    """Leading-order product formula ||L_{+-m0}^{-1} K L_0^{-1}||.

    First term of the Neumann expansion of the inverse's off-diagonal
    block; agrees with ``transfer_norm`` to O(eps) relative.
    """
    spec = blocks.spec
    m0 = spec.texture.m0
    if not blocks.offsets:
        return 0.0, 0.0
    l0_inv = np.linalg.inv(blocks.diag_dense(0))
    out = []
    for sign in (1, -1):
        m = sign * m0
        if m in blocks.offsets:
            k = blocks.coupling_dense(m, m)
            mat = np.linalg.solve(blocks.diag_dense(m), k) @ l0_inv
            out.append(float(np.linalg.svd(mat, compute_uv=False)[0]))
        else:
            out.append(0.0)
    return tuple(out)


def modal_wall_flux(sol, wall="bottom"):
    """Per-mode wall shear flux, mixed through the texture coefficients.

    tau_m = sum_n mu_hat_n(wall face) * (wall derivative of u_{m-n}),
    with the one-sided discrete derivative at the wall face and the
    Dirichlet zeros included. Returns {m: complex} over the retained
    modes.
    """
    spec = sol.spec
    tex = spec.texture
    base = tex.baseline
    h = spec.grid.h
    if wall == "bottom":
        face_value = 0.5 * (base[0] + base[1])
        def wall_derivative(v):
            return v[0] / h
    elif wall == "top":
        face_value = 0.5 * (base[-2] + base[-1])
        def wall_derivative(v):
            return -v[-1] / h
    else:
        raise ValueError("wall must be 'bottom' or 'top'")

    offsets, diag_extra = tex.coupling_terms()
    weights = dict(offsets)
    weights[0] = weights.get(0, 0.0) + 1.0 + complex(diag_extra)

    out = {}
    for m in spec.modes:
        total = 0.0j
        for n, w in weights.items():
            src = m - n
            if -spec.M <= src <= spec.M:
                total += w * face_value * wall_derivative(sol.modes[src])
        out[m] = total
    return out


def traction_signature(sol, wall="bottom"):
    """Wall-traction Fourier signature (A_plus, A_minus, Theta_plus, Theta_minus).

    Amplitudes are relative to the mean-mode traction, phases are
    principal values of tau_{+-m0}/tau_0 under the e^{i omega t}
    harmonic convention; sweep-level unwrapping is done by
    ``unwrap_sweep``.
    """
    taus = modal_wall_flux(sol, wall)
    tau0 = taus[0]
    if tau0 == 0.0:
        raise ValueError("mean-mode wall traction vanishes")
    m0 = sol.spec.texture.m0
    rp = taus.get(m0, 0.0) / tau0
    rm = taus.get(-m0, 0.0) / tau0
    return (abs(rp), abs(rm),
            float(np.angle(rp)) if rp != 0 else 0.0,
            float(np.angle(rm)) if rm != 0 else 0.0)


def unwrap_sweep(phases):
    """Nearest-branch phase continuation along a frequency sweep.

    The first entry is the reference branch; each subsequent phase is
    shifted by the multiple of 2 pi that brings it nearest its
    predecessor. Matches numpy.unwrap on well-sampled sweeps and is the
    documented reporting convention for traction phases.
    """
    out = []
    prev = None
    for p in phases:
        p = float(p)
        if prev is not None:
            p -= 2.0 * math.pi * round((p - prev) / (2.0 * math.pi))
        out.append(p)
        prev = p
    return out


# ---------------------------------------------------------------------------
# Corner-local functionals on ingested 2D fields.
# ---------------------------------------------------------------------------

def _cell_center_gradients(f, h):
    """d/dx and d/dy at cell centers from the four corner nodes.

    Arrays are indexed [iy, ix] with x = ix h, y = iy h.
    """
    dx = (f[1:, 1:] + f[:-1, 1:] - f[1:, :-1] - f[:-1, :-1]) / (2.0 * h)
    dy = (f[1:, 1:] + f[1:, :-1] - f[:-1, 1:] - f[:-1, :-1]) / (2.0 * h)
    return dx, dy


def corner_functionals(vx, vy, h, center, radii, phi=None):
    """Disc-masked strain, enstrophy, and phase-overlap functionals.

    Parameters
    ----------
    vx, vy : ndarray
        Complex velocity components on a uniform node grid, indexed
        [iy, ix] with spacing ``h`` in both directions.
    center : (x, y) pair
        Disc center in physical coordinates.
    radii : sequence of float, ascending
        Disc radii; radii reaching past the grid are evaluated on the
        clipped intersection and flagged.
    phi : ndarray or None
        Viscosity phase samples on the same nodes; required for the
        overlap functional, which is reported as None without it.

    Returns
    -------
    dict with ``radii``, ``S`` (masked L2 norm of the symmetric
    gradient), ``E`` (masked enstrophy integral), ``O_phi`` (masked
    integral of |grad phi| |D|), and ``clipped``.

    All three use midpoint quadrature at cell centers, so each is
    monotone nondecreasing in r by disc nesting.
    """
    vx = np.asarray(vx, dtype=complex)
    vy = np.asarray(vy, dtype=complex)
    if vx.shape != vy.shape or vx.ndim != 2:
        raise ValueError("vx and vy must be matching 2d node arrays")
    radii = [float(r) for r in radii]
    if any(b < a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be ascending")

    dvx_dx, dvx_dy = _cell_center_gradients(vx, h)
    dvy_dx, dvy_dy = _cell_center_gradients(vy, h)
    dxx = dvx_dx
    dyy = dvy_dy
    dxy = 0.5 * (dvx_dy + dvy_dx)
    strain_sq = (np.abs(dxx) ** 2 + np.abs(dyy) ** 2
                 + 2.0 * np.abs(dxy) ** 2)
    vorticity = dvy_dx - dvx_dy
    enstrophy = np.abs(vorticity) ** 2

    overlap = None
    if phi is not None:
        phi = np.asarray(phi, dtype=float)
        if phi.shape != vx.shape:
            raise ValueError("phi must match the velocity grid")
        gpx, gpy = _cell_center_gradients(phi, h)
        overlap = np.sqrt(gpx * gpx + gpy * gpy) * np.sqrt(strain_sq)

    ny, nx = strain_sq.shape
    xc = (np.arange(nx) + 0.5) * h
    yc = (np.arange(ny) + 0.5) * h
    xg, yg = np.meshgrid(xc, yc)
    dist = np.hypot(xg - center[0], yg - center[1])

    x_extent = max(center[0], nx * h - center[0])
    y_extent = max(center[1], ny * h - center[1])
    max_r = math.hypot(x_extent, y_extent)

    s_vals, e_vals, o_vals = [], [], []
    clipped = False
    cell = h * h
    for r in radii:
        if r > max_r:
            clipped = True
        mask = dist <= r
        s_vals.append(math.sqrt(float(np.sum(strain_sq[mask])) * cell))
        e_vals.append(float(np.sum(enstrophy[mask])) * cell)
        o_vals.append(float(np.sum(overlap[mask])) * cell
                      if overlap is not None else None)
    return {"radii": radii, "S": s_vals, "E": e_vals,
            "O_phi": o_vals if phi is not None else None,
            "clipped": clipped}


# ---------------------------------------------------------------------------
# Signature records.
# ---------------------------------------------------------------------------

SIGNATURE_CSV_HEADER = (
    "omega", "R_plus", "R_minus", "Phi_M", "T_plus", "T_minus",
    "A_plus", "A_minus", "Theta_plus", "Theta_minus", "Delta_nn",
    "ReZ", "ImZ", "power_re_res", "power_im_res",
)


@dataclass(frozen=True)
class SignatureRecord:
    """One frequency's worth of the shipped observable suite."""

    omega: float
    R_plus: float
    R_minus: float
    Phi_M: float
    T_plus: float
    T_minus: float
    A_plus: float
    A_minus: float
    Theta_plus: float
    Theta_minus: float
    Delta_nn: float
    Z_w: complex = None
    power_re_res: float = 0.0
    power_im_res: float = 0.0

    def __post_init__(self):
        values = [self.omega, self.R_plus, self.R_minus, self.Phi_M,
                  self.T_plus, self.T_minus, self.A_plus, self.A_minus,
                  self.Theta_plus, self.Theta_minus, self.Delta_nn,
                  self.power_re_res, self.power_im_res]
        if not all(math.isfinite(float(v)) for v in values):
            raise ValueError("signature entries must be finite")
        if not 0.0 <= self.Phi_M <= 1.0:
            raise ValueError("Phi_M must lie in [0, 1]")

    def to_row(self):
        z = self.Z_w if self.Z_w is not None else 0.0j
        return (self.omega, self.R_plus, self.R_minus, self.Phi_M,
                self.T_plus, self.T_minus, self.A_plus, self.A_minus,
                self.Theta_plus, self.Theta_minus, self.Delta_nn,
                z.real, z.imag, self.power_re_res, self.power_im_res)
