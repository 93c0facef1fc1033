"""Oscillatory Couette flow between walls with layered phase textures.

Worked example II. The channel occupies 0 <= y <= H with a stationary
bottom wall and a top wall oscillating at complex amplitude U_w. For
piecewise-constant complex viscosity the exact solution propagates the
state X = (velocity, shear flux) through each layer with a unimodular
2x2 transfer matrix; interfaces are continuity of X. On top of the exact
layered machinery the module provides the first-order traction response
to a distributed phase defect and the dense discrete operator used by
the non-normality and numerical-range diagnostics.
"""

import cmath
from dataclasses import dataclass

import numpy as np

from .solvers1d import Grid1D, shear_wavenumber

__all__ = [
    "Layer",
    "LayerStack",
    "ExceptionalCompatibilityError",
    "transfer_matrix",
    "stack_solve",
    "profile_states",
    "tau_correction_first_order",
    "operator_matrix",
]


class ExceptionalCompatibilityError(RuntimeError):
    """Total transfer matrix has (1,2) entry at roundoff scale.

    Generic stacks never trigger this; it corresponds to the exceptional
    resonant compatibility where the wall motion decouples from the
    bottom traction and the traction map is undefined.
    """


@dataclass(frozen=True)
class Layer:
    thickness: float
    mu: complex

    def __post_init__(self):
        if self.thickness <= 0.0:
            raise ValueError("layer thickness must be positive")
        if complex(self.mu).real <= 0.0:
            raise ValueError("layer must be passive: Re mu > 0")
        object.__setattr__(self, "thickness", float(self.thickness))
        object.__setattr__(self, "mu", complex(self.mu))


@dataclass(frozen=True)
class LayerStack:
    """Ordered layers from the bottom wall up, with drive data."""

    layers: tuple
    rho: float
    omega: float
    U_w: complex

    def __post_init__(self):
        layers = tuple(self.layers)
        if not layers:
            raise ValueError("stack needs at least one layer")
        for lay in layers:
            if not isinstance(lay, Layer):
                raise TypeError("layers must be Layer instances")
        if self.rho <= 0.0 or self.omega <= 0.0:
            raise ValueError("rho and omega must be positive")
        object.__setattr__(self, "layers", layers)
        object.__setattr__(self, "U_w", complex(self.U_w))

    @property
    def H(self):
        return sum(lay.thickness for lay in self.layers)


def transfer_matrix(mu, rho, omega, delta):
    """Propagator of (u, tau) across a constant-viscosity layer.

    T = cosh(k d) I + (sinh(k d)/k) B with B = [[0, 1/mu], [i omega rho, 0]]
    and k^2 = i omega rho / mu. B is traceless, so det T = 1 exactly; the
    closed form is branch-free because cosh and sinh/k are even in k.
    """
    mu = complex(mu)
    if mu.real <= 0.0:
        raise ValueError("transfer matrix requires Re mu > 0")
    if delta < 0.0:
        raise ValueError("delta must be nonnegative")
    k = shear_wavenumber(omega, rho, mu)
    z = k * delta
    ch = cmath.cosh(z)
    sh_over_k = cmath.sinh(z) / k
    return np.array(
        [[ch, sh_over_k / mu],
         [1j * omega * rho * sh_over_k, ch]],
        dtype=complex,
    )


def _total_transfer(stack):
    total = np.eye(2, dtype=complex)
    for lay in stack.layers:
        total = transfer_matrix(lay.mu, stack.rho, stack.omega,
                                lay.thickness) @ total
    return total


def stack_solve(stack):
    """Exact bottom traction and interface states for a layered channel.

    The bottom state is X(0) = (0, tau0) with tau0 = U_w / T_12 of the
    total transfer matrix; propagating it upward must reproduce the wall
    velocity at the top, and that closure is checked to 1e-12 relative.

    Returns
    -------
    dict with keys ``tau_bottom``, ``interfaces`` (heights including both
    walls), ``states`` (2 x n_interfaces array of (u, tau) columns), and
    ``top_mismatch``.
    """
    total = _total_transfer(stack)
    scale = float(np.max(np.abs(total)))
    if abs(total[0, 1]) < 1e-14 * scale:
        raise ExceptionalCompatibilityError(
            "traction map undefined: T_12 vanishes for this stack")
    tau0 = stack.U_w / total[0, 1]
    state = np.array([0.0, tau0], dtype=complex)
    heights = [0.0]
    states = [state.copy()]
    y = 0.0
    for lay in stack.layers:
        state = transfer_matrix(lay.mu, stack.rho, stack.omega,
                                lay.thickness) @ state
        y += lay.thickness
        heights.append(y)
        states.append(state.copy())
    mismatch = abs(state[0] - stack.U_w)
    if mismatch > 1e-12 * abs(stack.U_w):
        raise ExceptionalCompatibilityError(
            f"top-wall closure failed: |u(H) - U_w| = {mismatch:.3e}")
    return {
        "tau_bottom": complex(tau0),
        "interfaces": np.array(heights),
        "states": np.column_stack(states),
        "top_mismatch": mismatch,
    }


def profile_states(stack, per_layer=64):
    """Dense (y, u, tau) profile by in-layer propagation from below."""
    result = stack_solve(stack)
    ys = []
    us = []
    taus = []
    y0 = 0.0
    for j, lay in enumerate(stack.layers):
        base = result["states"][:, j]
        local = np.linspace(0.0, lay.thickness, per_layer, endpoint=False)
        for d in local:
            state = transfer_matrix(lay.mu, stack.rho, stack.omega, d) @ base
            ys.append(y0 + d)
            us.append(state[0])
            taus.append(state[1])
        y0 += lay.thickness
    ys.append(y0)
    us.append(result["states"][0, -1])
    taus.append(result["states"][1, -1])
    return np.array(ys), np.array(us, dtype=complex), np.array(taus, dtype=complex)


def tau_correction_first_order(mu_bar, rho, omega, H, U_w, chi_samples):
    """First-order bottom-traction response to a phase defect chi.

    For viscosity mu_bar * exp(i eps chi(y)) the derivative of the bottom
    traction with respect to eps at eps = 0 is

        mu_bar * (i k / sinh(k H)) * integral_0^H cosh(k (H - s)) chi(s)
                                               u0'(s) ds,

    with u0'(s) = U_w k cosh(k s) / sinh(k H) the untextured shear.
    ``chi_samples`` are uniform node samples on [0, H] including both
    endpoints; the integral uses composite trapezoid, so expect O(h^2)
    quadrature error for smooth chi.
    """
    mu_bar = complex(mu_bar)
    if mu_bar.real <= 0.0:
        raise ValueError("Re mu_bar must be positive")
    chi = np.asarray(chi_samples, dtype=float)
    if chi.ndim != 1 or chi.size < 2:
        raise ValueError("chi_samples must be a 1d array with >= 2 points")
    k = shear_wavenumber(omega, rho, mu_bar)
    s = np.linspace(0.0, H, chi.size)
    sinh_kh = cmath.sinh(k * H)
    integrand = np.cosh(k * (H - s)) * chi * (U_w * k * np.cosh(k * s) / sinh_kh)
    integral = np.trapezoid(integrand, s)
    return complex(mu_bar * (1j * k / sinh_kh) * integral)


def operator_matrix(texture, grid, rho, omega):
    """Dense interior discretization of u -> -(mu(y) u')' on the grid.

    Homogeneous Dirichlet at both walls; the returned block acts on the
    N - 1 interior node values. With the uniform spacing the plain
    conjugate transpose is the h-weighted discrete adjoint, so commutator
    and norm diagnostics downstream need no extra weighting.

    Returns
    -------
    dict with ``A_phi`` (stiffness block), ``L`` (A_phi + i omega rho I),
    and ``h``.
    """
    if not isinstance(grid, Grid1D):
        raise TypeError("grid must be a Grid1D")
    if hasattr(texture, "mu_star"):
        mu = np.asarray(texture.mu_star(grid.midpoints), dtype=complex)
    else:
        mu = np.asarray(texture, dtype=complex)
        if mu.shape != grid.midpoints.shape:
            raise ValueError("midpoint viscosity array must have N samples")
    n = grid.N - 1
    h2 = grid.h * grid.h
    a = np.zeros((n, n), dtype=complex)
    diag = (mu[:-1] + mu[1:]) / h2
    a[np.arange(n), np.arange(n)] = diag
    off = -mu[1:-1] / h2
    a[np.arange(n - 1), np.arange(1, n)] = off
    a[np.arange(1, n), np.arange(n - 1)] = off
    return {"A_phi": a, "L": a + 1j * omega * rho * np.eye(n), "h": grid.h}
