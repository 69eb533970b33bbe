"""Classical Routh reduction of cyclic mechanical Lagrangians.

Covers the block-diagonal kinetic case: L = 1/2 xdot^T M_xx(x) xdot
+ 1/2 M_theta(x) thetadot^2 - V(x) with theta cyclic. Velocity-coupled
kinetic energy (x-theta cross terms) is rejected at construction.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from . import _fd
from .hybrid import HybridTrajectory, as_state

INERTIA_FLOOR = 1e-9


class SingularInertiaError(RuntimeError):
    """The cyclic inertia dropped below the singularity floor; reduction breaks down."""


@dataclass(frozen=True)
class MechanicalSystem:
    """Mass-matrix + potential description of a cyclic Lagrangian.

    mass_shape(x) is the symmetric positive-definite shape-space block,
    inertia_cyclic(x) the (scalar) cyclic inertia, potential(x) the
    potential energy. None of them may depend on the cyclic coordinate;
    cyclicity is structural because theta is simply not an argument.
    """

    shape_dim: int
    mass_shape: Callable[[np.ndarray], np.ndarray]
    inertia_cyclic: Callable[[np.ndarray], float]
    potential: Callable[[np.ndarray], float]
    names: tuple = ()

    def __post_init__(self):
        if self.shape_dim < 1:
            raise ValueError("shape_dim must be positive")

    def cyclic_inertia(self, x) -> float:
        val = float(self.inertia_cyclic(np.asarray(x, dtype=float)))
        if val < INERTIA_FLOOR:
            raise SingularInertiaError(
                f"cyclic inertia {val:.3e} below {INERTIA_FLOOR:g}; "
                "the reduction is singular here")
        return val


@dataclass(frozen=True)
class RouthianSystem:
    """A mechanical system with the cyclic momentum pinned to mu."""

    base: MechanicalSystem
    mu: float
    # Model-supplied closed-form vector field; the generic finite-difference
    # engine is used when absent.
    analytic_vector_field: Optional[Callable] = None


def momentum(sys: MechanicalSystem, x, xdot, thetadot: float) -> float:
    """Generalized momentum conjugate to the cyclic coordinate."""
    del xdot  # no velocity coupling in the block-diagonal case
    return sys.cyclic_inertia(x) * float(thetadot)


def effective_potential(sys: RouthianSystem, x) -> float:
    """V(x) + mu^2 / (2 M_theta(x)): the potential governing the reduced motion."""
    x = np.asarray(x, dtype=float)
    return float(sys.base.potential(x)) + sys.mu ** 2 / (2.0 * sys.base.cyclic_inertia(x))


def routhian_eval(sys: RouthianSystem, x, xdot) -> float:
    """The Routhian: shape kinetic energy minus the effective potential."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(xdot, dtype=float)
    M = np.asarray(sys.base.mass_shape(x), dtype=float)
    return 0.5 * float(v @ M @ v) - effective_potential(sys, x)


def reduced_energy(sys: RouthianSystem, state) -> float:
    """Conserved energy of the reduced flow: kinetic plus effective potential."""
    s = as_state(state)
    d = sys.base.shape_dim
    x, v = s[:d], s[d:]
    M = np.asarray(sys.base.mass_shape(x), dtype=float)
    return 0.5 * float(v @ M @ v) + effective_potential(sys, x)


def _generic_field(sys: RouthianSystem):
    base = sys.base
    d = base.shape_dim

    def mass(x):
        M = np.asarray(base.mass_shape(x), dtype=float)
        if M.shape != (d, d):
            raise ValueError(f"mass_shape must return a {d}x{d} matrix")
        return M

    def field(state):
        s = as_state(state)
        x, v = s[:d], s[d:]
        M = mass(x)
        grad_veff = _fd.gradient(lambda z: effective_potential(sys, z), x)
        # dM[a, b, c] = d M_ab / d x_c by central differences.
        h = _fd.steps(x)
        dM = np.empty((d, d, d))
        for c in range(d):
            e = np.zeros(d)
            e[c] = h[c]
            dM[:, :, c] = (mass(x + e) - mass(x - e)) / (2.0 * h[c])
        mdot_v = np.einsum("abc,c,b->a", dM, v, v)
        quad = 0.5 * np.einsum("bca,b,c->a", dM, v, v)
        try:
            acc = np.linalg.solve(M, quad - mdot_v - grad_veff)
        except np.linalg.LinAlgError as exc:
            raise SingularInertiaError(f"shape mass matrix singular at x={x}") from exc
        return np.concatenate([v, acc])

    return field


def routh_vector_field(sys: RouthianSystem, use_analytic: bool = True):
    """First-order vector field of the Routh equations on the reduced tangent space.

    With use_analytic=False the generic finite-difference engine is returned
    even when the model supplies a closed form (used for cross-validation).
    """
    if use_analytic and sys.analytic_vector_field is not None:
        return sys.analytic_vector_field
    return _generic_field(sys)


def momentum_sequence(mu0: float, impacts: Sequence, transition) -> list:
    """Per-segment momentum values mu_0, mu_1, ... across the given impacts.

    transition(mu, event) supplies the model's momentum rule at impact
    (identity for momentum-preserving resets).
    """
    mus = [float(mu0)]
    for event in impacts:
        mus.append(float(transition(mus[-1], event)))
    return mus


def reconstruct_cyclic(
    sys: RouthianSystem,
    traj: HybridTrajectory,
    theta0: float,
    mus: Optional[Sequence[float]] = None,
    theta_jump=None,
    tol: float = 1e-10,
):
    """Lift a reduced trajectory back to the cyclic coordinate.

    Integrates thetadot = mu_i / M_theta(x(t)) along each smooth segment,
    applying the model's theta jump (default: continuity) at impacts.
    Returns a list of (t, theta) arrays matching traj.segments.
    """
    d = sys.base.shape_dim
    if mus is None:
        mus = [sys.mu] * len(traj.segments)
    if len(mus) < len(traj.segments):
        raise ValueError(
            f"need a momentum value per segment: got {len(mus)} for "
            f"{len(traj.segments)} segments")

    out = []
    theta = float(theta0)
    for i, seg in enumerate(traj.segments):
        mu_i = float(mus[i])
        rhs = lambda t, th: [mu_i / sys.base.cyclic_inertia(
            np.asarray(seg.dense(t), dtype=float)[:d])]
        if seg.t[-1] > seg.t[0]:
            sol = solve_ivp(rhs, (seg.t[0], seg.t[-1]), [theta],
                            method="RK45", rtol=tol, atol=tol, t_eval=seg.t)
            thetas = sol.y[0]
        else:
            thetas = np.array([theta])
        out.append((seg.t.copy(), thetas))
        theta = float(thetas[-1])
        if i < len(traj.segments) - 1 and theta_jump is not None:
            theta = float(theta_jump(theta))
    return out
