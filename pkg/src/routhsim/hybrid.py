"""Execution engine for simple hybrid systems.

Integrates a smooth vector field with an adaptive RK5(4) scheme, detects
directional guard crossings on the dense output, refines event times by
bracketing root-finding, applies the reset map, and enforces anti-Zeno and
post-reset admissibility conditions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from . import _fd

EVENT_TOL = 1e-10
TANGENT_TOL = 1e-8
DEFAULT_TOL = 1e-10
_SUBSTEPS = 8  # guard samples per integrator step when scanning for sign changes

RISING = "rising"
FALLING = "falling"
BOTH = "both"
_DIRECTIONS = (RISING, FALLING, BOTH)


class HybridError(RuntimeError):
    """Base class for hybrid-execution failures."""


class IntegrationError(HybridError):
    """The underlying ODE solver failed (step-size underflow, blow-up)."""


class TangentialCrossingError(HybridError):
    """Guard derivative vanishes at the bracketed root; crossing is grazing."""


class AdmissibilityError(HybridError):
    """Post-reset state drives back into the guard."""


class ZenoError(HybridError):
    """Impacts accumulate faster than the minimum inter-impact time allows."""


class MaxImpactsError(HybridError):
    """The impact budget was exhausted before the final time."""


class NoImpactError(HybridError):
    """The flow never reached the guard within the allotted horizon."""


def as_state(x) -> np.ndarray:
    """Validate and normalize a state vector: finite entries, even dimension."""
    s = np.asarray(x, dtype=float)
    if s.ndim != 1 or s.size == 0 or s.size % 2 != 0:
        raise ValueError(f"state must be a 1-D vector of even length, got shape {s.shape}")
    if not np.all(np.isfinite(s)):
        raise ValueError("state contains non-finite entries")
    return s


@dataclass(frozen=True)
class HybridSystemSpec:
    """A vector field, guard function, reset map and event policy.

    guard_direction selects the sign of d(guard)/dt at which crossings
    trigger; 'both' accepts either sign.
    """

    vector_field: Callable[[np.ndarray], np.ndarray]
    guard: Callable[[np.ndarray], float]
    reset: Callable[[np.ndarray], np.ndarray]
    guard_direction: str = RISING
    min_inter_impact: float = 1e-6
    max_impacts: int = 10_000
    event_tol: float = EVENT_TOL

    def __post_init__(self):
        if self.guard_direction not in _DIRECTIONS:
            raise ValueError(f"guard_direction must be one of {_DIRECTIONS}")
        if self.min_inter_impact <= 0:
            raise ValueError("min_inter_impact must be positive")
        if self.max_impacts < 1:
            raise ValueError("max_impacts must be a positive integer")


@dataclass(frozen=True)
class ImpactEvent:
    """A refined guard crossing: pre state on the guard, post state after reset."""

    time: float
    pre_state: np.ndarray
    post_state: Optional[np.ndarray]
    guard_residual: float


@dataclass(frozen=True)
class Segment:
    """Samples of one smooth arc: integrator steps plus the exact event time."""

    t: np.ndarray          # shape (k,)
    y: np.ndarray          # shape (k, dim), rows are states
    dense: object          # scipy OdeSolution over [t[0], t[-1]]


@dataclass(frozen=True)
class HybridTrajectory:
    segments: tuple
    impacts: tuple
    t0: float
    tf: float

    def state_at(self, t: float) -> np.ndarray:
        """Evaluate the trajectory at time t (right-continuous at impacts)."""
        for seg in self.segments:
            if seg.t[0] <= t <= seg.t[-1]:
                return np.asarray(seg.dense(t), dtype=float)
        raise ValueError(f"t={t} outside [{self.t0}, {self.tf}]")


def guard_rate(spec: HybridSystemSpec, s: np.ndarray) -> float:
    """d(guard)/dt along the flow, with the guard gradient by central differences."""
    grad = _fd.gradient(spec.guard, s)
    return float(grad @ np.asarray(spec.vector_field(s), dtype=float))


def _wanted_crossing(direction: str, g0: float, g1: float) -> bool:
    if direction == RISING:
        return g0 < 0.0 <= g1
    if direction == FALLING:
        return g0 > 0.0 >= g1
    return (g0 < 0.0 <= g1) or (g0 > 0.0 >= g1)


def integrate_segment(
    spec: HybridSystemSpec,
    start,
    t_start: float,
    t_max: float,
    tol: float = DEFAULT_TOL,
):
    """Flow from `start` until t_max or the first directional guard crossing.

    Returns (Segment, ImpactEvent or None). The event's post_state is left
    unset; callers pass the event through apply_reset. An event time is
    refined on the dense output until |guard| <= spec.event_tol.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    y0 = as_state(start)
    if t_max <= t_start:
        raise ValueError("t_max must exceed t_start")

    f = lambda t, y: np.asarray(spec.vector_field(y), dtype=float)
    sol = solve_ivp(f, (t_start, t_max), y0, method="RK45",
                    rtol=tol, atol=tol, dense_output=True)
    if not sol.success:
        raise IntegrationError(f"integrator failed: {sol.message}")

    # Scan a refinement of the accepted steps for guard sign changes.
    knots = sol.t
    grids = [np.linspace(knots[i], knots[i + 1], _SUBSTEPS + 1)
             for i in range(len(knots) - 1)]
    t_fine = np.unique(np.concatenate(grids)) if grids else knots
    g_fine = np.array([spec.guard(sol.sol(t)) for t in t_fine])

    # If the segment starts on the guard (post-reset case), skip the leading
    # on-guard samples so the departure is not mistaken for a crossing.
    i0 = 0
    if abs(g_fine[0]) <= spec.event_tol:
        while i0 + 1 < len(t_fine) and abs(g_fine[i0]) <= spec.event_tol:
            i0 += 1

    event = None
    for i in range(i0, len(t_fine) - 1):
        if not _wanted_crossing(spec.guard_direction, g_fine[i], g_fine[i + 1]):
            continue
        gfun = lambda t: float(spec.guard(sol.sol(t)))
        if g_fine[i + 1] == 0.0:
            t_event = float(t_fine[i + 1])
        else:
            t_event = float(brentq(gfun, t_fine[i], t_fine[i + 1],
                                   xtol=1e-14, rtol=8.9e-16))
        pre = np.asarray(sol.sol(t_event), dtype=float)
        residual = abs(float(spec.guard(pre)))
        if residual > spec.event_tol:
            raise IntegrationError(
                f"event refinement stalled: |guard| = {residual:.3e} "
                f"> {spec.event_tol:.3e}")
        rate = guard_rate(spec, pre)
        if abs(rate) < TANGENT_TOL:
            raise TangentialCrossingError(
                f"guard derivative {rate:.3e} at t={t_event:.6g}; "
                "tangential crossing is not resolvable")
        event = ImpactEvent(time=t_event, pre_state=pre, post_state=None,
                            guard_residual=residual)
        break

    if event is None:
        t_grid = sol.t
        y_grid = sol.y.T
    else:
        keep = sol.t < event.time
        t_grid = np.append(sol.t[keep], event.time)
        y_grid = np.vstack([sol.y.T[keep], event.pre_state])
    segment = Segment(t=t_grid, y=y_grid, dense=sol.sol)
    return segment, event


def apply_reset(spec: HybridSystemSpec, pre_state, guard_residual: float = 0.0):
    """Apply the reset map and verify the moving-away condition.

    For a rising guard, a post state at or beyond the guard must satisfy
    d(guard)/dt <= 0 (and symmetrically for falling guards). States reset
    strictly inside the domain are admissible regardless of velocity: the
    flow may legitimately approach the guard again.
    """
    pre = as_state(pre_state)
    if guard_residual > spec.event_tol:
        raise ValueError(
            f"pre-impact state is not on the guard (residual {guard_residual:.3e})")
    post = as_state(spec.reset(pre))

    g_post = float(spec.guard(post))
    rate = guard_rate(spec, post)
    if spec.guard_direction == RISING:
        violated = g_post >= -spec.event_tol and rate > 0.0
    elif spec.guard_direction == FALLING:
        violated = g_post <= spec.event_tol and rate < 0.0
    else:
        violated = abs(g_post) <= spec.event_tol
    if violated:
        raise AdmissibilityError(
            f"post-reset state drives into the guard: guard={g_post:.3e}, "
            f"d(guard)/dt={rate:.3e}")
    return post


def run_hybrid(
    spec: HybridSystemSpec,
    start,
    t0: float,
    tf: float,
    tol: float = DEFAULT_TOL,
) -> HybridTrajectory:
    """Alternate flow and reset until tf, the impact budget, or an error.

    Raises ZenoError when a reset returns the pre-impact state (stuck on the
    guard) or two impacts arrive closer than min_inter_impact.
    """
    if tf <= t0:
        raise ValueError("tf must exceed t0")
    state = as_state(start)
    t = t0
    segments = []
    impacts = []
    while t < tf:
        segment, event = integrate_segment(spec, state, t, tf, tol=tol)
        segments.append(segment)
        if event is None:
            break
        if len(impacts) + 1 > spec.max_impacts:
            raise MaxImpactsError(f"more than {spec.max_impacts} impacts before tf")
        if event.time - t < spec.min_inter_impact and impacts:
            raise ZenoError(
                f"impacts at {impacts[-1].time:.9g} and {event.time:.9g} are closer "
                f"than min_inter_impact={spec.min_inter_impact:g}")
        raw_post = as_state(spec.reset(event.pre_state))
        if (np.max(np.abs(raw_post - event.pre_state)) <= spec.event_tol
                and abs(float(spec.guard(raw_post))) <= spec.event_tol):
            raise ZenoError(
                "reset returned the pre-impact state: the trajectory is stuck "
                "on the guard and would re-trigger immediately")
        post = apply_reset(spec, event.pre_state, event.guard_residual)
        event = ImpactEvent(event.time, event.pre_state, post, event.guard_residual)
        impacts.append(event)
        state = post
        t = event.time
    return HybridTrajectory(segments=tuple(segments), impacts=tuple(impacts),
                            t0=t0, tf=tf)
