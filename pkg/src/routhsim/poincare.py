"""Poincare sections, return maps, and spectral stability checks.

The section is a co-dimension-one hyperplane through the orbit's symmetry
fixed point; the return map runs one full hybrid cycle (flow, reset, flow)
and projects back to chart coordinates. Eigenvalues of its finite-difference
Jacobian are checked against the reset-rank and symmetry lower bounds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .hybrid import (
    RISING,
    FALLING,
    HybridSystemSpec,
    NoImpactError,
    TangentialCrossingError,
    as_state,
    apply_reset,
    integrate_segment,
)

TOL_LAMBDA0 = 1e-4
TOL_LAMBDA1 = 1e-4
RANK_RTOL = 1e-8

ASYMPTOTICALLY_STABLE = "asymptotically_stable"
MARGINALLY_STABLE = "marginally_stable"
UNSTABLE = "unstable"
DEGENERATE = "degenerate"


class NoReturnError(RuntimeError):
    """The flow never returned to the section within the allotted horizon."""


@dataclass(frozen=True)
class PoincareSection:
    anchor: np.ndarray
    normal: np.ndarray           # unit vector
    chart: np.ndarray            # (dim, dim-1) orthonormal columns, all _|_ normal
    crossing_direction: str = RISING

    def to_chart(self, state) -> np.ndarray:
        s = as_state(state)
        return self.chart.T @ (s - self.anchor)

    def lift(self, p) -> np.ndarray:
        return self.anchor + self.chart @ np.asarray(p, dtype=float)

    def offset(self, state) -> float:
        return float(self.normal @ (as_state(state) - self.anchor))


def make_section(anchor, normal, chart: Optional[np.ndarray] = None,
                 crossing_direction: str = RISING) -> PoincareSection:
    """Assemble a section; the chart defaults to an orthonormal complement."""
    a = as_state(anchor)
    n = np.asarray(normal, dtype=float)
    n = n / np.linalg.norm(n)
    if chart is None:
        # Null space of n^T via full SVD.
        _, _, vt = np.linalg.svd(n[None, :])
        chart = vt[1:].T
    chart = np.asarray(chart, dtype=float)
    if chart.shape != (a.size, a.size - 1):
        raise ValueError(f"chart must be {a.size}x{a.size - 1}")
    if np.max(np.abs(chart.T @ chart - np.eye(a.size - 1))) > 1e-10:
        raise ValueError("chart columns must be orthonormal")
    if np.max(np.abs(chart.T @ n)) > 1e-10:
        raise ValueError("chart columns must be orthogonal to the normal")
    return PoincareSection(anchor=a, normal=n, chart=chart,
                           crossing_direction=crossing_direction)


def transversal_section(field, anchor,
                        crossing_direction: str = RISING) -> PoincareSection:
    """Default section: the hyperplane orthogonal to the flow at the anchor."""
    a = as_state(anchor)
    x = np.asarray(field(a), dtype=float)
    norm = np.linalg.norm(x)
    if norm == 0.0:
        raise ValueError("flow vanishes at the anchor; no transversal hyperplane")
    return make_section(a, x / norm, crossing_direction=crossing_direction)


def time_to_impact(spec: HybridSystemSpec, state, t_max: float,
                   tol: float = 1e-10) -> float:
    """First positive time at which the flow from `state` reaches the guard."""
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    _, event = integrate_segment(spec, state, 0.0, t_max, tol=tol)
    return math.inf if event is None else event.time


def _section_crossing(section: PoincareSection, segment, t_min: float):
    """First directional section crossing in a segment after t_min, refined."""
    t = segment.t
    if t[-1] <= t_min:
        return None
    grids = [np.linspace(t[i], t[i + 1], 9) for i in range(len(t) - 1)]
    tf = np.unique(np.concatenate(grids)) if grids else t
    tf = tf[tf >= t_min]
    if tf.size < 2:
        return None
    g = np.array([section.offset(segment.dense(tk)) for tk in tf])
    for i in range(len(tf) - 1):
        if section.crossing_direction == RISING:
            hit = g[i] < 0.0 <= g[i + 1]
        elif section.crossing_direction == FALLING:
            hit = g[i] > 0.0 >= g[i + 1]
        else:
            hit = (g[i] < 0.0 <= g[i + 1]) or (g[i] > 0.0 >= g[i + 1])
        if not hit:
            continue
        fun = lambda tk: section.offset(segment.dense(tk))
        if g[i + 1] == 0.0:
            tc = float(tf[i + 1])
        else:
            tc = float(brentq(fun, tf[i], tf[i + 1], xtol=1e-14, rtol=8.9e-16))
        return tc, np.asarray(segment.dense(tc), dtype=float)
    return None


def return_map(
    spec: HybridSystemSpec,
    section: PoincareSection,
    chart_point,
    t_max: float = 20.0,
    tol: float = 1e-10,
    require_impact: bool = True,
    max_cycles: int = 4,
) -> np.ndarray:
    """One full hybrid cycle from a chart point back to the section.

    By default a crossing only counts after at least one reset has fired, so
    the map is the flow -> reset -> flow composition of one stance cycle.
    """
    state = section.lift(chart_point)
    t = 0.0
    impacts = 0
    for _ in range(max_cycles + 1):
        segment, event = integrate_segment(spec, state, t, t + t_max, tol=tol)
        if impacts > 0 or not require_impact:
            # Ignore the immediate departure from the section itself.
            hit = _section_crossing(section, segment, t_min=t + 1e-9)
            if hit is not None and (event is None or hit[0] <= event.time):
                return section.to_chart(hit[1])
        if event is None:
            raise NoReturnError(
                f"no section return within t_max={t_max:g} "
                f"after {impacts} impact(s)")
        state = apply_reset(spec, event.pre_state, event.guard_residual)
        t = event.time
        impacts += 1
    raise NoReturnError(f"no section return within {max_cycles} hybrid cycles")


def jacobian(
    spec: HybridSystemSpec,
    section: PoincareSection,
    h: float = 1e-5,
    t_max: float = 20.0,
    tol: float = 1e-10,
    require_impact: bool = True,
) -> np.ndarray:
    """Central finite-difference Jacobian of the return map at the anchor."""
    k = section.chart.shape[1]
    cols = []
    for j in range(k):
        hj = h * max(1.0, abs(float(section.chart[:, j] @ section.anchor)))
        e = np.zeros(k)
        e[j] = hj
        try:
            plus = return_map(spec, section, e, t_max=t_max, tol=tol,
                              require_impact=require_impact)
            minus = return_map(spec, section, -e, t_max=t_max, tol=tol,
                               require_impact=require_impact)
        except (NoReturnError, NoImpactError, TangentialCrossingError) as exc:
            raise RuntimeError(
                f"return map undefined under perturbation of chart direction "
                f"{j}: {exc}") from exc
        cols.append((plus - minus) / (2.0 * hj))
    return np.column_stack(cols)


def eigenvalues(matrix) -> np.ndarray:
    """All eigenvalues with multiplicity, residual-checked.

    Balanced Hessenberg reduction plus shifted QR (LAPACK) under the hood;
    each eigenvalue is certified by the smallest singular value of
    (A - lambda I).
    """
    A = np.asarray(matrix, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    if A.shape[0] > 8:
        raise ValueError("eigenvalue solver is limited to dimension <= 8")
    vals = np.linalg.eigvals(A)
    scale = max(np.linalg.norm(A, 2), 1e-300)
    for lam in vals:
        smin = np.linalg.svd(A - lam * np.eye(A.shape[0], dtype=complex),
                             compute_uv=False)[-1]
        if smin > 1e-8 * scale:
            raise RuntimeError(
                f"eigenvalue residual check failed for {lam}: "
                f"sigma_min={smin:.3e} > {1e-8 * scale:.3e}")
    order = np.argsort(-np.abs(vals), kind="stable")
    return vals[order]


def numerical_rank(matrix, rel_tol: float = RANK_RTOL) -> int:
    """Rank by singular values above rel_tol times the largest."""
    svals = np.linalg.svd(np.asarray(matrix, dtype=float), compute_uv=False)
    if svals.size == 0 or svals[0] == 0.0:
        return 0
    return int(np.sum(svals > rel_tol * svals[0]))


def reset_jacobian(spec: HybridSystemSpec, state, h: float = 1e-6) -> np.ndarray:
    """Central finite-difference Jacobian of the reset map at a guard state."""
    s = as_state(state)
    cols = []
    for i in range(s.size):
        hi = h * max(1.0, abs(s[i]))
        e = np.zeros(s.size)
        e[i] = hi
        cols.append((as_state(spec.reset(s + e)) - as_state(spec.reset(s - e)))
                    / (2.0 * hi))
    return np.column_stack(cols)


@dataclass(frozen=True)
class StabilityReport:
    jacobian: np.ndarray
    eigenvalues: np.ndarray
    lambda0_count: int
    lambda1_count: int
    lambda0_bound_ok: bool
    lambda1_bound_ok: bool
    classification: str


def check_spectral_bounds(eigvals, r: int, beta: int, n_minus_1: int,
                          tol0: float = TOL_LAMBDA0,
                          tol1: float = TOL_LAMBDA1):
    """Lower bounds: at least (n-1-beta) zero eigenvalues and r unit ones."""
    moduli = np.abs(np.asarray(eigvals))
    lam0 = int(np.sum(moduli <= tol0))
    lam1 = int(np.sum(np.abs(moduli - 1.0) <= tol1))
    return lam0 >= max(0, n_minus_1 - beta), lam1 >= max(0, r)


def stability_report(
    jac,
    r: int,
    beta: int,
    n_minus_1: int,
    tol0: float = TOL_LAMBDA0,
    tol1: float = TOL_LAMBDA1,
) -> StabilityReport:
    """Assemble eigenvalues, Lambda counts, bound flags and a classification."""
    jac = np.asarray(jac, dtype=float)
    vals = eigenvalues(jac)
    moduli = np.abs(vals)
    lam0 = int(np.sum(moduli <= tol0))
    lam1 = int(np.sum(np.abs(moduli - 1.0) <= tol1))
    ok0, ok1 = check_spectral_bounds(vals, r, beta, n_minus_1, tol0, tol1)

    non_unit = moduli[np.abs(moduli - 1.0) > tol1]
    if np.all(moduli < 1.0 - 10.0 * tol1):
        cls = ASYMPTOTICALLY_STABLE
    elif np.any(moduli > 1.0 + tol1):
        cls = UNSTABLE
    elif lam1 == r and (non_unit.size == 0 or np.all(non_unit < 1.0 - 10.0 * tol1)):
        cls = MARGINALLY_STABLE
    else:
        cls = DEGENERATE
    return StabilityReport(jacobian=jac, eigenvalues=vals,
                           lambda0_count=lam0, lambda1_count=lam1,
                           lambda0_bound_ok=ok0, lambda1_bound_ok=ok1,
                           classification=cls)
