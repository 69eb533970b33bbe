"""Scenario documents: strict parsing, task execution, and report emission.

A scenario is a small YAML document naming a bundled model, a task, and
numeric settings. Parsing is strict: unknown keys anywhere are rejected so a
typo cannot silently fall back to a default. `run` executes the task and
writes a trajectory CSV plus a YAML report that echoes the fully defaulted
scenario (re-running the echo reproduces the run).
"""
from __future__ import annotations

import io
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import yaml
from scipy.integrate import solve_ivp

from . import certified, models, poincare
from .control import hybrid_invariance_check, periodic_orbit_on_manifold
from .hybrid import HybridSystemSpec, run_hybrid
from .routh import routh_vector_field, routhian_eval
from .symmetry import (
    construct_periodic_orbit,
    involution_residual,
    reversibility_residual,
)

MODELS = ("pendulum", "slip", "controlled_slip", "custom")
TASKS = ("simulate", "periodic_orbit", "poincare", "zero_dynamics", "check_suite")

_PARAM_KEYS = {
    "pendulum": ("m", "k", "mu"),
    "slip": ("m", "inertia", "g", "l0", "kappa", "mu", "phi0"),
    "controlled_slip": ("m", "inertia", "g", "l0", "kappa", "mu", "c0", "c2"),
    "custom": (),
}
_STATE_NAMES = {
    "pendulum": ("r", "rdot"),
    "slip": ("xi", "phi", "xidot", "phidot"),
    "controlled_slip": ("xi", "phi", "xidot", "phidot"),
}

FLOAT_FMT = "%.17g"


class ScenarioError(ValueError):
    """Invalid scenario document: unknown key, bad type, or bad value."""


@dataclass(frozen=True)
class Numerics:
    tol: float = 1e-10
    event_tol: float = 1e-10
    t_max: float = 10.0
    max_impacts: int = 10_000
    fd_step: float = 1e-5

    def __post_init__(self):
        for name in ("tol", "event_tol", "t_max", "fd_step"):
            if getattr(self, name) <= 0:
                raise ScenarioError(f"numerics.{name} must be positive")
        if self.max_impacts < 1:
            raise ScenarioError("numerics.max_impacts must be >= 1")


@dataclass(frozen=True)
class Outputs:
    trajectory: str = "trajectory.csv"
    report: str = "report.yaml"
    stride: int = 1

    def __post_init__(self):
        if self.stride < 1:
            raise ScenarioError("outputs.stride must be >= 1")


@dataclass(frozen=True)
class Scenario:
    model: str
    task: str
    params: dict = field(default_factory=dict)
    seed: Optional[tuple] = None
    numerics: Numerics = Numerics()
    outputs: Outputs = Outputs()


@dataclass(frozen=True)
class RunReport:
    scenario: dict
    task: str
    results: dict
    checks: list          # dicts: name, passed, residual, tolerance
    impact_times: list
    wall_seconds: float

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)


def _check_mapping(node, allowed, context) -> dict:
    if node is None:
        return {}
    if not isinstance(node, dict):
        raise ScenarioError(f"{context} must be a mapping")
    for key in node:
        if key not in allowed:
            raise ScenarioError(f"unknown key '{key}' in {context}")
    return node


def _pick(node: dict, key, cls, context):
    if key not in node or node[key] is None:
        return None
    val = node[key]
    try:
        return cls(val)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"{context}.{key}: {exc}") from exc


def parse_scenario(text) -> Scenario:
    """Parse a YAML scenario document (or an already-loaded mapping)."""
    doc = yaml.safe_load(text) if isinstance(text, (str, bytes, io.IOBase)) else text
    if not isinstance(doc, dict):
        raise ScenarioError("scenario must be a mapping")
    _check_mapping(doc, ("model", "task", "params", "seed", "numerics", "outputs"),
                   "scenario")

    model = doc.get("model")
    if model not in MODELS:
        raise ScenarioError(f"model must be one of {MODELS}, got {model!r}")
    task = doc.get("task")
    if task not in TASKS:
        raise ScenarioError(f"task must be one of {TASKS}, got {task!r}")

    raw_params = _check_mapping(doc.get("params"), _PARAM_KEYS[model],
                                f"params ({model})")
    params = {}
    for key, value in raw_params.items():
        if value is None:
            continue
        try:
            params[key] = float(value)
        except (TypeError, ValueError) as exc:
            raise ScenarioError(f"params.{key} must be a number") from exc

    seed = doc.get("seed")
    if seed is not None:
        if not isinstance(seed, (list, tuple)):
            raise ScenarioError("seed must be a list of numbers")
        try:
            seed = tuple(float(v) for v in seed)
        except (TypeError, ValueError) as exc:
            raise ScenarioError("seed must be a list of numbers") from exc

    num_node = _check_mapping(doc.get("numerics"),
                              ("tol", "event_tol", "t_max", "max_impacts",
                               "fd_step"), "numerics")
    defaults = Numerics()

    def num_or_default(key, cls, fallback):
        val = _pick(num_node, key, cls, "numerics")
        return fallback if val is None else val

    numerics = Numerics(
        tol=num_or_default("tol", float, defaults.tol),
        event_tol=num_or_default("event_tol", float, defaults.event_tol),
        t_max=num_or_default("t_max", float, defaults.t_max),
        max_impacts=num_or_default("max_impacts", int, defaults.max_impacts),
        fd_step=num_or_default("fd_step", float, defaults.fd_step),
    )

    out_node = _check_mapping(doc.get("outputs"),
                              ("trajectory", "report", "stride"), "outputs")
    out_defaults = Outputs()
    stride = _pick(out_node, "stride", int, "outputs")
    outputs = Outputs(
        trajectory=str(out_node.get("trajectory") or out_defaults.trajectory),
        report=str(out_node.get("report") or out_defaults.report),
        stride=out_defaults.stride if stride is None else stride,
    )
    return Scenario(model=model, task=task, params=params, seed=seed,
                    numerics=numerics, outputs=outputs)


def scenario_to_dict(sc: Scenario) -> dict:
    """Round-trippable echo with all defaults made explicit."""
    return {
        "model": sc.model,
        "task": sc.task,
        "params": {k: float(v) for k, v in sorted(sc.params.items())},
        "seed": None if sc.seed is None else [float(v) for v in sc.seed],
        "numerics": {
            "tol": sc.numerics.tol,
            "event_tol": sc.numerics.event_tol,
            "t_max": sc.numerics.t_max,
            "max_impacts": sc.numerics.max_impacts,
            "fd_step": sc.numerics.fd_step,
        },
        "outputs": {
            "trajectory": sc.outputs.trajectory,
            "report": sc.outputs.report,
            "stride": sc.outputs.stride,
        },
    }


def _slip_params(sc: Scenario) -> models.SlipParams:
    base = certified.CERTIFIED_SLIP.params
    kw = {name: sc.params[name]
          for name in ("m", "inertia", "g", "l0", "kappa", "mu", "phi0")
          if name in sc.params}
    defaults = {"m": base.m, "inertia": base.inertia, "g": base.g,
                "l0": base.l0, "kappa": base.kappa, "mu": base.mu}
    defaults.update(kw)
    return models.SlipParams(**defaults)


def _controlled(sc: Scenario):
    cert = certified.CERTIFIED_CONTROLLED
    c0 = sc.params.get("c0", cert.c0)
    c2 = sc.params.get("c2", cert.c2)
    coeffs = models.ConstraintCoefficients(c0, c2)
    kw = {name: sc.params[name]
          for name in ("m", "inertia", "g", "l0", "kappa", "mu")
          if name in sc.params}
    base = cert.params
    defaults = {"m": base.m, "inertia": base.inertia, "g": base.g,
                "l0": base.l0, "kappa": base.kappa, "mu": base.mu}
    defaults.update(kw)
    return models.SlipParams(**defaults), coeffs


def _default_seed(sc: Scenario) -> np.ndarray:
    if sc.seed is not None:
        return np.asarray(sc.seed, dtype=float)
    if sc.model == "pendulum":
        return np.array([1.2, 0.0])
    if sc.model == "slip":
        return certified.CERTIFIED_SLIP.seed
    return certified.CERTIFIED_CONTROLLED.seed


def _with_numerics(spec: HybridSystemSpec, num: Numerics) -> HybridSystemSpec:
    return HybridSystemSpec(vector_field=spec.vector_field, guard=spec.guard,
                            reset=spec.reset,
                            guard_direction=spec.guard_direction,
                            min_inter_impact=spec.min_inter_impact,
                            max_impacts=num.max_impacts,
                            event_tol=num.event_tol)


def write_trajectory_csv(path, names, segments, stride: int = 1):
    """One row per retained sample; segment index marks the smooth arc."""
    with open(path, "w", newline="\n") as fh:
        fh.write("t," + ",".join(names) + ",segment\n")
        for idx, (ts, ys) in enumerate(segments):
            keep = list(range(0, len(ts), stride))
            if keep[-1] != len(ts) - 1:
                keep.append(len(ts) - 1)
            for i in keep:
                row = [FLOAT_FMT % ts[i]]
                row += [FLOAT_FMT % v for v in np.atleast_1d(ys[i])]
                fh.write(",".join(row) + f",{idx}\n")


def _hybrid_segments(traj):
    return [(seg.t, seg.y) for seg in traj.segments]


def _plain(value):
    """Recursively convert numpy scalars/arrays for YAML emission."""
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, complex):
        return {"re": float(value.real), "im": float(value.imag)}
    return value


def _check(name, residual, tolerance) -> dict:
    return {"name": name, "passed": bool(residual <= tolerance),
            "residual": float(residual), "tolerance": float(tolerance)}


def _task_simulate(sc: Scenario, num: Numerics):
    if sc.model == "pendulum":
        sys = models.pendulum_routhian(models.PendulumParams(
            m=sc.params.get("m", 1.0), k=sc.params.get("k", 1.0),
            mu=sc.params.get("mu", 1.0)))
        f = routh_vector_field(sys)
        sol = solve_ivp(lambda t, y: f(y), (0.0, num.t_max), _default_seed(sc),
                        method="RK45", rtol=num.tol, atol=num.tol)
        return {"final_state": sol.y[:, -1]}, [], [], [(sol.t, sol.y.T)]
    if sc.model == "slip":
        spec = _with_numerics(models.slip_hybrid_spec(_slip_params(sc)), num)
    elif sc.model == "controlled_slip":
        params, coeffs = _controlled(sc)
        spec = _with_numerics(models.closed_loop_slip_spec(params, coeffs), num)
    else:
        raise ScenarioError("simulate supports the bundled models only")
    traj = run_hybrid(spec, _default_seed(sc), 0.0, num.t_max, tol=num.tol)
    times = [ev.time for ev in traj.impacts]
    return ({"impact_count": len(times), "final_state": traj.segments[-1].y[-1]},
            [], times, _hybrid_segments(traj))


def _task_periodic_orbit(sc: Scenario, num: Numerics):
    sym = models.slip_symmetry()
    seed = _default_seed(sc)
    if sc.model == "slip":
        spec = _with_numerics(models.slip_hybrid_spec(_slip_params(sc)), num)
        orbit = construct_periodic_orbit(spec, sym, seed, num.t_max, tol=num.tol)
    elif sc.model == "controlled_slip":
        params, coeffs = _controlled(sc)
        spec = _with_numerics(models.closed_loop_slip_spec(params, coeffs), num)
        orbit = periodic_orbit_on_manifold(
            spec, sym, models.quadratic_constraint(coeffs), seed, num.t_max,
            tol=num.tol)
    else:
        raise ScenarioError("periodic_orbit requires the slip or controlled_slip model")
    results = {"seed": orbit.seed, "half_period": orbit.half_period,
               "closure_residual": orbit.closure_residual,
               "time_symmetry_residual": orbit.time_symmetry_residual}
    checks = [_check("closure", orbit.closure_residual, 1e-6),
              _check("time_symmetry", orbit.time_symmetry_residual, 1e-6)]
    times = [ev.time for ev in orbit.trajectory.impacts]
    return results, checks, times, _hybrid_segments(orbit.trajectory)


def _task_poincare(sc: Scenario, num: Numerics):
    if sc.model != "slip":
        raise ScenarioError("poincare requires the slip model")
    sym = models.slip_symmetry()
    seed = _default_seed(sc)
    params = _slip_params(sc)
    spec = _with_numerics(models.slip_hybrid_spec(params), num)
    orbit = construct_periodic_orbit(spec, sym, seed, num.t_max, tol=num.tol)
    impact = orbit.trajectory.impacts[0].pre_state

    # Stability model: touchdown angle pinned at the certified impact angle,
    # which is the convention in which the reset loses rank.
    pinned = models.SlipParams(m=params.m, inertia=params.inertia, g=params.g,
                               l0=params.l0, kappa=params.kappa, mu=params.mu,
                               phi0=abs(float(impact[1])))
    pinned_spec = _with_numerics(models.slip_hybrid_spec(pinned), num)
    section = models.slip_section(seed)
    jac = poincare.jacobian(pinned_spec, section, h=num.fd_step,
                            t_max=num.t_max, tol=num.tol)
    beta = poincare.numerical_rank(poincare.reset_jacobian(pinned_spec, impact))
    report = poincare.stability_report(jac, r=2, beta=beta, n_minus_1=3)
    eigs = [{"re": v.real, "im": v.imag, "modulus": abs(v)}
            for v in report.eigenvalues]
    results = {"half_period": orbit.half_period,
               "jacobian": report.jacobian,
               "eigenvalues": eigs,
               "lambda0_count": report.lambda0_count,
               "lambda1_count": report.lambda1_count,
               "lambda0_bound_ok": report.lambda0_bound_ok,
               "lambda1_bound_ok": report.lambda1_bound_ok,
               "reset_rank": beta,
               "classification": report.classification}
    times = [ev.time for ev in orbit.trajectory.impacts]
    return results, [], times, _hybrid_segments(orbit.trajectory)


def _task_zero_dynamics(sc: Scenario, num: Numerics):
    if sc.model != "controlled_slip":
        raise ScenarioError("zero_dynamics requires the controlled_slip model")
    params, coeffs = _controlled(sc)
    manifold = models.quadratic_constraint(coeffs)
    sym = models.slip_symmetry()
    spec = _with_numerics(models.closed_loop_slip_spec(params, coeffs), num)
    orbit = periodic_orbit_on_manifold(spec, sym, manifold, _default_seed(sc),
                                       num.t_max, tol=num.tol)

    rng = np.random.default_rng(0)
    evenness = max(abs(models.feedback_u_star(manifold, params, phi, pd)
                       - models.feedback_u_star(manifold, params, -phi, pd))
                   for phi, pd in rng.uniform([-1.2, -3.0], [1.2, 3.0],
                                              size=(100, 2)))
    invariant, witness = hybrid_invariance_check(
        manifold, models.slip_guard(params), models.slip_reset(params))
    on_manifold = max(abs(manifold.residuals(y)[0])
                      for seg in orbit.trajectory.segments for y in seg.y)
    results = {"half_period": orbit.half_period,
               "closure_residual": orbit.closure_residual,
               "u_star_evenness_residual": evenness,
               "on_manifold_residual": on_manifold,
               "hybrid_invariant": bool(invariant),
               "invariance_witness": witness}
    checks = [_check("u_star_evenness", evenness, 1e-12),
              _check("on_manifold", on_manifold, 1e-6),
              _check("closure", orbit.closure_residual, 1e-6),
              {"name": "hybrid_invariance", "passed": bool(invariant),
               "residual": 0.0 if invariant else float("nan"),
               "tolerance": 1e-9}]
    times = [ev.time for ev in orbit.trajectory.impacts]
    return results, checks, times, _hybrid_segments(orbit.trajectory)


def _task_check_suite(sc: Scenario, num: Numerics):
    if sc.model not in ("slip", "pendulum"):
        raise ScenarioError("check_suite requires the slip or pendulum model")
    rng = np.random.default_rng(0)
    if sc.model == "slip":
        params = _slip_params(sc)
        sys = models.slip_routhian(params)
        sym = models.slip_symmetry()
        lo, hi = [0.5, -1.3, -2.0, -3.0], [1.5, 1.3, 2.0, 3.0]
    else:
        p = models.PendulumParams(m=sc.params.get("m", 1.0),
                                  k=sc.params.get("k", 1.0),
                                  mu=sc.params.get("mu", 1.0))
        sys = models.pendulum_routhian(p)
        sym = models.pendulum_symmetry()
        lo, hi = [0.5, -2.0], [2.0, 2.0]
    f = routh_vector_field(sys)
    d = sys.base.shape_dim
    inv = rev = routh = 0.0
    for s in rng.uniform(lo, hi, size=(1000, 2 * d)):
        inv = max(inv, involution_residual(sym, s))
        rev = max(rev, reversibility_residual(sym, f, s))
        img = sym.phi(s)
        routh = max(routh, abs(routhian_eval(sys, img[:d], img[d:])
                               - routhian_eval(sys, s[:d], s[d:])))
    checks = [_check("involution", inv, 1e-10),
              _check("reversibility", rev, 1e-8),
              _check("routhian_invariance", routh, 1e-12)]
    results = {"samples": 1000, "involution_residual": inv,
               "reversibility_residual": rev,
               "routhian_invariance_residual": routh}
    return results, checks, [], []


_TASKS = {
    "simulate": _task_simulate,
    "periodic_orbit": _task_periodic_orbit,
    "poincare": _task_poincare,
    "zero_dynamics": _task_zero_dynamics,
    "check_suite": _task_check_suite,
}


def run(sc: Scenario, out_dir=".") -> RunReport:
    """Execute the scenario's task and write the trajectory and report files."""
    import os

    started = time.perf_counter()
    results, checks, impact_times, segments = _TASKS[sc.task](sc, sc.numerics)
    wall = time.perf_counter() - started

    os.makedirs(out_dir, exist_ok=True)
    if segments:
        names = _STATE_NAMES[sc.model]
        write_trajectory_csv(os.path.join(out_dir, sc.outputs.trajectory),
                             names, segments, stride=sc.outputs.stride)
    report = RunReport(scenario=scenario_to_dict(sc), task=sc.task,
                       results=_plain(results), checks=_plain(checks),
                       impact_times=[float(t) for t in impact_times],
                       wall_seconds=float(wall))
    payload = {"scenario": report.scenario, "task": report.task,
               "results": report.results, "checks": report.checks,
               "impact_times": report.impact_times,
               "wall_seconds": report.wall_seconds,
               "passed": report.passed}
    with open(os.path.join(out_dir, sc.outputs.report), "w", newline="\n") as fh:
        yaml.safe_dump(payload, fh, sort_keys=False)
    return report
