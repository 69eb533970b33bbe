"""SLIP hopper: a time-reversal-symmetric periodic stance orbit, and friends.

Seeding the stance flow on the fixed-point set of the reversal symmetry
(leg vertical, no radial speed) and flowing until touchdown gives half a
periodic orbit for free; the symmetry supplies the other half. The same
trick applied to nearby seeds yields a whole family of orbits.
"""
import numpy as np

import routhsim as rs


def main():
    cert = rs.CERTIFIED_SLIP
    params = cert.params
    spec = rs.slip_hybrid_spec(params)
    sym = rs.slip_symmetry()

    print("== certified stance orbit ==")
    print(f"  spring constant {params.kappa}, rest length {params.l0}")
    print("  seed (xi, phi, xidot, phidot) = "
          + str(tuple(float(v) for v in cert.seed)))
    orbit = rs.construct_periodic_orbit(spec, sym, cert.seed, t_max=5.0)
    print(f"  half period:            {orbit.half_period:.9f}")
    print(f"  closure residual:       {orbit.closure_residual:.2e}")
    print(f"  time-symmetry residual: {orbit.time_symmetry_residual:.2e}")
    touchdown = orbit.trajectory.impacts[0].pre_state
    print(f"  leg angle at touchdown: {touchdown[1]:.6f} rad")

    print("== family along the fixed-point set ==")
    fp = rs.fixed_point_manifold(sym, cert.seed[:2])
    print(f"  fixed-point set dimension: {fp.dim}")
    labels = ("spring length", "angular rate")
    for j, label in zip(range(fp.dim), labels):
        for step in (1e-3, -1e-3):
            seed = cert.seed + step * fp.basis[:, j]
            nearby = rs.construct_periodic_orbit(spec, sym, seed, t_max=5.0)
            print(f"  {label:13s} {step:+.0e}: "
                  f"half period {nearby.half_period:.6f}, "
                  f"closure {nearby.closure_residual:.1e}")

    print("== what happens with too little energy ==")
    xi_eq = params.l0 - params.m * params.g / params.kappa
    try:
        rs.construct_periodic_orbit(spec, sym, [xi_eq, 0.0, 0.0, 0.0],
                                    t_max=5.0)
    except rs.NoImpactError as exc:
        print(f"  no touchdown, as expected: {exc}")


if __name__ == "__main__":
    main()
