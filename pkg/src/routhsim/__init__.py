"""Routh reduction, hybrid simulation, and symmetric periodic orbits."""

from .hybrid import (
    RISING,
    FALLING,
    BOTH,
    AdmissibilityError,
    HybridError,
    HybridSystemSpec,
    HybridTrajectory,
    ImpactEvent,
    IntegrationError,
    MaxImpactsError,
    NoImpactError,
    Segment,
    TangentialCrossingError,
    ZenoError,
    apply_reset,
    as_state,
    guard_rate,
    integrate_segment,
    run_hybrid,
)
from .routh import (
    MechanicalSystem,
    RouthianSystem,
    SingularInertiaError,
    effective_potential,
    momentum,
    momentum_sequence,
    reconstruct_cyclic,
    reduced_energy,
    routh_vector_field,
    routhian_eval,
)
from .symmetry import (
    ClosureError,
    FixedPointManifold,
    PeriodicOrbit,
    ResetMismatchError,
    ReversalSymmetry,
    construct_periodic_orbit,
    fixed_point_manifold,
    involution_residual,
    is_fixed_point,
    reversibility_residual,
)
from .poincare import (
    NoReturnError,
    PoincareSection,
    StabilityReport,
    check_spectral_bounds,
    eigenvalues,
    jacobian,
    make_section,
    numerical_rank,
    reset_jacobian,
    return_map,
    stability_report,
    time_to_impact,
    transversal_section,
)
from .control import (
    ControlledRouthian,
    EmptyImpactSetError,
    GeometricDegeneracyError,
    ZeroDynamicsManifold,
    feedback_u_star,
    gamma_compatibility,
    hybrid_invariance_check,
    periodic_orbit_on_manifold,
    zero_dynamics_rhs,
)
from .models import (
    ConstraintCoefficients,
    PendulumParams,
    SlipParams,
    closed_loop_slip_spec,
    controlled_slip_system,
    pendulum_routhian,
    pendulum_symmetry,
    pendulum_system,
    quadratic_constraint,
    slip_guard,
    slip_hybrid_spec,
    slip_mechanical,
    slip_momentum_transition,
    slip_reset,
    slip_routhian,
    slip_section,
    slip_symmetry,
    slip_system,
)

from .certified import (
    CERTIFIED_CONTROLLED,
    CERTIFIED_SLIP,
    CertifiedControlledTuple,
    CertifiedSlipTuple,
    search_controlled_tuple,
    search_slip_tuple,
)
from .scenario import (
    RunReport,
    Scenario,
    ScenarioError,
    parse_scenario,
    run,
    scenario_to_dict,
)

__version__ = "0.1.0"
