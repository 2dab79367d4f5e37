"""Simulation and numerical-verification lab for deadzone-adapted
disturbance suppression (DADS) control of matched-uncertainty systems."""

from .analysis import (
    BoundReport,
    EquilibriumSet,
    TailStats,
    WitnessReport,
    adapted_gain_crude_bound,
    check_deadzone,
    check_gain_ceiling,
    check_leakage_decrease,
    check_quadratic_decay,
    check_robust_decrease,
    check_tail_level,
    check_tail_state,
    check_transient_consequences,
    decay_rate_floor,
    disturbance_offset,
    drift_witness,
    gain_ceiling_chi,
    gain_ceiling_closed_form,
    nodeadzone_equilibria,
    tail_average_excess,
    tail_limsup,
)
from .controllers import (
    DadsParams,
    KappaFn,
    NoDeadzoneParams,
    RobustParams,
    SigmaModParams,
    dads_linear_u,
    dads_linear_zdot,
    dads_u,
    dads_zdot,
    nodeadzone_rhodot,
    nodeadzone_u,
    regulation_threshold,
    robust_u,
    sigma_thetahat_dot,
    sigma_u,
)
from .designs import (
    CertReport,
    ClfDesign,
    GridSpec,
    LinearDesign,
    ZetaEnvelope,
    builtin_design,
    certify_assumption,
    certify_linear_margin,
    lyapunov_Q_from,
    make_chain_design,
    make_example1_design,
    make_scalar_design,
    zeta_envelope,
)
from .errors import ConfigurationError, NumericFault
from .plants import (
    LinearMatchedPlant,
    MismatchedPlant,
    PlantSpec,
    make_builtin,
    rhs_matched,
    rhs_mismatched,
)
from .sim import (
    DisturbanceSignal,
    Scenario,
    SolverConfig,
    Trajectory,
    closed_loop_rhs,
    eval_disturbance,
    integrate,
    read_trajectory_csv,
    write_trajectory_csv,
)

__version__ = "0.1.0"
