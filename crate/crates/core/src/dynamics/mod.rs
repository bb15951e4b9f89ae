//! The RG as a dynamical system on even potentials.

mod critical;
mod fixed_point;
mod flow;
mod reduced;
mod scaling;

pub use critical::{
    bare_potential, classify, critical_mu, BracketStep, Classification, CriticalResult, Phase,
    ShootingOptions,
};
pub use fixed_point::{
    continue_in_epsilon, find_fixed_point, kappa_from_eigenvalue, kappa_from_spectrum,
    truncated_seed, FixedPointKind, FixedPointRecord, FixedPointSummary, HIGH_TEMPERATURE_MASS,
    JACOBIAN_STEP, NEWTON_MAX_ITER, REPORT_TRUNCATION,
};
pub use flow::{flow, Flow, FlowRecord, FlowSummary, DIVERGENCE_NORM};
pub use reduced::{ReducedMap, DEFAULT_COLLOCATION_MAX, DEFAULT_COLLOCATION_POINTS};
pub use scaling::{scaling_field_z, wave_amplitude, LimitEstimate, LimitOptions};
