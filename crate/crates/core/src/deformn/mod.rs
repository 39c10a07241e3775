//! Diagonal deformations `U = exp(-i sum_a phi_a |a><a|)` of discrete
//! Hamiltonians, driven by diagonal potentials.

mod axis;
mod nlevel;
mod two_level;

pub use axis::{axis_residuals, generalized_axis_two_level, AxisDeformation, AxisTolerances, AXIS_SINGULAR_TOL};
pub use nlevel::{
    continuity_residual_discrete, nlevel_deformation, state_independence_check, DiagonalDeformation, NLevelOptions,
    StateIndependence, MIN_COMPONENT,
};
pub use two_level::{
    bloch_curves, max_branch_jump, two_level_phase, two_level_phase_at, two_level_potential, two_level_potential_at,
    BlochCurve, TwoLevelPhase,
};
