//! Schrodinger propagators for grid and discrete states.

mod discrete;
mod split_step;

use std::time::Duration;

use crate::state::StateVector;

pub use discrete::{
    discrete_driver, midpoint_exponential, propagate_discrete, time_evolution_operator, unitarity_residual,
    EvolutionOperator, HERMITICITY_TOL,
};
pub use split_step::{split_step_1d, SplitStepOptions, DEFAULT_EDGE_TOL, MAX_PHASE_PER_STEP};

/// Outcome of one propagation.
#[derive(Debug, Clone)]
pub struct PropagationResult {
    pub final_state: StateVector,
    /// Sampled times, always including both ends of the mesh.
    pub times: Vec<f64>,
    pub trajectory: Vec<StateVector>,
    /// Largest `| |psi|^2 - |psi0|^2 |` over the samples.
    pub norm_drift: f64,
    pub wall_time: Duration,
}

pub(crate) fn sample_due(k: usize, n_steps: usize, every: usize) -> bool {
    k == n_steps || (every > 0 && k % every == 0)
}
