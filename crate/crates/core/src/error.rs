use thiserror::Error;

/// Errors raised by the deformation, spectral and propagation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate state: {0}")]
    DegenerateState(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("node singularity at x = {position}: {detail}")]
    NodeSingularity { position: f64, detail: String },

    #[error("mesh too coarse at t = {time}: {detail}")]
    MeshTooCoarse { time: f64, detail: String },

    #[error("eigenvalue gap {gap:e} below {min_gap:e} at t = {time}")]
    Degeneracy { time: f64, gap: f64, min_gap: f64 },

    #[error("infeasible sweep speed at t = {time}: |sin phi| = {ratio} > 1")]
    InfeasibleSpeed { time: f64, ratio: f64 },

    #[error("no solution found at t = {time} after {iterations} iterations (residual {residual:e})")]
    NoSolution {
        time: f64,
        iterations: usize,
        residual: f64,
    },

    #[error("potential component {component} undetermined for t in [{t_first}, {t_last}]: <a|n> vanishes")]
    UndeterminedPotential {
        component: usize,
        t_first: f64,
        t_last: f64,
    },

    #[error("coordinate singularity at t = {time}: {detail}")]
    CoordinateSingularity { time: f64, detail: String },

    #[error("singular system at t = {time}: denominator {denominator:e}")]
    SingularSystem { time: f64, denominator: f64 },

    #[error("grid too small: |psi| = {amplitude:e} at the boundary at t = {time}")]
    GridTooSmall { time: f64, amplitude: f64 },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for failures of the numerics themselves (singularities,
    /// non-convergence, degeneracies) as opposed to bad inputs.
    pub fn is_numerical(&self) -> bool {
        !matches!(self, Error::InvalidArgument(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
