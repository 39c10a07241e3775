//! Unitary-deformed counterdiabatic driving.
//!
//! Builds local ("potential-only") drivers that keep a chosen adiabatic
//! state on track, for particles in 1D or radial potentials and for
//! finite-dimensional real-symmetric Hamiltonians. The exact
//! counterdiabatic term is available as a reference, together with
//! propagators and checks (fidelity, continuity residuals, dynamical
//! invariants) to validate every driver.
//!
//! The schedule, grid and closed-form layers are generic over [`Real`]
//! (`f32` or `f64`); the aliases below fix them to `f64`, which is what the
//! solvers and propagators use.

pub mod deform1d;
pub mod deformn;
pub mod error;
pub mod evolve;
pub mod grid;
pub mod hamiltonian;
pub mod scalar;
pub mod schedule;
pub mod spectral;
pub mod state;
pub mod verify;

pub use error::{Error, Result};
pub use hamiltonian::{DiscreteFamily, HamiltonianFamily, Potential1D};
pub use scalar::Real;
pub use schedule::{Schedule, SharedSchedule};
pub use state::{normalize, Basis, StateVector};

pub type Grid1D = grid::SpatialGrid1D<f64>;
pub type Mesh = grid::TimeMesh<f64>;
pub type Polynomial = schedule::Polynomial<f64>;
pub type Smoothstep = schedule::Smoothstep<f64>;
