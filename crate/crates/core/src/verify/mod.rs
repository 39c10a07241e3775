//! Fidelities, residuals of the deformed equations of motion, and the
//! side-by-side comparison of bare, counterdiabatic and deformed drivers.

mod checks;
mod drivers;
mod report;

pub use checks::{
    deformed_equation_residuals, endpoint_conditions, fidelity, invariant_residual, EndpointConditions,
    InvariantResidual,
};
pub use drivers::{compare_drivers, DriverComparison, DriverScenario, Tolerances};
pub use report::{Bound, Metric, VerificationReport};
