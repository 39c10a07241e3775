//! Unitary deformation of 1D and radially symmetric states: the phase
//! `phi` from the continuity equation and the local potential
//! `V = d phi/dt - (d phi/dx)^2 / 2m`.

mod closed;
mod continuity;
mod density;
mod hydrogen;
mod potential;

pub use closed::{dilatation_potential, transport_potential, DilatationDriver, ProfileFn, StateTerm, TransportDriver};
pub use continuity::{
    continuity_residual_1d, masked_gradient, phase_from_continuity_1d, phase_from_slices, ContinuityOptions,
    NodeReport, PhaseProfile, Reference, DEFAULT_DENSITY_FLOOR, DEFAULT_NODE_RATIO, DEFAULT_REMOVABLE_TOL,
};
pub use density::{DensityField, Profile};
pub use hydrogen::{
    continuity_residual_radial, dilatation_phase_gradient, dilatation_potential_radial, hydrogen_density,
    hydrogen_density_rate, translation_phase_gradient, translation_potential, DilatationFields, HydrogenDilatation,
    HydrogenTranslation, RadialGeometry, TranslationFields, DEFAULT_RELATIVE_R_FLOOR, DEFAULT_Z_FLOOR,
};
pub use potential::{
    deformation_from_density, mean_subtracted, potential_from_phase_1d, potential_from_phase_analytic,
    DeformationField, StateDependence,
};
