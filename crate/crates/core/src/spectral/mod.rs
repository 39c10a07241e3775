//! Instantaneous eigenproblems, gauge-fixed adiabatic tracks and the
//! exact counterdiabatic term built from them.

mod counterdiabatic;
mod eigen;
mod track;
mod tridiagonal;

pub use counterdiabatic::{counterdiabatic_term, CounterdiabaticTerm, DEFAULT_MIN_GAP};
pub use eigen::{eigensystem_real_symmetric, Eigensystem};
pub use track::{
    adiabatic_state, gauge_fix_track, track_bound_state, track_levels, AdiabaticTrack, DerivativeMethod,
    MIN_CONSECUTIVE_OVERLAP,
};
pub use tridiagonal::{bound_states_1d, BoundState, SymTridiagonal};
