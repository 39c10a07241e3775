use num_complex::Complex64;

use super::checks::{deformed_equation_residuals, endpoint_conditions, fidelity, invariant_residual};
use super::report::VerificationReport;
use crate::deformn::{nlevel_deformation, DiagonalDeformation, NLevelOptions};
use crate::error::{Error, Result};
use crate::evolve::{discrete_driver, propagate_discrete};
use crate::grid::TimeMesh;
use crate::hamiltonian::DiscreteFamily;
use crate::spectral::{adiabatic_state, counterdiabatic_term, track_levels, DerivativeMethod, DEFAULT_MIN_GAP};
use crate::state::StateVector;

/// Per-metric tolerances. Fidelity tolerances are infidelities `1 - F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub counterdiabatic_infidelity: f64,
    pub deformed_infidelity: f64,
    pub endpoint_infidelity: f64,
    pub invariant: f64,
    pub continuity: f64,
    pub hamilton_jacobi: f64,
    pub endpoint: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            counterdiabatic_infidelity: 1e-6,
            deformed_infidelity: 1e-6,
            endpoint_infidelity: 1e-4,
            invariant: 1e-5,
            continuity: 1e-8,
            hamilton_jacobi: 1e-8,
            endpoint: 1e-6,
        }
    }
}

/// A discrete sweep and the level to keep on track.
#[derive(Debug, Clone)]
pub struct DriverScenario<'a> {
    pub family: &'a DiscreteFamily,
    pub mesh: TimeMesh<f64>,
    pub level: usize,
    pub tolerances: Tolerances,
    pub newton: NLevelOptions,
}

impl<'a> DriverScenario<'a> {
    pub fn new(family: &'a DiscreteFamily, mesh: TimeMesh<f64>, level: usize) -> Self {
        Self { family, mesh, level, tolerances: Tolerances::default(), newton: NLevelOptions::default() }
    }
}

/// Fidelity series of the three drivers on the mesh.
#[derive(Debug, Clone)]
pub struct DriverComparison {
    pub times: Vec<f64>,
    /// `H_ad` alone against the adiabatic state.
    pub bare: Vec<f64>,
    /// `H_ad + H_cd` against the adiabatic state.
    pub counterdiabatic: Vec<f64>,
    /// `H_ad + diag(v)` against `exp(-i phi) |psi_ad>`.
    pub deformed: Vec<f64>,
    /// `H_ad + diag(v)` against the adiabatic state itself.
    pub deformed_vs_adiabatic: Vec<f64>,
    pub deformation: DiagonalDeformation,
    pub invariant_residual: f64,
}

fn rotate(state: &StateVector, phases: &nalgebra::DVector<f64>) -> StateVector {
    let amps = state
        .amplitudes()
        .iter()
        .zip(phases.iter())
        .map(|(a, &p)| a * Complex64::from_polar(1.0, -p))
        .collect();
    StateVector::new(amps, state.basis())
}

/// Runs bare, exact counterdiabatic and deformed drivers over the same
/// sweep and collects their fidelities and the residual checks.
pub fn compare_drivers(s: &DriverScenario) -> Result<(DriverComparison, VerificationReport)> {
    let dim = s.family.dim();
    if s.level >= dim {
        return Err(Error::invalid(format!("level {} out of range for N = {dim}", s.level)));
    }
    let tracks = track_levels(s.family, &s.mesh, DerivativeMethod::Perturbative, DEFAULT_MIN_GAP)?;
    let track = &tracks[s.level];
    let cd = counterdiabatic_term(&tracks, DEFAULT_MIN_GAP)?;
    let deformation = nlevel_deformation(s.family, track, &s.newton)?;
    let (continuity, hj) = deformed_equation_residuals(s.family, track, &deformation)?;

    let cd_fn = |t: f64| cd.at(t);
    let v_fn = |t: f64| deformation.potential_at(t);
    let bare_h = discrete_driver(s.family, None, None);
    let cd_h = discrete_driver(s.family, None, Some(&cd_fn));
    let def_h = discrete_driver(s.family, Some(&v_fn), None);

    let psi0 = adiabatic_state(track, s.mesh.t_start())?;
    let deformed0 = rotate(&psi0, &deformation.phases[0]);
    let bare = propagate_discrete(&psi0, &bare_h, &s.mesh, 1)?;
    let with_cd = propagate_discrete(&psi0, &cd_h, &s.mesh, 1)?;
    let deformed = propagate_discrete(&deformed0, &def_h, &s.mesh, 1)?;

    let times = s.mesh.times();
    let mut f_bare = Vec::with_capacity(times.len());
    let mut f_cd = Vec::with_capacity(times.len());
    let mut f_def = Vec::with_capacity(times.len());
    let mut f_def_ad = Vec::with_capacity(times.len());
    for (k, &t) in times.iter().enumerate() {
        let target = adiabatic_state(track, t)?;
        let target_def = rotate(&target, &deformation.phases[k]);
        f_bare.push(fidelity(&target, &bare.trajectory[k])?);
        f_cd.push(fidelity(&target, &with_cd.trajectory[k])?);
        f_def.push(fidelity(&target_def, &deformed.trajectory[k])?);
        f_def_ad.push(fidelity(&target, &deformed.trajectory[k])?);
    }
    let invariant = invariant_residual(&deformed.times, &deformed.trajectory, &def_h)?.max;

    let max_phase: Vec<f64> = deformation.phases.iter().map(|p| p.amax()).collect();
    let max_rate: Vec<f64> = deformation.rates.iter().map(|p| p.amax()).collect();
    let ends = endpoint_conditions(&max_phase, Some(&max_rate), &s.mesh, s.tolerances.endpoint)?;

    let tol = &s.tolerances;
    let min = |v: &[f64]| v.iter().cloned().fold(f64::INFINITY, f64::min);
    let last = |v: &[f64]| *v.last().unwrap();
    let mut report = VerificationReport::new();
    report
        .at_least("fidelity_min", min(&f_def), 1.0 - tol.deformed_infidelity)
        .at_least("fidelity_final", last(&f_def_ad), 1.0 - tol.endpoint_infidelity)
        .at_least("fidelity_min_counterdiabatic", min(&f_cd), 1.0 - tol.counterdiabatic_infidelity)
        .info("fidelity_final_bare", last(&f_bare))
        .at_most("invariant_residual_max", invariant, tol.invariant)
        .at_most("continuity_residual", continuity, tol.continuity)
        .at_most("hj_residual", hj, tol.hamilton_jacobi)
        .at_most("endpoint_phase", ends.phase_start, tol.endpoint)
        .at_most("endpoint_phase_rate", ends.rate_start, tol.endpoint)
        .info("endpoint_phase_end", ends.phase_end)
        .info("endpoint_phase_rate_end", ends.rate_end)
        .at_most("norm_drift", bare.norm_drift.max(with_cd.norm_drift).max(deformed.norm_drift), 1e-8);
    Ok((
        DriverComparison {
            times,
            bare: f_bare,
            counterdiabatic: f_cd,
            deformed: f_def,
            deformed_vs_adiabatic: f_def_ad,
            deformation: deformation.clone(),
            invariant_residual: invariant,
        },
        report,
    ))
}
