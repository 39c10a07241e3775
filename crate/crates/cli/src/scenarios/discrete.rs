use std::sync::Arc;

use nalgebra::DMatrix;
use unideform::deformn::{state_independence_check, NLevelOptions};
use unideform::spectral::{track_levels, DerivativeMethod, DEFAULT_MIN_GAP};
use unideform::verify::{compare_drivers, DriverComparison, DriverScenario, Tolerances, VerificationReport};
use unideform::{DiscreteFamily, Polynomial, Result, SharedSchedule};

use super::Outcome;
use crate::config::{Kind, ScenarioConfig};
use crate::output::Series;

pub(super) fn scenario_settings(cfg: &ScenarioConfig) -> (Tolerances, NLevelOptions) {
    let n = &cfg.numerics;
    let tolerances = Tolerances {
        counterdiabatic_infidelity: n.cd_fidelity_tol,
        deformed_infidelity: n.fidelity_tol,
        endpoint_infidelity: n.endpoint_fidelity_tol,
        invariant: n.invariant_tol,
        continuity: n.continuity_tol,
        hamilton_jacobi: n.hj_tol,
        endpoint: n.endpoint_tol,
    };
    let newton = NLevelOptions { tol: n.newton_tol, max_iterations: n.max_iterations, ..NLevelOptions::default() };
    (tolerances, newton)
}

/// Fidelity series of the three drivers, plus phases and potentials.
pub(super) fn driver_outputs(cmp: &DriverComparison) -> (Series, Series) {
    let mut fid = Series::new(
        "fidelity",
        &["t", "fidelity_bare", "fidelity_counterdiabatic", "fidelity_deformed", "fidelity_deformed_vs_adiabatic"],
    );
    for (k, &t) in cmp.times.iter().enumerate() {
        fid.push(vec![t, cmp.bare[k], cmp.counterdiabatic[k], cmp.deformed[k], cmp.deformed_vs_adiabatic[k]]);
    }
    let d = &cmp.deformation;
    let dim = d.phases.first().map_or(0, |p| p.len());
    let mut columns = vec!["t".to_string()];
    columns.extend((0..dim).map(|a| format!("phi_{a}")));
    columns.extend((0..dim).map(|a| format!("v_{a}")));
    columns.extend(["newton_iterations".to_string(), "newton_residual".to_string()]);
    let mut sol = Series::with_columns("nlevel", columns);
    for (k, &t) in cmp.times.iter().enumerate() {
        let mut row = vec![t];
        row.extend(d.phases[k].iter());
        row.extend(d.potentials[k].iter());
        row.push(d.iterations[k] as f64);
        row.push(d.residuals[k]);
        sol.push(row);
    }
    (fid, sol)
}

/// The family a discrete config describes.
pub fn nlevel_family(cfg: &ScenarioConfig) -> Result<DiscreteFamily> {
    let p = &cfg.physics;
    match cfg.kind {
        Kind::Custom => {
            let terms = p
                .terms
                .iter()
                .map(|term| {
                    let f: SharedSchedule<f64> = Arc::new(Polynomial::new(term.coeffs.clone())?);
                    let n = term.matrix.len();
                    let m = DMatrix::from_fn(n, n, |i, j| term.matrix[i][j]);
                    Ok((f, m))
                })
                .collect::<Result<Vec<_>>>()?;
            DiscreteFamily::from_terms(terms)
        }
        _ => DiscreteFamily::random_smooth(p.n, p.seed, cfg.numerics.t_start, cfg.numerics.t_end),
    }
}

pub fn run_discrete(cfg: &ScenarioConfig) -> Result<Outcome> {
    let family = nlevel_family(cfg)?;
    let mesh = cfg.mesh()?;
    let (tolerances, newton) = scenario_settings(cfg);
    let scenario = DriverScenario { family: &family, mesh, level: cfg.physics.level, tolerances, newton: newton.clone() };
    let (cmp, mut report) = compare_drivers(&scenario)?;

    let d = &cmp.deformation;
    let tracks = track_levels(&family, &mesh, DerivativeMethod::Perturbative, DEFAULT_MIN_GAP)?;
    let mut extra = VerificationReport::new();
    extra
        .at_most("newton_iterations_max", d.iterations.iter().copied().max().unwrap_or(0) as f64, newton.max_iterations as f64)
        .at_most("newton_residual_max", d.max_residual(), newton.tol);
    // other levels may hit component crossings; then the comparison is left out
    match state_independence_check(&family, &tracks, &newton) {
        Ok(ind) => {
            extra
                .info("potential_spread_across_levels", ind.max_spread)
                .info("phase_spread_across_levels", ind.phase_spread);
        }
        Err(e) if e.is_numerical() => {}
        Err(e) => return Err(e),
    }
    report.extend(extra);

    let (fid, sol) = driver_outputs(&cmp);
    Ok(Outcome { series: vec![sol, fid], report })
}
