use std::sync::Arc;

use unideform::deformn::{
    axis_residuals, bloch_curves, generalized_axis_two_level, two_level_phase, two_level_potential, AxisTolerances,
};
use unideform::schedule::{FieldMagnitude, MixingAngle};
use unideform::verify::{compare_drivers, DriverScenario, VerificationReport};
use unideform::{DiscreteFamily, Polynomial, Result, Schedule, SharedSchedule};

use super::discrete::{driver_outputs, scenario_settings};
use super::{max_abs, Outcome};
use crate::config::ScenarioConfig;
use crate::output::Series;

/// `(theta, h)` for the field `(gamma, 0, c t^3)`.
pub fn cubic_schedules(c: f64, gamma: f64) -> Result<(SharedSchedule<f64>, SharedSchedule<f64>)> {
    let hz = Polynomial::new(vec![0.0, 0.0, 0.0, c])?;
    let theta: SharedSchedule<f64> = Arc::new(MixingAngle { gamma, field: hz.clone() });
    let h: SharedSchedule<f64> = Arc::new(FieldMagnitude { gamma, field: hz });
    Ok((theta, h))
}

fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

pub fn run_cubic(cfg: &ScenarioConfig) -> Result<Outcome> {
    let p = &cfg.physics;
    let mesh = cfg.mesh()?;
    let (theta, h) = cubic_schedules(p.c, p.gamma)?;
    let phase = two_level_phase(&*theta, &*h, &mesh)?;
    let v = two_level_potential(&phase, &*theta, &*h)?;
    let (plain, deformed) = bloch_curves(&*theta, &phase);

    let mut curves = Series::new(
        "twolevel",
        &["t", "theta", "phi", "v", "h_y", "nx", "ny", "nz", "nx_tilde", "ny_tilde", "nz_tilde"],
    );
    for (k, t) in mesh.times().into_iter().enumerate() {
        let (n, m) = (plain.vectors[k], deformed.vectors[k]);
        curves.push(vec![t, theta.eval(t), phase.phi[k], v[k], theta.d1(t), n[0], n[1], n[2], m[0], m[1], m[2]]);
    }

    let family = DiscreteFamily::two_level(theta.clone(), h)?;
    let (tolerances, newton) = scenario_settings(cfg);
    let scenario = DriverScenario { family: &family, mesh, level: p.level, tolerances, newton };
    let (cmp, mut report) = compare_drivers(&scenario)?;

    let gap = max_abs((2..mesh.len().saturating_sub(2)).map(|k| {
        let d = &cmp.deformation.potentials[k];
        d[0] - d[1] - v[k]
    }));
    let x = [1.0, 0.0, 0.0];
    let z = [0.0, 0.0, 1.0];
    let last = mesh.len() - 1;
    let mut extra = VerificationReport::new();
    extra
        .at_most(
            "bloch_start_error",
            distance(plain.vectors[0], x).max(distance(deformed.vectors[0], x)),
            cfg.numerics.endpoint_tol,
        )
        .at_most("bloch_end_error", distance(plain.vectors[last], z).max(distance(deformed.vectors[last], z)), 0.01)
        .info("theta_end", theta.eval(mesh.t_end()))
        .info("potential_closed_form_gap", gap);
    report.extend(extra);

    let (drivers, _) = driver_outputs(&cmp);
    Ok(Outcome { series: vec![curves, drivers], report })
}

pub fn run_axis(cfg: &ScenarioConfig) -> Result<Outcome> {
    let p = &cfg.physics;
    let n = &cfg.numerics;
    let mesh = cfg.mesh()?;
    let (theta, h) = cubic_schedules(p.c, p.gamma)?;
    let tol = AxisTolerances { rtol: n.rtol, atol: n.atol, ..AxisTolerances::default() };
    let a = generalized_axis_two_level(p.varphi, &*theta, &*h, &mesh, 0.0, &tol)?;

    let mut series = Series::new("twolevel_axis", &["t", "theta", "phi", "phi_dot", "v", "residual_1", "residual_2"]);
    for (k, t) in mesh.times().into_iter().enumerate() {
        let (r1, r2) = axis_residuals(p.varphi, &*theta, &*h, t, a.phi[k], a.phi_dot[k], a.v[k]);
        series.push(vec![t, theta.eval(t), a.phi[k], a.phi_dot[k], a.v[k], r1, r2]);
    }
    let (r1, r2) = a.max_residuals(&*theta, &*h);
    let mut report = VerificationReport::new();
    report
        .at_most("axis_residual_1", r1, n.residual_tol)
        .at_most("axis_residual_2", r2, n.residual_tol)
        .info("integrator_steps", a.steps as f64)
        .info("theta_end", theta.eval(mesh.t_end()));
    Ok(Outcome { series: vec![series], report })
}
