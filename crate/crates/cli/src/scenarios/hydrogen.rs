use std::sync::Arc;

use unideform::deform1d::{
    continuity_residual_radial, hydrogen_density, hydrogen_density_rate, HydrogenDilatation, HydrogenTranslation,
    RadialGeometry,
};
use unideform::schedule::Constant;
use unideform::verify::VerificationReport;
use unideform::{Grid1D, Result, Schedule, SharedSchedule, Smoothstep};

use super::Outcome;
use crate::config::ScenarioConfig;
use crate::output::Series;

const DENSITY_FLOOR: f64 = 1e-10;

/// Relative continuity residual on `grid` at `t`, from three time slices
/// `t - dt, t, t + dt`.
pub(crate) fn radial_residual(
    atom: &HydrogenDilatation<f64, SharedSchedule<f64>>,
    grid: &Grid1D,
    t: f64,
    dt: f64,
    mass: f64,
    geometry: RadialGeometry,
) -> Result<f64> {
    let r = grid.points();
    let mut rho = Vec::with_capacity(3);
    let mut grad = Vec::with_capacity(3);
    for s in [t - dt, t, t + dt] {
        let xi = atom.schedule().eval(s);
        rho.push(r.iter().map(|&x| hydrogen_density(x, xi)).collect());
        grad.push(r.iter().map(|&x| atom.fields(x, s).map(|f| f.dphi_dr)).collect::<Result<Vec<_>>>()?);
    }
    continuity_residual_radial(&r, dt, &rho, &grad, mass, geometry, DENSITY_FLOOR)
}

pub fn run_hydrogen(cfg: &ScenarioConfig) -> Result<Outcome> {
    let p = &cfg.physics;
    let n = &cfg.numerics;
    let m = p.mass;
    let xi: SharedSchedule<f64> = Arc::new(Smoothstep::new(p.xi_start, p.xi_end, n.t_start, n.t_end)?);
    let atom = HydrogenDilatation::new(xi.clone(), m)?;
    let grid = Grid1D::new(n.x_min, n.x_max, n.n_points)?;
    let t = n.t_eval;
    let (s, sd, _) = xi.jet(t);

    let r = grid.points();
    let dr = grid.spacing();
    let fields = r.iter().map(|&x| atom.fields(x, t)).collect::<Result<Vec<_>>>()?;
    let flux: Vec<f64> = r.iter().zip(&fields).map(|(&x, f)| x * x * hydrogen_density(x, s) * f.dphi_dr).collect();
    let rates: Vec<f64> = r.iter().map(|&x| hydrogen_density_rate(x, s, sd)).collect();
    let scale = rates.iter().fold(0.0, |a: f64, b| a.max(b.abs())).max(f64::MIN_POSITIVE);

    let mut series = Series::new("hydrogen", &["r", "z", "dphi", "V", "continuity_residual"]);
    for i in 1..r.len() - 1 {
        let div = (flux[i + 1] - flux[i - 1]) / (2.0 * dr) / (r[i] * r[i]);
        let residual = (rates[i] - div / m) / scale;
        series.push(vec![r[i], fields[i].z, fields[i].dphi_dr, fields[i].potential, residual]);
    }

    let dt = 1e-4 * (n.t_end - n.t_start);
    let spherical = radial_residual(&atom, &grid, t, dt, m, RadialGeometry::Spherical)?;
    let cylindrical = radial_residual(&atom, &grid, t, dt, m, RadialGeometry::Cylindrical)?;
    let refined = radial_residual(&atom, &grid.refined(), t, dt, m, RadialGeometry::Spherical)?;

    let spot_z = atom.fields(s, t)?.dphi_dz + m * s * sd / 4.0;

    let zero: SharedSchedule<f64> = Arc::new(Constant(0.0));
    let z0: SharedSchedule<f64> = Arc::new(Smoothstep::new(0.0, p.shift, n.t_start, n.t_end)?);
    let moving = HydrogenTranslation::new(p.xi_start, [zero.clone(), zero, z0.clone()], m)?;
    let f = moving.fields([0.0, 0.0, z0.eval(t) + p.xi_start], t)?;
    let spot_r = f.dphi_dr - 2.5 * m * f.r_dot;

    let mut report = VerificationReport::new();
    report
        .at_most("continuity_residual", spherical, n.residual_tol)
        .info("continuity_residual_refined", refined)
        .info("continuity_residual_cylindrical", cylindrical)
        .at_most("dilatation_spot_error", spot_z.abs(), n.spot_tol)
        .at_most("translation_spot_error", spot_r.abs(), n.spot_tol)
        .info("xi", s)
        .info("xi_dot", sd);
    Ok(Outcome { series: vec![series], report })
}
