use std::sync::Arc;

use num_complex::Complex64;
use unideform::deform1d::{dilatation_potential, transport_potential};
use unideform::evolve::{split_step_1d, SplitStepOptions};
use unideform::verify::{fidelity, VerificationReport};
use unideform::{normalize, Basis, Grid1D, Potential1D, Result, Schedule, SharedSchedule, Smoothstep, StateVector};

use super::Outcome;
use crate::config::ScenarioConfig;
use crate::output::Series;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveDrive {
    Transport,
    Dilatation,
}

type Field = Box<dyn Fn(f64, f64) -> Result<f64>>;

/// Ground state of `m w^2 (x - c)^2 / (2 s^4)` with the phase `exp(-i phi)`.
fn target(grid: &Grid1D, mass: f64, omega: f64, center: f64, scale: f64, phase: &dyn Fn(f64) -> Result<f64>) -> Result<StateVector> {
    let k = mass * omega / (scale * scale);
    let amps = grid
        .points()
        .into_iter()
        .map(|x| {
            let u = x - center;
            Ok(Complex64::from_polar((-0.5 * k * u * u).exp(), -phase(x)?))
        })
        .collect::<Result<Vec<_>>>()?;
    normalize(&StateVector::new(amps, Basis::Grid { spacing: grid.spacing() }), Some(grid))
}

pub fn run_wave(cfg: &ScenarioConfig, drive: WaveDrive) -> Result<Outcome> {
    let p = &cfg.physics;
    let n = &cfg.numerics;
    let mesh = cfg.mesh()?;
    let grid = Grid1D::new(n.x_min, n.x_max, n.n_points)?;
    let (m, w) = (p.mass, p.omega);

    let (family, control, driver, phase): (Potential1D, SharedSchedule<f64>, Field, Field) = match drive {
        WaveDrive::Transport => {
            let x0: SharedSchedule<f64> = Arc::new(Smoothstep::new(0.0, p.shift, n.t_start, n.t_end)?);
            let d = Arc::new(transport_potential(x0.clone(), m)?);
            let d2 = d.clone();
            (
                Potential1D::harmonic_transport(m, w, x0.clone())?,
                x0,
                Box::new(move |x, t| Ok(d.potential(x, t))),
                Box::new(move |x, t| d2.phase(x, t)),
            )
        }
        WaveDrive::Dilatation => {
            let xi: SharedSchedule<f64> = Arc::new(Smoothstep::new(p.xi_start, p.xi_end, n.t_start, n.t_end)?);
            let d = Arc::new(dilatation_potential(xi.clone(), m)?);
            let d2 = d.clone();
            (
                Potential1D::harmonic_dilatation(m, w, xi.clone())?,
                xi,
                Box::new(move |x, t| d.potential(x, t)),
                Box::new(move |x, t| d2.phase(x, t)),
            )
        }
    };
    let target_at = |t: f64| -> Result<StateVector> {
        let c = control.eval(t);
        match drive {
            WaveDrive::Transport => target(&grid, m, w, c, 1.0, &|x| phase(x, t)),
            WaveDrive::Dilatation => target(&grid, m, w, 0.0, c, &|x| phase(x, t)),
        }
    };

    // driver errors surface after the run
    let failure = std::cell::RefCell::new(None);
    let extra = |x: f64, t: f64| match driver(x, t) {
        Ok(v) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            0.0
        }
    };
    let psi0 = target_at(mesh.t_start())?;
    let opts = SplitStepOptions { sample_every: n.sample_every, ..SplitStepOptions::default() };
    let deformed = split_step_1d(&psi0, &family, Some(&extra), &grid, &mesh, &opts)?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let bare = split_step_1d(&psi0, &family, None, &grid, &mesh, &opts)?;

    let mut series = Series::new(drive_name(drive), &["t", "fidelity_deformed", "fidelity_bare"]);
    let mut f_min = f64::INFINITY;
    for (k, &t) in deformed.times.iter().enumerate() {
        let goal = target_at(t)?;
        let fd = fidelity(&goal, &deformed.trajectory[k])?;
        let fb = fidelity(&goal, &bare.trajectory[k])?;
        f_min = f_min.min(fd);
        series.push(vec![t, fd, fb]);
    }
    let last = series.rows.last().cloned().unwrap_or_default();
    let (f_def, f_bare) = (last[1], last[2]);

    let goal = target_at(mesh.t_end())?;
    let mut profile = Series::new(
        &format!("{}_profile", drive_name(drive)),
        &["x", "density_deformed", "density_bare", "density_target"],
    );
    for (i, x) in grid.points().into_iter().enumerate() {
        profile.push(vec![
            x,
            deformed.final_state.amplitudes()[i].norm_sqr(),
            bare.final_state.amplitudes()[i].norm_sqr(),
            goal.amplitudes()[i].norm_sqr(),
        ]);
    }

    let mut report = VerificationReport::new();
    report
        .at_least("fidelity_final", f_def, 1.0 - n.fidelity_tol)
        .at_least("fidelity_min", f_min, 1.0 - n.fidelity_tol)
        .info("fidelity_final_bare", f_bare)
        .info("fidelity_gain", f_def - f_bare)
        .at_most("norm_drift", deformed.norm_drift.max(bare.norm_drift), n.norm_tol);
    Ok(Outcome { series: vec![series, profile], report })
}

fn drive_name(drive: WaveDrive) -> &'static str {
    match drive {
        WaveDrive::Transport => "transport",
        WaveDrive::Dilatation => "dilatation",
    }
}
