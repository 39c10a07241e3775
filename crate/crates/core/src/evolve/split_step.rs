use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{sample_due, PropagationResult};
use crate::error::{Error, Result};
use crate::grid::{SpatialGrid1D, TimeMesh};
use crate::hamiltonian::Potential1D;
use crate::state::{Basis, StateVector};

/// Largest `|psi|` allowed at either grid edge.
pub const DEFAULT_EDGE_TOL: f64 = 1e-8;

/// Bound on `dt * max |U + V|`.
pub const MAX_PHASE_PER_STEP: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitStepOptions {
    /// Keep every `sample_every`-th state (0 keeps only the ends).
    pub sample_every: usize,
    pub edge_tol: f64,
}

impl Default for SplitStepOptions {
    fn default() -> Self {
        Self { sample_every: 0, edge_tol: DEFAULT_EDGE_TOL }
    }
}

/// Strang splitting for `H = p^2/2m + U(x, t) + V(x, t)` on a periodic grid,
/// potentials taken at step midpoints.
pub fn split_step_1d(
    psi0: &StateVector,
    family: &Potential1D,
    extra: Option<&dyn Fn(f64, f64) -> f64>,
    grid: &SpatialGrid1D<f64>,
    mesh: &TimeMesh<f64>,
    opts: &SplitStepOptions,
) -> Result<PropagationResult> {
    let start = Instant::now();
    let n = grid.len();
    if psi0.len() != n {
        return Err(Error::invalid(format!("state has {} samples, grid has {n}", psi0.len())));
    }
    let dx = grid.spacing();
    let basis = Basis::Grid { spacing: dx };
    let dt = mesh.dt();
    let xs = grid.points();
    let mass = family.mass();

    let kinetic: Vec<Complex64> = (0..n)
        .map(|j| {
            let freq = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
            let k = 2.0 * PI * freq / (n as f64 * dx);
            Complex64::from_polar(1.0, -k * k / (2.0 * mass) * dt)
        })
        .collect();
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);
    let scale = 1.0 / n as f64;

    let mut psi: Vec<Complex64> = psi0.amplitudes().to_vec();
    let norm0 = StateVector::new(psi.clone(), basis).norm_sqr();
    let mut drift: f64 = 0.0;
    let mut times = vec![mesh.t_start()];
    let mut trajectory = vec![StateVector::new(psi.clone(), basis)];
    let mut half = vec![Complex64::new(0.0, 0.0); n];

    for k in 1..=mesh.n_steps() {
        let t_mid = mesh.time(k - 1) + 0.5 * dt;
        let mut peak: f64 = 0.0;
        for (i, &x) in xs.iter().enumerate() {
            let u = family.value(x, t_mid) + extra.map_or(0.0, |f| f(x, t_mid));
            if !u.is_finite() {
                return Err(Error::Domain(format!("potential not finite at x = {x}, t = {t_mid}")));
            }
            peak = peak.max(u.abs());
            half[i] = Complex64::from_polar(1.0, -0.5 * u * dt);
        }
        if dt * peak > MAX_PHASE_PER_STEP {
            return Err(Error::invalid(format!(
                "dt * max|U + V| = {:.3} exceeds {MAX_PHASE_PER_STEP} at t = {t_mid}; refine the mesh",
                dt * peak
            )));
        }
        for (p, h) in psi.iter_mut().zip(&half) {
            *p *= h;
        }
        forward.process(&mut psi);
        for (p, kin) in psi.iter_mut().zip(&kinetic) {
            *p *= kin * scale;
        }
        inverse.process(&mut psi);
        for (p, h) in psi.iter_mut().zip(&half) {
            *p *= h;
        }

        if sample_due(k, mesh.n_steps(), opts.sample_every) {
            let t = mesh.time(k);
            let edge = psi[0].norm().max(psi[n - 1].norm());
            if edge > opts.edge_tol {
                return Err(Error::GridTooSmall { time: t, amplitude: edge });
            }
            let state = StateVector::new(psi.clone(), basis);
            drift = drift.max((state.norm_sqr() - norm0).abs());
            times.push(t);
            trajectory.push(state);
        }
    }
    Ok(PropagationResult {
        final_state: StateVector::new(psi, basis),
        times,
        trajectory,
        norm_drift: drift,
        wall_time: start.elapsed(),
    })
}
