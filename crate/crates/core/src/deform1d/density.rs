use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{differentiate_uniform, SpatialGrid1D, TimeMesh};
use crate::schedule::Schedule;
use crate::spectral::AdiabaticTrack;
use crate::state::Basis;

/// Normalized reference profiles `f(u)` with `int f du = 1`.
///
/// These are the densities of the two lowest harmonic-oscillator states
/// for `m = omega = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    /// `pi^{-1/2} exp(-u^2)`
    Gaussian,
    /// `2 pi^{-1/2} u^2 exp(-u^2)`, one node at `u = 0`
    FirstExcited,
}

impl Profile {
    pub fn value(self, u: f64) -> f64 {
        let g = (-u * u).exp() / PI.sqrt();
        match self {
            Profile::Gaussian => g,
            Profile::FirstExcited => 2.0 * u * u * g,
        }
    }

    pub fn derivative(self, u: f64) -> f64 {
        let g = (-u * u).exp() / PI.sqrt();
        match self {
            Profile::Gaussian => -2.0 * u * g,
            Profile::FirstExcited => (4.0 * u - 4.0 * u * u * u) * g,
        }
    }
}

/// Probability density of one adiabatic state and its time derivative,
/// sampled on a grid at every mesh time.
#[derive(Debug, Clone)]
pub struct DensityField {
    grid: SpatialGrid1D<f64>,
    mesh: TimeMesh<f64>,
    rho: Vec<Vec<f64>>,
    rate: Vec<Vec<f64>>,
}

impl DensityField {
    /// Checks shapes and nonnegativity; `rate` is `d rho / dt`.
    pub fn new(
        grid: SpatialGrid1D<f64>,
        mesh: TimeMesh<f64>,
        rho: Vec<Vec<f64>>,
        rate: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if rho.len() != mesh.len() || rate.len() != mesh.len() {
            return Err(Error::invalid("density needs one slice per mesh time"));
        }
        for (r, d) in rho.iter().zip(&rate) {
            if r.len() != grid.len() || d.len() != grid.len() {
                return Err(Error::invalid("density slice length differs from grid"));
            }
            if r.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) || d.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid("density must be finite and nonnegative"));
            }
        }
        Ok(Self { grid, mesh, rho, rate })
    }

    /// Density samples with `d rho / dt` from central time differences.
    pub fn from_samples(grid: SpatialGrid1D<f64>, mesh: TimeMesh<f64>, rho: Vec<Vec<f64>>) -> Result<Self> {
        if rho.len() != mesh.len() {
            return Err(Error::invalid("density needs one slice per mesh time"));
        }
        if rho.iter().any(|r| r.len() != grid.len()) {
            return Err(Error::invalid("density slice length differs from grid"));
        }
        let mut rate = vec![vec![0.0; grid.len()]; mesh.len()];
        let mut column = vec![0.0; mesh.len()];
        for i in 0..grid.len() {
            for (k, c) in column.iter_mut().enumerate() {
                *c = rho[k][i];
            }
            for (k, d) in differentiate_uniform(&column, mesh.dt()).into_iter().enumerate() {
                rate[k][i] = d;
            }
        }
        Self::new(grid, mesh, rho, rate)
    }

    /// `rho = f(x - x0(t))`, `d rho / dt = -x0_dot f'(x - x0)`.
    pub fn transport(
        grid: SpatialGrid1D<f64>,
        mesh: TimeMesh<f64>,
        profile: Profile,
        x0: &dyn Schedule<f64>,
    ) -> Result<Self> {
        let xs = grid.points();
        let mut rho = Vec::with_capacity(mesh.len());
        let mut rate = Vec::with_capacity(mesh.len());
        for t in mesh.times() {
            let (c, v, _) = x0.jet(t);
            rho.push(xs.iter().map(|&x| profile.value(x - c)).collect());
            rate.push(xs.iter().map(|&x| -v * profile.derivative(x - c)).collect());
        }
        Self::new(grid, mesh, rho, rate)
    }

    /// `rho = f(x / xi) / xi`.
    pub fn dilatation(
        grid: SpatialGrid1D<f64>,
        mesh: TimeMesh<f64>,
        profile: Profile,
        xi: &dyn Schedule<f64>,
    ) -> Result<Self> {
        let xs = grid.points();
        let mut rho = Vec::with_capacity(mesh.len());
        let mut rate = Vec::with_capacity(mesh.len());
        for t in mesh.times() {
            let (s, sd, _) = xi.jet(t);
            if !(s > 0.0) {
                return Err(Error::Domain(format!("xi({t}) = {s} must be positive")));
            }
            rho.push(xs.iter().map(|&x| profile.value(x / s) / s).collect());
            rate.push(
                xs.iter()
                    .map(|&x| {
                        let u = x / s;
                        -(sd / (s * s)) * (profile.value(u) + u * profile.derivative(u))
                    })
                    .collect(),
            );
        }
        Self::new(grid, mesh, rho, rate)
    }

    /// Density of a tracked bound state, `rho = |n(x, t)|^2`.
    pub fn from_track(track: &AdiabaticTrack, grid: SpatialGrid1D<f64>) -> Result<Self> {
        if track.basis() == Basis::Discrete || track.dim() != grid.len() {
            return Err(Error::invalid("track does not live on this grid"));
        }
        let rho = track
            .vectors()
            .iter()
            .map(|v| v.iter().map(|a| a * a).collect())
            .collect();
        Self::from_samples(grid, *track.mesh(), rho)
    }

    pub fn grid(&self) -> &SpatialGrid1D<f64> {
        &self.grid
    }

    pub fn mesh(&self) -> &TimeMesh<f64> {
        &self.mesh
    }

    pub fn density(&self, k: usize) -> &[f64] {
        &self.rho[k]
    }

    pub fn rate(&self, k: usize) -> &[f64] {
        &self.rate[k]
    }

    /// Largest deviation of `int rho dx` from 1 and of `int d rho/dt dx`
    /// from 0 over the mesh.
    pub fn conservation_residuals(&self) -> (f64, f64) {
        let dx = self.grid.spacing();
        let mut norm: f64 = 0.0;
        let mut flow: f64 = 0.0;
        for (r, d) in self.rho.iter().zip(&self.rate) {
            norm = norm.max((r.iter().sum::<f64>() * dx - 1.0).abs());
            flow = flow.max((d.iter().sum::<f64>() * dx).abs());
        }
        (norm, flow)
    }

    /// Enforces the normalization invariants at tolerance `tol`.
    pub fn check(&self, tol: f64) -> Result<()> {
        let (norm, flow) = self.conservation_residuals();
        if norm > tol || flow > tol {
            return Err(Error::invalid(format!(
                "density not conserved: |int rho - 1| = {norm:e}, |int rho_t| = {flow:e}"
            )));
        }
        Ok(())
    }
}
