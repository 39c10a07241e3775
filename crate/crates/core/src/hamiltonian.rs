//! Adiabatic Hamiltonian families: a particle in a time-dependent 1D
//! potential, or a real-symmetric matrix function of time.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::SpatialGrid1D;
use crate::schedule::{Schedule, SharedSchedule, Smoothstep};

pub type PotentialFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type MatrixFn = Arc<dyn Fn(f64) -> DMatrix<f64> + Send + Sync>;

/// Symmetry tolerance applied to every sampled matrix.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// `H = p^2 / 2m + U(x, t)`.
#[derive(Clone)]
pub struct Potential1D {
    mass: f64,
    potential: PotentialFn,
    rate: Option<PotentialFn>,
}

impl fmt::Debug for Potential1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Potential1D")
            .field("mass", &self.mass)
            .field("analytic_rate", &self.rate.is_some())
            .finish()
    }
}

impl Potential1D {
    pub fn new(mass: f64, potential: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::invalid(format!("mass must be positive (got {mass})")));
        }
        Ok(Self {
            mass,
            potential: Arc::new(potential),
            rate: None,
        })
    }

    /// Attaches an analytic `dU/dt`.
    pub fn with_rate(mut self, rate: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.rate = Some(Arc::new(rate));
        self
    }

    /// Static harmonic well `m w^2 x^2 / 2`.
    pub fn harmonic(mass: f64, omega: f64) -> Result<Self> {
        let k = mass * omega * omega;
        Ok(Self::new(mass, move |x, _| 0.5 * k * x * x)?.with_rate(|_, _| 0.0))
    }

    /// Harmonic well translated by `x0(t)`: `U0(x - x0(t))`.
    pub fn harmonic_transport(mass: f64, omega: f64, x0: SharedSchedule<f64>) -> Result<Self> {
        let k = mass * omega * omega;
        let x0_rate = x0.clone();
        Ok(Self::new(mass, move |x, t| {
            let u = x - x0.eval(t);
            0.5 * k * u * u
        })?
        .with_rate(move |x, t| -k * (x - x0_rate.eval(t)) * x0_rate.d1(t)))
    }

    /// Dilated harmonic well `xi^-2 U0(x / xi(t))` with `U0 = m w^2 x^2 / 2`,
    /// i.e. `m w^2 x^2 / (2 xi^4)`.
    pub fn harmonic_dilatation(mass: f64, omega: f64, xi: SharedSchedule<f64>) -> Result<Self> {
        let k = mass * omega * omega;
        let xi_rate = xi.clone();
        Ok(Self::new(mass, move |x, t| 0.5 * k * x * x / xi.eval(t).powi(4))?.with_rate(move |x, t| {
            let s = xi_rate.eval(t);
            -2.0 * k * x * x * xi_rate.d1(t) / s.powi(5)
        }))
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn value(&self, x: f64, t: f64) -> f64 {
        (self.potential)(x, t)
    }

    /// `dU/dt`, analytic when available, else a central difference.
    pub fn rate(&self, x: f64, t: f64) -> f64 {
        match &self.rate {
            Some(r) => r(x, t),
            None => {
                let h = 1e-5 * t.abs().max(1.0);
                (self.value(x, t + h) - self.value(x, t - h)) / (2.0 * h)
            }
        }
    }

    pub fn on_grid(&self, grid: &SpatialGrid1D<f64>, t: f64) -> Vec<f64> {
        grid.samples(|x| self.value(x, t))
    }

    /// Checks that `U(., t)` is finite on the grid (hence bounded below there).
    pub fn check_on_grid(&self, grid: &SpatialGrid1D<f64>, t: f64) -> Result<()> {
        match self.on_grid(grid, t).iter().position(|u| !u.is_finite()) {
            Some(i) => Err(Error::Domain(format!(
                "potential not finite at x = {} (t = {t})",
                grid.point(i)
            ))),
            None => Ok(()),
        }
    }
}

/// Real symmetric `N x N` matrix function with its time derivative.
#[derive(Clone)]
pub struct DiscreteFamily {
    dim: usize,
    matrix: MatrixFn,
    derivative: MatrixFn,
}

impl fmt::Debug for DiscreteFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiscreteFamily").field("dim", &self.dim).finish()
    }
}

impl DiscreteFamily {
    pub fn new(
        dim: usize,
        matrix: impl Fn(f64) -> DMatrix<f64> + Send + Sync + 'static,
        derivative: impl Fn(f64) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Result<Self> {
        if dim < 2 {
            return Err(Error::invalid(format!("discrete family needs N >= 2 (got {dim})")));
        }
        Ok(Self {
            dim,
            matrix: Arc::new(matrix),
            derivative: Arc::new(derivative),
        })
    }

    /// `H(t) = sum_k f_k(t) M_k` with constant symmetric `M_k`.
    pub fn from_terms(terms: Vec<(SharedSchedule<f64>, DMatrix<f64>)>) -> Result<Self> {
        let dim = terms
            .first()
            .map(|(_, m)| m.nrows())
            .ok_or_else(|| Error::invalid("family needs at least one term"))?;
        for (_, m) in &terms {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::invalid("all terms must be square with equal size"));
            }
            if symmetry_residual(m) > SYMMETRY_TOL {
                return Err(Error::invalid("term matrices must be symmetric"));
            }
        }
        let terms = Arc::new(terms);
        let d_terms = terms.clone();
        Self::new(
            dim,
            move |t| {
                terms
                    .iter()
                    .fold(DMatrix::zeros(dim, dim), |acc, (f, m)| acc + m * f.eval(t))
            },
            move |t| {
                d_terms
                    .iter()
                    .fold(DMatrix::zeros(dim, dim), |acc, (f, m)| acc + m * f.d1(t))
            },
        )
    }

    /// `(h/2) [[cos theta, sin theta], [sin theta, -cos theta]]`.
    pub fn two_level(theta: SharedSchedule<f64>, h: SharedSchedule<f64>) -> Result<Self> {
        let (th, hh) = (theta.clone(), h.clone());
        Self::new(
            2,
            move |t| {
                let (a, m) = (theta.eval(t), 0.5 * h.eval(t));
                DMatrix::from_row_slice(2, 2, &[m * a.cos(), m * a.sin(), m * a.sin(), -m * a.cos()])
            },
            move |t| {
                let (a, a1) = (th.eval(t), th.d1(t));
                let (m, m1) = (0.5 * hh.eval(t), 0.5 * hh.d1(t));
                let c = m1 * a.cos() - m * a.sin() * a1;
                let s = m1 * a.sin() + m * a.cos() * a1;
                DMatrix::from_row_slice(2, 2, &[c, s, s, -c])
            },
        )
    }

    /// Random smooth family `A + s(t) (B - A)` with a quintic ramp `s`
    /// over `[t_start, t_end]`. `A` and `B` are seeded random symmetric
    /// matrices with a spread diagonal. `dH/dt` vanishes at both ends.
    pub fn random_smooth(dim: usize, seed: u64, t_start: f64, t_end: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::invalid("random family needs N >= 2"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || {
            let mut m = DMatrix::<f64>::zeros(dim, dim);
            for i in 0..dim {
                m[(i, i)] = 2.0 * i as f64 - (dim - 1) as f64 + rng.gen_range(-0.3..0.3);
                for j in 0..i {
                    let v = rng.gen_range(-0.8..0.8);
                    m[(i, j)] = v;
                    m[(j, i)] = v;
                }
            }
            m
        };
        let a = draw();
        let b = draw();
        let ramp: SharedSchedule<f64> = Arc::new(Smoothstep::new(0.0, 1.0, t_start, t_end)?);
        let one: SharedSchedule<f64> = Arc::new(crate::schedule::Constant(1.0));
        Self::from_terms(vec![(one, a.clone()), (ramp, b - a)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `H(t)`, checked for symmetry.
    pub fn at(&self, t: f64) -> Result<DMatrix<f64>> {
        let m = (self.matrix)(t);
        if m.nrows() != self.dim || m.ncols() != self.dim {
            return Err(Error::invalid("matrix function returned wrong size"));
        }
        let r = symmetry_residual(&m);
        if r > SYMMETRY_TOL {
            return Err(Error::invalid(format!("H({t}) not symmetric (residual {r:e})")));
        }
        Ok(m)
    }

    pub fn derivative_at(&self, t: f64) -> DMatrix<f64> {
        (self.derivative)(t)
    }
}

/// Tagged union of the two system classes.
#[derive(Debug, Clone)]
pub enum HamiltonianFamily {
    Potential1D(Potential1D),
    DiscreteRealSymmetric(DiscreteFamily),
}

/// Largest entrywise asymmetry `|M_ij - M_ji|`.
pub fn symmetry_residual(m: &DMatrix<f64>) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..i {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}
