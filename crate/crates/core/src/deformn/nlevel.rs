use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::grid::{differentiate_fourth_order, TimeMesh};
use crate::hamiltonian::DiscreteFamily;
use crate::spectral::AdiabaticTrack;

/// Components with `|<a|n>|` below this leave `v_a` undetermined.
pub const MIN_COMPONENT: f64 = 1e-10;

const POLISH_STEPS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct NLevelOptions {
    pub tol: f64,
    pub max_iterations: usize,
    pub max_halvings: usize,
    /// Phases at the first mesh time (last entry is the gauge and ignored).
    pub initial: Option<Vec<f64>>,
}

impl Default for NLevelOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iterations: 50, max_halvings: 20, initial: None }
    }
}

/// Diagonal phases `phi_a(t)` (gauge `phi_N = 0`) and potentials `v_a(t)`
/// that keep one adiabatic level on track.
#[derive(Debug, Clone)]
pub struct DiagonalDeformation {
    pub mesh: TimeMesh<f64>,
    pub level: usize,
    pub phases: Vec<DVector<f64>>,
    pub rates: Vec<DVector<f64>>,
    pub potentials: Vec<DVector<f64>>,
    /// Newton iterations used at each mesh time.
    pub iterations: Vec<usize>,
    /// Final continuity residual norm at each mesh time.
    pub residuals: Vec<f64>,
}

impl DiagonalDeformation {
    /// `v(t_k)` minus its mean, which only shifts the global phase.
    pub fn centered_potential(&self, k: usize) -> DVector<f64> {
        let v = &self.potentials[k];
        v.add_scalar(-v.mean())
    }

    /// Potentials at `t`, linear between mesh times.
    pub fn potential_at(&self, t: f64) -> Result<DVector<f64>> {
        interpolate(&self.mesh, &self.potentials, t)
    }

    pub fn phases_at(&self, t: f64) -> Result<DVector<f64>> {
        interpolate(&self.mesh, &self.phases, t)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().cloned().fold(0.0, f64::max)
    }
}

fn interpolate(mesh: &TimeMesh<f64>, values: &[DVector<f64>], t: f64) -> Result<DVector<f64>> {
    let (k, w) = mesh
        .locate(t)
        .ok_or_else(|| Error::invalid(format!("t = {t} outside the deformation mesh")))?;
    if k + 1 >= values.len() || w == 0.0 {
        return Ok(values[k].clone());
    }
    Ok(&values[k] * (1.0 - w) + &values[k + 1] * w)
}

/// `F_a = <a|n_dot> - sum_b H_ab sin(phi_a - phi_b) n_b`.
pub fn continuity_residual_discrete(h: &DMatrix<f64>, n: &DVector<f64>, n_dot: &DVector<f64>, phi: &DVector<f64>) -> DVector<f64> {
    let dim = n.len();
    DVector::from_fn(dim, |a, _| {
        n_dot[a] - (0..dim).map(|b| h[(a, b)] * (phi[a] - phi[b]).sin() * n[b]).sum::<f64>()
    })
}

fn jacobian(h: &DMatrix<f64>, n: &DVector<f64>, phi: &DVector<f64>) -> DMatrix<f64> {
    let dim = n.len();
    let mut j = DMatrix::zeros(dim, dim - 1);
    for a in 0..dim {
        for c in 0..dim - 1 {
            j[(a, c)] = if c == a {
                -(0..dim)
                    .filter(|&b| b != a)
                    .map(|b| h[(a, b)] * (phi[a] - phi[b]).cos() * n[b])
                    .sum::<f64>()
            } else {
                h[(a, c)] * (phi[a] - phi[c]).cos() * n[c]
            };
        }
    }
    j
}

/// Gauss-Newton with step halving from `start`; returns
/// `(phi, iterations, residual norm)`.
fn solve_phases(
    h: &DMatrix<f64>,
    n: &DVector<f64>,
    n_dot: &DVector<f64>,
    start: DVector<f64>,
    t: f64,
    opts: &NLevelOptions,
) -> Result<(DVector<f64>, usize, f64)> {
    let dim = n.len();
    let mut phi = start;
    phi[dim - 1] = 0.0;
    let mut f = continuity_residual_discrete(h, n, n_dot, &phi);
    let mut norm = f.norm();
    let mut iterations = 0;
    let mut polish = 0;
    while iterations < opts.max_iterations {
        if norm <= opts.tol {
            // a few extra steps keep solver noise out of the time derivative
            if polish == POLISH_STEPS || norm < 1e-15 {
                break;
            }
            polish += 1;
        }
        let j = jacobian(h, n, &phi);
        let step = j
            .svd(true, true)
            .solve(&(-&f), 1e-12)
            .map_err(|e| Error::invalid(format!("least-squares solve failed: {e}")))?;
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..=opts.max_halvings {
            let mut trial = phi.clone();
            for c in 0..dim - 1 {
                trial[c] += scale * step[c];
            }
            let ft = continuity_residual_discrete(h, n, n_dot, &trial);
            if ft.norm() < norm {
                phi = trial;
                f = ft;
                norm = f.norm();
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        iterations += 1;
        if !accepted {
            break;
        }
    }
    if norm <= opts.tol {
        return Ok((phi, iterations, norm));
    }
    Err(Error::NoSolution { time: t, iterations, residual: norm })
}

/// Rejects tracks where some `<a|n>` vanishes on the mesh or changes sign
/// between mesh times; `v_a` is undetermined there and `phi_a` diverges.
fn check_components(track: &AdiabaticTrack) -> Result<()> {
    let times = track.mesh().times();
    let vs = track.vectors();
    for a in 0..track.dim() {
        for k in 0..times.len() {
            let here = vs[k][a];
            if here.abs() < MIN_COMPONENT {
                let mut last = k;
                while last + 1 < times.len() && vs[last + 1][a].abs() < MIN_COMPONENT {
                    last += 1;
                }
                return Err(Error::UndeterminedPotential { component: a, t_first: times[k], t_last: times[last] });
            }
            if k + 1 < times.len() && here * vs[k + 1][a] < 0.0 {
                return Err(Error::UndeterminedPotential { component: a, t_first: times[k], t_last: times[k + 1] });
            }
        }
    }
    Ok(())
}

/// Solves the discrete continuity equation for the diagonal phases along
/// `track`, then `v_a = phi_a_dot + E_n - sum_b H_ab cos(phi_a - phi_b) n_b / n_a`.
pub fn nlevel_deformation(family: &DiscreteFamily, track: &AdiabaticTrack, opts: &NLevelOptions) -> Result<DiagonalDeformation> {
    let dim = family.dim();
    if track.dim() != dim {
        return Err(Error::invalid(format!("track dimension {} differs from family dimension {dim}", track.dim())));
    }
    let mesh = *track.mesh();
    let times = mesh.times();
    let hs = times.iter().map(|&t| family.at(t)).collect::<Result<Vec<_>>>()?;

    check_components(track)?;

    let mut guess = match &opts.initial {
        Some(p) if p.len() == dim => DVector::from_column_slice(p),
        Some(p) => return Err(Error::invalid(format!("initial phases need {dim} entries (got {})", p.len()))),
        None => DVector::zeros(dim),
    };
    let mut phases = Vec::with_capacity(times.len());
    let mut iterations = Vec::with_capacity(times.len());
    let mut residuals = Vec::with_capacity(times.len());
    for (k, &t) in times.iter().enumerate() {
        let (phi, it, r) = solve_phases(&hs[k], &track.vectors()[k], &track.derivatives()[k], guess, t, opts)?;
        guess = phi.clone();
        phases.push(phi);
        iterations.push(it);
        residuals.push(r);
    }

    let mut rates = vec![DVector::zeros(dim); times.len()];
    for a in 0..dim {
        let column: Vec<f64> = phases.iter().map(|p| p[a]).collect();
        for (k, d) in differentiate_fourth_order(&column, mesh.dt()).into_iter().enumerate() {
            rates[k][a] = d;
        }
    }

    let potentials = (0..times.len())
        .map(|k| {
            let (h, n, phi) = (&hs[k], &track.vectors()[k], &phases[k]);
            let e = track.energies()[k];
            DVector::from_fn(dim, |a, _| {
                let coupling: f64 = (0..dim).map(|b| h[(a, b)] * (phi[a] - phi[b]).cos() * n[b]).sum();
                rates[k][a] + e - coupling / n[a]
            })
        })
        .collect();

    Ok(DiagonalDeformation { mesh, level: track.level(), phases, rates, potentials, iterations, residuals })
}

/// How far the centered potentials of several levels disagree.
#[derive(Debug, Clone)]
pub struct StateIndependence {
    pub deformations: Vec<DiagonalDeformation>,
    /// Largest spread of the phases `phi_a - phi_N` across levels.
    pub phase_spread: f64,
    /// Largest entrywise spread of centered potentials across levels.
    pub max_spread: f64,
}

impl StateIndependence {
    pub fn holds(&self, tol: f64) -> bool {
        self.max_spread <= tol && self.phase_spread <= tol
    }
}

/// Deforms every given track and compares the resulting potentials up to
/// a time-dependent shift.
pub fn state_independence_check(
    family: &DiscreteFamily,
    tracks: &[AdiabaticTrack],
    opts: &NLevelOptions,
) -> Result<StateIndependence> {
    if tracks.is_empty() {
        return Err(Error::invalid("need at least one track"));
    }
    let deformations = tracks
        .iter()
        .map(|tr| nlevel_deformation(family, tr, opts))
        .collect::<Result<Vec<_>>>()?;
    let mut spread: f64 = 0.0;
    let mut phase_spread: f64 = 0.0;
    for k in 0..deformations[0].mesh.len() {
        let base = deformations[0].centered_potential(k);
        for d in &deformations[1..] {
            spread = spread.max((d.centered_potential(k) - &base).amax());
            phase_spread = phase_spread.max((&d.phases[k] - &deformations[0].phases[k]).amax());
        }
    }
    Ok(StateIndependence { deformations, phase_spread, max_spread: spread })
}
