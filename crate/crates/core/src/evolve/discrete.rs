use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{sample_due, PropagationResult};
use crate::error::{Error, Result};
use crate::grid::TimeMesh;
use crate::hamiltonian::DiscreteFamily;
use crate::state::{Basis, StateVector};

/// Relative anti-Hermitian part tolerated in a sampled Hamiltonian.
pub const HERMITICITY_TOL: f64 = 1e-10;

/// `H(t) + diag(v(t)) + K(t)` as one complex matrix function.
pub fn discrete_driver<'a>(
    family: &'a DiscreteFamily,
    diagonal: Option<&'a dyn Fn(f64) -> Result<DVector<f64>>>,
    extra: Option<&'a dyn Fn(f64) -> Result<DMatrix<Complex64>>>,
) -> impl Fn(f64) -> Result<DMatrix<Complex64>> + 'a {
    move |t| {
        let mut h = family.at(t)?.map(|x| Complex64::new(x, 0.0));
        if let Some(v) = diagonal {
            let v = v(t)?;
            if v.len() != h.nrows() {
                return Err(Error::invalid("diagonal potential has the wrong length"));
            }
            for (a, va) in v.iter().enumerate() {
                h[(a, a)] += va;
            }
        }
        if let Some(k) = extra {
            h += k(t)?;
        }
        Ok(h)
    }
}

fn check_hermitian(h: &DMatrix<Complex64>, t: f64) -> Result<()> {
    if h.nrows() != h.ncols() {
        return Err(Error::invalid("Hamiltonian must be square"));
    }
    let r = (h - h.adjoint()).norm();
    if !r.is_finite() || r > HERMITICITY_TOL * h.norm().max(1.0) {
        return Err(Error::invalid(format!("Hamiltonian at t = {t} is not Hermitian (residual {r:e})")));
    }
    Ok(())
}

/// `exp(-i H dt)` for Hermitian `H`: Pauli form for `2 x 2`, eigenbasis otherwise.
pub fn midpoint_exponential(h: &DMatrix<Complex64>, dt: f64) -> DMatrix<Complex64> {
    if h.nrows() == 2 {
        let a0 = 0.5 * (h[(0, 0)].re + h[(1, 1)].re);
        let az = 0.5 * (h[(0, 0)].re - h[(1, 1)].re);
        let ax = 0.5 * (h[(0, 1)].re + h[(1, 0)].re);
        let ay = 0.5 * (h[(1, 0)].im - h[(0, 1)].im);
        let a = (ax * ax + ay * ay + az * az).sqrt();
        let (c, s) = ((a * dt).cos(), if a > 0.0 { (a * dt).sin() / a } else { dt });
        let g = Complex64::from_polar(1.0, -a0 * dt);
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(c, -s * az),
                Complex64::new(-s * ay, -s * ax),
                Complex64::new(s * ay, -s * ax),
                Complex64::new(c, s * az),
            ],
        );
        return m * g;
    }
    let eig = h.clone().symmetric_eigen();
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| Complex64::from_polar(1.0, -e * dt)));
    &eig.eigenvectors * phases * eig.eigenvectors.adjoint()
}

/// Midpoint exponential integrator for `i psi_dot = H(t) psi`.
pub fn propagate_discrete(
    psi0: &StateVector,
    hamiltonian: &dyn Fn(f64) -> Result<DMatrix<Complex64>>,
    mesh: &TimeMesh<f64>,
    sample_every: usize,
) -> Result<PropagationResult> {
    let start = Instant::now();
    if psi0.basis() != Basis::Discrete {
        return Err(Error::invalid("discrete propagation needs a discrete state"));
    }
    let mut psi = psi0.to_dvector();
    let norm0 = psi.norm_squared();
    let dt = mesh.dt();
    let mut times = vec![mesh.t_start()];
    let mut trajectory = vec![psi0.clone()];
    let mut drift: f64 = 0.0;
    for k in 1..=mesh.n_steps() {
        let t_mid = mesh.time(k - 1) + 0.5 * dt;
        let h = hamiltonian(t_mid)?;
        check_hermitian(&h, t_mid)?;
        if h.nrows() != psi.len() {
            return Err(Error::invalid(format!("Hamiltonian is {0}x{0}, state has {1} entries", h.nrows(), psi.len())));
        }
        psi = midpoint_exponential(&h, dt) * psi;
        if sample_due(k, mesh.n_steps(), sample_every) {
            drift = drift.max((psi.norm_squared() - norm0).abs());
            times.push(mesh.time(k));
            trajectory.push(StateVector::from_dvector(&psi));
        }
    }
    Ok(PropagationResult {
        final_state: StateVector::from_dvector(&psi),
        times,
        trajectory,
        norm_drift: drift,
        wall_time: start.elapsed(),
    })
}

/// Samples of the propagator `T(t)` with `T(t_start) = 1`.
#[derive(Debug, Clone)]
pub struct EvolutionOperator {
    pub times: Vec<f64>,
    pub operators: Vec<DMatrix<Complex64>>,
}

impl EvolutionOperator {
    /// Largest `|| T^dag T - 1 ||` over the samples.
    pub fn max_unitarity_residual(&self) -> f64 {
        self.operators.iter().map(unitarity_residual).fold(0.0, f64::max)
    }
}

pub fn unitarity_residual(u: &DMatrix<Complex64>) -> f64 {
    (u.adjoint() * u - DMatrix::<Complex64>::identity(u.nrows(), u.ncols())).norm()
}

pub fn time_evolution_operator(
    hamiltonian: &dyn Fn(f64) -> Result<DMatrix<Complex64>>,
    mesh: &TimeMesh<f64>,
    sample_every: usize,
) -> Result<EvolutionOperator> {
    let dim = hamiltonian(mesh.t_start())?.nrows();
    let mut u = DMatrix::<Complex64>::identity(dim, dim);
    let mut times = vec![mesh.t_start()];
    let mut operators = vec![u.clone()];
    let dt = mesh.dt();
    for k in 1..=mesh.n_steps() {
        let t_mid = mesh.time(k - 1) + 0.5 * dt;
        let h = hamiltonian(t_mid)?;
        check_hermitian(&h, t_mid)?;
        u = midpoint_exponential(&h, dt) * u;
        if sample_due(k, mesh.n_steps(), sample_every) {
            times.push(mesh.time(k));
            operators.push(u.clone());
        }
    }
    Ok(EvolutionOperator { times, operators })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::schedule::{FieldMagnitude, MixingAngle, Polynomial, Schedule, SharedSchedule};
    use crate::spectral::{adiabatic_state, track_levels, DerivativeMethod, DEFAULT_MIN_GAP};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn zero_hamiltonian_is_identity() {
        let zero = |_t: f64| Ok(DMatrix::<Complex64>::zeros(3, 3));
        let mesh = TimeMesh::new(0.0, 1.0, 10).unwrap();
        let psi = StateVector::discrete(vec![c(0.6), c(0.0), Complex64::new(0.0, 0.8)]);
        let r = propagate_discrete(&psi, &zero, &mesh, 1).unwrap();
        assert_eq!(r.final_state, psi);
        let t = time_evolution_operator(&zero, &mesh, 0).unwrap();
        assert!(t.operators.iter().all(|u| unitarity_residual(u) < 1e-15));
    }

    #[test]
    fn constant_sigma_z_gives_phase() {
        let h = 1.7;
        let ham = move |_t: f64| Ok(DMatrix::from_row_slice(2, 2, &[c(h / 2.0), c(0.0), c(0.0), c(-h / 2.0)]));
        let mesh = TimeMesh::new(0.0, 3.0, 7).unwrap();
        let psi = StateVector::discrete(vec![c(1.0), c(0.0)]);
        let r = propagate_discrete(&psi, &ham, &mesh, 0).unwrap();
        let expected = Complex64::from_polar(1.0, -h * 3.0 / 2.0);
        assert!((r.final_state.amplitudes()[0] - expected).norm() < 1e-13);
        assert!((psi.inner(&r.final_state).unwrap().norm_sqr() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn constant_hamiltonian_operator_matches_exponential() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 0.3, -0.2, 0.3, -0.4, 0.5, -0.2, 0.5, 0.9]);
        let hc = m.map(c);
        let ham = |_t: f64| Ok(hc.clone());
        let mesh = TimeMesh::new(0.0, 2.0, 20).unwrap();
        let ops = time_evolution_operator(&ham, &mesh, 5).unwrap();
        let eig = m.clone().symmetric_eigen();
        for (t, u) in ops.times.iter().zip(&ops.operators) {
            let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| Complex64::from_polar(1.0, -e * t)));
            let exact = eig.eigenvectors.map(c) * d * eig.eigenvectors.transpose().map(c);
            assert!((u - exact).norm() < 1e-9);
        }
        assert!(ops.max_unitarity_residual() < 1e-9);
    }

    #[test]
    fn operator_columns_match_state_propagation() {
        let family = DiscreteFamily::random_smooth(3, 1, 0.0, 2.0).unwrap();
        let ham = discrete_driver(&family, None, None);
        let mesh = TimeMesh::new(0.0, 2.0, 200).unwrap();
        let ops = time_evolution_operator(&ham, &mesh, 0).unwrap();
        let last = ops.operators.last().unwrap();
        for j in 0..3 {
            let mut e = vec![c(0.0); 3];
            e[j] = c(1.0);
            let r = propagate_discrete(&StateVector::discrete(e), &ham, &mesh, 0).unwrap();
            assert!((r.final_state.to_dvector() - last.column(j)).norm() < 1e-10);
        }
    }

    #[test]
    fn pauli_form_matches_eigen_form() {
        let h = DMatrix::from_row_slice(2, 2, &[c(0.3), Complex64::new(0.5, -0.2), Complex64::new(0.5, 0.2), c(-1.1)]);
        let pauli = midpoint_exponential(&h, 0.37);
        let eig = h.clone().symmetric_eigen();
        let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| Complex64::from_polar(1.0, -e * 0.37)));
        let exact = &eig.eigenvectors * d * eig.eigenvectors.adjoint();
        assert!((pauli - exact).norm() < 1e-13);
    }

    #[test]
    fn non_hermitian_sample_rejected() {
        let ham = |_t: f64| Ok(DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]));
        let psi = StateVector::discrete(vec![c(1.0), c(0.0)]);
        let err = propagate_discrete(&psi, &ham, &TimeMesh::new(0.0, 1.0, 2).unwrap(), 0).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }

    #[test]
    fn exact_counterdiabatic_drive_tracks_ground_state() {
        let hz = Polynomial::new(vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        let theta = MixingAngle { gamma: 2.0, field: hz.clone() };
        let th: SharedSchedule<f64> = Arc::new(theta.clone());
        let h: SharedSchedule<f64> = Arc::new(FieldMagnitude { gamma: 2.0, field: hz });
        let family = DiscreteFamily::two_level(th, h).unwrap();
        let cd = move |t: f64| {
            let a = 0.5 * theta.d1(t);
            Ok(DMatrix::from_row_slice(2, 2, &[c(0.0), Complex64::new(0.0, -a), Complex64::new(0.0, a), c(0.0)]))
        };
        let ham = discrete_driver(&family, None, Some(&cd));
        let mesh = TimeMesh::new(0.0, 3.0, 6000).unwrap();
        let tracks = track_levels(&family, &mesh, DerivativeMethod::Perturbative, DEFAULT_MIN_GAP).unwrap();
        let psi0 = adiabatic_state(&tracks[0], 0.0).unwrap();
        let r = propagate_discrete(&psi0, &ham, &mesh, 0).unwrap();
        let target = adiabatic_state(&tracks[0], 3.0).unwrap();
        assert!(target.inner(&r.final_state).unwrap().norm_sqr() >= 1.0 - 1e-8);
        assert!(r.norm_drift < 1e-12);
    }
}
