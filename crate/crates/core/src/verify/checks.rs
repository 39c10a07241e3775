use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::deformn::DiagonalDeformation;
use crate::error::{Error, Result};
use crate::grid::{differentiate_fourth_order, TimeMesh};
use crate::hamiltonian::DiscreteFamily;
use crate::spectral::AdiabaticTrack;
use crate::state::StateVector;

const NORMALIZATION_TOL: f64 = 1e-6;

/// `|<a|b>|^2` for normalized states.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    for s in [a, b] {
        if !s.is_normalized(NORMALIZATION_TOL) {
            return Err(Error::invalid(format!("fidelity needs normalized states (|psi|^2 = {})", s.norm_sqr())));
        }
    }
    Ok(a.inner(b)?.norm_sqr().min(1.0))
}

/// `|| i dP/dt - [H, P] ||_F` for `P = |psi><psi|` at interior samples.
#[derive(Debug, Clone)]
pub struct InvariantResidual {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub max: f64,
}

fn projector(psi: &StateVector) -> DMatrix<Complex64> {
    let v = psi.to_dvector();
    &v * v.adjoint()
}

pub fn invariant_residual(
    times: &[f64],
    states: &[StateVector],
    hamiltonian: &dyn Fn(f64) -> Result<DMatrix<Complex64>>,
) -> Result<InvariantResidual> {
    if states.len() < 3 || times.len() != states.len() {
        return Err(Error::invalid(format!(
            "invariant residual needs at least three samples with times (got {} states, {} times)",
            states.len(),
            times.len()
        )));
    }
    let projectors: Vec<_> = states.iter().map(projector).collect();
    let mut out_t = Vec::with_capacity(states.len() - 2);
    let mut values = Vec::with_capacity(states.len() - 2);
    for k in 1..states.len() - 1 {
        let span = times[k + 1] - times[k - 1];
        if !(span > 0.0) {
            return Err(Error::invalid("sample times must increase"));
        }
        let dp = (&projectors[k + 1] - &projectors[k - 1]) / Complex64::new(span, 0.0);
        let h = hamiltonian(times[k])?;
        let p = &projectors[k];
        let r = dp * Complex64::new(0.0, 1.0) - (&h * p - p * &h);
        out_t.push(times[k]);
        values.push(r.norm());
    }
    let max = values.iter().cloned().fold(0.0, f64::max);
    Ok(InvariantResidual { times: out_t, values, max })
}

/// `|phi|` and `|phi_dot|` at both ends of the mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndpointConditions {
    pub phase_start: f64,
    pub rate_start: f64,
    pub phase_end: f64,
    pub rate_end: f64,
    pub tol: f64,
}

impl EndpointConditions {
    pub fn start_passes(&self) -> bool {
        self.phase_start <= self.tol && self.rate_start <= self.tol
    }

    pub fn end_passes(&self) -> bool {
        self.phase_end <= self.tol && self.rate_end <= self.tol
    }

    pub fn passes(&self) -> bool {
        self.start_passes() && self.end_passes()
    }
}

/// Endpoint values of a phase sampled on `mesh`; the rate is taken from
/// fourth-order differences when not supplied.
pub fn endpoint_conditions(phi: &[f64], rate: Option<&[f64]>, mesh: &TimeMesh<f64>, tol: f64) -> Result<EndpointConditions> {
    if phi.len() != mesh.len() || rate.is_some_and(|r| r.len() != mesh.len()) {
        return Err(Error::invalid("need one phase sample per mesh time"));
    }
    let fd;
    let rate = match rate {
        Some(r) => r,
        None => {
            fd = differentiate_fourth_order(phi, mesh.dt());
            &fd
        }
    };
    let last = phi.len() - 1;
    Ok(EndpointConditions {
        phase_start: phi[0].abs(),
        rate_start: rate[0].abs(),
        phase_end: phi[last].abs(),
        rate_end: rate[last].abs(),
        tol,
    })
}

/// Largest imaginary (continuity) and real (Hamilton-Jacobi) parts of
/// `phi_dot_a n_a + i n_dot_a + E n_a - sum_b H_ab e^{i(phi_a - phi_b)} n_b - v_a n_a`
/// over the mesh.
pub fn deformed_equation_residuals(
    family: &DiscreteFamily,
    track: &AdiabaticTrack,
    deformation: &DiagonalDeformation,
) -> Result<(f64, f64)> {
    if deformation.mesh != *track.mesh() {
        return Err(Error::invalid("deformation and track live on different meshes"));
    }
    let dim = track.dim();
    let mut cont: f64 = 0.0;
    let mut hj: f64 = 0.0;
    for (k, t) in track.mesh().times().into_iter().enumerate() {
        let h = family.at(t)?;
        let (n, nd, e) = (&track.vectors()[k], &track.derivatives()[k], track.energies()[k]);
        let (phi, rate, v) = (&deformation.phases[k], &deformation.rates[k], &deformation.potentials[k]);
        for a in 0..dim {
            let mut r = Complex64::new((rate[a] + e - v[a]) * n[a], nd[a]);
            for b in 0..dim {
                r -= Complex64::from_polar(h[(a, b)] * n[b], phi[a] - phi[b]);
            }
            cont = cont.max(r.im.abs());
            hj = hj.max(r.re.abs());
        }
    }
    Ok((cont, hj))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_1_SQRT_2;
    use std::sync::Arc;

    use super::*;
    use crate::deformn::{nlevel_deformation, two_level_phase, NLevelOptions};
    use crate::evolve::{discrete_driver, propagate_discrete};
    use crate::schedule::{Constant, FieldMagnitude, MixingAngle, Polynomial, SharedSchedule};
    use crate::spectral::{track_levels, DerivativeMethod, DEFAULT_MIN_GAP};
    use crate::state::Basis;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn fidelity_hand_values() {
        let a = StateVector::discrete(vec![c(1.0), c(0.0)]);
        let b = StateVector::discrete(vec![c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)]);
        let e2 = StateVector::discrete(vec![c(0.0), c(1.0)]);
        assert!((fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(fidelity(&a, &e2).unwrap(), 0.0);
        assert!((fidelity(&a, &b).unwrap() - 0.5).abs() < 1e-15);
        let g = StateVector::from_real(&[1.0, 0.0], Basis::Grid { spacing: 1.0 });
        assert!(fidelity(&a, &g).is_err());
        assert!(fidelity(&a, &StateVector::discrete(vec![c(2.0), c(0.0)])).is_err());
    }

    #[test]
    fn eigenstate_of_constant_hamiltonian_is_invariant() {
        let h = DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.5), c(0.5), c(-1.0)]);
        let eig = h.clone().symmetric_eigen();
        let v = eig.eigenvectors.column(0).into_owned();
        let times: Vec<f64> = (0..5).map(|k| k as f64 * 0.1).collect();
        let states: Vec<_> = times
            .iter()
            .map(|&t| StateVector::from_dvector(&(&v * Complex64::from_polar(1.0, -eig.eigenvalues[0] * t))))
            .collect();
        let r = invariant_residual(&times, &states, &|_| Ok(h.clone())).unwrap();
        assert!(r.max < 1e-8);
        assert!(invariant_residual(&times[..2], &states[..2], &|_| Ok(h.clone())).is_err());
    }

    fn cubic(gamma: f64, hz: Vec<f64>) -> (MixingAngle<f64, Polynomial<f64>>, FieldMagnitude<f64, Polynomial<f64>>) {
        let hz = Polynomial::new(hz).unwrap();
        (MixingAngle { gamma, field: hz.clone() }, FieldMagnitude { gamma, field: hz })
    }

    #[test]
    fn endpoint_conditions_for_cubic_linear_and_static_sweeps() {
        let mesh = TimeMesh::new(0.0, 6.0, 600).unwrap();
        let (theta, h) = cubic(2.0, vec![0.0, 0.0, 0.0, 1.0]);
        let p = two_level_phase(&theta, &h, &mesh).unwrap();
        let e = endpoint_conditions(&p.phi, p.phi_dot.as_deref(), &mesh, 1e-6).unwrap();
        assert!(e.start_passes() && e.phase_start == 0.0);

        // h_z = c t: sin phi = c / (gamma^2 + c^2 t^2), so phi(0) = asin(c / gamma^2)
        let (theta, h) = cubic(2.0, vec![0.0, 1.0]);
        let p = two_level_phase(&theta, &h, &mesh).unwrap();
        let e = endpoint_conditions(&p.phi, p.phi_dot.as_deref(), &mesh, 1e-6).unwrap();
        assert!(!e.start_passes());
        assert!((e.phase_start - 0.25f64.asin()).abs() < 1e-12);
        assert!(e.rate_start < 1e-12);

        let p = two_level_phase(&Constant(0.3), &Constant(1.0), &mesh).unwrap();
        assert!(endpoint_conditions(&p.phi, None, &mesh, 1e-6).unwrap().passes());
    }

    #[test]
    fn deformed_two_level_trajectory_is_invariant_and_wrong_driver_is_not() {
        let (theta, h) = cubic(2.0, vec![0.0, 0.0, 0.0, 1.0]);
        let th: SharedSchedule<f64> = Arc::new(theta);
        let hh: SharedSchedule<f64> = Arc::new(h);
        let family = DiscreteFamily::two_level(th, hh).unwrap();
        let run = |steps: usize| {
            let mesh = TimeMesh::new(0.0, 6.0, steps).unwrap();
            let tracks = track_levels(&family, &mesh, DerivativeMethod::Perturbative, DEFAULT_MIN_GAP).unwrap();
            let d = nlevel_deformation(&family, &tracks[0], &NLevelOptions::default()).unwrap();
            let (cont, hj) = deformed_equation_residuals(&family, &tracks[0], &d).unwrap();
            assert!(cont < 1e-9 && hj < 1e-12, "{cont} {hj}");
            let v = |t: f64| d.potential_at(t);
            let driven = discrete_driver(&family, Some(&v), None);
            let psi0 = StateVector::from_real(tracks[0].vectors()[0].as_slice(), Basis::Discrete);
            let r = propagate_discrete(&psi0, &driven, &mesh, 1).unwrap();
            let good = invariant_residual(&r.times, &r.trajectory, &driven).unwrap().max;
            let bare = discrete_driver(&family, None, None);
            let wrong = invariant_residual(&r.times, &r.trajectory, &bare).unwrap().max;
            (good, wrong)
        };
        // at dt = 1e-3 the midpoint integrator leaves ~1.3e-5 near t = 6
        let (coarse, wrong) = run(6000);
        let (fine, _) = run(12000);
        assert!(fine <= 1e-5, "{fine}");
        assert!((3.5..=4.5).contains(&(coarse / fine)), "{}", coarse / fine);
        assert!(wrong > 1e-2);
    }
}
