use nalgebra::DMatrix;
use num_complex::Complex64;

use super::track::AdiabaticTrack;
use crate::error::{Error, Result};
use crate::grid::TimeMesh;
use crate::state::Basis;

/// Default smallest eigenvalue gap tolerated when building `H_cd`.
pub const DEFAULT_MIN_GAP: f64 = 1e-6;

/// Samples of `H_cd(t) = i sum_{m != n} |m><m|n_dot><n|` on a mesh.
#[derive(Debug, Clone)]
pub struct CounterdiabaticTerm {
    mesh: TimeMesh<f64>,
    matrices: Vec<DMatrix<Complex64>>,
}

impl CounterdiabaticTerm {
    pub fn mesh(&self) -> &TimeMesh<f64> {
        &self.mesh
    }

    pub fn matrices(&self) -> &[DMatrix<Complex64>] {
        &self.matrices
    }

    /// Linear interpolation between mesh samples.
    pub fn at(&self, t: f64) -> Result<DMatrix<Complex64>> {
        let (k, w) = self
            .mesh
            .locate(t)
            .ok_or_else(|| Error::invalid(format!("t = {t} outside the counterdiabatic mesh")))?;
        Ok(self.matrices[k].scale(1.0 - w) + self.matrices[k + 1].scale(w))
    }

    /// Largest `|H - H^dagger|` entry over the mesh.
    pub fn hermiticity_residual(&self) -> f64 {
        self.matrices
            .iter()
            .map(|m| (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }
}

/// Builds the counterdiabatic term from a complete set of discrete tracks.
///
/// In the instantaneous eigenbasis the generator `C_mn = <m|n_dot>` is
/// antisymmetric; finite-difference derivatives break that at O(dt^2), so
/// the antisymmetric part is used.
pub fn counterdiabatic_term(tracks: &[AdiabaticTrack], min_gap: f64) -> Result<CounterdiabaticTerm> {
    let first = tracks
        .first()
        .ok_or_else(|| Error::invalid("counterdiabatic term needs tracks"))?;
    let dim = first.dim();
    if first.basis() != Basis::Discrete {
        return Err(Error::invalid("counterdiabatic term is built for discrete families only"));
    }
    if tracks.len() != dim {
        return Err(Error::invalid(format!(
            "need a complete set of {dim} tracks, got {}",
            tracks.len()
        )));
    }
    let mesh = *first.mesh();
    if tracks.iter().any(|t| t.mesh() != &mesh || t.dim() != dim) {
        return Err(Error::invalid("tracks must share mesh and dimension"));
    }

    let mut matrices = Vec::with_capacity(mesh.len());
    for k in 0..mesh.len() {
        for a in 0..dim {
            for b in 0..a {
                let gap = (tracks[a].energies()[k] - tracks[b].energies()[k]).abs();
                if gap < min_gap {
                    return Err(Error::Degeneracy {
                        time: mesh.time(k),
                        gap,
                        min_gap,
                    });
                }
            }
        }
        let mut basis = DMatrix::<f64>::zeros(dim, dim);
        for (n, tr) in tracks.iter().enumerate() {
            basis.set_column(n, &tr.vectors()[k]);
        }
        let mut generator = DMatrix::<f64>::zeros(dim, dim);
        for (n, tr) in tracks.iter().enumerate() {
            let dn = &tr.derivatives()[k];
            for m in 0..dim {
                if m != n {
                    generator[(m, n)] = tracks[m].vectors()[k].dot(dn);
                }
            }
        }
        let generator = (&generator - generator.transpose()) * 0.5;
        let real = &basis * generator * basis.transpose();
        matrices.push(real.map(|v| Complex64::new(0.0, v)));
    }
    Ok(CounterdiabaticTerm { mesh, matrices })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::DiscreteFamily;
    use crate::schedule::{Constant, FieldMagnitude, MixingAngle, Polynomial, Schedule, SharedSchedule};
    use crate::spectral::{track_levels, DerivativeMethod};
    use std::sync::Arc;

    #[test]
    fn static_family_has_no_term() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 0.2, 0.0, 0.2, -1.0, 0.3, 0.0, 0.3, 0.5]);
        let fam = DiscreteFamily::from_terms(vec![(Arc::new(Constant(1.0)), m)]).unwrap();
        let mesh = TimeMesh::new(0.0, 1.0, 20).unwrap();
        let tracks = track_levels(&fam, &mesh, DerivativeMethod::FiniteDifference, 1e-6).unwrap();
        let hcd = counterdiabatic_term(&tracks, DEFAULT_MIN_GAP).unwrap();
        assert!(hcd.matrices().iter().all(|m| m.iter().all(|z| z.norm() < 1e-12)));
    }

    #[test]
    fn two_level_term_is_sigma_y() {
        let hz = Polynomial::new(vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        let theta = MixingAngle { gamma: 2.0, field: hz.clone() };
        let theta_s: SharedSchedule<f64> = Arc::new(theta.clone());
        let fam = DiscreteFamily::two_level(theta_s, Arc::new(FieldMagnitude { gamma: 2.0, field: hz })).unwrap();
        let mesh = TimeMesh::new(0.0, 3.0, 3000).unwrap();
        let tracks = track_levels(&fam, &mesh, DerivativeMethod::Perturbative, 1e-6).unwrap();
        let hcd = counterdiabatic_term(&tracks, DEFAULT_MIN_GAP).unwrap();
        for (k, t) in mesh.times().into_iter().enumerate().step_by(97) {
            let m = &hcd.matrices()[k];
            let half = 0.5 * theta.d1(t);
            // (theta_dot / 2) sigma_y
            assert!((m[(0, 1)] - Complex64::new(0.0, -half)).norm() < 1e-10);
            assert!((m[(1, 0)] - Complex64::new(0.0, half)).norm() < 1e-10);
            assert!(m[(0, 0)].norm() < 1e-12 && m[(1, 1)].norm() < 1e-12);
        }
    }

    #[test]
    fn random_family_matches_difference_oracle() {
        let fam = DiscreteFamily::random_smooth(4, 21, 0.0, 3.0).unwrap();
        let mesh = TimeMesh::new(0.0, 3.0, 3000).unwrap();
        let tracks = track_levels(&fam, &mesh, DerivativeMethod::FiniteDifference, 1e-6).unwrap();
        let hcd = counterdiabatic_term(&tracks, DEFAULT_MIN_GAP).unwrap();
        assert!(hcd.hermiticity_residual() < 1e-10);
        let dt = mesh.dt();
        for k in (1..mesh.len() - 1).step_by(131) {
            for n in 0..4 {
                // oracle: <m| (n(t+dt) - n(t-dt)) / 2dt
                let nd = (&tracks[n].vectors()[k + 1] - &tracks[n].vectors()[k - 1]) / (2.0 * dt);
                let col = &hcd.matrices()[k] * tracks[n].vectors()[k].map(|v| Complex64::new(v, 0.0));
                for m in 0..4 {
                    let proj: Complex64 = tracks[m].vectors()[k]
                        .iter()
                        .zip(col.iter())
                        .map(|(a, b)| b * *a)
                        .sum();
                    if m == n {
                        assert!(proj.norm() < 1e-8);
                    } else {
                        let expected = Complex64::new(0.0, tracks[m].vectors()[k].dot(&nd));
                        assert!((proj - expected).norm() < 1e-6);
                    }
                }
            }
        }
    }

    #[test]
    fn degeneracy_detected() {
        // nearly degenerate pair with a fixed eigenbasis
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0 + 1e-8, 0.0, 0.0, 0.0, 3.0]);
        let fam = DiscreteFamily::from_terms(vec![(Arc::new(Constant(1.0)), m)]).unwrap();
        let mesh = TimeMesh::new(0.0, 1.0, 4).unwrap();
        let tracks = track_levels(&fam, &mesh, DerivativeMethod::FiniteDifference, 1e-6).unwrap();
        let err = counterdiabatic_term(&tracks, DEFAULT_MIN_GAP).unwrap_err();
        assert!(matches!(err, Error::Degeneracy { .. }));
        assert!(counterdiabatic_term(&tracks, 1e-9).is_ok());
    }
}
