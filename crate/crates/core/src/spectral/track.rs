use nalgebra::DVector;
use num_complex::Complex64;

use super::eigen::eigensystem_real_symmetric;
use super::tridiagonal::bound_states_1d;
use crate::error::{Error, Result};
use crate::grid::{SpatialGrid1D, TimeMesh};
use crate::hamiltonian::{DiscreteFamily, Potential1D};
use crate::state::{Basis, StateVector};

/// Smallest `|<n(t_k)|n(t_{k+1})>|` accepted when gauge fixing.
pub const MIN_CONSECUTIVE_OVERLAP: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DerivativeMethod {
    /// Central differences across the mesh (one-sided at the ends).
    #[default]
    FiniteDifference,
    /// `|n_dot> = sum_{m != n} |m><m|dH/dt|n> / (E_n - E_m)`; discrete families only.
    Perturbative,
}

/// One instantaneous eigenpair followed along a time mesh with a
/// sign-continuous real gauge.
#[derive(Debug, Clone)]
pub struct AdiabaticTrack {
    level: usize,
    mesh: TimeMesh<f64>,
    basis: Basis,
    energies: Vec<f64>,
    vectors: Vec<DVector<f64>>,
    derivatives: Vec<DVector<f64>>,
}

impl AdiabaticTrack {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn mesh(&self) -> &TimeMesh<f64> {
        &self.mesh
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn vectors(&self) -> &[DVector<f64>] {
        &self.vectors
    }

    pub fn derivatives(&self) -> &[DVector<f64>] {
        &self.derivatives
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }

    fn weight(&self) -> f64 {
        match self.basis {
            Basis::Grid { spacing } => spacing,
            Basis::Discrete => 1.0,
        }
    }

    pub fn inner(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        self.weight() * a.dot(b)
    }

    /// Largest `|<n|n_dot>|` over the mesh.
    pub fn parallel_transport_residual(&self) -> f64 {
        self.vectors
            .iter()
            .zip(&self.derivatives)
            .map(|(v, d)| self.inner(v, d).abs())
            .fold(0.0, f64::max)
    }

    /// Trapezoid integrals `int_{t_start}^{t_k} E_n dt` at every node.
    pub fn dynamical_phases(&self) -> Vec<f64> {
        let dt = self.mesh.dt();
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(self.energies.len());
        out.push(0.0);
        for w in self.energies.windows(2) {
            acc += 0.5 * dt * (w[0] + w[1]);
            out.push(acc);
        }
        out
    }

    /// Linearly interpolated eigenvector at `t` (renormalized between nodes).
    pub fn vector_at(&self, t: f64) -> Result<DVector<f64>> {
        let (k, w) = self
            .mesh
            .locate(t)
            .ok_or_else(|| Error::invalid(format!("t = {t} outside the track mesh")))?;
        if w <= 1e-9 {
            return Ok(self.vectors[k].clone());
        }
        if w >= 1.0 - 1e-9 {
            return Ok(self.vectors[k + 1].clone());
        }
        let v = &self.vectors[k] * (1.0 - w) + &self.vectors[k + 1] * w;
        let norm = self.inner(&v, &v).sqrt();
        Ok(v / norm)
    }

    pub fn derivative_at(&self, t: f64) -> Result<DVector<f64>> {
        let (k, w) = self
            .mesh
            .locate(t)
            .ok_or_else(|| Error::invalid(format!("t = {t} outside the track mesh")))?;
        Ok(&self.derivatives[k] * (1.0 - w) + &self.derivatives[k + 1] * w)
    }

    pub fn energy_at(&self, t: f64) -> Result<f64> {
        let (k, w) = self
            .mesh
            .locate(t)
            .ok_or_else(|| Error::invalid(format!("t = {t} outside the track mesh")))?;
        Ok(self.energies[k] * (1.0 - w) + self.energies[k + 1] * w)
    }
}

/// Removes sign flips from raw eigenvectors and fills `d/dt |n>` by central
/// differences, projected orthogonal to `|n>`.
pub fn gauge_fix_track(
    raw: Vec<DVector<f64>>,
    energies: Vec<f64>,
    mesh: TimeMesh<f64>,
    level: usize,
    basis: Basis,
) -> Result<AdiabaticTrack> {
    let mut track = align_signs(raw, energies, mesh, level, basis)?;
    track.derivatives = finite_difference_derivatives(&track);
    Ok(track)
}

fn align_signs(
    mut raw: Vec<DVector<f64>>,
    energies: Vec<f64>,
    mesh: TimeMesh<f64>,
    level: usize,
    basis: Basis,
) -> Result<AdiabaticTrack> {
    if raw.len() != mesh.len() || energies.len() != mesh.len() {
        return Err(Error::invalid(format!(
            "track needs one vector and energy per mesh node ({}), got {} and {}",
            mesh.len(),
            raw.len(),
            energies.len()
        )));
    }
    let dim = raw[0].len();
    if raw.iter().any(|v| v.len() != dim) {
        return Err(Error::invalid("track vectors differ in length"));
    }
    let weight = match basis {
        Basis::Grid { spacing } => spacing,
        Basis::Discrete => 1.0,
    };
    for k in 1..raw.len() {
        let overlap = weight * raw[k - 1].dot(&raw[k]);
        if overlap.abs() < MIN_CONSECUTIVE_OVERLAP {
            return Err(Error::MeshTooCoarse {
                time: mesh.time(k),
                detail: format!(
                    "consecutive overlap {overlap:.3} below {MIN_CONSECUTIVE_OVERLAP} (possible level crossing)"
                ),
            });
        }
        if overlap < 0.0 {
            raw[k].neg_mut();
        }
    }
    Ok(AdiabaticTrack {
        level,
        mesh,
        basis,
        energies,
        vectors: raw,
        derivatives: Vec::new(),
    })
}

fn finite_difference_derivatives(track: &AdiabaticTrack) -> Vec<DVector<f64>> {
    let v = &track.vectors;
    let n = v.len();
    let h = track.mesh.dt();
    (0..n)
        .map(|k| {
            let d = if k == 0 {
                (&v[0] * -3.0 + &v[1] * 4.0 - &v[2]) / (2.0 * h)
            } else if k == n - 1 {
                (&v[n - 1] * 3.0 - &v[n - 2] * 4.0 + &v[n - 3]) / (2.0 * h)
            } else {
                (&v[k + 1] - &v[k - 1]) / (2.0 * h)
            };
            let parallel = track.inner(&v[k], &d);
            d - &v[k] * parallel
        })
        .collect()
}

/// Tracks every level of a discrete family along `mesh`.
pub fn track_levels(
    family: &DiscreteFamily,
    mesh: &TimeMesh<f64>,
    method: DerivativeMethod,
    min_gap: f64,
) -> Result<Vec<AdiabaticTrack>> {
    let n = family.dim();
    let times = mesh.times();
    let systems = times
        .iter()
        .map(|&t| eigensystem_real_symmetric(&family.at(t)?))
        .collect::<Result<Vec<_>>>()?;

    let mut tracks = (0..n)
        .map(|level| {
            let raw = systems.iter().map(|s| s.vector(level)).collect();
            let energies = systems.iter().map(|s| s.values[level]).collect();
            align_signs(raw, energies, *mesh, level, Basis::Discrete)
        })
        .collect::<Result<Vec<_>>>()?;

    match method {
        DerivativeMethod::FiniteDifference => {
            for tr in &mut tracks {
                tr.derivatives = finite_difference_derivatives(tr);
            }
        }
        DerivativeMethod::Perturbative => {
            for (k, &t) in times.iter().enumerate() {
                let dh = family.derivative_at(t);
                for a in 0..n {
                    for b in 0..a {
                        let gap = (tracks[a].energies[k] - tracks[b].energies[k]).abs();
                        if gap < min_gap {
                            return Err(Error::Degeneracy { time: t, gap, min_gap });
                        }
                    }
                }
                let dh_cols: Vec<DVector<f64>> = tracks.iter().map(|tr| &dh * &tr.vectors[k]).collect();
                for level in 0..n {
                    let mut d = DVector::zeros(n);
                    for other in 0..n {
                        if other == level {
                            continue;
                        }
                        let coupling = tracks[other].vectors[k].dot(&dh_cols[level]);
                        let denom = tracks[level].energies[k] - tracks[other].energies[k];
                        d += &tracks[other].vectors[k] * (coupling / denom);
                    }
                    tracks[level].derivatives.push(d);
                }
            }
        }
    }
    Ok(tracks)
}

/// Tracks bound state `level` of a 1D potential along `mesh`.
pub fn track_bound_state(
    family: &Potential1D,
    grid: &SpatialGrid1D<f64>,
    mesh: &TimeMesh<f64>,
    level: usize,
) -> Result<AdiabaticTrack> {
    let mut raw = Vec::with_capacity(mesh.len());
    let mut energies = Vec::with_capacity(mesh.len());
    for t in mesh.times() {
        let mut states = bound_states_1d(family, grid, t, level + 1)?;
        let s = states.swap_remove(level);
        energies.push(s.energy);
        raw.push(DVector::from_vec(s.wavefunction));
    }
    gauge_fix_track(raw, energies, *mesh, level, Basis::Grid { spacing: grid.spacing() })
}

/// `exp(-i int_0^t E_n) |n(t)>` with the phase integral by the trapezoid
/// rule on the track mesh.
pub fn adiabatic_state(track: &AdiabaticTrack, t: f64) -> Result<StateVector> {
    let (k, w) = track
        .mesh
        .locate(t)
        .ok_or_else(|| Error::invalid(format!("t = {t} outside the track mesh")))?;
    let phases = track.dynamical_phases();
    let phase = if w >= 1.0 - 1e-9 {
        phases[k + 1]
    } else if w <= 1e-9 {
        phases[k]
    } else {
        // exact integral of the linear energy interpolant on [t_k, t]
        let dt = track.mesh.dt() * w;
        let e_t = track.energies[k] * (1.0 - w) + track.energies[k + 1] * w;
        phases[k] + 0.5 * dt * (track.energies[k] + e_t)
    };
    let v = track.vector_at(t)?;
    let factor = Complex64::from_polar(1.0, -phase);
    Ok(StateVector::new(v.iter().map(|&c| factor * c).collect(), track.basis))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::{Constant, Polynomial, SharedSchedule};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn rotating(theta_end: f64) -> DiscreteFamily {
        let theta: SharedSchedule<f64> = Arc::new(Polynomial::new(vec![PI / 2.0, theta_end - PI / 2.0]).unwrap());
        DiscreteFamily::two_level(theta, Arc::new(Constant(2.0))).unwrap()
    }

    #[test]
    fn alternating_flips_removed() {
        let mesh = TimeMesh::new(0.0, 1.0, 10).unwrap();
        let v = DVector::from_vec(vec![0.6, 0.8]);
        let raw = (0..11).map(|k| if k % 2 == 0 { v.clone() } else { -v.clone() }).collect();
        let tr = gauge_fix_track(raw, vec![1.0; 11], mesh, 0, Basis::Discrete).unwrap();
        for u in tr.vectors() {
            assert_eq!(u, &v);
        }
        assert!(tr.derivatives().iter().all(|d| d.norm() < 1e-12));
    }

    #[test]
    fn rotating_track_has_positive_overlaps() {
        // theta from pi/2 to 0 over [0, 1]
        let fam = rotating(0.0);
        let mesh = TimeMesh::new(0.0, 1.0, 200).unwrap();
        let tracks = track_levels(&fam, &mesh, DerivativeMethod::FiniteDifference, 1e-6).unwrap();
        for tr in &tracks {
            for w in tr.vectors().windows(2) {
                assert!(w[0].dot(&w[1]) > 0.0);
            }
            assert!(tr.parallel_transport_residual() < 1e-8);
        }
    }

    #[test]
    fn coarse_mesh_over_half_turn_rejected() {
        // eigenvectors rotate by theta/2 = pi; two steps of pi/2 each
        let theta: SharedSchedule<f64> = Arc::new(Polynomial::new(vec![0.0, 2.0 * PI]).unwrap());
        let fam = DiscreteFamily::two_level(theta, Arc::new(Constant(2.0))).unwrap();
        let mesh = TimeMesh::new(0.0, 1.0, 2).unwrap();
        let err = track_levels(&fam, &mesh, DerivativeMethod::FiniteDifference, 1e-6).unwrap_err();
        assert!(matches!(err, Error::MeshTooCoarse { .. }));
    }

    #[test]
    fn derivative_methods_agree() {
        let fam = DiscreteFamily::random_smooth(4, 3, 0.0, 2.0).unwrap();
        let mesh = TimeMesh::new(0.0, 2.0, 2000).unwrap();
        let fd = track_levels(&fam, &mesh, DerivativeMethod::FiniteDifference, 1e-6).unwrap();
        let pt = track_levels(&fam, &mesh, DerivativeMethod::Perturbative, 1e-6).unwrap();
        for (a, b) in fd.iter().zip(&pt) {
            for k in 1..mesh.len() - 1 {
                // off-diagonal identity <m|n_dot> = <m|dH|n> / (E_n - E_m)
                assert!((&a.derivatives()[k] - &b.derivatives()[k]).amax() < 1e-6);
            }
        }
    }

    #[test]
    fn completeness_of_all_levels() {
        let fam = DiscreteFamily::random_smooth(3, 8, 0.0, 1.0).unwrap();
        let mesh = TimeMesh::new(0.0, 1.0, 50).unwrap();
        let tracks = track_levels(&fam, &mesh, DerivativeMethod::FiniteDifference, 1e-6).unwrap();
        for k in 0..mesh.len() {
            let sum = tracks
                .iter()
                .fold(nalgebra::DMatrix::zeros(3, 3), |acc, tr| acc + &tr.vectors()[k] * tr.vectors()[k].transpose());
            assert!((sum - nalgebra::DMatrix::identity(3, 3)).amax() < 1e-9);
        }
    }

    #[test]
    fn adiabatic_state_phases() {
        let mesh = TimeMesh::new(0.0, PI, 100).unwrap();
        let v = DVector::from_vec(vec![1.0, 0.0]);
        let tr = gauge_fix_track(vec![v.clone(); 101], vec![1.0; 101], mesh, 0, Basis::Discrete).unwrap();
        let s0 = adiabatic_state(&tr, 0.0).unwrap();
        assert_eq!(s0.amplitudes()[0], Complex64::new(1.0, 0.0));
        let s = adiabatic_state(&tr, PI).unwrap();
        assert!((s.amplitudes()[0] - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
        assert!(adiabatic_state(&tr, 4.0).is_err());
    }

    #[test]
    fn two_level_adiabatic_state_closed_form() {
        use crate::schedule::{FieldMagnitude, MixingAngle, Schedule};
        let hz = Polynomial::new(vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        let theta = MixingAngle { gamma: 2.0, field: hz.clone() };
        let h = FieldMagnitude { gamma: 2.0, field: hz };
        let fam = DiscreteFamily::two_level(Arc::new(theta.clone()), Arc::new(h.clone())).unwrap();
        let mesh = TimeMesh::new(0.0, 2.0, 4000).unwrap();
        let tracks = track_levels(&fam, &mesh, DerivativeMethod::FiniteDifference, 1e-6).unwrap();
        // upper level E = +h/2 is |1> = (cos theta/2, sin theta/2)
        let upper = &tracks[1];
        let t = 1.5;
        let s = adiabatic_state(upper, t).unwrap();
        // int_0^t h/2 by fine quadrature
        let n = 20000;
        let integral: f64 = (0..n)
            .map(|j| {
                let a = t * j as f64 / n as f64;
                let b = t * (j + 1) as f64 / n as f64;
                0.25 * (b - a) * (h.eval(a) + h.eval(b))
            })
            .sum();
        let ph = Complex64::from_polar(1.0, -integral);
        let th = theta.eval(t);
        let expected = [ph * (th / 2.0).cos(), ph * (th / 2.0).sin()];
        for (a, b) in s.amplitudes().iter().zip(expected) {
            assert!((a - b).norm() < 1e-6);
        }
    }
}
