use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::SpatialGrid1D;

/// Inner-product convention attached to a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Basis {
    /// Position grid with Riemann-sum inner product `dx * sum conj(a) b`.
    Grid { spacing: f64 },
    /// Plain sum over the amplitudes of a finite-dimensional state.
    Discrete,
}

impl Basis {
    fn weight(&self) -> f64 {
        match *self {
            Basis::Grid { spacing } => spacing,
            Basis::Discrete => 1.0,
        }
    }

    fn compatible(&self, other: &Basis) -> bool {
        match (self, other) {
            (Basis::Discrete, Basis::Discrete) => true,
            (Basis::Grid { spacing: a }, Basis::Grid { spacing: b }) => {
                (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
            }
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
    basis: Basis,
}

impl StateVector {
    pub fn new(amplitudes: Vec<Complex64>, basis: Basis) -> Self {
        Self { amplitudes, basis }
    }

    pub fn discrete(amplitudes: Vec<Complex64>) -> Self {
        Self::new(amplitudes, Basis::Discrete)
    }

    pub fn on_grid(amplitudes: Vec<Complex64>, grid: &SpatialGrid1D<f64>) -> Self {
        Self::new(amplitudes, Basis::Grid { spacing: grid.spacing() })
    }

    pub fn from_real(values: &[f64], basis: Basis) -> Self {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect(), basis)
    }

    pub fn from_dvector(v: &DVector<Complex64>) -> Self {
        Self::discrete(v.iter().copied().collect())
    }

    pub fn to_dvector(&self) -> DVector<Complex64> {
        DVector::from_column_slice(&self.amplitudes)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.basis.weight() * self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    /// `<self|other>` in the basis convention. Fails on basis or length mismatch.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if !self.basis.compatible(&other.basis) {
            return Err(Error::invalid(format!(
                "basis mismatch: {:?} vs {:?}",
                self.basis, other.basis
            )));
        }
        if self.len() != other.len() {
            return Err(Error::invalid(format!(
                "state length mismatch: {} vs {}",
                self.len(),
                other.len()
            )));
        }
        let sum: Complex64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(sum * self.basis.weight())
    }

    /// Unit-norm copy.
    pub fn normalized(&self) -> Result<StateVector> {
        let n2 = self.norm_sqr();
        if !(n2 > 0.0) || !n2.is_finite() {
            return Err(Error::DegenerateState(format!("cannot normalize state with norm^2 = {n2}")));
        }
        let scale = 1.0 / n2.sqrt();
        Ok(Self::new(self.amplitudes.iter().map(|a| a * scale).collect(), self.basis))
    }

    pub fn scaled(&self, factor: Complex64) -> StateVector {
        Self::new(self.amplitudes.iter().map(|a| a * factor).collect(), self.basis)
    }
}

/// Normalizes `state`; when `grid` is given the Riemann weight is taken from it.
pub fn normalize(state: &StateVector, grid: Option<&SpatialGrid1D<f64>>) -> Result<StateVector> {
    match grid {
        Some(g) => {
            if g.len() != state.len() {
                return Err(Error::invalid("state length does not match grid"));
            }
            StateVector::on_grid(state.amplitudes.clone(), g).normalized()
        }
        None => state.normalized(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn discrete_scaling() {
        let s = StateVector::discrete(vec![c(2.0), c(0.0)]);
        let n = normalize(&s, None).unwrap();
        assert_eq!(n.amplitudes(), &[c(1.0), c(0.0)]);
    }

    #[test]
    fn grid_constant_normalizes_to_one() {
        let g = SpatialGrid1D::new(0.0, 1.0, 101).unwrap();
        // Riemann sum dx * 101 points
        let s = StateVector::on_grid(vec![c(3.0); 101], &g);
        let n = normalize(&s, Some(&g)).unwrap();
        assert!((n.norm_sqr() - 1.0).abs() < 1e-12);
        let expected = 1.0 / (0.01f64 * 101.0).sqrt();
        for a in n.amplitudes() {
            assert!((a.re - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_vector_rejected() {
        let s = StateVector::discrete(vec![c(0.0); 3]);
        assert!(matches!(normalize(&s, None), Err(Error::DegenerateState(_))));
    }

    #[test]
    fn basis_mismatch_rejected() {
        let a = StateVector::discrete(vec![c(1.0); 8]);
        let b = StateVector::new(vec![c(1.0); 8], Basis::Grid { spacing: 0.1 });
        assert!(a.inner(&b).is_err());
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(re in proptest::collection::vec(-5.0f64..5.0, 2..12),
                                   im in proptest::collection::vec(-5.0f64..5.0, 12)) {
            let amps: Vec<Complex64> = re.iter().zip(&im).map(|(&a, &b)| Complex64::new(a, b)).collect();
            let s = StateVector::discrete(amps);
            prop_assume!(s.norm_sqr() > 1e-6);
            let once = s.normalized().unwrap();
            let twice = once.normalized().unwrap();
            for (a, b) in once.amplitudes().iter().zip(twice.amplitudes()) {
                prop_assert!((a - b).norm() <= 1e-12);
            }
            prop_assert!(once.is_normalized(1e-9));
        }
    }
}
