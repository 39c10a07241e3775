//! Lowest bound states of `-(1/2m) d^2/dx^2 + U` on a uniform grid.
//!
//! Three-point stencil with Dirichlet walls one spacing beyond each grid
//! end. Eigenvalues come from Sturm-sequence bisection, eigenvectors from
//! inverse iteration with a pivoted tridiagonal LU, so only the requested
//! levels are computed.

use crate::error::{Error, Result};
use crate::grid::SpatialGrid1D;
use crate::hamiltonian::Potential1D;

/// Symmetric tridiagonal matrix: `diag` (n) and `off` (n - 1).
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::invalid("tridiagonal needs n diagonal and n-1 off-diagonal entries"));
        }
        if diag.iter().chain(&off).any(|v| !v.is_finite()) {
            return Err(Error::invalid("tridiagonal entries must be finite"));
        }
        Ok(Self { diag, off })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let tiny = f64::MIN_POSITIVE.sqrt();
        let mut count = 0;
        let mut q = self.diag[0] - x;
        for i in 0..self.len() {
            if i > 0 {
                let e = self.off[i - 1];
                q = self.diag[i] - x - e * e / q;
            }
            if q == 0.0 {
                q = -tiny;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// `k`-th smallest eigenvalue (0-based) by bisection.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        let pad = 1e-12 * (lo.abs().max(hi.abs())).max(1.0);
        lo -= pad;
        hi += pad;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// Unit-norm (Euclidean) eigenvector for an accurate eigenvalue.
    pub fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.len();
        let mut v: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.5 * ((i as f64) * 1.618_033_988_75 + 0.3).sin())
            .collect();
        let lu = ShiftedLu::factor(self, lambda);
        for _ in 0..3 {
            lu.solve(&mut v);
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= norm);
        }
        v
    }
}

/// LU factorization of `T - shift I` with partial pivoting (gttrf layout).
struct ShiftedLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn factor(t: &SymTridiagonal, shift: f64) -> Self {
        let n = t.len();
        let scale = t
            .diag
            .iter()
            .chain(&t.off)
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(1.0);
        let tiny = f64::EPSILON * scale;
        let mut dl = t.off.clone();
        let mut d: Vec<f64> = t.diag.iter().map(|v| v - shift).collect();
        let mut du = t.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        if d[n - 1] == 0.0 {
            d[n - 1] = tiny;
        }
        Self { dl, d, du, du2, swapped }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = b.len();
        for i in 0..n - 1 {
            if self.swapped[i] {
                b.swap(i, i + 1);
            }
            b[i + 1] -= self.dl[i] * b[i];
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundState {
    pub energy: f64,
    /// Real eigenfunction with `dx * sum psi^2 = 1`, first significant
    /// component positive.
    pub wavefunction: Vec<f64>,
}

/// The `k` lowest eigenpairs of the finite-difference Hamiltonian at time `t`.
pub fn bound_states_1d(
    family: &Potential1D,
    grid: &SpatialGrid1D<f64>,
    t: f64,
    k: usize,
) -> Result<Vec<BoundState>> {
    if k == 0 {
        return Err(Error::invalid("need at least one bound state"));
    }
    if k > grid.len() / 4 {
        return Err(Error::invalid(format!(
            "{k} states requested but only {} are reliable on {} points",
            grid.len() / 4,
            grid.len()
        )));
    }
    family.check_on_grid(grid, t)?;
    let dx = grid.spacing();
    let kinetic = 1.0 / (2.0 * family.mass() * dx * dx);
    let u = family.on_grid(grid, t);
    let diag: Vec<f64> = u.iter().map(|v| 2.0 * kinetic + v).collect();
    let off = vec![-kinetic; grid.len() - 1];
    let tri = SymTridiagonal::new(diag, off)?;

    let energies: Vec<f64> = (0..k).map(|j| tri.eigenvalue(j)).collect();
    let wall = u[0].min(u[u.len() - 1]);
    let top = energies[k - 1];
    if !(wall > top) {
        return Err(Error::Domain(format!(
            "potential not confining on the grid at t = {t}: edge value {wall} <= E_{} = {top}",
            k - 1
        )));
    }

    Ok(energies
        .into_iter()
        .map(|energy| {
            let mut psi = tri.eigenvector(energy);
            let norm = (dx * psi.iter().map(|p| p * p).sum::<f64>()).sqrt();
            let max = psi.iter().fold(0.0f64, |m, p| m.max(p.abs()));
            let first = psi.iter().find(|p| p.abs() > 1e-8 * max).copied().unwrap_or(1.0);
            let sign = if first < 0.0 { -1.0 } else { 1.0 };
            psi.iter_mut().for_each(|p| *p *= sign / norm);
            BoundState { energy, wavefunction: psi }
        })
        .collect())
}
