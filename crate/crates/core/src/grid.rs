use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Uniform 1D grid including both end points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialGrid1D<T> {
    x_min: T,
    x_max: T,
    n_points: usize,
}

impl<T: Real> SpatialGrid1D<T> {
    pub const MIN_POINTS: usize = 8;

    pub fn new(x_min: T, x_max: T, n_points: usize) -> Result<Self> {
        if n_points < Self::MIN_POINTS {
            return Err(Error::invalid(format!(
                "grid needs at least {} points (got {n_points})",
                Self::MIN_POINTS
            )));
        }
        if !(x_min.is_finite() && x_max.is_finite()) || !(x_max > x_min) {
            return Err(Error::invalid(format!(
                "grid bounds must be finite with x_max > x_min (got [{x_min}, {x_max}])"
            )));
        }
        Ok(Self { x_min, x_max, n_points })
    }

    pub fn x_min(&self) -> T {
        self.x_min
    }

    pub fn x_max(&self) -> T {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> T {
        (self.x_max - self.x_min) / lit::<T>((self.n_points - 1) as f64)
    }

    pub fn point(&self, i: usize) -> T {
        if i + 1 == self.n_points {
            self.x_max
        } else {
            self.x_min + self.spacing() * lit::<T>(i as f64)
        }
    }

    pub fn points(&self) -> Vec<T> {
        (0..self.n_points).map(|i| self.point(i)).collect()
    }

    /// Index of the grid point nearest to `x` (clamped to the grid).
    pub fn nearest_index(&self, x: T) -> usize {
        let raw = ((x - self.x_min) / self.spacing()).round();
        let max = (self.n_points - 1) as f64;
        raw.to_f64_lossy().clamp(0.0, max) as usize
    }

    /// Grid with the same bounds and half the spacing.
    pub fn refined(&self) -> Self {
        Self {
            n_points: 2 * self.n_points - 1,
            ..*self
        }
    }

    pub fn samples(&self, f: impl Fn(T) -> T) -> Vec<T> {
        (0..self.n_points).map(|i| f(self.point(i))).collect()
    }
}

/// Uniform time mesh `t_start + k dt`, `k = 0..=n_steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeMesh<T> {
    t_start: T,
    t_end: T,
    n_steps: usize,
}

impl<T: Real> TimeMesh<T> {
    pub fn new(t_start: T, t_end: T, n_steps: usize) -> Result<Self> {
        if n_steps < 2 {
            return Err(Error::invalid(format!("time mesh needs n_steps >= 2 (got {n_steps})")));
        }
        if !(t_start.is_finite() && t_end.is_finite()) || !(t_end > t_start) {
            return Err(Error::invalid(format!(
                "time mesh needs finite t_end > t_start (got [{t_start}, {t_end}])"
            )));
        }
        Ok(Self { t_start, t_end, n_steps })
    }

    /// Mesh with step as close as possible to `dt` (rounded up to whole steps).
    pub fn with_step(t_start: T, t_end: T, dt: T) -> Result<Self> {
        if !(dt > T::zero()) {
            return Err(Error::invalid("time step must be positive"));
        }
        let n = ((t_end - t_start) / dt).round().to_f64_lossy();
        if !n.is_finite() || n < 0.0 {
            return Err(Error::invalid("time step incompatible with interval"));
        }
        Self::new(t_start, t_end, (n as usize).max(2))
    }

    pub fn t_start(&self) -> T {
        self.t_start
    }

    pub fn t_end(&self) -> T {
        self.t_end
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Number of mesh nodes, `n_steps + 1`.
    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dt(&self) -> T {
        (self.t_end - self.t_start) / lit::<T>(self.n_steps as f64)
    }

    pub fn time(&self, k: usize) -> T {
        if k == self.n_steps {
            self.t_end
        } else {
            self.t_start + self.dt() * lit::<T>(k as f64)
        }
    }

    pub fn times(&self) -> Vec<T> {
        (0..=self.n_steps).map(|k| self.time(k)).collect()
    }

    pub fn contains(&self, t: T) -> bool {
        let tol = self.dt() * lit::<T>(1e-9);
        t >= self.t_start - tol && t <= self.t_end + tol
    }

    /// Locates `t` as `(k, w)` with `t = (1 - w) t_k + w t_{k+1}`.
    pub fn locate(&self, t: T) -> Option<(usize, T)> {
        if !self.contains(t) {
            return None;
        }
        let u = ((t - self.t_start) / self.dt()).max(T::zero());
        let k = u.floor().to_f64_lossy() as usize;
        if k >= self.n_steps {
            return Some((self.n_steps - 1, T::one()));
        }
        Some((k, u - lit::<T>(k as f64)))
    }

    pub fn refined(&self) -> Self {
        Self {
            n_steps: 2 * self.n_steps,
            ..*self
        }
    }
}

/// Derivative of uniformly spaced samples: central differences inside,
/// second-order one-sided differences at the ends.
pub fn differentiate_uniform<T: Real>(values: &[T], step: T) -> Vec<T> {
    let n = values.len();
    assert!(n >= 3, "need at least three samples to differentiate");
    let two = lit::<T>(2.0);
    let three = lit::<T>(3.0);
    let four = lit::<T>(4.0);
    let mut out = Vec::with_capacity(n);
    out.push((-three * values[0] + four * values[1] - values[2]) / (two * step));
    for k in 1..n - 1 {
        out.push((values[k + 1] - values[k - 1]) / (two * step));
    }
    out.push((three * values[n - 1] - four * values[n - 2] + values[n - 3]) / (two * step));
    out
}

/// Fourth-order central differences, one-sided at the ends.
pub fn differentiate_fourth_order(values: &[f64], step: f64) -> Vec<f64> {
    let n = values.len();
    if n < 5 {
        return differentiate_uniform(values, step);
    }
    let y = values;
    (0..n)
        .map(|k| {
            let d = if k >= 2 && k + 2 < n {
                y[k - 2] - 8.0 * y[k - 1] + 8.0 * y[k + 1] - y[k + 2]
            } else if k < 2 {
                let s = y;
                match k {
                    0 => -25.0 * s[0] + 48.0 * s[1] - 36.0 * s[2] + 16.0 * s[3] - 3.0 * s[4],
                    _ => -3.0 * s[0] - 10.0 * s[1] + 18.0 * s[2] - 6.0 * s[3] + s[4],
                }
            } else {
                let s = &y[n - 5..];
                match n - 1 - k {
                    0 => 25.0 * s[4] - 48.0 * s[3] + 36.0 * s[2] - 16.0 * s[1] + 3.0 * s[0],
                    _ => 3.0 * s[4] + 10.0 * s[3] - 18.0 * s[2] + 6.0 * s[1] - s[0],
                }
            };
            d / (12.0 * step)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fourth_order_derivative_is_exact_on_quartics() {
        let h = 0.1;
        let y: Vec<f64> = (0..9).map(|k| (k as f64 * h).powi(4) - 2.0 * (k as f64 * h)).collect();
        for (k, d) in differentiate_fourth_order(&y, h).into_iter().enumerate() {
            let x = k as f64 * h;
            assert!((d - (4.0 * x.powi(3) - 2.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn grid_is_uniform_and_increasing() {
        let g = SpatialGrid1D::<f64>::new(-1.0, 1.0, 11).unwrap();
        assert!((g.spacing() - 0.2).abs() < 1e-15);
        let pts = g.points();
        assert_eq!(pts[0], -1.0);
        assert_eq!(pts[10], 1.0);
        for w in pts.windows(2) {
            assert!(w[1] > w[0]);
            assert!((w[1] - w[0] - 0.2).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_validation() {
        assert!(SpatialGrid1D::<f64>::new(0.0, 1.0, 7).is_err());
        assert!(SpatialGrid1D::<f64>::new(1.0, 1.0, 10).is_err());
        assert!(SpatialGrid1D::<f64>::new(0.0, f64::INFINITY, 10).is_err());
    }

    #[test]
    fn refined_grid_halves_spacing() {
        let g = SpatialGrid1D::<f64>::new(-2.0, 2.0, 41).unwrap();
        let r = g.refined();
        assert!((r.spacing() - g.spacing() / 2.0).abs() < 1e-15);
        assert_eq!(r.point(2), g.point(1));
    }

    #[test]
    fn mesh_basics() {
        let m = TimeMesh::<f64>::new(0.0, 6.0, 6000).unwrap();
        assert!((m.dt() - 1e-3).abs() < 1e-15);
        assert_eq!(m.len(), 6001);
        assert_eq!(m.time(6000), 6.0);
        assert!(TimeMesh::<f64>::new(0.0, 1.0, 1).is_err());
        assert!(TimeMesh::<f64>::new(1.0, 0.0, 10).is_err());
        let (k, w) = m.locate(2.5005).unwrap();
        assert_eq!(k, 2500);
        assert!((w - 0.5).abs() < 1e-6);
        assert!(m.locate(6.1).is_none());
    }

    #[test]
    fn with_step_rounds() {
        let m = TimeMesh::with_step(0.0, 4.0, 1e-3).unwrap();
        assert_eq!(m.n_steps(), 4000);
    }

    #[test]
    fn uniform_derivative_exact_on_quadratics() {
        let h = 0.1;
        let v: Vec<f64> = (0..20).map(|k| (k as f64 * h).powi(2)).collect();
        let d = differentiate_uniform(&v, h);
        for (k, dk) in d.iter().enumerate() {
            assert!((dk - 2.0 * k as f64 * h).abs() < 1e-12);
        }
    }
}
