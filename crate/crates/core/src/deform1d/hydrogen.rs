//! Closed-form drivers for the hydrogen ground state
//! `rho = exp(-2 |r - r0| / xi) / (pi xi^3)` in `U = -1 / (m xi |r - r0|)`.

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use crate::schedule::Schedule;

/// Default lower bound on `r / xi` for the translation driver.
pub const DEFAULT_RELATIVE_R_FLOOR: f64 = 1e-3;
/// Default lower bound on `z = r / xi` for the dilatation driver.
pub const DEFAULT_Z_FLOOR: f64 = 1e-3;

pub fn hydrogen_density<T: Real>(r: T, xi: T) -> T {
    (-lit::<T>(2.0) * r / xi).exp() / (T::PI() * xi * xi * xi)
}

/// `d rho/dt` at fixed `r` for a time-dependent `xi`.
pub fn hydrogen_density_rate<T: Real>(r: T, xi: T, xi_dot: T) -> T {
    hydrogen_density(r, xi) * xi_dot * (lit::<T>(2.0) * r / (xi * xi) - lit::<T>(3.0) / xi)
}

/// `d phi/dr = m r_dot (1 + xi/r + xi^2 / 2r^2)`.
pub fn translation_phase_gradient<T: Real>(mass: T, xi: T, r: T, r_dot: T) -> T {
    let q = xi / r;
    mass * r_dot * (T::one() + q + q * q / lit::<T>(2.0))
}

/// `V = m r_ddot (r + xi ln r - xi^2/2r) - (m r_dot^2 / 2)(xi^2/r^2)(1 + xi/2r)^2`.
pub fn translation_potential<T: Real>(mass: T, xi: T, r: T, r_dot: T, r_ddot: T) -> T {
    let q = xi / r;
    let two = lit::<T>(2.0);
    let bracket = T::one() + q / two;
    mass * r_ddot * (r + xi * r.ln() - xi * q / two) - mass * r_dot * r_dot / two * q * q * bracket * bracket
}

/// `d phi/dz = -m xi xi_dot (z - 1/2 - 1/4z)`.
pub fn dilatation_phase_gradient<T: Real>(mass: T, xi: T, xi_dot: T, z: T) -> T {
    let half = lit::<T>(0.5);
    -mass * xi * xi_dot * (z - half - T::one() / (lit::<T>(4.0) * z))
}

/// `V = -(m xi xi_ddot / 2)(z^2 - z - ln z / 2)
///      - (m xi_dot^2 / 2)(-z + 1/4 - ln z / 2 + 1/4z + 1/16z^2)`.
pub fn dilatation_potential_radial<T: Real>(mass: T, xi: T, xi_dot: T, xi_ddot: T, z: T) -> T {
    let half = lit::<T>(0.5);
    let quarter = lit::<T>(0.25);
    let lz = z.ln();
    -half * mass * xi * xi_ddot * (z * z - z - half * lz)
        - half * mass * xi_dot * xi_dot * (-z + quarter - half * lz + quarter / z + T::one() / (lit::<T>(16.0) * z * z))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TranslationFields<T> {
    pub r: T,
    pub r_dot: T,
    pub r_ddot: T,
    pub dphi_dr: T,
    pub potential: T,
}

/// Atom of fixed size `xi` whose center follows `r0(t)`.
#[derive(Debug, Clone)]
pub struct HydrogenTranslation<T, S> {
    xi: T,
    center: [S; 3],
    mass: T,
    r_floor: T,
}

impl<T: Real, S: Schedule<T>> HydrogenTranslation<T, S> {
    pub fn new(xi: T, center: [S; 3], mass: T) -> Result<Self> {
        if !(xi > T::zero()) || !(mass > T::zero()) {
            return Err(Error::invalid("xi and mass must be positive"));
        }
        Ok(Self { xi, center, mass, r_floor: lit::<T>(DEFAULT_RELATIVE_R_FLOOR) * xi })
    }

    pub fn with_floor(mut self, r_floor: T) -> Self {
        self.r_floor = r_floor;
        self
    }

    pub fn xi(&self) -> T {
        self.xi
    }

    /// Fields at a 3D point, with `r = |p - r0(t)|` and its time derivatives
    /// at fixed `p`.
    pub fn fields(&self, point: [T; 3], t: T) -> Result<TranslationFields<T>> {
        let mut d = [T::zero(); 3];
        let mut dv = [T::zero(); 3];
        let mut da = [T::zero(); 3];
        for k in 0..3 {
            let (c, v, a) = self.center[k].jet(t);
            d[k] = point[k] - c;
            dv[k] = -v;
            da[k] = -a;
        }
        let dot = |a: &[T; 3], b: &[T; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        let r = dot(&d, &d).sqrt();
        if !(r >= self.r_floor) {
            return Err(Error::NodeSingularity {
                position: r.to_f64_lossy(),
                detail: format!("distance to the nucleus below the floor {}", self.r_floor),
            });
        }
        let dd = dot(&d, &dv);
        let r_dot = dd / r;
        let r_ddot = (dot(&dv, &dv) + dot(&d, &da)) / r - dd * dd / (r * r * r);
        Ok(TranslationFields {
            r,
            r_dot,
            r_ddot,
            dphi_dr: translation_phase_gradient(self.mass, self.xi, r, r_dot),
            potential: translation_potential(self.mass, self.xi, r, r_dot, r_ddot),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DilatationFields<T> {
    pub z: T,
    pub dphi_dz: T,
    /// `d phi/dr = (d phi/dz) / xi`
    pub dphi_dr: T,
    pub potential: T,
}

/// Atom at the origin with time-dependent size `xi(t)`.
#[derive(Debug, Clone)]
pub struct HydrogenDilatation<T, S> {
    xi: S,
    mass: T,
    z_floor: T,
}

impl<T: Real, S: Schedule<T>> HydrogenDilatation<T, S> {
    pub fn new(xi: S, mass: T) -> Result<Self> {
        if !(mass > T::zero()) {
            return Err(Error::invalid("mass must be positive"));
        }
        Ok(Self { xi, mass, z_floor: lit::<T>(DEFAULT_Z_FLOOR) })
    }

    pub fn with_floor(mut self, z_floor: T) -> Self {
        self.z_floor = z_floor;
        self
    }

    pub fn schedule(&self) -> &S {
        &self.xi
    }

    pub fn fields(&self, r: T, t: T) -> Result<DilatationFields<T>> {
        let (s, sd, sdd) = self.xi.jet(t);
        if !(s > T::zero()) {
            return Err(Error::Domain(format!("xi({t}) = {s} must be positive")));
        }
        let z = r / s;
        if !(z >= self.z_floor) {
            return Err(Error::NodeSingularity {
                position: r.to_f64_lossy(),
                detail: format!("z = {z} below the floor {}", self.z_floor),
            });
        }
        let dphi_dz = dilatation_phase_gradient(self.mass, s, sd, z);
        Ok(DilatationFields {
            z,
            dphi_dz,
            dphi_dr: dphi_dz / s,
            potential: dilatation_potential_radial(self.mass, s, sd, sdd, z),
        })
    }
}

/// Divergence used in the radial continuity residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RadialGeometry {
    /// `(1/r^2) d_r (r^2 rho d_r phi)`
    #[default]
    Spherical,
    /// `(1/r) d_r (r rho d_r phi)`
    Cylindrical,
}

impl RadialGeometry {
    fn power(self) -> i32 {
        match self {
            RadialGeometry::Spherical => 2,
            RadialGeometry::Cylindrical => 1,
        }
    }
}

/// Relative L2 residual of `d rho/dt = (1/m) div(rho grad phi)` for radial
/// fields sampled on a uniform `r` grid at equally spaced times `dt` apart.
///
/// `d rho/dt` comes from central time differences, so only interior time
/// samples contribute; the divergence uses central differences in `r`.
pub fn continuity_residual_radial(
    r: &[f64],
    dt: f64,
    rho: &[Vec<f64>],
    dphi_dr: &[Vec<f64>],
    mass: f64,
    geometry: RadialGeometry,
    floor: f64,
) -> Result<f64> {
    if rho.len() < 3 || dphi_dr.len() != rho.len() {
        return Err(Error::invalid("need at least three matching time samples"));
    }
    let n = r.len();
    if n < 3 || rho.iter().chain(dphi_dr).any(|s| s.len() != n) {
        return Err(Error::invalid("fields and radial grid differ in length"));
    }
    let dr = r[1] - r[0];
    if !(dr > 0.0) || r[0] < 0.0 || r.windows(2).any(|w| ((w[1] - w[0]) - dr).abs() > 1e-9 * dr.max(1.0)) {
        return Err(Error::invalid("radial grid must be uniform, increasing and nonnegative"));
    }
    if !(dt > 0.0) || !(mass > 0.0) {
        return Err(Error::invalid("dt and mass must be positive"));
    }
    let p = geometry.power();
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 1..rho.len() - 1 {
        let peak = rho[k].iter().cloned().fold(0.0, f64::max);
        let flux: Vec<f64> = (0..n).map(|i| r[i].powi(p) * rho[k][i] * dphi_dr[k][i]).collect();
        for i in 1..n - 1 {
            if !(rho[k][i] > floor * peak) || r[i] <= 0.0 {
                continue;
            }
            let rate = (rho[k + 1][i] - rho[k - 1][i]) / (2.0 * dt);
            let div = (flux[i + 1] - flux[i - 1]) / (2.0 * dr) / r[i].powi(p);
            let res = rate - div / mass;
            num += res * res;
            den += rate * rate;
        }
    }
    if den == 0.0 {
        return Ok(num.sqrt());
    }
    Ok((num / den).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::{Constant, Polynomial, SharedSchedule};
    use std::sync::Arc;

    #[test]
    fn static_atom_has_no_driver() {
        let h = HydrogenTranslation::new(1.0, [Constant(0.0), Constant(0.0), Constant(1.0)], 1.0).unwrap();
        let f = h.fields([0.3, -0.2, 2.0], 0.7).unwrap();
        assert_eq!(f.dphi_dr, 0.0);
        assert_eq!(f.potential, 0.0);
        let d = HydrogenDilatation::new(Constant(1.5), 1.0).unwrap();
        let f = d.fields(0.8, 3.0).unwrap();
        assert_eq!(f.dphi_dz, 0.0);
        assert_eq!(f.potential, 0.0);
    }

    #[test]
    fn translation_spot_value() {
        let (m, xi, s): (f64, f64, f64) = (1.3, 0.7, 0.4);
        assert!((translation_phase_gradient(m, xi, xi, s) - 2.5 * m * s).abs() < 1e-12);
    }

    #[test]
    fn translation_kinematics_match_differences() {
        let fixed: SharedSchedule<f64> = Arc::new(Constant(0.0));
        let moving: SharedSchedule<f64> = Arc::new(Polynomial::<f64>::new(vec![0.0, 0.5, 0.3]).unwrap());
        let h = HydrogenTranslation::new(1.0, [fixed.clone(), fixed, moving], 1.0).unwrap();
        let p = [0.4, 0.3, 1.2];
        let t = 0.6;
        let e = 1e-5;
        let r = |t: f64| h.fields(p, t).unwrap().r;
        let f = h.fields(p, t).unwrap();
        assert!((f.r_dot - (r(t + e) - r(t - e)) / (2.0 * e)).abs() < 1e-8);
        assert!((f.r_ddot - (r(t + e) - 2.0 * r(t) + r(t - e)) / (e * e)).abs() < 1e-4);
    }

    #[test]
    fn translation_small_r_is_dominated_by_inverse_terms() {
        // fixed r_dot, r_ddot: the xi^2/2r and (xi/r)^2 (1 + xi/2r)^2 terms grow
        let (m, xi) = (1.0, 1.0);
        let a = translation_potential(m, xi, 0.1, 0.2, 0.3);
        let b = translation_potential(m, xi, 0.01, 0.2, 0.3);
        assert!(b < a && a < 0.0);
        let lead = |r: f64| -m * 0.3 * xi * xi / (2.0 * r) - m * 0.04 / 2.0 * xi.powi(4) / (4.0 * r.powi(4));
        assert!(((b - lead(0.01)) / b).abs() < 0.05);
        let h = HydrogenTranslation::new(1.0, [Constant(0.0), Constant(0.0), Constant(0.0)], 1.0).unwrap();
        assert!(matches!(h.fields([0.0, 0.0, 1e-4], 0.0), Err(Error::NodeSingularity { .. })));
    }

    #[test]
    fn dilatation_spot_values() {
        let (xi, xd): (f64, f64) = (1.4, 0.3);
        assert!((dilatation_phase_gradient(1.0, xi, xd, 1.0) + xi * xd / 4.0).abs() < 1e-12);
        assert!((dilatation_phase_gradient(1.0, xi, xd, 0.5) - xi * xd / 2.0).abs() < 1e-12);
        let d = HydrogenDilatation::new(Polynomial::<f64>::new(vec![1.0, 0.3]).unwrap(), 1.0).unwrap();
        assert!(matches!(d.fields(1e-4, 0.0), Err(Error::NodeSingularity { .. })));
    }

    #[test]
    fn dilatation_potential_matches_phase_up_to_time_shift() {
        // V - (phi_t - phi_r^2 / 2m) must not depend on r
        let xi = Polynomial::<f64>::new(vec![1.0, 0.3, 0.2]).unwrap();
        let m = 1.3;
        let d = HydrogenDilatation::new(xi.clone(), m).unwrap();
        let phi = |r: f64, t: f64| {
            // integrate d phi/dr from r = 1 with Simpson
            let n = 2000;
            let h = (r - 1.0) / n as f64;
            let g = |s: f64| d.fields(s, t).unwrap().dphi_dr;
            let mut acc = g(1.0) + g(r);
            for i in 1..n {
                acc += if i % 2 == 1 { 4.0 } else { 2.0 } * g(1.0 + h * i as f64);
            }
            acc * h / 3.0
        };
        let t = 0.8;
        let e = 1e-4;
        let shift: Vec<f64> = [0.3, 0.9, 1.7, 3.0]
            .iter()
            .map(|&r| {
                let f = d.fields(r, t).unwrap();
                let rate = (phi(r, t + e) - phi(r, t - e)) / (2.0 * e);
                f.potential - (rate - f.dphi_dr * f.dphi_dr / (2.0 * m))
            })
            .collect();
        for s in &shift {
            assert!((s - shift[0]).abs() < 1e-6, "{shift:?}");
        }
    }

    fn radial_fields(n: usize, geometry_check: RadialGeometry) -> f64 {
        let xi = Polynomial::<f64>::new(vec![1.0, 0.5]).unwrap();
        let d = HydrogenDilatation::new(xi.clone(), 1.0).unwrap();
        let r: Vec<f64> = (0..n).map(|i| 0.05 + 11.95 * i as f64 / (n - 1) as f64).collect();
        let dt = 1e-4;
        let t0 = 0.5;
        let mut rho = Vec::new();
        let mut grad = Vec::new();
        for k in 0..3 {
            let t = t0 + (k as f64 - 1.0) * dt;
            rho.push(r.iter().map(|&x| hydrogen_density(x, xi.eval(t))).collect());
            grad.push(r.iter().map(|&x| d.fields(x, t).unwrap().dphi_dr).collect());
        }
        continuity_residual_radial(&r, dt, &rho, &grad, 1.0, geometry_check, 1e-10).unwrap()
    }

    #[test]
    fn dilatation_fields_solve_cylindrical_continuity() {
        let coarse = radial_fields(1000, RadialGeometry::Cylindrical);
        let fine = radial_fields(2000, RadialGeometry::Cylindrical);
        assert!(fine < 1e-3, "residual {fine}");
        assert!(coarse / fine > 3.5 && coarse / fine < 4.5, "ratio {}", coarse / fine);
        let spherical = radial_fields(2000, RadialGeometry::Spherical);
        assert!(spherical > 0.1);
    }

    #[test]
    fn translation_solves_spherical_continuity_radially() {
        // rho(r - c(t)) along the axis of motion; radial coordinate about the center
        let xi = 1.0;
        let n = 2000;
        let r: Vec<f64> = (0..n).map(|i| 0.05 + 11.95 * i as f64 / (n - 1) as f64).collect();
        let r_dot = 0.3;
        let dt = 1e-4;
        let rho: Vec<Vec<f64>> = (0..3)
            .map(|k| {
                let shift = r_dot * (k as f64 - 1.0) * dt;
                r.iter().map(|&x| hydrogen_density(x + shift, xi)).collect()
            })
            .collect();
        let grad: Vec<Vec<f64>> = (0..3)
            .map(|k| {
                let shift = r_dot * (k as f64 - 1.0) * dt;
                r.iter().map(|&x| translation_phase_gradient(1.0, xi, x + shift, r_dot)).collect()
            })
            .collect();
        let res = continuity_residual_radial(&r, dt, &rho, &grad, 1.0, RadialGeometry::Spherical, 1e-10).unwrap();
        assert!(res < 1e-3, "residual {res}");
    }

    #[test]
    fn static_density_zero_residual_and_sign_flip() {
        let r: Vec<f64> = (0..100).map(|i| 0.1 + 0.05 * i as f64).collect();
        let rho = vec![r.iter().map(|&x| hydrogen_density(x, 1.0)).collect::<Vec<f64>>(); 3];
        let zero = vec![vec![0.0; 100]; 3];
        let res = continuity_residual_radial(&r, 0.1, &rho, &zero, 1.0, RadialGeometry::Spherical, 1e-10).unwrap();
        assert_eq!(res, 0.0);
        assert!(continuity_residual_radial(&r[..50], 0.1, &rho, &zero, 1.0, RadialGeometry::Spherical, 1e-10).is_err());
    }
}
