//! Two-level deformation `U = exp(-i phi sigma.n)` about the fixed axis
//! `n = (sin varphi, 0, cos varphi)`, driven by `(v/2) sigma_z`.

use crate::error::{Error, Result};
use crate::grid::TimeMesh;
use crate::scalar::{lit, Real};
use crate::schedule::Schedule;

use super::two_level::two_level_phase;

/// Denominators below this are treated as zero.
pub const AXIS_SINGULAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisTolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for AxisTolerances {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, max_steps: 5_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxisDeformation<T> {
    pub mesh: TimeMesh<T>,
    pub varphi: T,
    pub phi: Vec<T>,
    pub phi_dot: Vec<T>,
    pub v: Vec<T>,
    /// Accepted integrator steps (0 on the `varphi = 0` reduction).
    pub steps: usize,
}

/// Residuals of
/// `theta_dot = [v sin varphi - h sin(theta - varphi)] sin 2phi` and
/// `(v/2) A = phi_dot sin(theta - varphi) - (h/2) sin 2(theta - varphi) sin^2 phi`.
pub fn axis_residuals<T: Real>(
    varphi: T,
    theta: &dyn Schedule<T>,
    h: &dyn Schedule<T>,
    t: T,
    phi: T,
    phi_dot: T,
    v: T,
) -> (T, T) {
    let two = lit::<T>(2.0);
    let (th, th1, _) = theta.jet(t);
    let hh = h.eval(t);
    let d = th - varphi;
    let r1 = th1 - (v * varphi.sin() - hh * d.sin()) * (two * phi).sin();
    let r2 = v / two * coefficient_a(varphi, th, phi) - phi_dot * d.sin() + hh / two * (two * d).sin() * phi.sin().powi(2);
    (r1, r2)
}

fn coefficient_a<T: Real>(varphi: T, theta: T, phi: T) -> T {
    let two = lit::<T>(2.0);
    let (s, c) = (phi.sin().powi(2), phi.cos().powi(2));
    (c + s * (two * varphi).cos()) * theta.sin() - s * (two * varphi).sin() * theta.cos()
}

/// `(phi_dot, v)` from the two equations at given `phi`.
fn axis_rhs<T: Real>(varphi: T, theta: &dyn Schedule<T>, h: &dyn Schedule<T>, t: T, phi: T) -> Result<(T, T)> {
    let two = lit::<T>(2.0);
    let tol = lit::<T>(AXIS_SINGULAR_TOL);
    let (th, th1, _) = theta.jet(t);
    let hh = h.eval(t);
    let s2 = (two * phi).sin();
    if s2.abs() < tol {
        return Err(Error::CoordinateSingularity {
            time: t.to_f64_lossy(),
            detail: format!("sin 2phi = {s2} while theta_dot = {th1}"),
        });
    }
    let d = th - varphi;
    let sd = d.sin();
    if sd.abs() < tol {
        return Err(Error::SingularSystem { time: t.to_f64_lossy(), denominator: sd.to_f64_lossy() });
    }
    let v = (th1 / s2 + hh * sd) / varphi.sin();
    let phi_dot = (v / two * coefficient_a(varphi, th, phi) + hh / two * (two * d).sin() * phi.sin().powi(2)) / sd;
    if !(phi_dot.is_finite() && v.is_finite()) {
        return Err(Error::SingularSystem { time: t.to_f64_lossy(), denominator: 0.0 });
    }
    Ok((phi_dot, v))
}

// Dormand-Prince 5(4) tableau
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One trial step; returns `(y5, error estimate)`.
fn dopri_step<T: Real>(f: &dyn Fn(T, T) -> Result<T>, t: T, y: T, h: T) -> Result<(T, T)> {
    let mut k = [T::zero(); 7];
    for i in 0..7 {
        let mut yi = y;
        for j in 0..i {
            yi = yi + h * lit::<T>(A[i][j]) * k[j];
        }
        k[i] = f(t + lit::<T>(C[i]) * h, yi)?;
    }
    let mut y5 = y;
    let mut y4 = y;
    for i in 0..7 {
        y5 = y5 + h * lit::<T>(B5[i]) * k[i];
        y4 = y4 + h * lit::<T>(B4[i]) * k[i];
    }
    Ok((y5, (y5 - y4).abs()))
}

/// Adaptive integration of `y' = f(t, y)` from `t0` to `t1`.
fn integrate<T: Real>(
    f: &dyn Fn(T, T) -> Result<T>,
    t0: T,
    t1: T,
    y0: T,
    step: &mut T,
    tol: &AxisTolerances,
    steps: &mut usize,
) -> Result<T> {
    let mut t = t0;
    let mut y = y0;
    let tiny = lit::<T>(1e-14) * T::one().max(t1.abs());
    let mut last_err: Option<Error> = None;
    while t < t1 {
        let mut h = (*step).min(t1 - t);
        if h < tiny {
            if t1 - t < tiny {
                break;
            }
            return Err(last_err.unwrap_or(Error::CoordinateSingularity {
                time: t.to_f64_lossy(),
                detail: "step size collapsed; the trajectory approaches sin 2phi = 0".into(),
            }));
        }
        match dopri_step(f, t, y, h) {
            Ok((y_new, err)) => {
                let scale = lit::<T>(tol.atol) + lit::<T>(tol.rtol) * y.abs().max(y_new.abs());
                let ratio = err / scale;
                if ratio <= T::one() {
                    t = t + h;
                    y = y_new;
                    *steps += 1;
                    if *steps > tol.max_steps {
                        return Err(Error::NoSolution {
                            time: t.to_f64_lossy(),
                            iterations: *steps,
                            residual: ratio.to_f64_lossy(),
                        });
                    }
                    last_err = None;
                }
                let factor = if ratio == T::zero() {
                    lit::<T>(5.0)
                } else {
                    (lit::<T>(0.9) * ratio.powf(lit::<T>(-0.2))).max(lit::<T>(0.2)).min(lit::<T>(5.0))
                };
                h = h * factor;
            }
            Err(e) => {
                last_err = Some(e);
                h = h * lit::<T>(0.25);
            }
        }
        *step = h;
    }
    Ok(y)
}

/// Solves the generalized-axis deformation on the mesh starting from
/// `phi(t_start) = phi_start`.
///
/// At a rest start (`theta_dot = 0` and `sin 2phi = 0`) both equations hold
/// for any `v`; the first mesh step is then seeded with the quasi-static
/// root `v = 0`, `sin 2phi = -theta_dot / (h sin(theta - varphi))`.
pub fn generalized_axis_two_level<T: Real>(
    varphi: T,
    theta: &dyn Schedule<T>,
    h: &dyn Schedule<T>,
    mesh: &TimeMesh<T>,
    phi_start: T,
    tol: &AxisTolerances,
) -> Result<AxisDeformation<T>> {
    let two = lit::<T>(2.0);
    let small = lit::<T>(AXIS_SINGULAR_TOL);
    if varphi.sin().abs() < small {
        let base = two_level_phase(theta, h, mesh)?;
        if (phi_start - base.phi[0] / two).abs() > small {
            return Err(Error::invalid(format!(
                "on the varphi = 0 reduction phi(t_start) is fixed to {}",
                base.phi[0] / two
            )));
        }
        let rate = base.phi_dot.clone().unwrap_or_default();
        let sign = varphi.cos().signum();
        let times = mesh.times();
        let v = times
            .iter()
            .zip(base.phi.iter().zip(&rate))
            .map(|(&t, (&p, &pd))| pd - h.eval(t) * (T::one() - p.cos()) * theta.eval(t).cos())
            .collect();
        return Ok(AxisDeformation {
            mesh: *mesh,
            varphi,
            phi: base.phi.iter().map(|p| sign * *p / two).collect(),
            phi_dot: rate.iter().map(|p| sign * *p / two).collect(),
            v,
            steps: 0,
        });
    }

    let derivative = |t: T, y: T| axis_rhs(varphi, theta, h, t, y).map(|(d, _)| d);
    let times = mesh.times();
    let mut phi = Vec::with_capacity(times.len());
    let mut phi_dot = Vec::with_capacity(times.len());
    let mut v = Vec::with_capacity(times.len());
    let mut steps = 0usize;
    let mut step = mesh.dt() / lit::<T>(10.0);
    let mut first = 1;

    let t0 = times[0];
    let rest = (two * phi_start).sin().abs() < small && theta.d1(t0).abs() < small;
    if rest {
        phi.push(phi_start);
        phi_dot.push(T::zero());
        v.push(T::zero());
        let t1 = times[1];
        let (th, th1, _) = theta.jet(t1);
        let ratio = -th1 / (h.eval(t1) * (th - varphi).sin());
        if ratio.abs() > T::one() {
            return Err(Error::InfeasibleSpeed { time: t1.to_f64_lossy(), ratio: ratio.abs().to_f64_lossy() });
        }
        let seed = phi_start + ratio.asin() / two;
        let (d, vv) = axis_rhs(varphi, theta, h, t1, seed)?;
        phi.push(seed);
        phi_dot.push(d);
        v.push(vv);
        first = 2;
    } else {
        let (d, vv) = axis_rhs(varphi, theta, h, t0, phi_start)?;
        phi.push(phi_start);
        phi_dot.push(d);
        v.push(vv);
    }
    for k in first..times.len() {
        let y = integrate(&derivative, times[k - 1], times[k], *phi.last().unwrap(), &mut step, tol, &mut steps)?;
        let (d, vv) = axis_rhs(varphi, theta, h, times[k], y)?;
        phi.push(y);
        phi_dot.push(d);
        v.push(vv);
    }
    Ok(AxisDeformation { mesh: *mesh, varphi, phi, phi_dot, v, steps })
}

impl<T: Real> AxisDeformation<T> {
    /// Largest residual of each displayed equation over the mesh.
    pub fn max_residuals(&self, theta: &dyn Schedule<T>, h: &dyn Schedule<T>) -> (T, T) {
        let mut r = (T::zero(), T::zero());
        for (k, t) in self.mesh.times().into_iter().enumerate() {
            let (a, b) = axis_residuals(self.varphi, theta, h, t, self.phi[k], self.phi_dot[k], self.v[k]);
            r.0 = r.0.max(a.abs());
            r.1 = r.1.max(b.abs());
        }
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deformn::two_level::two_level_potential;
    use crate::schedule::{Constant, FieldMagnitude, MixingAngle, Polynomial};

    fn cubic() -> (MixingAngle<f64, Polynomial<f64>>, FieldMagnitude<f64, Polynomial<f64>>) {
        let hz = Polynomial::new(vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        (MixingAngle { gamma: 2.0, field: hz.clone() }, FieldMagnitude { gamma: 2.0, field: hz })
    }

    #[test]
    fn zero_axis_reduces_to_diagonal_case() {
        let (theta, h) = cubic();
        let mesh = TimeMesh::new(0.0, 6.0, 600).unwrap();
        let a = generalized_axis_two_level(0.0, &theta, &h, &mesh, 0.0, &AxisTolerances::default()).unwrap();
        let p = two_level_phase(&theta, &h, &mesh).unwrap();
        let v = two_level_potential(&p, &theta, &h).unwrap();
        for k in 0..mesh.len() {
            assert!((2.0 * a.phi[k] - p.phi[k]).abs() < 1e-12);
            assert!((a.v[k] - v[k]).abs() < 1e-12);
        }
        let (r1, r2) = a.max_residuals(&theta, &h);
        assert!(r1 < 1e-10 && r2 < 1e-10);
    }

    #[test]
    fn static_angle_stays_at_rest() {
        let mesh = TimeMesh::new(0.0, 1.0, 10).unwrap();
        let a = generalized_axis_two_level(0.0, &Constant(0.7), &Constant(1.0), &mesh, 0.0, &AxisTolerances::default())
            .unwrap();
        assert!(a.phi.iter().chain(&a.v).all(|x| *x == 0.0));
    }

    #[test]
    fn tilted_axis_satisfies_both_equations() {
        let (theta, h) = cubic();
        let mesh = TimeMesh::new(0.0, 6.0, 6000).unwrap();
        let a = generalized_axis_two_level(-0.3, &theta, &h, &mesh, 0.0, &AxisTolerances::default()).unwrap();
        let (r1, r2) = a.max_residuals(&theta, &h);
        assert!(r1 < 1e-8 && r2 < 1e-8, "{r1} {r2}");
        assert!(a.phi.iter().all(|p| p.is_finite()));
    }

    #[test]
    fn positive_tilt_hits_coordinate_singularity() {
        let (theta, h) = cubic();
        let mesh = TimeMesh::new(0.0, 6.0, 6000).unwrap();
        let err = generalized_axis_two_level(0.3, &theta, &h, &mesh, 0.0, &AxisTolerances::default()).unwrap_err();
        assert!(
            matches!(err, Error::CoordinateSingularity { .. } | Error::SingularSystem { .. }),
            "{err:?}"
        );
    }

    #[test]
    fn residuals_detect_wrong_potential() {
        let (theta, h) = cubic();
        let (r1, _) = axis_residuals(-0.3, &theta, &h, 1.0, 0.2, 0.1, 5.0);
        assert!(r1.abs() > 0.1);
    }
}
