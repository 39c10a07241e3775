use crate::error::{Error, Result};
use crate::grid::TimeMesh;
use crate::scalar::{lit, Real};
use crate::schedule::Schedule;

/// Largest allowed change of the phase between consecutive mesh times.
pub fn max_branch_jump<T: Real>() -> T {
    T::FRAC_PI_2()
}

/// Phase difference `phi = phi_1 - phi_2` of the diagonal deformation on a
/// mesh, with its rate when known.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoLevelPhase<T> {
    pub mesh: TimeMesh<T>,
    pub phi: Vec<T>,
    pub phi_dot: Option<Vec<T>>,
}

impl<T: Real> TwoLevelPhase<T> {
    /// Phase samples without a rate; [`two_level_potential`] rejects these.
    pub fn from_samples(mesh: TimeMesh<T>, phi: Vec<T>) -> Result<Self> {
        if phi.len() != mesh.len() {
            return Err(Error::invalid("need one phase sample per mesh time"));
        }
        Ok(Self { mesh, phi, phi_dot: None })
    }

    pub fn max_jump(&self) -> T {
        self.phi
            .windows(2)
            .map(|w| (w[1] - w[0]).abs())
            .fold(T::zero(), |a, b| a.max(b))
    }
}

/// `(phi, phi_dot)` at one time from `theta_dot + h sin(theta) sin(phi) = 0`
/// on the principal branch.
pub fn two_level_phase_at<T: Real>(theta: &dyn Schedule<T>, h: &dyn Schedule<T>, t: T) -> Result<(T, T)> {
    let (th, th1, th2) = theta.jet(t);
    let (hh, h1, _) = h.jet(t);
    let d = hh * th.sin();
    if th1 == T::zero() && th2 == T::zero() {
        return Ok((T::zero(), T::zero()));
    }
    if d.abs() < lit::<T>(1e-300) {
        return Err(Error::CoordinateSingularity {
            time: t.to_f64_lossy(),
            detail: "h sin(theta) vanishes while theta changes".into(),
        });
    }
    let s = -th1 / d;
    if s.abs() > T::one() {
        return Err(Error::InfeasibleSpeed { time: t.to_f64_lossy(), ratio: s.abs().to_f64_lossy() });
    }
    let phi = s.asin();
    let d1 = h1 * th.sin() + hh * th.cos() * th1;
    let s1 = -th2 / d + th1 * d1 / (d * d);
    let c = phi.cos();
    if c.abs() < lit::<T>(1e-12) {
        return Err(Error::SingularSystem { time: t.to_f64_lossy(), denominator: c.to_f64_lossy() });
    }
    Ok((phi, s1 / c))
}

/// Phase difference on every mesh time, with branch continuity enforced.
pub fn two_level_phase<T: Real>(
    theta: &dyn Schedule<T>,
    h: &dyn Schedule<T>,
    mesh: &TimeMesh<T>,
) -> Result<TwoLevelPhase<T>> {
    let mut phi = Vec::with_capacity(mesh.len());
    let mut phi_dot = Vec::with_capacity(mesh.len());
    for t in mesh.times() {
        let (p, pd) = two_level_phase_at(theta, h, t)?;
        if let Some(&prev) = phi.last() {
            let jump: T = p - prev;
            if jump.abs() >= max_branch_jump::<T>() {
                return Err(Error::MeshTooCoarse {
                    time: t.to_f64_lossy(),
                    detail: format!("phase jumps by {jump} between mesh times"),
                });
            }
        }
        phi.push(p);
        phi_dot.push(pd);
    }
    Ok(TwoLevelPhase { mesh: *mesh, phi, phi_dot: Some(phi_dot) })
}

/// `v = phi_dot - h (1 - cos phi) cos theta` at one time.
pub fn two_level_potential_at<T: Real>(theta: &dyn Schedule<T>, h: &dyn Schedule<T>, t: T) -> Result<T> {
    let (phi, phi_dot) = two_level_phase_at(theta, h, t)?;
    Ok(phi_dot - h.eval(t) * (T::one() - phi.cos()) * theta.eval(t).cos())
}

/// `v(t) = v_1 - v_2` on the phase mesh. The driver is `(v/2) sigma_z`.
pub fn two_level_potential<T: Real>(
    phase: &TwoLevelPhase<T>,
    theta: &dyn Schedule<T>,
    h: &dyn Schedule<T>,
) -> Result<Vec<T>> {
    let rate = phase
        .phi_dot
        .as_ref()
        .ok_or_else(|| Error::invalid("two-level potential needs the phase rate"))?;
    Ok(phase
        .mesh
        .times()
        .into_iter()
        .zip(phase.phi.iter().zip(rate))
        .map(|(t, (&p, &pd))| pd - h.eval(t) * (T::one() - p.cos()) * theta.eval(t).cos())
        .collect())
}

/// Bloch vectors sampled on a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochCurve<T> {
    pub times: Vec<T>,
    pub vectors: Vec<[T; 3]>,
    pub deformed: bool,
}

impl<T: Real> BlochCurve<T> {
    pub fn max_norm_error(&self) -> T {
        self.vectors
            .iter()
            .map(|v| ((v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt() - T::one()).abs())
            .fold(T::zero(), |a, b| a.max(b))
    }
}

/// `n = (sin theta, 0, cos theta)` and
/// `n~ = (sin theta cos phi, sin theta sin phi, cos theta)`.
pub fn bloch_curves<T: Real>(theta: &dyn Schedule<T>, phase: &TwoLevelPhase<T>) -> (BlochCurve<T>, BlochCurve<T>) {
    let times = phase.mesh.times();
    let mut plain = Vec::with_capacity(times.len());
    let mut deformed = Vec::with_capacity(times.len());
    for (&t, &p) in times.iter().zip(&phase.phi) {
        let th = theta.eval(t);
        plain.push([th.sin(), T::zero(), th.cos()]);
        deformed.push([th.sin() * p.cos(), th.sin() * p.sin(), th.cos()]);
    }
    (
        BlochCurve { times: times.clone(), vectors: plain, deformed: false },
        BlochCurve { times, vectors: deformed, deformed: true },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::{Constant, FieldMagnitude, MixingAngle, Polynomial};

    fn cubic(c: f64, gamma: f64) -> (MixingAngle<f64, Polynomial<f64>>, FieldMagnitude<f64, Polynomial<f64>>) {
        let hz = Polynomial::new(vec![0.0, 0.0, 0.0, c]).unwrap();
        (MixingAngle { gamma, field: hz.clone() }, FieldMagnitude { gamma, field: hz })
    }

    #[test]
    fn hand_values() {
        let (theta, h) = cubic(1.0, 2.0);
        let (phi, rate) = two_level_phase_at(&theta, &h, 1.0).unwrap();
        assert!((phi.sin() - 0.6).abs() < 1e-12);
        assert!((rate - 0.6).abs() < 1e-12);
        assert!((two_level_potential_at(&theta, &h, 1.0).unwrap() - 0.4).abs() < 1e-12);
        let (phi2, rate2) = two_level_phase_at(&theta, &h, 2.0).unwrap();
        assert!((phi2.sin() - 12.0 / 68.0).abs() < 1e-12);
        assert!((rate2 + 0.3269302).abs() < 1e-6);
        assert!((two_level_potential_at(&theta, &h, 2.0).unwrap() + 0.4524829).abs() < 1e-6);
        assert_eq!(two_level_phase_at(&theta, &h, 0.0).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn closed_form_sin_phi() {
        // sin phi = h_z_dot / h^2 for h = (gamma, 0, h_z)
        let (theta, h) = cubic(1.0, 2.0);
        for t in [0.3, 0.9, 1.6, 2.7, 4.0] {
            let (phi, _) = two_level_phase_at(&theta, &h, t).unwrap();
            let expected = 3.0 * t * t / (4.0 + t.powi(6));
            assert!((phi.sin() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn rate_matches_differences() {
        let (theta, h) = cubic(1.0, 2.0);
        let mesh = TimeMesh::new(0.0, 6.0, 6000).unwrap();
        let p = two_level_phase(&theta, &h, &mesh).unwrap();
        let rate = p.phi_dot.as_ref().unwrap();
        for k in (1..6000).step_by(377) {
            let fd = (p.phi[k + 1] - p.phi[k - 1]) / (2.0 * mesh.dt());
            assert!((fd - rate[k]).abs() < 1e-5);
        }
        assert!(p.max_jump() < max_branch_jump::<f64>());
        let v = two_level_potential(&p, &theta, &h).unwrap();
        assert!((v[1000] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn static_angle_gives_zero() {
        let mesh = TimeMesh::new(0.0, 1.0, 10).unwrap();
        let p = two_level_phase(&Constant(0.4), &Constant(1.0), &mesh).unwrap();
        assert!(p.phi.iter().all(|v| *v == 0.0));
        let v = two_level_potential(&p, &Constant(0.4), &Constant(1.0)).unwrap();
        assert!(v.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn too_fast_sweep_is_infeasible() {
        let (theta, h) = cubic(40.0, 0.5);
        let err = two_level_phase_at(&theta, &h, 0.3).unwrap_err();
        assert!(matches!(err, Error::InfeasibleSpeed { .. }));
    }

    #[test]
    fn missing_rate_rejected() {
        let mesh = TimeMesh::new(0.0, 1.0, 4).unwrap();
        let p = TwoLevelPhase::from_samples(mesh, vec![0.0; 5]).unwrap();
        assert!(two_level_potential(&p, &Constant(0.1), &Constant(1.0)).is_err());
    }

    #[test]
    fn bloch_endpoints() {
        let (theta, h) = cubic(1.0, 2.0);
        let mesh = TimeMesh::new(0.0, 6.0, 600).unwrap();
        let p = two_level_phase(&theta, &h, &mesh).unwrap();
        let (n, nt) = bloch_curves(&theta, &p);
        assert_eq!(n.vectors[0], [1.0, 0.0, theta.eval(0.0).cos()]);
        assert!((nt.vectors[0][0] - 1.0).abs() < 1e-15 && nt.vectors[0][1] == 0.0);
        for c in [&n, &nt] {
            let last = c.vectors.last().unwrap();
            let dist = (last[0].powi(2) + last[1].powi(2) + (last[2] - 1.0).powi(2)).sqrt();
            assert!(dist < 0.01);
            assert!(c.max_norm_error() < 1e-12);
        }
        let flat = TwoLevelPhase::from_samples(mesh, vec![0.0; 601]).unwrap();
        let (a, b) = bloch_curves(&theta, &flat);
        assert_eq!(a.vectors, b.vectors);
    }

    #[test]
    fn works_in_f32() {
        let hz = Polynomial::new(vec![0.0f32, 0.0, 0.0, 1.0]).unwrap();
        let theta = MixingAngle { gamma: 2.0f32, field: hz.clone() };
        let h = FieldMagnitude { gamma: 2.0f32, field: hz };
        assert!((two_level_potential_at(&theta, &h, 1.0f32).unwrap() - 0.4).abs() < 1e-5);
    }
}
