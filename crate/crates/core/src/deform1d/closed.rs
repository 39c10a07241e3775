use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use crate::schedule::Schedule;

use super::potential::StateDependence;

pub type ProfileFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Finite reference point `x*` together with the reference profile `f`,
/// which brings back the state-dependent terms of the closed-form phases.
#[derive(Clone)]
pub struct StateTerm<T> {
    pub x_star: T,
    pub profile: ProfileFn<T>,
    /// Simpson panels for `int dx / f` (even, at least 2).
    pub panels: usize,
}

impl<T: Real> StateTerm<T> {
    pub fn new(x_star: T, profile: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Self { x_star, profile: Arc::new(profile), panels: 400 }
    }

    /// `int_a^b du / f(u + shift)`.
    fn reciprocal_integral(&self, a: T, b: T, shift: T) -> Result<T> {
        let n = self.panels.max(2) + self.panels % 2;
        let h = (b - a) / lit::<T>(n as f64);
        let g = |u: T| T::one() / (self.profile)(u + shift);
        let mut sum = g(a) + g(b);
        for i in 1..n {
            let w = if i % 2 == 1 { lit::<T>(4.0) } else { lit::<T>(2.0) };
            sum = sum + w * g(a + h * lit::<T>(i as f64));
        }
        let out = sum * h / lit::<T>(3.0);
        if !out.is_finite() {
            return Err(Error::NodeSingularity {
                position: b.to_f64_lossy(),
                detail: "reference profile vanishes on the integration path".into(),
            });
        }
        Ok(out)
    }
}

impl<T: fmt::Debug> fmt::Debug for StateTerm<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StateTerm").field("x_star", &self.x_star).field("panels", &self.panels).finish()
    }
}

fn positive_mass<T: Real>(mass: T) -> Result<()> {
    if !(mass > T::zero()) || !mass.is_finite() {
        return Err(Error::invalid(format!("mass must be positive and finite (got {mass})")));
    }
    Ok(())
}

fn time_derivative<T: Real>(f: impl Fn(T) -> Result<T>, t: T) -> Result<T> {
    let h = lit::<T>(1e-5) * T::one().max(t.abs());
    Ok((f(t + h)? - f(t - h)?) / (lit::<T>(2.0) * h))
}

/// Driver for `U(x, t) = U0(x - x0(t))`.
#[derive(Debug, Clone)]
pub struct TransportDriver<T, S> {
    x0: S,
    mass: T,
    state_term: Option<StateTerm<T>>,
}

/// `V(x, t) = -m x0_ddot(t) x`, valid for every bound state.
pub fn transport_potential<T: Real, S: Schedule<T>>(x0: S, mass: T) -> Result<TransportDriver<T, S>> {
    positive_mass(mass)?;
    Ok(TransportDriver { x0, mass, state_term: None })
}

impl<T: Real, S: Schedule<T>> TransportDriver<T, S> {
    /// Keeps the state-dependent terms with a finite reference point.
    pub fn with_state_term(mut self, term: StateTerm<T>) -> Self {
        self.state_term = Some(term);
        self
    }

    pub fn mass(&self) -> T {
        self.mass
    }

    pub fn schedule(&self) -> &S {
        &self.x0
    }

    pub fn dependence(&self) -> StateDependence {
        if self.state_term.is_some() {
            StateDependence::StateSpecific
        } else {
            StateDependence::StateIndependentUpToShift
        }
    }

    /// `V(x, t) = -m x0_ddot x`.
    pub fn potential(&self, x: T, t: T) -> T {
        -self.mass * self.x0.d2(t) * x
    }

    /// `phi = -m x0_dot (x - x0)`, plus
    /// `m x0_dot (x* - x0) + m x0_dot f(x* - x0) int_{x*}^x dx1 / f(x1 - x0)`
    /// when the state term is kept.
    pub fn phase(&self, x: T, t: T) -> Result<T> {
        let (c, v, _) = self.x0.jet(t);
        let m = self.mass;
        let mut phi = -m * v * (x - c);
        if let Some(term) = &self.state_term {
            let xs = term.x_star;
            let integral = term.reciprocal_integral(xs, x, -c)?;
            phi = phi + m * v * (xs - c) + m * v * (term.profile)(xs - c) * integral;
        }
        Ok(phi)
    }

    pub fn phase_gradient(&self, x: T, t: T) -> Result<T> {
        let (c, v, _) = self.x0.jet(t);
        let m = self.mass;
        match &self.state_term {
            None => Ok(-m * v),
            Some(term) => Ok(-m * v + m * v * (term.profile)(term.x_star - c) / (term.profile)(x - c)),
        }
    }

    pub fn phase_rate(&self, x: T, t: T) -> Result<T> {
        match &self.state_term {
            None => {
                let (c, v, a) = self.x0.jet(t);
                Ok(-self.mass * a * (x - c) + self.mass * v * v)
            }
            Some(_) => time_derivative(|s| self.phase(x, s), t),
        }
    }

    /// `d phi/dt - (d phi/dx)^2 / 2m` including the time-dependent shift.
    pub fn potential_from_phase(&self, x: T, t: T) -> Result<T> {
        let g = self.phase_gradient(x, t)?;
        Ok(self.phase_rate(x, t)? - g * g / (lit::<T>(2.0) * self.mass))
    }
}

/// Driver for `U(x, t) = U0(x / xi(t)) / xi(t)^2`.
#[derive(Debug, Clone)]
pub struct DilatationDriver<T, S> {
    xi: S,
    mass: T,
    state_term: Option<StateTerm<T>>,
}

/// `V(x, t) = -(m/2) (xi_ddot / xi) x^2`, valid for every bound state.
pub fn dilatation_potential<T: Real, S: Schedule<T>>(xi: S, mass: T) -> Result<DilatationDriver<T, S>> {
    positive_mass(mass)?;
    Ok(DilatationDriver { xi, mass, state_term: None })
}

impl<T: Real, S: Schedule<T>> DilatationDriver<T, S> {
    pub fn with_state_term(mut self, term: StateTerm<T>) -> Self {
        self.state_term = Some(term);
        self
    }

    pub fn mass(&self) -> T {
        self.mass
    }

    pub fn schedule(&self) -> &S {
        &self.xi
    }

    pub fn dependence(&self) -> StateDependence {
        if self.state_term.is_some() {
            StateDependence::StateSpecific
        } else {
            StateDependence::StateIndependentUpToShift
        }
    }

    fn jet(&self, t: T) -> Result<(T, T, T)> {
        let j = self.xi.jet(t);
        if !(j.0 > T::zero()) {
            return Err(Error::Domain(format!("xi({t}) = {} must be positive", j.0)));
        }
        Ok(j)
    }

    pub fn potential(&self, x: T, t: T) -> Result<T> {
        let (s, _, a) = self.jet(t)?;
        Ok(-self.mass / lit::<T>(2.0) * (a / s) * x * x)
    }

    /// `phi = -(m/2)(xi_dot/xi) x^2`, or with the state term
    /// `-(m/2)(xi_dot/xi)(x^2 - x*^2) + m xi_dot x* f(x*/xi) int_{x*/xi}^{x/xi} dz / f(z)`.
    pub fn phase(&self, x: T, t: T) -> Result<T> {
        let (s, sd, _) = self.jet(t)?;
        let m = self.mass;
        let half = lit::<T>(0.5);
        match &self.state_term {
            None => Ok(-half * m * sd / s * x * x),
            Some(term) => {
                let xs = term.x_star;
                let integral = term.reciprocal_integral(xs / s, x / s, T::zero())?;
                Ok(-half * m * sd / s * (x * x - xs * xs) + m * sd * xs * (term.profile)(xs / s) * integral)
            }
        }
    }

    pub fn phase_gradient(&self, x: T, t: T) -> Result<T> {
        let (s, sd, _) = self.jet(t)?;
        let m = self.mass;
        let base = -m * sd / s * x;
        match &self.state_term {
            None => Ok(base),
            Some(term) => {
                let xs = term.x_star;
                Ok(base + m * sd * xs * (term.profile)(xs / s) / (s * (term.profile)(x / s)))
            }
        }
    }

    pub fn phase_rate(&self, x: T, t: T) -> Result<T> {
        match &self.state_term {
            None => {
                let (s, sd, a) = self.jet(t)?;
                Ok(-lit::<T>(0.5) * self.mass * (a / s - sd * sd / (s * s)) * x * x)
            }
            Some(_) => time_derivative(|u| self.phase(x, u), t),
        }
    }

    pub fn potential_from_phase(&self, x: T, t: T) -> Result<T> {
        let g = self.phase_gradient(x, t)?;
        Ok(self.phase_rate(x, t)? - g * g / (lit::<T>(2.0) * self.mass))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deform1d::continuity::{phase_from_continuity_1d, ContinuityOptions, Reference};
    use crate::deform1d::density::{DensityField, Profile};
    use crate::grid::{SpatialGrid1D, TimeMesh};
    use crate::schedule::{Constant, Exponential, Polynomial, Smoothstep};

    #[test]
    fn inertial_transport_has_no_potential() {
        let d = transport_potential(Polynomial::<f64>::new(vec![0.3, 2.0]).unwrap(), 1.0).unwrap();
        for x in [-2.0, 0.0, 5.0] {
            assert_eq!(d.potential(x, 0.7), 0.0);
        }
        assert_eq!(d.dependence(), StateDependence::StateIndependentUpToShift);
    }

    #[test]
    fn smoothstep_midpoint_has_no_force() {
        let d = transport_potential(Smoothstep::<f64>::new(0.0, 1.0, 0.0, 1.0).unwrap(), 1.0f64).unwrap();
        for x in [-3.0, 1.0, 4.0] {
            assert!(d.potential(x, 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn quadratic_transport_is_uniform_force() {
        let d = transport_potential(Polynomial::<f64>::new(vec![0.0, 0.0, 1.0]).unwrap(), 1.0f64).unwrap();
        for t in [0.0, 1.0, 3.0] {
            assert!((d.potential(1.5, t) + 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn transport_shifted_potential_matches_phase() {
        let d = transport_potential(Smoothstep::<f64>::new(0.0, 2.0, 0.0, 3.0).unwrap(), 1.5f64).unwrap();
        let t = 1.1;
        let (c, v, a) = d.schedule().jet(t);
        for x in [-1.0, 0.4, 2.2] {
            let expected = -1.5 * a * (x - c) + 0.75 * v * v;
            assert!((d.potential_from_phase(x, t).unwrap() - expected).abs() < 1e-12);
            assert!((d.potential_from_phase(x, t).unwrap() - d.potential(x, t)
                - (d.potential_from_phase(0.0, t).unwrap() - d.potential(0.0, t)))
                .abs()
                < 1e-12);
        }
    }

    #[test]
    fn dilatation_examples() {
        let c = dilatation_potential(Constant(2.0), 1.0).unwrap();
        assert_eq!(c.potential(1.3, 0.2).unwrap(), 0.0);
        let q = dilatation_potential(Polynomial::<f64>::new(vec![1.0, 0.0, 1.0]).unwrap(), 1.0f64).unwrap();
        for x in [-2.0, 0.5, 1.0] {
            assert!((q.potential(x, 0.0).unwrap() + x * x).abs() < 1e-12);
        }
        let alpha: f64 = 0.7;
        let e = dilatation_potential(Exponential { amplitude: 1.0f64, rate: alpha }, 2.0f64).unwrap();
        for t in [0.0, 1.3] {
            assert!((e.potential(1.5, t).unwrap() + alpha * alpha * 2.25).abs() < 1e-12);
        }
    }

    #[test]
    fn nonpositive_scale_is_domain_error() {
        let d = dilatation_potential(Polynomial::<f64>::new(vec![1.0, -1.0]).unwrap(), 1.0).unwrap();
        assert!(matches!(d.potential(0.3, 2.0), Err(Error::Domain(_))));
        assert!(matches!(d.phase(0.3, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn generic_over_f32() {
        let d = dilatation_potential(Polynomial::<f32>::new(vec![1.0f32, 0.0, 1.0]).unwrap(), 1.0f32).unwrap();
        assert!((d.potential(1.0f32, 0.0).unwrap() + 1.0).abs() < 1e-6);
    }

    #[test]
    fn state_terms_match_continuity_route() {
        let grid = SpatialGrid1D::<f64>::new(-6.0, 6.0, 4801).unwrap();
        let mesh = TimeMesh::<f64>::new(0.0, 2.0, 4).unwrap();
        let x_star = -0.8;
        let opts = ContinuityOptions { reference: Reference::At(x_star), ..Default::default() };
        let gauss = |u: f64| Profile::Gaussian.value(u);

        let x0 = Smoothstep::<f64>::new(0.0, 1.0, 0.0, 2.0).unwrap();
        let tr = transport_potential(x0.clone(), 1.0).unwrap().with_state_term(StateTerm::new(x_star, gauss));
        assert_eq!(tr.dependence(), StateDependence::StateSpecific);
        let dens = DensityField::transport(grid, mesh, Profile::Gaussian, &x0).unwrap();
        let p = phase_from_continuity_1d(&dens, 2, 1.0, &opts).unwrap();
        for i in (1800..3000).step_by(50) {
            let x = grid.point(i);
            let e = (p.phi[i] - tr.phase(x, mesh.time(2)).unwrap()).abs();
            assert!(e < 1e-4, "x {x} err {e}");
        }

        let xi = Polynomial::<f64>::new(vec![1.0, 0.4]).unwrap();
        let di = dilatation_potential(xi.clone(), 1.0).unwrap().with_state_term(StateTerm::new(x_star, gauss));
        let dens = DensityField::dilatation(grid, mesh, Profile::Gaussian, &xi).unwrap();
        let p = phase_from_continuity_1d(&dens, 1, 1.0, &opts).unwrap();
        for i in (1800..3000).step_by(50) {
            let x = grid.point(i);
            let e = (p.phi[i] - di.phase(x, mesh.time(1)).unwrap()).abs();
            assert!(e < 1e-4, "x {x} err {e}");
        }
    }

    #[test]
    fn state_term_gradient_matches_phase() {
        let gauss = |u: f64| Profile::Gaussian.value(u);
        let di = dilatation_potential(Polynomial::<f64>::new(vec![1.0, 0.4]).unwrap(), 1.0)
            .unwrap()
            .with_state_term(StateTerm::new(-0.5, gauss));
        let h = 1e-4;
        for x in [-0.3, 0.2, 0.9] {
            let fd = (di.phase(x + h, 0.6).unwrap() - di.phase(x - h, 0.6).unwrap()) / (2.0 * h);
            assert!((fd - di.phase_gradient(x, 0.6).unwrap()).abs() < 1e-6);
        }
    }
}
