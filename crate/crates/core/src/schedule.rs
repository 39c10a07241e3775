//! Smooth scalar control functions of time with analytic derivatives.
//!
//! Drivers need first and second time derivatives of the control
//! parameters (x0, xi, h_z, theta), so every schedule carries them in
//! closed form instead of leaving them to numerical differentiation.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

pub trait Schedule<T: Real>: Send + Sync {
    fn eval(&self, t: T) -> T;
    fn d1(&self, t: T) -> T;
    fn d2(&self, t: T) -> T;

    /// Interval on which the schedule is meant to be used.
    fn domain(&self) -> (T, T) {
        (T::neg_infinity(), T::infinity())
    }

    /// `(eval, d1, d2)` in one call.
    fn jet(&self, t: T) -> (T, T, T) {
        (self.eval(t), self.d1(t), self.d2(t))
    }
}

pub type SharedSchedule<T> = Arc<dyn Schedule<T>>;

impl<T: Real, S: Schedule<T> + ?Sized> Schedule<T> for Arc<S> {
    fn eval(&self, t: T) -> T {
        (**self).eval(t)
    }
    fn d1(&self, t: T) -> T {
        (**self).d1(t)
    }
    fn d2(&self, t: T) -> T {
        (**self).d2(t)
    }
    fn domain(&self) -> (T, T) {
        (**self).domain()
    }
}

impl<T: Real, S: Schedule<T> + ?Sized> Schedule<T> for Box<S> {
    fn eval(&self, t: T) -> T {
        (**self).eval(t)
    }
    fn d1(&self, t: T) -> T {
        (**self).d1(t)
    }
    fn d2(&self, t: T) -> T {
        (**self).d2(t)
    }
    fn domain(&self) -> (T, T) {
        (**self).domain()
    }
}

impl<T: Real, S: Schedule<T> + ?Sized> Schedule<T> for &S {
    fn eval(&self, t: T) -> T {
        (**self).eval(t)
    }
    fn d1(&self, t: T) -> T {
        (**self).d1(t)
    }
    fn d2(&self, t: T) -> T {
        (**self).d2(t)
    }
    fn domain(&self) -> (T, T) {
        (**self).domain()
    }
}

/// `sum_k c_k t^k` with exact derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<T> {
    coeffs: Vec<T>,
}

impl<T: Real> Polynomial<T> {
    pub fn new(coeffs: Vec<T>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::invalid("polynomial schedule needs at least one coefficient"));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("polynomial coefficients must be finite"));
        }
        Ok(Self { coeffs })
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    fn horner(coeffs: impl DoubleEndedIterator<Item = T>, t: T) -> T {
        coeffs.rev().fold(T::zero(), |acc, c| acc * t + c)
    }
}

impl<T: Real> Schedule<T> for Polynomial<T> {
    fn eval(&self, t: T) -> T {
        Self::horner(self.coeffs.iter().copied(), t)
    }

    fn d1(&self, t: T) -> T {
        let d = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| c * lit::<T>(k as f64));
        Self::horner(d, t)
    }

    fn d2(&self, t: T) -> T {
        let d = self
            .coeffs
            .iter()
            .enumerate()
            .skip(2)
            .map(|(k, &c)| c * lit::<T>((k * (k - 1)) as f64));
        Self::horner(d, t)
    }
}

/// Builds `sum_k coeffs[k] t^k`.
pub fn make_polynomial_schedule<T: Real>(coeffs: &[T]) -> Result<Polynomial<T>> {
    Polynomial::new(coeffs.to_vec())
}

/// Quintic ramp `a -> b` over `[t_start, t_end]` with vanishing first and
/// second derivatives at both ends. Constant outside the interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Smoothstep<T> {
    a: T,
    b: T,
    t_start: T,
    t_end: T,
}

impl<T: Real> Smoothstep<T> {
    pub fn new(a: T, b: T, t_start: T, t_end: T) -> Result<Self> {
        if !(t_end > t_start) {
            return Err(Error::invalid(format!(
                "smoothstep needs t_end > t_start (got [{t_start}, {t_end}])"
            )));
        }
        if !(a.is_finite() && b.is_finite() && t_start.is_finite() && t_end.is_finite()) {
            return Err(Error::invalid("smoothstep parameters must be finite"));
        }
        Ok(Self { a, b, t_start, t_end })
    }

    fn span(&self) -> T {
        self.t_end - self.t_start
    }

    /// Normalized time, or `None` outside the ramp.
    fn progress(&self, t: T) -> Option<T> {
        if t <= self.t_start || t >= self.t_end {
            None
        } else {
            Some((t - self.t_start) / self.span())
        }
    }
}

impl<T: Real> Schedule<T> for Smoothstep<T> {
    fn eval(&self, t: T) -> T {
        if t <= self.t_start {
            return self.a;
        }
        if t >= self.t_end {
            return self.b;
        }
        let s = (t - self.t_start) / self.span();
        let shape = s * s * s * (lit::<T>(10.0) + s * (lit::<T>(-15.0) + s * lit::<T>(6.0)));
        self.a + (self.b - self.a) * shape
    }

    fn d1(&self, t: T) -> T {
        match self.progress(t) {
            None => T::zero(),
            Some(s) => {
                let one_minus = T::one() - s;
                (self.b - self.a) / self.span() * lit::<T>(30.0) * s * s * one_minus * one_minus
            }
        }
    }

    fn d2(&self, t: T) -> T {
        match self.progress(t) {
            None => T::zero(),
            Some(s) => {
                let span = self.span();
                (self.b - self.a) / (span * span)
                    * lit::<T>(60.0)
                    * s
                    * (T::one() - s)
                    * (T::one() - lit::<T>(2.0) * s)
            }
        }
    }

    fn domain(&self) -> (T, T) {
        (self.t_start, self.t_end)
    }
}

pub fn make_smoothstep_schedule<T: Real>(a: T, b: T, t_start: T, t_end: T) -> Result<Smoothstep<T>> {
    Smoothstep::new(a, b, t_start, t_end)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant<T>(pub T);

impl<T: Real> Schedule<T> for Constant<T> {
    fn eval(&self, _t: T) -> T {
        self.0
    }
    fn d1(&self, _t: T) -> T {
        T::zero()
    }
    fn d2(&self, _t: T) -> T {
        T::zero()
    }
}

/// `amplitude * exp(rate * t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponential<T> {
    pub amplitude: T,
    pub rate: T,
}

impl<T: Real> Schedule<T> for Exponential<T> {
    fn eval(&self, t: T) -> T {
        self.amplitude * (self.rate * t).exp()
    }
    fn d1(&self, t: T) -> T {
        self.rate * self.eval(t)
    }
    fn d2(&self, t: T) -> T {
        self.rate * self.rate * self.eval(t)
    }
}

/// Polar angle of the field `(gamma, 0, h_z(t))`: `theta = atan2(gamma, h_z)`,
/// so `cos theta = h_z / h`.
#[derive(Clone)]
pub struct MixingAngle<T, S> {
    pub gamma: T,
    pub field: S,
}

impl<T: Real, S: Schedule<T>> Schedule<T> for MixingAngle<T, S> {
    fn eval(&self, t: T) -> T {
        self.gamma.atan2(self.field.eval(t))
    }

    fn d1(&self, t: T) -> T {
        let (hz, hz1, _) = self.field.jet(t);
        -self.gamma * hz1 / (self.gamma * self.gamma + hz * hz)
    }

    fn d2(&self, t: T) -> T {
        let (hz, hz1, hz2) = self.field.jet(t);
        let h2 = self.gamma * self.gamma + hz * hz;
        -self.gamma * hz2 / h2 + lit::<T>(2.0) * self.gamma * hz * hz1 * hz1 / (h2 * h2)
    }

    fn domain(&self) -> (T, T) {
        self.field.domain()
    }
}

/// Field magnitude `h = sqrt(gamma^2 + h_z^2)`.
#[derive(Clone)]
pub struct FieldMagnitude<T, S> {
    pub gamma: T,
    pub field: S,
}

impl<T: Real, S: Schedule<T>> Schedule<T> for FieldMagnitude<T, S> {
    fn eval(&self, t: T) -> T {
        self.gamma.hypot(self.field.eval(t))
    }

    fn d1(&self, t: T) -> T {
        let (hz, hz1, _) = self.field.jet(t);
        hz * hz1 / self.gamma.hypot(hz)
    }

    fn d2(&self, t: T) -> T {
        let (hz, hz1, hz2) = self.field.jet(t);
        let h = self.gamma.hypot(hz);
        (hz1 * hz1 + hz * hz2) / h - hz * hz * hz1 * hz1 / (h * h * h)
    }

    fn domain(&self) -> (T, T) {
        self.field.domain()
    }
}
