/// Direction of a tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    /// Passes when `value <= tolerance`.
    AtMost,
    /// Passes when `value >= tolerance`.
    AtLeast,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    /// `None` marks an informational metric; it passes when finite.
    pub tolerance: Option<f64>,
    pub bound: Bound,
    pub pass: bool,
}

/// Named metrics in insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerificationReport {
    pub metrics: Vec<Metric>,
}

impl VerificationReport {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(&mut self, name: &str, value: f64, tolerance: Option<f64>, bound: Bound) -> &mut Self {
        let pass = value.is_finite()
            && match (tolerance, bound) {
                (None, _) => true,
                (Some(tol), Bound::AtMost) => value <= tol,
                (Some(tol), Bound::AtLeast) => value >= tol,
            };
        self.metrics.retain(|m| m.name != name);
        self.metrics.push(Metric { name: name.to_string(), value, tolerance, bound, pass });
        self
    }

    pub fn at_most(&mut self, name: &str, value: f64, tolerance: f64) -> &mut Self {
        self.push(name, value, Some(tolerance), Bound::AtMost)
    }

    pub fn at_least(&mut self, name: &str, value: f64, tolerance: f64) -> &mut Self {
        self.push(name, value, Some(tolerance), Bound::AtLeast)
    }

    pub fn info(&mut self, name: &str, value: f64) -> &mut Self {
        self.push(name, value, None, Bound::AtMost)
    }

    pub fn get(&self, name: &str) -> Option<&Metric> {
        self.metrics.iter().find(|m| m.name == name)
    }

    pub fn all_pass(&self) -> bool {
        self.metrics.iter().all(|m| m.pass)
    }

    pub fn failures(&self) -> Vec<&Metric> {
        self.metrics.iter().filter(|m| !m.pass).collect()
    }

    pub fn extend(&mut self, other: VerificationReport) {
        for m in other.metrics {
            self.push(&m.name, m.value, m.tolerance, m.bound);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_flags_follow_tolerances() {
        let mut r = VerificationReport::new();
        r.at_most("a", 1e-9, 1e-8).at_least("b", 0.5, 0.9).info("c", 3.0);
        assert!(r.get("a").unwrap().pass);
        assert!(!r.get("b").unwrap().pass);
        assert!(r.get("c").unwrap().pass);
        assert!(!r.all_pass());
        assert_eq!(r.failures().len(), 1);
        r.at_least("b", 0.95, 0.9);
        assert!(r.all_pass());
        assert_eq!(r.metrics.len(), 3);
        r.info("nan", f64::NAN);
        assert!(!r.all_pass());
    }
}
