use std::fmt;

/// Outcome of one sampled invariant check.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Worst-case slack over the samples; negative values are violations.
    pub margin: f64,
}

/// Collection of checks produced by [`validate_law`](crate::damping::validate_law)
/// and [`validate_weight`](crate::weight::validate_weight).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub subject: String,
    pub checks: Vec<Check>,
    /// Tightest constants measured from the samples, keyed by name.
    pub measured: Vec<(&'static str, f64)>,
}

impl ValidationReport {
    pub fn new(subject: impl Into<String>) -> Self {
        Self {
            subject: subject.into(),
            ..Self::default()
        }
    }

    pub(crate) fn push(&mut self, name: &'static str, margin: f64, tolerance: f64) {
        self.checks.push(Check {
            name,
            passed: margin >= -tolerance,
            margin,
        });
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn measured(&self, name: &str) -> Option<f64> {
        self.measured
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, v)| *v)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.subject)?;
        for c in &self.checks {
            let tag = if c.passed { "ok  " } else { "FAIL" };
            writeln!(f, "  [{tag}] {:<28} margin {:+.3e}", c.name, c.margin)?;
        }
        for (name, v) in &self.measured {
            writeln!(f, "  {name:<35} {v:.6e}")?;
        }
        Ok(())
    }
}
