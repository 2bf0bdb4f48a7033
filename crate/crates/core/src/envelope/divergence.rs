use super::EnvelopeProblem;
use crate::numerics::integrate_log;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DivergenceReport {
    /// `∫_{T0}^{t_max} q(s, gamma) ds` evaluated numerically.
    pub integral: f64,
    /// The integral grows without bound as `t_max -> inf`.
    pub diverges: bool,
    /// Ratio of the last two full dyadic increments.
    pub last_ratio: f64,
}

/// Ratio of consecutive dyadic increments above which the integral is
/// classed as divergent. An integrand `s^{-a}` gives ratio `2^{1-a}`, so this
/// separates `a <= 1` from `a >= 1.015`.
const RATIO_THRESHOLD: f64 = 0.99;

/// Classify the growth of `∫_{T0}^inf q(s, gamma) ds` from dyadic partial
/// sums over `[T0 2^j, T0 2^{j+1}]` up to `t_max`.
pub fn divergence_check(
    prob: &EnvelopeProblem,
    gamma: f64,
    t0: f64,
    t_max: f64,
) -> DivergenceReport {
    let q = |s: f64| prob.q_eval(s, gamma).unwrap_or(0.0);
    let mut increments = Vec::new();
    let mut a = t0;
    let mut integral = 0.0;
    while a < t_max {
        let b = (2.0 * a).min(t_max);
        let inc = integrate_log(q, a, b, 1e-10);
        integral += inc;
        if b == 2.0 * a {
            increments.push(inc);
        }
        a = b;
    }
    let last_ratio = match increments.as_slice() {
        [.., prev, last] if *prev > 0.0 => last / prev,
        [.., _, last] if *last > 0.0 => f64::INFINITY,
        _ => 0.0,
    };
    DivergenceReport {
        integral,
        diverges: last_ratio > RATIO_THRESHOLD,
        last_ratio,
    }
}
