//! Closed-form upper bounds for `S' + beta1(t) p(alpha1(t) S) <= 0`.
//!
//! With `psi(x) = ∫_x^U ds / p(s)` the bound is `psi^{-1}` of an explicit
//! integral. Power functions `p(s) = c s^k` have analytic `psi`, anything else
//! goes through quadrature and bisection.

use crate::error::{Error, Result};
use crate::numerics::{bisect_increasing, integrate, integrate_log};

/// Increasing function `p` with `p(0) = 0` driving a comparison inequality.
pub trait DecayFunction {
    fn p(&self, s: f64) -> f64;

    /// `Some((c, k))` when `p(s) = c s^k` exactly.
    fn power_form(&self) -> Option<(f64, f64)> {
        None
    }
}

/// `p(s) = c s^k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerDecay {
    pub c: f64,
    pub k: f64,
}

impl DecayFunction for PowerDecay {
    fn p(&self, s: f64) -> f64 {
        self.c * s.powf(self.k)
    }

    fn power_form(&self) -> Option<(f64, f64)> {
        Some((self.c, self.k))
    }
}

/// Wraps a closure as a [`DecayFunction`] without an analytic form.
pub struct FnDecay<F>(pub F);

impl<F: Fn(f64) -> f64> DecayFunction for FnDecay<F> {
    fn p(&self, s: f64) -> f64 {
        (self.0)(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundMode {
    /// `(1/alpha1(t)) psi^{-1}(∫_0^t alpha1 beta1 - m ln(alpha1(t)/alpha1(0)))`
    /// with `psi` anchored at `alpha1(0) S0`.
    Scaled,
    /// `psi^{-1}(∫_0^t m p(alpha1) beta1)` with `psi` anchored at `S0`.
    /// Valid when `p(alpha1 x) >= m p(x) p(alpha1)`.
    Factored,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundValue {
    pub value: f64,
    /// The argument of `psi^{-1}` exceeded the range of `psi`; the bound is
    /// its limit at 0.
    pub saturated: bool,
}

const QUAD_TOL: f64 = 1e-11;

struct Psi<'a> {
    p: &'a dyn DecayFunction,
    upper: f64,
}

impl Psi<'_> {
    fn eval(&self, x: f64) -> f64 {
        if x >= self.upper {
            return 0.0;
        }
        match self.p.power_form() {
            Some((c, 1.0)) => (self.upper / x).ln() / c,
            Some((c, k)) => (x.powf(1.0 - k) - self.upper.powf(1.0 - k)) / (c * (k - 1.0)),
            None => integrate_log(|s| 1.0 / self.p.p(s), x, self.upper, QUAD_TOL),
        }
    }

    fn inverse(&self, y: f64) -> BoundValue {
        if y <= 0.0 {
            return BoundValue {
                value: self.upper,
                saturated: false,
            };
        }
        if let Some((c, k)) = self.p.power_form() {
            if k == 1.0 {
                let value = self.upper * (-c * y).exp();
                return BoundValue {
                    value,
                    saturated: value == 0.0,
                };
            }
            let base = self.upper.powf(1.0 - k) + c * (k - 1.0) * y;
            if k < 1.0 && base <= 0.0 {
                return BoundValue {
                    value: 0.0,
                    saturated: true,
                };
            }
            return BoundValue {
                value: base.powf(1.0 / (1.0 - k)),
                saturated: false,
            };
        }
        // psi decreases from +inf (or a finite limit) at 0 to 0 at `upper`.
        let mut lo = self.upper;
        loop {
            lo *= 1e-3;
            if lo < 1e-300 {
                return BoundValue {
                    value: 0.0,
                    saturated: true,
                };
            }
            if self.eval(lo) >= y {
                break;
            }
        }
        let value = bisect_increasing(|x| -self.eval(x), -y, lo, self.upper, 1e-13, 200);
        BoundValue {
            value,
            saturated: false,
        }
    }
}

/// Evaluate the comparison bound at time `t`.
///
/// `p` must be increasing with `p(0) = 0`, `alpha1` positive and
/// non-increasing, `beta1` non-negative.
pub fn closed_form_bound(
    p: &dyn DecayFunction,
    alpha1: &dyn Fn(f64) -> f64,
    beta1: &dyn Fn(f64) -> f64,
    m: f64,
    s0: f64,
    t: f64,
    mode: BoundMode,
) -> Result<BoundValue> {
    if !(t >= 0.0) {
        return Err(Error::Domain {
            what: "bound time",
            value: t,
        });
    }
    if !(s0 > 0.0) {
        return Err(Error::Domain {
            what: "bound S0",
            value: s0,
        });
    }
    if !(m > 0.0) {
        return Err(Error::Domain {
            what: "bound m",
            value: m,
        });
    }
    let a0 = alpha1(0.0);
    if !(a0 > 0.0) {
        return Err(Error::Domain {
            what: "alpha1(0)",
            value: a0,
        });
    }
    match mode {
        BoundMode::Scaled => {
            let at = alpha1(t);
            let y = integrate(|s| alpha1(s) * beta1(s), 0.0, t, QUAD_TOL) - m * (at / a0).ln();
            let psi = Psi { p, upper: a0 * s0 };
            let inv = psi.inverse(y);
            Ok(BoundValue {
                value: inv.value / at,
                saturated: inv.saturated,
            })
        }
        BoundMode::Factored => {
            let y = integrate(|s| m * p.p(alpha1(s)) * beta1(s), 0.0, t, QUAD_TOL);
            Ok(Psi { p, upper: s0 }.inverse(y))
        }
    }
}
