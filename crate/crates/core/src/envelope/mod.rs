//! The decay envelope: the functions `h` and `q`, the envelope ODE
//! `S' + q(t, S) = 0`, its closed-form comparison bounds and the tabulated
//! asymptotic rates.
//!
//! Conventions: `ma` is `M_a = ∫ a(x) dx`, and the space-time damping measure
//! over a window of length `T` is `T * M_a`. Then
//!
//! ```text
//! h(s) = s + (T M_a) h0(s / (T (T M_a)))
//! q(t, S) = beta(t) h^{-1}(alpha(t) S / K)
//! ```
//!
//! For the linear law `h(s) = 2 s`.

mod divergence;
mod lemma;
mod ode;
mod rates;

pub use divergence::{divergence_check, DivergenceReport};
pub use lemma::{closed_form_bound, BoundMode, BoundValue, DecayFunction, FnDecay, PowerDecay};
pub use ode::{integrate_envelope, integrate_envelope_at, solve_decreasing, EnvelopeTrajectory};
pub use rates::{predicted_rate, RateForm, RatePrediction};

use crate::damping::{DampingFamily, DampingLaw};
use crate::error::{Error, Result};
use crate::numerics::bisect_increasing;
use crate::weight::TimeWeight;

/// Observability window used when none is supplied: `T_R + 9R` with
/// `T_R = 2R`, the escape time of radial rays from a convex obstacle.
pub fn default_window(radius: f64) -> f64 {
    11.0 * radius
}

/// Everything that defines `h`, `q` and the envelope ODE.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvelopeProblem {
    pub law: DampingLaw,
    pub weight: TimeWeight,
    /// Observability window `T`.
    pub window: f64,
    /// Constant `K > 1` dominating the observability constant.
    pub k: f64,
    /// `M_a = ∫ a(x) dx`.
    pub ma: f64,
    /// Initial envelope value `S(0) = E_u(0)`.
    pub s0: f64,
}

impl EnvelopeProblem {
    pub fn new(
        law: DampingLaw,
        weight: TimeWeight,
        window: f64,
        k: f64,
        ma: f64,
        s0: f64,
    ) -> Result<Self> {
        if !(window > 0.0 && window.is_finite()) {
            return Err(Error::Config(format!(
                "window T must be positive, got {window}"
            )));
        }
        if !(k > 1.0 && k.is_finite()) {
            return Err(Error::Config(format!("K must exceed 1, got {k}")));
        }
        if !(ma > 0.0 && ma.is_finite()) {
            return Err(Error::Config(format!("M_a must be positive, got {ma}")));
        }
        if !(s0 >= 0.0 && s0.is_finite()) {
            return Err(Error::Config(format!("S0 must be non-negative, got {s0}")));
        }
        let prob = Self {
            law,
            weight,
            window,
            k,
            ma,
            s0,
        };
        // alpha and S are non-increasing, so the largest argument handed to
        // h^{-1} is the one at t = 0.
        let first = prob.weight.alpha_unchecked(window, 0.0) * s0 / k;
        if first > prob.h_inverse_bound() {
            return Err(Error::Range {
                what: "alpha(0) S0 / K",
                value: first,
                bound: prob.h_inverse_bound(),
            });
        }
        Ok(prob)
    }

    /// Same problem with another `K`.
    pub fn with_k(&self, k: f64) -> Result<Self> {
        Self::new(
            self.law.clone(),
            self.weight,
            self.window,
            k,
            self.ma,
            self.s0,
        )
    }

    pub fn with_s0(&self, s0: f64) -> Result<Self> {
        Self::new(
            self.law.clone(),
            self.weight,
            self.window,
            self.k,
            self.ma,
            s0,
        )
    }

    fn is_linear(&self) -> bool {
        self.law.family() == DampingFamily::Linear
    }

    /// `T * M_a`, the damping measure of one window.
    pub fn window_measure(&self) -> f64 {
        self.window * self.ma
    }

    /// Largest `s` accepted by [`h_eval`](Self::h_eval).
    pub fn h_domain_bound(&self) -> f64 {
        if self.is_linear() {
            f64::INFINITY
        } else {
            self.window * self.window_measure() * self.law.h0_max()
        }
    }

    /// Largest `x` accepted by [`h_inverse`](Self::h_inverse).
    pub fn h_inverse_bound(&self) -> f64 {
        if self.is_linear() {
            f64::INFINITY
        } else {
            self.h_domain_bound() + self.window_measure() * self.law.h0_unchecked(self.law.h0_max())
        }
    }

    pub fn h_eval(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(Error::Domain {
                what: "h",
                value: s,
            });
        }
        if self.is_linear() {
            return Ok(2.0 * s);
        }
        let bound = self.h_domain_bound();
        if s > bound * (1.0 + 4.0 * f64::EPSILON) {
            return Err(Error::Range {
                what: "h",
                value: s,
                bound,
            });
        }
        let arg = (s / (self.window * self.window_measure())).min(self.law.h0_max());
        Ok(s + self.window_measure() * self.law.h0_unchecked(arg))
    }

    /// `h^{-1}(x)`.
    ///
    /// Writing `z = h0(s / (T T M_a))` turns `h(s) = x` into
    /// `T T M_a h0^{-1}(z) + T M_a z = x`, which only needs the explicit
    /// `h0^{-1}` and is solved by bisection in `z`.
    pub fn h_inverse(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::Domain {
                what: "h_inverse",
                value: x,
            });
        }
        if self.is_linear() {
            return Ok(0.5 * x);
        }
        let bound = self.h_inverse_bound();
        if x > bound * (1.0 + 4.0 * f64::EPSILON) {
            return Err(Error::Range {
                what: "h_inverse",
                value: x,
                bound,
            });
        }
        Ok(self.h_inverse_unchecked(x.min(bound)))
    }

    fn h_inverse_unchecked(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        let scale = self.window * self.window_measure();
        let measure = self.window_measure();
        let h0_inv = |z: f64| self.law.h0_inverse(z.clamp(0.0, 1.0)).unwrap_or(0.0);
        let lhs = |z: f64| scale * h0_inv(z) + measure * z;
        let z_hi = 1.0f64.min(x / measure);
        let z_lo = f64::MIN_POSITIVE;
        if lhs(z_lo) >= x {
            return scale * h0_inv(z_lo).min(x / scale);
        }
        let z = bisect_increasing(lhs, x, z_lo, z_hi, 1e-15, 400);
        (scale * h0_inv(z)).min(x)
    }

    /// `q(t, S) = beta(t) h^{-1}(alpha(t) S / K)`.
    pub fn q_eval(&self, t: f64, s: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::Domain {
                what: "q (time)",
                value: t,
            });
        }
        if !(s >= 0.0) {
            return Err(Error::Domain {
                what: "q (state)",
                value: s,
            });
        }
        let alpha = self.weight.alpha_unchecked(self.window, t);
        let beta = self.weight.beta_unchecked(self.window, t);
        Ok(beta * self.h_inverse(alpha * s / self.k)?)
    }

    /// Lower comparison function `chi(s) = C1 h0^{-1}(s / (2 C2))` with
    /// `C1 = min(T M_a, 1)` and `C2 = max(T M_a, 1)`.
    pub fn chi(&self, s: f64) -> Result<f64> {
        let measure = self.window_measure();
        let (c1, c2) = (measure.min(1.0), measure.max(1.0));
        Ok(c1 * self.law.h0_inverse(s / (2.0 * c2))?)
    }

    /// Largest sampled `eps0 <= 1` such that `chi(s) <= h^{-1}(s)` holds on
    /// every sampled `s <= eps0`. `n` log-spaced samples cover `[1e-12, 1]`.
    pub fn chi_validated_eps0(&self, n: usize) -> f64 {
        let n = n.max(2);
        let upper = 1.0f64.min(self.h_inverse_bound());
        let mut validated = 0.0;
        for i in 0..n {
            let s = 1e-12 * (upper / 1e-12).powf(i as f64 / (n - 1) as f64);
            let ok = match (self.chi(s), self.h_inverse(s)) {
                (Ok(c), Ok(h)) => c <= h * (1.0 + 1e-12),
                _ => false,
            };
            if !ok {
                break;
            }
            validated = s;
        }
        validated
    }
}
