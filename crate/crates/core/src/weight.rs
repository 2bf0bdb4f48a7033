//! Time weights `rho(t)` and the auxiliary weights `alpha`, `beta` built from them.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::validation::ValidationReport;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WeightFamily {
    /// `rho(t) = (1 + t)^tau`.
    PowerLaw { tau: f64 },
    /// `rho(t) = 1`.
    Constant,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Monotonicity {
    Decreasing,
    Increasing,
}

/// Constants of the shift condition `rho(t - 2T) >= c0 rho(t)` for `t >= t0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShiftCondition {
    pub c0: f64,
    pub t0: f64,
}

/// A positive monotone time weight normalised to `rho(0) = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeWeight {
    family: WeightFamily,
    /// Constant with `|rho'(t)| <= C0 rho(t)`.
    derivative_bound: f64,
    shift: Option<ShiftCondition>,
}

impl TimeWeight {
    pub fn new(family: WeightFamily) -> Result<Self> {
        let derivative_bound = match family {
            WeightFamily::PowerLaw { tau } if !tau.is_finite() => {
                return Err(Error::Config(format!("tau must be finite, got {tau}")));
            }
            WeightFamily::PowerLaw { tau } => tau.abs(),
            WeightFamily::Constant => 0.0,
        };
        Ok(Self {
            family,
            derivative_bound,
            shift: None,
        })
    }

    pub fn constant() -> Self {
        Self::new(WeightFamily::Constant).expect("constant weight is valid")
    }

    pub fn power(tau: f64) -> Result<Self> {
        Self::new(WeightFamily::PowerLaw { tau })
    }

    /// Attach explicit shift-condition constants.
    pub fn with_shift_condition(mut self, c0: f64, t0: f64) -> Result<Self> {
        if !(c0 > 0.0 && t0 >= 0.0) {
            return Err(Error::Config(format!(
                "shift condition needs c0 > 0, t0 >= 0; got c0={c0}, t0={t0}"
            )));
        }
        self.shift = Some(ShiftCondition { c0, t0 });
        Ok(self)
    }

    pub fn family(&self) -> WeightFamily {
        self.family
    }

    /// `tau` for power laws, `0` for the constant weight.
    pub fn exponent(&self) -> f64 {
        match self.family {
            WeightFamily::PowerLaw { tau } => tau,
            WeightFamily::Constant => 0.0,
        }
    }

    pub fn derivative_bound(&self) -> f64 {
        self.derivative_bound
    }

    /// Constants ruled out by the increasing branch are `None`.
    pub fn shift_condition(&self, window: f64) -> Option<ShiftCondition> {
        match self.monotonicity() {
            Monotonicity::Decreasing => None,
            Monotonicity::Increasing => {
                Some(self.shift.unwrap_or_else(|| self.default_shift(window)))
            }
        }
    }

    /// Default shift constants: `t0 = 2T` and the exact infimum of
    /// `rho(t - 2T) / rho(t)` over `t >= t0`, attained at `t0` for power laws.
    pub fn default_shift(&self, window: f64) -> ShiftCondition {
        let t0 = 2.0 * window;
        ShiftCondition {
            c0: self.rho(t0 - 2.0 * window) / self.rho(t0),
            t0,
        }
    }

    /// Constant weights are filed under the decreasing branch.
    pub fn monotonicity(&self) -> Monotonicity {
        match self.family {
            WeightFamily::PowerLaw { tau } if tau > 0.0 => Monotonicity::Increasing,
            _ => Monotonicity::Decreasing,
        }
    }

    /// Outside `|tau| <= 1` no decay of the local energy can be inferred.
    pub fn in_decay_regime(&self) -> bool {
        self.exponent().abs() <= 1.0
    }

    pub fn eval_rho(&self, t: f64) -> Result<f64> {
        check_time("rho", t)?;
        Ok(self.rho(t))
    }

    pub fn rho(&self, t: f64) -> f64 {
        match self.family {
            WeightFamily::PowerLaw { tau } => (1.0 + t).powf(tau),
            WeightFamily::Constant => 1.0,
        }
    }

    pub fn rho_prime(&self, t: f64) -> f64 {
        match self.family {
            WeightFamily::PowerLaw { tau } => tau * (1.0 + t).powf(tau - 1.0),
            WeightFamily::Constant => 0.0,
        }
    }

    /// `alpha(t)`: 1 for decreasing weights, `rho(t + T)^-2` for increasing ones.
    pub fn alpha(&self, window: f64, t: f64) -> Result<f64> {
        check_window(window)?;
        check_time("alpha", t)?;
        Ok(self.alpha_unchecked(window, t))
    }

    pub(crate) fn alpha_unchecked(&self, window: f64, t: f64) -> f64 {
        match self.monotonicity() {
            Monotonicity::Decreasing => 1.0,
            Monotonicity::Increasing => self.rho(t + window).powi(-2),
        }
    }

    /// `beta(t)`: `rho(t + T)/T` for decreasing weights; `1/T` before `T` and
    /// `rho(t - T)/T` afterwards for increasing ones.
    pub fn beta(&self, window: f64, t: f64) -> Result<f64> {
        check_window(window)?;
        check_time("beta", t)?;
        Ok(self.beta_unchecked(window, t))
    }

    pub(crate) fn beta_unchecked(&self, window: f64, t: f64) -> f64 {
        match self.monotonicity() {
            Monotonicity::Decreasing => self.rho(t + window) / window,
            Monotonicity::Increasing if t < window => 1.0 / window,
            Monotonicity::Increasing => self.rho(t - window) / window,
        }
    }

    /// `kappa(t) = T sup_{[t, t+T]} beta`. `beta` is monotone, so the supremum
    /// sits at the left end for decreasing weights and the right end otherwise.
    pub fn kappa(&self, window: f64, t: f64) -> Result<f64> {
        check_window(window)?;
        check_time("kappa", t)?;
        let at = match self.monotonicity() {
            Monotonicity::Decreasing => t,
            Monotonicity::Increasing => t + window,
        };
        Ok(window * self.beta_unchecked(window, at))
    }
}

fn check_time(what: &'static str, t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain { what, value: t })
    }
}

fn check_window(window: f64) -> Result<()> {
    if window > 0.0 && window.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "observability window T",
            value: window,
        })
    }
}

impl fmt::Display for WeightFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightFamily::PowerLaw { tau } => write!(f, "power:tau={tau}"),
            WeightFamily::Constant => write!(f, "const"),
        }
    }
}

impl FromStr for WeightFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "const" {
            return Ok(WeightFamily::Constant);
        }
        let tau = s
            .strip_prefix("power:")
            .and_then(|rest| rest.trim().strip_prefix("tau"))
            .and_then(|rest| rest.trim().strip_prefix('='))
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown time weight `{s}` (expected `const` or `power:tau=<real>`)"
                ))
            })?;
        let tau: f64 = tau
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("cannot parse tau in `{s}`")))?;
        if !tau.is_finite() {
            return Err(Error::Config(format!("tau must be finite in `{s}`")));
        }
        Ok(WeightFamily::PowerLaw { tau })
    }
}

const REL_TOL: f64 = 1e-12;

/// Sample `rho` on `[0, horizon]` and check its standing assumptions.
///
/// Reports the tightest `C0 = sup |rho'|/rho` and, for increasing weights, the
/// tightest `c0 = inf rho(t - 2T)/rho(t)` over `[t0, horizon]`.
pub fn validate_weight(
    w: &TimeWeight,
    window: f64,
    horizon: f64,
    n_samples: usize,
) -> ValidationReport {
    let n = n_samples.max(100);
    let mut report = ValidationReport::new(format!("time weight {}", w.family()));
    let ts: Vec<f64> = (0..n)
        .map(|i| horizon * i as f64 / (n - 1) as f64)
        .collect();
    let rhos: Vec<f64> = ts.iter().map(|&t| w.rho(t)).collect();

    report.push("rho(0) = 1", -(rhos[0] - 1.0).abs(), REL_TOL);
    report.push(
        "rho positive",
        rhos.iter().copied().fold(f64::INFINITY, f64::min),
        0.0,
    );
    let steps = rhos.windows(2).map(|p| p[1] - p[0]);
    let monotone = match w.monotonicity() {
        Monotonicity::Decreasing => steps.map(|d| -d).fold(f64::INFINITY, f64::min),
        Monotonicity::Increasing => steps.fold(f64::INFINITY, f64::min),
    };
    report.push("rho monotone as flagged", monotone, 0.0);

    let tightest_c0 = ts
        .iter()
        .zip(&rhos)
        .map(|(&t, &r)| w.rho_prime(t).abs() / r)
        .fold(0.0, f64::max);
    report.push(
        "|rho'| <= C0 rho",
        w.derivative_bound() - tightest_c0,
        REL_TOL,
    );
    report.measured.push(("C0", tightest_c0));

    if let Some(shift) = w.shift_condition(window) {
        let start = shift.t0.max(2.0 * window);
        report.push(
            "horizon beyond t0 + 2T",
            horizon - (shift.t0 + 2.0 * window),
            0.0,
        );
        let tightest = (0..n)
            .map(|i| start + (horizon - start).max(0.0) * i as f64 / (n - 1) as f64)
            .map(|t| w.rho(t - 2.0 * window) / w.rho(t))
            .fold(f64::INFINITY, f64::min);
        report.push("rho(t-2T) >= c0 rho(t)", tightest - shift.c0, REL_TOL);
        report.measured.push(("c0", tightest));
    }
    if !w.in_decay_regime() {
        report
            .measured
            .push(("|tau| beyond decay regime", w.exponent().abs()));
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rho_examples() {
        assert_eq!(
            TimeWeight::power(-1.0).unwrap().eval_rho(3.0).unwrap(),
            0.25
        );
        assert_eq!(TimeWeight::power(1.0).unwrap().eval_rho(0.0).unwrap(), 1.0);
        assert_eq!(TimeWeight::constant().eval_rho(7.3).unwrap(), 1.0);
        assert!(TimeWeight::constant().eval_rho(-1.0).is_err());
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(
            TimeWeight::power(-1.0).unwrap().alpha(2.0, 5.0).unwrap(),
            1.0
        );
        assert_eq!(
            TimeWeight::power(1.0).unwrap().alpha(2.0, 1.0).unwrap(),
            0.0625
        );
        assert_eq!(TimeWeight::constant().alpha(1.0, 0.0).unwrap(), 1.0);
        assert!(TimeWeight::constant().alpha(0.0, 1.0).is_err());
    }

    #[test]
    fn beta_examples() {
        let dec = TimeWeight::power(-1.0).unwrap();
        assert!((dec.beta(2.0, 0.0).unwrap() - 1.0 / 6.0).abs() < 1e-16);
        let inc = TimeWeight::power(1.0).unwrap();
        assert_eq!(inc.beta(2.0, 1.0).unwrap(), 0.5);
        assert_eq!(inc.beta(2.0, 4.0).unwrap(), 1.5);
        // Continuous across t = T thanks to rho(0) = 1.
        assert!((inc.beta(2.0, 2.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn constant_branches_agree() {
        let c = TimeWeight::constant();
        for t in [0.0, 0.5, 3.0, 100.0] {
            assert_eq!(c.alpha(2.0, t).unwrap(), 1.0);
            assert_eq!(c.beta(2.0, t).unwrap(), 0.5);
        }
        assert_eq!(c.monotonicity(), Monotonicity::Decreasing);
    }

    #[test]
    fn kappa_uses_monotone_endpoint() {
        let dec = TimeWeight::power(-0.5).unwrap();
        assert_eq!(
            dec.kappa(2.0, 1.0).unwrap(),
            2.0 * dec.beta(2.0, 1.0).unwrap()
        );
        let inc = TimeWeight::power(0.5).unwrap();
        assert_eq!(
            inc.kappa(2.0, 1.0).unwrap(),
            2.0 * inc.beta(2.0, 3.0).unwrap()
        );
    }

    #[test]
    fn validate_examples() {
        let r = validate_weight(&TimeWeight::power(-1.0).unwrap(), 2.0, 50.0, 1000);
        assert!(r.all_passed(), "{r}");
        assert_eq!(r.measured("C0").unwrap(), 1.0);

        let w = TimeWeight::power(1.0)
            .unwrap()
            .with_shift_condition(0.2, 4.0)
            .unwrap();
        let r = validate_weight(&w, 2.0, 100.0, 1000);
        assert!(r.all_passed(), "{r}");
        assert!((r.measured("c0").unwrap() - 0.2).abs() < 1e-14);

        let r = validate_weight(&TimeWeight::constant(), 2.0, 50.0, 1000);
        assert!(r.all_passed());
        assert_eq!(r.measured("C0").unwrap(), 0.0);
    }

    #[test]
    fn wrong_constants_fail() {
        let w = TimeWeight::power(1.0)
            .unwrap()
            .with_shift_condition(0.5, 4.0)
            .unwrap();
        assert!(!validate_weight(&w, 2.0, 100.0, 500).all_passed());
    }

    #[test]
    fn default_families_validate() {
        for tau in [-2.0, -1.0, -0.5, 0.0, 0.25, 0.5, 1.0] {
            let w = TimeWeight::power(tau).unwrap();
            let r = validate_weight(&w, 3.0, 200.0, 2000);
            assert!(r.all_passed(), "{r}");
        }
        assert!(!TimeWeight::power(-2.0).unwrap().in_decay_regime());
    }

    #[test]
    fn parse() {
        assert_eq!(
            "const".parse::<WeightFamily>().unwrap(),
            WeightFamily::Constant
        );
        assert_eq!(
            "power:tau=-0.5".parse::<WeightFamily>().unwrap(),
            WeightFamily::PowerLaw { tau: -0.5 }
        );
        assert!("power:sigma=1".parse::<WeightFamily>().is_err());
        assert!("linear".parse::<WeightFamily>().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn alpha_beta_shape(tau in -1.5f64..1.5, window in 0.1f64..20.0, a in 0.0f64..100.0, b in 0.0f64..100.0) {
                let w = TimeWeight::power(tau).unwrap();
                let (s, t) = if a < b { (a, b) } else { (b, a) };
                let (al_s, al_t) = (w.alpha(window, s).unwrap(), w.alpha(window, t).unwrap());
                prop_assert!(al_t <= al_s && al_s <= 1.0 && al_t > 0.0);
                prop_assert!(w.beta(window, s).unwrap() > 0.0);
                if s >= window {
                    let (bs, bt) = (w.beta(window, s).unwrap(), w.beta(window, t).unwrap());
                    match w.monotonicity() {
                        Monotonicity::Decreasing => prop_assert!(bt <= bs),
                        Monotonicity::Increasing => prop_assert!(bt >= bs),
                    }
                }
                prop_assert!(w.rho_prime(t).abs() <= w.derivative_bound() * w.rho(t) * (1.0 + 1e-12));
            }
        }
    }
}
