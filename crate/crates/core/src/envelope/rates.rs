use std::collections::BTreeMap;
use std::fmt;

use crate::damping::{DampingFamily, DampingLaw};
use crate::error::{Error, Result};
use crate::weight::{TimeWeight, WeightFamily};

/// Asymptotic shape of the local-energy bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RateForm {
    /// `exp(-rate ∫_0^t w(s) ds)`; `w` is `rho` or `rho^{-1}`, see the constants.
    ExpOfIntegral,
    /// `(1 + t)^mu`.
    PowerLaw { mu: f64 },
    /// `(ln(2 + t))^p`.
    LogPower { p: f64 },
    /// `(ln(ln(1 + t) / KT + 2))^{-1}`.
    LogLog,
    /// `(ln((1 + t) / KT + 2))^{-1}`.
    InverseLog,
}

impl fmt::Display for RateForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RateForm::ExpOfIntegral => write!(f, "exp-of-integral"),
            RateForm::PowerLaw { mu } => write!(f, "power-law mu={mu}"),
            RateForm::LogPower { p } => write!(f, "log-power p={p}"),
            RateForm::LogLog => write!(f, "log-log"),
            RateForm::InverseLog => write!(f, "inverse-log"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatePrediction {
    pub form: RateForm,
    pub constants: BTreeMap<String, f64>,
}

impl RatePrediction {
    /// Exponent of `(1 + t)` for power laws, of `ln(2 + t)` for log powers.
    pub fn exponent(&self) -> Option<f64> {
        match self.form {
            RateForm::PowerLaw { mu } => Some(mu),
            RateForm::LogPower { p } => Some(p),
            _ => None,
        }
    }
}

const COVERED: &str = "linear with |tau| <= 1 or constant rho; superlinear r0 with tau in [-1, 1/r0]; \
                       sublinear theta0 with tau in [-1, theta0]; exp-origin with tau in [-1, 0] or constant rho";

const EDGE: f64 = 1e-12;

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() <= EDGE
}

/// Tabulated asymptotic rate for a damping law and a time weight.
pub fn predicted_rate(
    law: &DampingLaw,
    weight: &TimeWeight,
    window: f64,
    k: f64,
) -> Result<RatePrediction> {
    let tau = weight.exponent();
    let constant = weight.family() == WeightFamily::Constant;
    let mut constants = BTreeMap::from([
        ("K".to_string(), k),
        ("T".to_string(), window),
        ("tau".to_string(), tau),
    ]);
    let unsupported = || Error::Unsupported {
        given: format!("{} with {}", law.family(), weight.family()),
        covered: COVERED.to_string(),
    };

    let form = match law.family() {
        DampingFamily::Linear => {
            if constant || (tau > -1.0 + EDGE && tau <= 0.0) {
                constants.insert("rate".into(), 1.0 / (k * window));
                constants.insert("integrand_exponent".into(), tau);
                RateForm::ExpOfIntegral
            } else if near(tau, -1.0) {
                RateForm::PowerLaw {
                    mu: -1.0 / (k * window),
                }
            } else if tau > 0.0 && tau < 1.0 - EDGE {
                let c0 = weight.shift_condition(window).map_or(1.0, |s| s.c0);
                constants.insert("c0".into(), c0);
                constants.insert("rate".into(), c0 / (k * window));
                constants.insert("integrand_exponent".into(), -tau);
                RateForm::ExpOfIntegral
            } else if near(tau, 1.0) {
                let c0 = weight.shift_condition(window).map_or(1.0, |s| s.c0);
                constants.insert("c0".into(), c0);
                RateForm::PowerLaw {
                    mu: -c0 / (k * window),
                }
            } else {
                return Err(unsupported());
            }
        }
        DampingFamily::SuperlinearPower { r0 } => {
            constants.insert("r0".into(), r0);
            let scale = 2.0 / (r0 - 1.0);
            if near(tau, -1.0) || near(tau, 1.0 / r0) {
                RateForm::LogPower { p: -scale }
            } else if tau > -1.0 && tau <= 0.0 {
                RateForm::PowerLaw {
                    mu: -scale * (1.0 + tau),
                }
            } else if tau > 0.0 && tau < 1.0 / r0 {
                RateForm::PowerLaw {
                    mu: -scale * (1.0 - tau * r0),
                }
            } else {
                return Err(unsupported());
            }
        }
        DampingFamily::SublinearPower { theta0 } => {
            constants.insert("theta0".into(), theta0);
            let scale = 2.0 * theta0 / (1.0 - theta0);
            if near(tau, -1.0) || near(tau, theta0) {
                RateForm::LogPower { p: -scale }
            } else if tau > -1.0 && tau <= 0.0 {
                RateForm::PowerLaw {
                    mu: -scale * (1.0 + tau),
                }
            } else if tau > 0.0 && tau < theta0 {
                RateForm::PowerLaw {
                    mu: -scale * (1.0 - tau / theta0),
                }
            } else {
                return Err(unsupported());
            }
        }
        DampingFamily::ExponentialOrigin => {
            if near(tau, -1.0) {
                RateForm::LogLog
            } else if tau > -1.0 && tau <= 0.0 {
                RateForm::InverseLog
            } else {
                return Err(unsupported());
            }
        }
    };
    Ok(RatePrediction { form, constants })
}
