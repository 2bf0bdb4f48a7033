use crate::envelope::RateForm;
use crate::error::{Error, Result};
use crate::numerics::fit_line;

/// Abscissa used when fitting a decay exponent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FitScale {
    /// `ln E` against `ln(1 + t)`.
    Power,
    /// `ln E` against `ln ln(2 + t)`.
    LogPower,
}

impl FitScale {
    /// Scale matching a predicted rate: logarithmic rates are fitted against
    /// `ln ln(2 + t)`, everything else against `ln(1 + t)`.
    pub fn for_form(form: RateForm) -> Self {
        match form {
            RateForm::LogPower { .. } | RateForm::LogLog | RateForm::InverseLog => {
                FitScale::LogPower
            }
            RateForm::PowerLaw { .. } | RateForm::ExpOfIntegral => FitScale::Power,
        }
    }

    fn abscissa(self, t: f64) -> f64 {
        match self {
            FitScale::Power => (1.0 + t).ln(),
            FitScale::LogPower => (2.0 + t).ln().ln(),
        }
    }
}

/// Slopes drifting by more than this fraction between the two halves of the
/// window mark the data as not a power law.
const DRIFT_TOL: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailFit {
    pub exponent: f64,
    pub correlation: f64,
    /// Slope on the later half of the window minus slope on the earlier half.
    pub drift: f64,
    /// False when the slope drifts across the window.
    pub power_law: bool,
    pub points: usize,
}

/// Least-squares decay exponent of the `(t, E)` points inside `[t_lo, t_hi]`.
///
/// ```
/// use wavedecay::harness::{fit_tail_exponent, FitScale};
///
/// let pts: Vec<(f64, f64)> = (0..200)
///     .map(|i| 10f64.powf(1.0 + 3.0 * i as f64 / 199.0))
///     .map(|t| (t, 7.0 * (1.0 + t).powf(-1.5)))
///     .collect();
/// let fit = fit_tail_exponent(&pts, (10.0, 1e4), FitScale::Power).unwrap();
/// assert!((fit.exponent + 1.5).abs() < 1e-10);
/// assert!(fit.power_law);
/// ```
pub fn fit_tail_exponent(
    points: &[(f64, f64)],
    window: (f64, f64),
    scale: FitScale,
) -> Result<TailFit> {
    let (t_lo, t_hi) = window;
    if !(t_lo >= 0.0 && t_hi > t_lo) {
        return Err(Error::Fit(format!("empty fit window [{t_lo}, {t_hi}]")));
    }
    if (1.0 + t_hi) / (1.0 + t_lo) < 10.0 * (1.0 - 1e-12) {
        return Err(Error::Fit(format!(
            "fit window [{t_lo}, {t_hi}] spans less than one decade in 1 + t"
        )));
    }
    let inside: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(t, _)| t >= t_lo && t <= t_hi)
        .collect();
    if let Some(&(t, e)) = inside.iter().find(|p| !(p.1 > 0.0)) {
        return Err(Error::Fit(format!("non-positive value {e} at t = {t}")));
    }
    if inside.len() < 4 {
        return Err(Error::Fit(format!(
            "only {} samples inside the fit window",
            inside.len()
        )));
    }
    let xs: Vec<f64> = inside.iter().map(|p| scale.abscissa(p.0)).collect();
    let ys: Vec<f64> = inside.iter().map(|p| p.1.ln()).collect();
    let degenerate = || Error::Fit("samples do not spread along the fit axis".into());
    let all = fit_line(&xs, &ys).ok_or_else(degenerate)?;

    let mid = 0.5 * (xs[0] + xs[xs.len() - 1]);
    let split = xs.partition_point(|&x| x < mid).clamp(2, xs.len() - 2);
    let early = fit_line(&xs[..split], &ys[..split]).ok_or_else(degenerate)?;
    let late = fit_line(&xs[split..], &ys[split..]).ok_or_else(degenerate)?;
    let drift = late.slope - early.slope;

    Ok(TailFit {
        exponent: all.slope,
        correlation: all.correlation,
        drift,
        power_law: drift.abs() <= DRIFT_TOL * all.slope.abs().max(0.1),
        points: inside.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sampled(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> Vec<(f64, f64)> {
        (0..n)
            .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
            .map(|t| (t, f(t)))
            .collect()
    }

    #[test]
    fn exact_power_law() {
        let pts = sampled(|t| 7.0 * (1.0 + t).powf(-1.5), 1.0, 1e5, 300);
        let fit = fit_tail_exponent(&pts, (10.0, 1e5), FitScale::Power).unwrap();
        assert!((fit.exponent + 1.5).abs() < 1e-10);
        assert!(fit.drift.abs() < 1e-10);
        assert!(fit.correlation < -0.999999);
    }

    #[test]
    fn exponential_is_flagged() {
        let pts = sampled(|t| (-t).exp(), 1.0, 600.0, 400);
        let fit = fit_tail_exponent(&pts, (5.0, 600.0), FitScale::Power).unwrap();
        assert!(!fit.power_law);
        assert!(fit.drift < 0.0);
    }

    #[test]
    fn log_scale_recovers_log_power() {
        let pts = sampled(|t| (2.0 + t).ln().powf(-2.0), 1.0, 1e12, 400);
        let fit = fit_tail_exponent(&pts, (1e3, 1e12), FitScale::LogPower).unwrap();
        assert!((fit.exponent + 2.0).abs() < 1e-10);
        assert_eq!(FitScale::for_form(RateForm::InverseLog), FitScale::LogPower);
        assert_eq!(
            FitScale::for_form(RateForm::PowerLaw { mu: -1.0 }),
            FitScale::Power
        );
    }

    #[test]
    fn rejects_bad_input() {
        let mut pts = sampled(|t| 1.0 / t, 1.0, 1e3, 50);
        assert!(fit_tail_exponent(&pts, (10.0, 50.0), FitScale::Power).is_err());
        pts[30].1 = 0.0;
        let err = fit_tail_exponent(&pts, (10.0, 1e3), FitScale::Power).unwrap_err();
        assert!(err.to_string().contains("non-positive"));
        assert!(fit_tail_exponent(&pts[..2], (1.0, 1e3), FitScale::Power).is_err());
    }

    #[test]
    fn window_shift_stability_on_power_law() {
        let pts = sampled(|t| 3.0 * (1.0 + t).powf(-0.8), 1.0, 1e6, 500);
        let a = fit_tail_exponent(&pts, (100.0, 1e5), FitScale::Power).unwrap();
        let b = fit_tail_exponent(&pts, (110.0, 1.1e5), FitScale::Power).unwrap();
        assert!(((a.exponent - b.exponent) / a.exponent).abs() < 0.02);
    }
}
