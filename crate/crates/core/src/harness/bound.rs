use crate::envelope::{integrate_envelope_at, EnvelopeProblem};
use crate::error::{Error, Result};
use crate::sim::TimeSeries;

/// Relative tolerance of the envelope solves made while checking bounds.
const ENVELOPE_TOL: f64 = 1e-10;

/// Ratios up to this are counted as satisfying the bound.
pub const BOUND_SLACK: f64 = 1e-9;

/// Absolute floor, relative to `W(0)`, below which lemma slacks are treated
/// as rounding noise in the simulated energies.
const ROUNDOFF_FLOOR: f64 = 1e-12;

/// Which simulated energy plays the role of `W`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EnergySource {
    /// Energy inside `B_R`.
    #[default]
    Local,
    /// Energy of the whole solution.
    Total,
}

impl EnergySource {
    fn pick(self, row: &crate::sim::SeriesRow) -> f64 {
        match self {
            EnergySource::Local => row.e_r,
            EnergySource::Total => row.e_total,
        }
    }
}

/// Comparison of `E_R(t)` with `S_K(t - T)` over the sampled `t >= T`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundCheck {
    pub k: f64,
    /// `max E_R(t) / S_K(t - T)`; 0 when nothing was checked.
    pub worst_ratio: f64,
    /// Time of the worst ratio.
    pub worst_t: f64,
    pub checked: usize,
    pub holds: bool,
}

fn ratio(e: f64, s: f64) -> f64 {
    if e <= 0.0 {
        0.0
    } else if s <= 0.0 {
        f64::INFINITY
    } else {
        e / s
    }
}

/// Check `E_R(t) <= S_K(t - T)` for every row with `t >= T`, where `S_K`
/// solves the envelope equation with the template's law, weight, `T` and
/// `M_a`, constant `k` and `S_K(0) = E_u(0)`.
///
/// A `k` for which `E_u(0)` lies outside the range of the envelope is
/// reported as an infinite violation.
pub fn bound_check(series: &TimeSeries, template: &EnvelopeProblem, k: f64) -> Result<BoundCheck> {
    let window = template.window;
    let rows: Vec<_> = series
        .rows
        .iter()
        .filter(|r| r.t >= window * (1.0 - 1e-12))
        .collect();
    let mut check = BoundCheck {
        k,
        worst_ratio: 0.0,
        worst_t: f64::NAN,
        checked: rows.len(),
        holds: true,
    };
    if rows.is_empty() {
        return Ok(check);
    }
    let prob = match template
        .with_k(k)
        .and_then(|p| p.with_s0(series.initial_energy()))
    {
        Ok(p) => p,
        Err(Error::Range { .. }) => {
            check.worst_ratio = f64::INFINITY;
            check.worst_t = rows[0].t;
            check.holds = false;
            return Ok(check);
        }
        Err(e) => return Err(e),
    };
    let mut stops: Vec<f64> = rows.iter().map(|r| (r.t - window).max(0.0)).collect();
    stops.dedup();
    let horizon = *stops.last().expect("rows is not empty");
    let envelope = if horizon > 0.0 {
        Some(integrate_envelope_at(&prob, horizon, ENVELOPE_TOL, &stops)?)
    } else {
        None
    };
    for row in rows {
        let lag = (row.t - window).max(0.0);
        let s = match &envelope {
            _ if lag == 0.0 => prob.s0,
            Some(traj) => traj.value_at(lag).unwrap_or(0.0),
            None => prob.s0,
        };
        let q = ratio(row.e_r, s);
        if q > check.worst_ratio || check.worst_t.is_nan() {
            check.worst_ratio = q;
            check.worst_t = row.t;
        }
    }
    check.holds = check.worst_ratio <= 1.0 + BOUND_SLACK;
    Ok(check)
}

/// Smallest `K` in `k_range` for which [`bound_check`] holds, by bisection
/// in `ln K`. Larger `K` slows the envelope, so the set of valid `K` is an
/// interval reaching up to `k_range.1`.
///
/// When even `k_range.1` fails, the returned check is the one at `k_range.1`
/// with `holds = false` and its worst violation.
pub fn fit_minimal_k(
    series: &TimeSeries,
    template: &EnvelopeProblem,
    k_range: (f64, f64),
) -> Result<BoundCheck> {
    let (k_lo, k_hi) = k_range;
    if !(k_lo > 1.0 && k_hi > k_lo && k_hi.is_finite()) {
        return Err(Error::Config(format!(
            "K range must satisfy 1 < K_lo < K_hi, got [{k_lo}, {k_hi}]"
        )));
    }
    if !series.complete {
        return Err(Error::Fit(
            "cannot fit K on an incomplete simulation".into(),
        ));
    }
    let low = bound_check(series, template, k_lo)?;
    if low.holds {
        return Ok(low);
    }
    let mut best = bound_check(series, template, k_hi)?;
    if !best.holds {
        return Ok(best);
    }
    let (mut lo, mut hi) = (k_lo, k_hi);
    for _ in 0..100 {
        if hi / lo <= 1.0 + 1e-6 {
            break;
        }
        let mid = lo.sqrt() * hi.sqrt();
        let c = bound_check(series, template, mid)?;
        if c.holds {
            hi = mid;
            best = c;
        } else {
            lo = mid;
        }
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LemmaViolation {
    pub m: usize,
    /// `W(mT) - W((m+1)T) - kappa(mT) L(mT, W(mT))`; negative.
    pub slack: f64,
}

/// Outcome of [`check_discrete_lemma`].
#[derive(Clone, Debug, PartialEq)]
pub struct LemmaReport {
    /// No violations and all structural hypotheses hold.
    pub ok: bool,
    pub violations: Vec<LemmaViolation>,
    /// Number of `m` for which the inequality was evaluated.
    pub checked: usize,
    /// `x - kappa L(t, x)` and `L(t, x)` increasing in `x`, `L(t, 0) = 0` and
    /// `L(., x)` non-increasing, on the sampled `t = mT`.
    pub structural_ok: bool,
    /// Whether the sampled `W` is non-increasing up to the rounding floor.
    pub w_non_increasing: bool,
    /// When `ok`: whether `W(mT) <= S((m - 1) T)` at every `m >= 1`, with `S`
    /// the envelope started from `W(0)`.
    pub chain_ok: Option<bool>,
}

/// Check the discrete decay inequality
/// `W((m+1)T) + kappa(mT) L(mT, W(mT)) <= W(mT)` on a series sampled at the
/// multiples of `T`, where `L(t, x) = h^{-1}(alpha(t) x / K)`.
///
/// Slacks above `-1e-12 W(0)` are attributed to rounding and accepted.
pub fn check_discrete_lemma(
    series: &TimeSeries,
    prob: &EnvelopeProblem,
    source: EnergySource,
) -> Result<LemmaReport> {
    let window = prob.window;
    let Some(last_t) = series.rows.last().map(|r| r.t) else {
        return Err(Error::Fit("empty series".into()));
    };
    let levels = ((last_t / window) * (1.0 + 1e-12)).floor() as usize;
    let mut w = Vec::with_capacity(levels + 1);
    for m in 0..=levels {
        let t = m as f64 * window;
        let row = series
            .nearest(t)
            .filter(|r| (r.t - t).abs() <= 1e-6 * t.max(1.0))
            .ok_or_else(|| {
                Error::Fit(format!(
                    "series has no sample at t = {t} (multiple {m} of T)"
                ))
            })?;
        w.push(source.pick(row).max(0.0));
    }
    let w0 = w[0];
    let floor = ROUNDOFF_FLOOR * w0;
    let k = prob.k;
    let lfun = |t: f64, x: f64| -> Option<f64> {
        let alpha = prob.weight.alpha(window, t).ok()?;
        prob.h_inverse(alpha * x / k).ok()
    };
    let kappa = |t: f64| prob.weight.kappa(window, t);

    let mut violations = Vec::new();
    for m in 0..levels {
        let t = m as f64 * window;
        let slack = match lfun(t, w[m]) {
            Some(l) => w[m] - w[m + 1] - kappa(t)? * l,
            None => f64::NEG_INFINITY,
        };
        if slack < -floor {
            violations.push(LemmaViolation { m, slack });
        }
    }

    const GRID: usize = 32;
    let xs: Vec<f64> = (0..=GRID).map(|j| w0 * j as f64 / GRID as f64).collect();
    let mut structural_ok = true;
    let mut previous: Option<Vec<f64>> = None;
    for m in 0..=levels {
        let t = m as f64 * window;
        let kap = kappa(t)?;
        let Some(ls) = xs.iter().map(|&x| lfun(t, x)).collect::<Option<Vec<f64>>>() else {
            structural_ok = false;
            break;
        };
        let shifted: Vec<f64> = xs.iter().zip(&ls).map(|(x, l)| x - kap * l).collect();
        structural_ok &= ls[0] == 0.0;
        structural_ok &= ls.windows(2).all(|p| p[1] >= p[0]);
        structural_ok &= shifted.windows(2).all(|p| p[1] >= p[0] - floor);
        if let Some(prev) = &previous {
            structural_ok &= ls
                .iter()
                .zip(prev)
                .all(|(now, before)| *now <= before * (1.0 + 1e-12));
        }
        previous = Some(ls);
    }

    let w_non_increasing = series
        .rows
        .windows(2)
        .all(|p| source.pick(&p[1]) <= source.pick(&p[0]) + floor);

    let ok = violations.is_empty() && structural_ok;
    let chain_ok = if ok {
        Some(chain_dominated(prob, &w)?)
    } else {
        None
    };

    Ok(LemmaReport {
        ok,
        violations,
        checked: levels,
        structural_ok,
        w_non_increasing,
        chain_ok,
    })
}

/// `W(mT) <= S((m - 1)T)` for `m >= 1`, `S` started from `W(0)`.
fn chain_dominated(prob: &EnvelopeProblem, w: &[f64]) -> Result<bool> {
    let floor = ROUNDOFF_FLOOR * w[0];
    if w.len() < 2 {
        return Ok(true);
    }
    let Ok(start) = prob.with_s0(w[0]) else {
        return Ok(false);
    };
    let stops: Vec<f64> = (1..w.len() - 1).map(|m| m as f64 * prob.window).collect();
    let s_at: Vec<f64> = match stops.last() {
        Some(&end) => {
            let traj = integrate_envelope_at(&start, end, ENVELOPE_TOL, &stops)?;
            std::iter::once(w[0])
                .chain(stops.iter().map(|&t| traj.value_at(t).unwrap_or(0.0)))
                .collect()
        }
        None => vec![w[0]],
    };
    Ok(w[1..]
        .iter()
        .zip(&s_at)
        .all(|(wm, s)| *wm <= s * (1.0 + BOUND_SLACK) + floor))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::damping::DampingLaw;
    use crate::sim::SeriesRow;
    use crate::weight::TimeWeight;

    fn series(f: impl Fn(f64) -> f64, t_end: f64, dt: f64) -> TimeSeries {
        let n = (t_end / dt).round() as usize;
        TimeSeries {
            rows: (0..=n)
                .map(|i| {
                    let t = i as f64 * dt;
                    SeriesRow {
                        t,
                        e_total: f(0.0),
                        e_r: f(t),
                        d_cum: 0.0,
                    }
                })
                .collect(),
            complete: true,
            failure: None,
        }
    }

    fn linear(window: f64) -> EnvelopeProblem {
        EnvelopeProblem::new(
            DampingLaw::linear(),
            TimeWeight::constant(),
            window,
            2.0,
            1.0,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn zero_series_takes_the_lower_end() {
        let s = series(|_| 0.0, 10.0, 0.5);
        let fit = fit_minimal_k(&s, &linear(1.0), (1.001, 100.0)).unwrap();
        assert_eq!(fit.k, 1.001);
        assert!(fit.holds);
        assert_eq!(fit.worst_ratio, 0.0);
    }

    #[test]
    fn minimal_k_is_sharp_and_monotone() {
        // E(t) = e^{-t/8} against S = e^{-t/(2K)} shifted by T = 1, so
        // K_min = 4 (t - 1) / t at the last sample t = 40.
        let s = series(|t| (-t / 8.0).exp(), 40.0, 0.25);
        let template = linear(1.0);
        let fit = fit_minimal_k(&s, &template, (1.001, 100.0)).unwrap();
        assert!(fit.holds);
        assert!((fit.k - 3.9).abs() < 1e-4, "{}", fit.k);
        assert!(fit.worst_ratio <= 1.0 + BOUND_SLACK);
        for factor in [1.5, 2.0, 10.0] {
            assert!(bound_check(&s, &template, factor * fit.k).unwrap().holds);
        }
        assert!(!bound_check(&s, &template, fit.k * 0.99).unwrap().holds);
    }

    #[test]
    fn unreachable_bound_reports_the_upper_end() {
        let s = series(|t| if t < 20.0 { 1.0 } else { 2.0 }, 30.0, 0.5);
        let fit = fit_minimal_k(&s, &linear(1.0), (1.01, 50.0)).unwrap();
        assert!(!fit.holds);
        assert_eq!(fit.k, 50.0);
        assert!(fit.worst_ratio > 1.0);
    }

    #[test]
    fn incomplete_series_is_rejected() {
        let mut s = series(|_| 1.0, 2.0, 0.5);
        s.complete = false;
        assert!(fit_minimal_k(&s, &linear(1.0), (1.01, 5.0)).is_err());
    }

    #[test]
    fn constant_energy_violates_every_step() {
        let s = series(|_| 1.0, 5.0, 0.5);
        let r = check_discrete_lemma(&s, &linear(1.0), EnergySource::Local).unwrap();
        assert!(!r.ok);
        assert_eq!(r.checked, 5);
        assert_eq!(r.violations.len(), 5);
        assert!(r.violations.iter().all(|v| v.slack < 0.0));
        assert!(r.structural_ok);
        assert_eq!(r.chain_ok, None);
    }

    #[test]
    fn zero_energy_passes() {
        let s = series(|_| 0.0, 5.0, 0.5);
        let r = check_discrete_lemma(&s, &linear(1.0), EnergySource::Local).unwrap();
        assert!(r.ok);
        assert_eq!(r.chain_ok, Some(true));
    }

    #[test]
    fn fast_decay_satisfies_lemma_and_chain() {
        // kappa L = x / 4 for the linear law with K = 2, T = 1.
        let s = series(|t| (-t).exp(), 6.0, 0.25);
        let r = check_discrete_lemma(&s, &linear(1.0), EnergySource::Local).unwrap();
        assert!(r.ok, "{r:?}");
        assert!(r.w_non_increasing);
        assert_eq!(r.chain_ok, Some(true));
    }

    #[test]
    fn missing_multiples_of_t_are_an_error() {
        let s = series(|t| (-t).exp(), 6.0, 0.4);
        assert!(check_discrete_lemma(&s, &linear(1.0), EnergySource::Local).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn sampled(w: &[f64]) -> TimeSeries {
            TimeSeries {
                rows: w
                    .iter()
                    .enumerate()
                    .map(|(m, &e)| SeriesRow {
                        t: m as f64,
                        e_total: w[0],
                        e_r: e,
                        d_cum: 0.0,
                    })
                    .collect(),
                complete: true,
                failure: None,
            }
        }

        proptest! {
            #[test]
            fn passing_lemma_implies_envelope_domination(
                factors in proptest::collection::vec(0.0f64..1.0, 1..12),
                w0 in 0.01f64..10.0,
                superlinear in any::<bool>(),
                k in 1.01f64..8.0,
            ) {
                let mut w = vec![w0];
                for f in &factors {
                    w.push(w.last().unwrap() * f);
                }
                let law = if superlinear { DampingLaw::superlinear(3.0).unwrap() } else { DampingLaw::linear() };
                let prob = EnvelopeProblem::new(law, TimeWeight::constant(), 1.0, k, 100.0, 0.0).unwrap();
                let r = check_discrete_lemma(&sampled(&w), &prob, EnergySource::Local).unwrap();
                if r.ok {
                    prop_assert_eq!(r.chain_ok, Some(true));
                } else {
                    prop_assert!(!r.violations.is_empty() || !r.structural_ok);
                }
            }
        }
    }
}
