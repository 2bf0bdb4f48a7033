//! Simulation against theory: decay exponent fits, the minimal admissible
//! `K`, domination of the local energy by the shifted envelope, the discrete
//! decay inequality, and CSV reports.

mod bound;
pub mod config;
mod fit;

pub use bound::{
    bound_check, check_discrete_lemma, fit_minimal_k, BoundCheck, EnergySource, LemmaReport,
    LemmaViolation, BOUND_SLACK,
};
pub use config::FlatConfig;
pub use fit::{fit_tail_exponent, FitScale, TailFit};

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::envelope::{
    divergence_check, integrate_envelope, predicted_rate, DivergenceReport, EnvelopeProblem,
    EnvelopeTrajectory, RateForm, RatePrediction,
};
use crate::error::{Error, Result};
use crate::numerics::fit_line;
use crate::sim::{self, energy_identity_residual, SimConfig, TimeSeries};

/// How the constant `K` of the envelope is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KChoice {
    /// `factor` times the smallest `K` in `[lo, hi]` for which the bound holds.
    Fit {
        lo: f64,
        hi: f64,
        factor: f64,
    },
    Fixed(f64),
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub sim: SimConfig,
    /// Observability window `T`.
    pub window: f64,
    /// `M_a = ∫ a dx`.
    pub ma: f64,
    pub k: KChoice,
    /// Window of the simulated tail fit; `None` takes the last decade.
    pub fit_window: Option<(f64, f64)>,
    /// Horizon of the envelope written to `envelope.csv`.
    pub envelope_t_end: f64,
    pub rel_tol: f64,
    /// Energy used as `W` in the discrete inequality.
    pub source: EnergySource,
    /// Largest accepted energy identity residual.
    pub identity_tol: f64,
    /// Relative tolerance of the simulated exponent against the prediction.
    pub rate_tol: f64,
    /// Whether the exponent comparison counts as a check.
    pub check_rate: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        let sim = &self.sim;
        if !(self.window > 0.0 && self.window.is_finite()) {
            return bad(format!("T must be positive, got {}", self.window));
        }
        if !(sim.dt > 0.0) || sim.sample_every == 0 {
            return bad("dt must be positive and sample_every at least 1".into());
        }
        let per_window = self.window / sim.dt;
        let levels = per_window.round();
        if (per_window - levels).abs() > 1e-6 * levels.max(1.0)
            || !(levels as usize).is_multiple_of(sim.sample_every)
        {
            return bad(format!(
                "T / dt = {per_window} must be a whole multiple of sample_every = {} so that every multiple of T is sampled",
                sim.sample_every
            ));
        }
        if let Some((lo, hi)) = self.fit_window {
            if !(lo >= 0.0 && hi > lo && hi <= sim.t_end) {
                return bad(format!(
                    "fit window [{lo}, {hi}] must lie inside [0, t_end = {}]",
                    sim.t_end
                ));
            }
        }
        match self.k {
            KChoice::Fit { lo, hi, factor } if !(lo > 1.0 && hi > lo && factor >= 1.0) => {
                return bad(format!(
                    "K fit needs 1 < K_lo < K_hi and K_factor >= 1, got [{lo}, {hi}], {factor}"
                ));
            }
            KChoice::Fixed(k) if !(k > 1.0) => return bad(format!("K must exceed 1, got {k}")),
            _ => {}
        }
        if !(self.envelope_t_end > 0.0) {
            return bad(format!(
                "env_t_end must be positive, got {}",
                self.envelope_t_end
            ));
        }
        if !(self.rate_tol > 0.0) || !(self.identity_tol > 0.0) {
            return bad("tolerances must be positive".into());
        }
        Ok(())
    }

    fn default_fit_window(&self) -> (f64, f64) {
        let t_end = self.sim.t_end;
        ((1.0 + t_end) / 10.0 - 1.0, t_end)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    /// Exponent of the simulated `E_R` tail.
    pub fitted_mu: Option<f64>,
    pub tail_fit: Option<TailFit>,
    /// Decay rate of `ln E_R` against `∫ rho`, reported for exponential forms.
    pub fitted_exp_rate: Option<f64>,
    /// Exponent of the envelope tail on the last two decades of its horizon.
    pub envelope_mu: Option<f64>,
    pub predicted: Option<RatePrediction>,
    /// Fitted minimal `K`; `None` when `K` was supplied.
    pub k_min: Option<f64>,
    /// `K` used for the bound, the lemma and the envelope.
    pub k: f64,
    pub bound_holds: bool,
    pub worst_ratio: f64,
    pub worst_t: f64,
    pub lemma3_ok: bool,
    pub lemma: LemmaReport,
    pub identity_residual: f64,
    pub divergence: Option<DivergenceReport>,
    pub flags: Vec<String>,
    /// Named pass/fail outcomes of every enabled check.
    pub checks: Vec<(String, bool)>,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.1)
    }

    pub fn has_flag(&self, flag: &str) -> bool {
        self.flags.iter().any(|f| f == flag)
    }

    /// `(key, value)` rows of `report.csv`.
    pub fn rows(&self) -> Vec<(String, String)> {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut rows = vec![
            ("status".to_string(), "complete".to_string()),
            ("passed".into(), self.passed().to_string()),
            ("fitted_mu".into(), opt(self.fitted_mu)),
            ("fitted_exp_rate".into(), opt(self.fitted_exp_rate)),
            ("envelope_mu".into(), opt(self.envelope_mu)),
            (
                "predicted_form".into(),
                self.predicted
                    .as_ref()
                    .map(|p| p.form.to_string())
                    .unwrap_or_default(),
            ),
            (
                "predicted_exponent".into(),
                opt(self.predicted.as_ref().and_then(|p| p.exponent())),
            ),
            ("K_min".into(), opt(self.k_min)),
            ("K".into(), self.k.to_string()),
            ("bound_holds".into(), self.bound_holds.to_string()),
            ("worst_ratio".into(), self.worst_ratio.to_string()),
            ("worst_t".into(), self.worst_t.to_string()),
            ("lemma3_ok".into(), self.lemma3_ok.to_string()),
            (
                "lemma3_violations".into(),
                self.lemma.violations.len().to_string(),
            ),
            (
                "lemma3_structural_ok".into(),
                self.lemma.structural_ok.to_string(),
            ),
            (
                "lemma3_chain_ok".into(),
                self.lemma
                    .chain_ok
                    .map(|b| b.to_string())
                    .unwrap_or_default(),
            ),
            (
                "identity_residual".into(),
                self.identity_residual.to_string(),
            ),
            (
                "divergence_integral".into(),
                opt(self.divergence.map(|d| d.integral)),
            ),
            (
                "divergence_diverges".into(),
                self.divergence
                    .map(|d| d.diverges.to_string())
                    .unwrap_or_default(),
            ),
            ("flags".into(), self.flags.join(";")),
        ];
        rows.extend(
            self.checks
                .iter()
                .map(|(name, ok)| (format!("check_{name}"), ok.to_string())),
        );
        rows
    }
}

/// Time of the divergence test's upper end.
const DIVERGENCE_HORIZON: f64 = 1e8;

pub fn write_series_csv(path: &Path, series: &TimeSeries) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "E_total", "E_R", "D_cum"])?;
    for r in &series.rows {
        w.write_record([
            r.t.to_string(),
            r.e_total.to_string(),
            r.e_r.to_string(),
            r.d_cum.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_envelope_csv(path: &Path, traj: &EnvelopeTrajectory) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "S"])?;
    for (t, s) in &traj.samples {
        w.write_record([t.to_string(), s.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn write_report_csv(path: &Path, rows: &[(String, String)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["key", "value"])?;
    for (k, v) in rows {
        w.write_record([k, v])?;
    }
    w.flush()?;
    Ok(())
}

/// Simulate, fit `K`, compare with the envelope and check the discrete
/// inequality. With `out` set, writes `series.csv`, `envelope.csv` and
/// `report.csv` there.
///
/// When the simulation or a later stage fails, whatever was produced is
/// written with `status = aborted` in `report.csv` and the error returned.
pub fn run_experiment(config: &ExperimentConfig, out: Option<&Path>) -> Result<ExperimentReport> {
    config.validate()?;
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
    }
    let series = sim::run(&config.sim)?;
    if let Some(dir) = out {
        write_series_csv(&dir.join("series.csv"), &series)?;
    }
    let abort = |reason: String| -> Result<ExperimentReport> {
        if let Some(dir) = out {
            let rows = vec![
                ("status".to_string(), "aborted".to_string()),
                ("passed".into(), "false".into()),
                ("failure".into(), reason.clone()),
            ];
            write_report_csv(&dir.join("report.csv"), &rows)?;
        }
        Err(Error::Aborted(reason))
    };
    if !series.complete {
        return abort(
            series
                .failure
                .clone()
                .unwrap_or_else(|| "simulation incomplete".into()),
        );
    }
    match analyse(config, &series) {
        Ok((report, envelope)) => {
            if let Some(dir) = out {
                write_envelope_csv(&dir.join("envelope.csv"), &envelope)?;
                write_report_csv(&dir.join("report.csv"), &report.rows())?;
            }
            Ok(report)
        }
        Err(e) => abort(e.to_string()),
    }
}

fn analyse(
    config: &ExperimentConfig,
    series: &TimeSeries,
) -> Result<(ExperimentReport, EnvelopeTrajectory)> {
    let sim = &config.sim;
    let e0 = series.initial_energy();
    let mut flags = Vec::new();
    let mut checks = Vec::new();

    let identity_residual = energy_identity_residual(series);
    checks.push((
        "identity".to_string(),
        identity_residual <= config.identity_tol,
    ));

    let k_start = match config.k {
        KChoice::Fit { lo, .. } => lo,
        KChoice::Fixed(k) => k,
    };
    let template = EnvelopeProblem::new(
        sim.law.clone(),
        sim.weight,
        config.window,
        k_start,
        config.ma,
        0.0,
    )?;
    let (k_min, k) = match config.k {
        KChoice::Fit { lo, hi, factor } => {
            let fit = fit_minimal_k(series, &template, (lo, hi))?;
            checks.push(("k_found".to_string(), fit.holds));
            if fit.holds {
                (Some(fit.k), factor * fit.k)
            } else {
                (None, hi)
            }
        }
        KChoice::Fixed(k) => (None, k),
    };
    let bound = bound_check(series, &template, k)?;
    checks.push(("bound".to_string(), bound.holds));

    let prob = template.with_k(k)?.with_s0(e0)?;
    let lemma = check_discrete_lemma(series, &prob, config.source)?;
    checks.push(("lemma".to_string(), lemma.ok));
    if lemma.chain_ok == Some(false) {
        flags.push("lemma-chain-violated".to_string());
    }

    let predicted = match predicted_rate(&sim.law, &sim.weight, config.window, k) {
        Ok(p) => Some(p),
        Err(Error::Unsupported { .. }) => {
            flags.push("rate-unsupported".to_string());
            None
        }
        Err(e) => return Err(e),
    };
    let scale = predicted
        .as_ref()
        .map_or(FitScale::Power, |p| FitScale::for_form(p.form));

    let (t_lo, t_hi) = config
        .fit_window
        .unwrap_or_else(|| config.default_fit_window());
    let local: Vec<(f64, f64)> = series.rows.iter().map(|r| (r.t, r.e_r)).collect();
    let early_enough = series
        .nearest(t_lo)
        .is_some_and(|r| r.e_r <= series.rows[0].e_r / 10.0);
    let tail_fit = if !early_enough {
        flags.push("fit-window-too-early".to_string());
        None
    } else {
        match fit_tail_exponent(&local, (t_lo, t_hi), scale) {
            Ok(f) => Some(f),
            Err(Error::Fit(_)) => {
                flags.push("fit-unavailable".to_string());
                None
            }
            Err(e) => return Err(e),
        }
    };
    if tail_fit.is_some_and(|f| !f.power_law) {
        flags.push("non-power-law-tail".to_string());
    }
    let fitted_mu = tail_fit.map(|f| f.exponent);

    let exponential = predicted
        .as_ref()
        .is_some_and(|p| p.form == RateForm::ExpOfIntegral);
    let fitted_exp_rate = if exponential {
        exp_rate(series, config, (t_lo, t_hi))
    } else {
        None
    };

    if config.check_rate {
        let pass = match (fitted_mu, predicted.as_ref().and_then(|p| p.exponent())) {
            (Some(mu), Some(p)) => (mu - p).abs() <= config.rate_tol * p.abs(),
            _ => false,
        };
        checks.push(("rate".to_string(), pass));
    }

    let envelope = integrate_envelope(&prob, config.envelope_t_end, config.rel_tol)?;
    let envelope_mu = predicted
        .as_ref()
        .filter(|p| p.exponent().is_some())
        .and_then(|_| {
            let hi = config.envelope_t_end;
            fit_tail_exponent(&envelope.samples, (hi / 100.0, hi), scale).ok()
        })
        .map(|f| f.exponent);

    let divergence = (sim.weight.exponent() != 0.0 && e0 > 0.0)
        .then(|| divergence_check(&prob, e0, config.window, DIVERGENCE_HORIZON));
    if !sim.weight.in_decay_regime() || divergence.is_some_and(|d| !d.diverges) {
        flags.push("outside-decay-regime".to_string());
    }

    let report = ExperimentReport {
        fitted_mu,
        tail_fit,
        fitted_exp_rate,
        envelope_mu,
        predicted,
        k_min,
        k,
        bound_holds: bound.holds,
        worst_ratio: bound.worst_ratio,
        worst_t: bound.worst_t,
        lemma3_ok: lemma.ok,
        lemma,
        identity_residual,
        divergence,
        flags,
        checks,
    };
    Ok((report, envelope))
}

/// `-slope` of `ln E_R` against `∫_0^t rho` over the window.
fn exp_rate(
    series: &TimeSeries,
    config: &ExperimentConfig,
    (t_lo, t_hi): (f64, f64),
) -> Option<f64> {
    let weight = config.sim.weight;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut acc = 0.0;
    let mut prev: Option<f64> = None;
    for r in &series.rows {
        if let Some(p) = prev {
            acc += 0.5 * (r.t - p) * (weight.rho(p) + weight.rho(r.t));
        }
        prev = Some(r.t);
        if r.t >= t_lo && r.t <= t_hi && r.e_r > 0.0 {
            xs.push(acc);
            ys.push(r.e_r.ln());
        }
    }
    fit_line(&xs, &ys).map(|f| -f.slope)
}

/// Run experiments concurrently, each sequentially inside. Results keep the
/// order of `configs`; with `out_root` set, experiment `i` writes into
/// `out_root/run-<i>`.
pub fn run_sweep(
    configs: &[ExperimentConfig],
    out_root: Option<&Path>,
) -> Vec<Result<ExperimentReport>> {
    configs
        .par_iter()
        .enumerate()
        .map(|(i, cfg)| {
            let dir: Option<PathBuf> = out_root.map(|root| root.join(format!("run-{i:03}")));
            run_experiment(cfg, dir.as_deref())
        })
        .collect()
}
