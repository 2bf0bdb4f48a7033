//! Flat `key = value` configuration files.
//!
//! One entry per line, `#` starts a comment, blank lines are ignored and
//! keys are case-sensitive. Values are kept as strings and typed on access.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use super::{EnergySource, ExperimentConfig, KChoice};
use crate::damping::{DampingFamily, DampingLaw};
use crate::envelope::{default_window, EnvelopeProblem};
use crate::error::{Error, Result};
use crate::sim::{DampingProfile, EnergyForm, InitialData, SimConfig};
use crate::weight::{TimeWeight, WeightFamily};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FlatConfig {
    entries: BTreeMap<String, String>,
}

impl FromStr for FlatConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (number, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "line {}: expected `key = value`, got `{line}`",
                    number + 1
                ))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || value.is_empty() {
                return Err(Error::Config(format!(
                    "line {}: empty key or value",
                    number + 1
                )));
            }
            if entries.insert(key.to_string(), value.to_string()).is_some() {
                return Err(Error::Config(format!(
                    "line {}: duplicate key `{key}`",
                    number + 1
                )));
            }
        }
        Ok(Self { entries })
    }
}

impl FlatConfig {
    pub fn read(path: &Path) -> Result<Self> {
        std::fs::read_to_string(path)?.parse()
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Reject keys outside `allowed`, which catches typos.
    pub fn ensure_known(&self, allowed: &[&str]) -> Result<()> {
        match self.keys().find(|k| !allowed.contains(k)) {
            Some(k) => Err(Error::Config(format!(
                "unknown key `{k}` (known: {})",
                allowed.join(", ")
            ))),
            None => Ok(()),
        }
    }

    fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::Config(format!("missing key `{key}`")))
    }

    pub fn number(&self, key: &str) -> Result<Option<f64>> {
        self.get(key)
            .map(|v| {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| Error::Config(format!("`{key}`: `{v}` is not a finite number")))
            })
            .transpose()
    }

    pub fn number_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.number(key)?.unwrap_or(default))
    }

    pub fn require_number(&self, key: &str) -> Result<f64> {
        self.require(key)?;
        Ok(self.number(key)?.expect("present"))
    }

    fn count_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| {
                Error::Config(format!("`{key}`: `{v}` is not a non-negative integer"))
            }),
        }
    }

    fn flag_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.get(key) {
            None => Ok(default),
            Some("true") => Ok(true),
            Some("false") => Ok(false),
            Some(v) => Err(Error::Config(format!(
                "`{key}`: expected true or false, got `{v}`"
            ))),
        }
    }

    pub fn law(&self) -> Result<DampingLaw> {
        DampingLaw::new(self.require("law")?.parse::<DampingFamily>()?)
    }

    /// `rho`, defaulting to the constant weight.
    pub fn weight(&self) -> Result<TimeWeight> {
        TimeWeight::new(self.get("rho").unwrap_or("const").parse::<WeightFamily>()?)
    }
}

/// Keys read by [`envelope_setup`].
pub const ENVELOPE_KEYS: &[&str] = &["law", "rho", "T", "K", "Ma", "S0", "t_end", "rel_tol"];

/// Keys read by [`sim_config`].
pub const SIM_KEYS: &[&str] = &[
    "law",
    "rho",
    "R",
    "profile",
    "ra",
    "amp",
    "dr",
    "dt",
    "t_end",
    "data",
    "sample_every",
    "r_max",
    "energy",
];

/// Keys read by [`experiment_config`] on top of [`SIM_KEYS`].
pub const EXPERIMENT_KEYS: &[&str] = &[
    "T",
    "K",
    "K_lo",
    "K_hi",
    "K_factor",
    "Ma",
    "fit_lo",
    "fit_hi",
    "W",
    "env_t_end",
    "rel_tol",
    "identity_tol",
    "rate_tol",
    "check_rate",
];

pub const DEFAULT_REL_TOL: f64 = 1e-8;

/// Envelope problem plus horizon and tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvelopeSetup {
    pub problem: EnvelopeProblem,
    pub t_end: f64,
    pub rel_tol: f64,
}

pub fn envelope_setup(cfg: &FlatConfig) -> Result<EnvelopeSetup> {
    cfg.ensure_known(ENVELOPE_KEYS)?;
    let problem = EnvelopeProblem::new(
        cfg.law()?,
        cfg.weight()?,
        cfg.require_number("T")?,
        cfg.require_number("K")?,
        cfg.require_number("Ma")?,
        cfg.require_number("S0")?,
    )?;
    Ok(EnvelopeSetup {
        problem,
        t_end: cfg.require_number("t_end")?,
        rel_tol: cfg.number_or("rel_tol", DEFAULT_REL_TOL)?,
    })
}

/// Parse `gauss:c=3,w=0.3` or `outgoing:c=3,w=0.3`.
pub fn parse_data(text: &str) -> Result<InitialData> {
    let bad = || {
        Error::Config(format!(
            "cannot parse data `{text}` (expected `gauss:c=<r>,w=<r>` or `outgoing:c=<r>,w=<r>`)"
        ))
    };
    let (kind, params) = text.trim().split_once(':').ok_or_else(bad)?;
    let mut c = None;
    let mut w = None;
    for part in params.split(',') {
        let (k, v) = part.split_once('=').ok_or_else(bad)?;
        let v: f64 = v.trim().parse().map_err(|_| bad())?;
        match k.trim() {
            "c" => c = Some(v),
            "w" => w = Some(v),
            _ => return Err(bad()),
        }
    }
    let (c, w) = (c.ok_or_else(bad)?, w.ok_or_else(bad)?);
    match kind.trim() {
        "gauss" => Ok(InitialData::GaussianBump { c, w }),
        "outgoing" => Ok(InitialData::OutgoingPulse { c, w }),
        _ => Err(bad()),
    }
}

fn sim_from(cfg: &FlatConfig) -> Result<SimConfig> {
    let radius = cfg.number_or("R", 5.0)?;
    let r_a = cfg.number_or("ra", 3.0)?;
    let amp = cfg.number_or("amp", 2.0)?;
    let profile = match cfg.get("profile").unwrap_or("bump") {
        "bump" => DampingProfile::smooth_bump(r_a, amp)?,
        "annulus" => DampingProfile::annulus(r_a, amp)?,
        other => {
            return Err(Error::Config(format!(
                "unknown profile `{other}` (expected bump or annulus)"
            )))
        }
    };
    let dr = cfg.number_or("dr", 0.02)?;
    let energy_form = match cfg.get("energy").unwrap_or("staggered") {
        "staggered" => EnergyForm::Staggered,
        "collocated" => EnergyForm::Collocated,
        other => return Err(Error::Config(format!("unknown energy form `{other}`"))),
    };
    Ok(SimConfig {
        law: cfg.law()?,
        weight: cfg.weight()?,
        radius,
        profile,
        dr,
        dt: cfg.number_or("dt", 0.5 * dr)?,
        t_end: cfg.require_number("t_end")?,
        data: parse_data(cfg.get("data").unwrap_or("gauss:c=3,w=0.3"))?,
        sample_every: cfg.count_or("sample_every", 1)?,
        r_max: cfg.number("r_max")?,
        energy_form,
    })
}

/// Simulation configuration; only [`SIM_KEYS`] are accepted.
pub fn sim_config(cfg: &FlatConfig) -> Result<SimConfig> {
    cfg.ensure_known(SIM_KEYS)?;
    sim_from(cfg)
}

/// Full experiment. `T` defaults to `11 R`, `K` to `fit` (twice the fitted
/// minimum), `Ma` to the mass of the damping profile.
pub fn experiment_config(cfg: &FlatConfig) -> Result<ExperimentConfig> {
    let allowed: Vec<&str> = SIM_KEYS.iter().chain(EXPERIMENT_KEYS).copied().collect();
    cfg.ensure_known(&allowed)?;
    let sim = sim_from(cfg)?;
    let k = match cfg.get("K").unwrap_or("fit") {
        "fit" => KChoice::Fit {
            lo: cfg.number_or("K_lo", 1.001)?,
            hi: cfg.number_or("K_hi", 1e6)?,
            factor: cfg.number_or("K_factor", 2.0)?,
        },
        _ => KChoice::Fixed(cfg.require_number("K")?),
    };
    let fit_window = match (cfg.number("fit_lo")?, cfg.number("fit_hi")?) {
        (Some(lo), Some(hi)) => Some((lo, hi)),
        (None, None) => None,
        _ => {
            return Err(Error::Config(
                "fit_lo and fit_hi must be given together".into(),
            ))
        }
    };
    let source = match cfg.get("W").unwrap_or("local") {
        "local" => EnergySource::Local,
        "total" => EnergySource::Total,
        other => {
            return Err(Error::Config(format!(
                "W must be local or total, got `{other}`"
            )))
        }
    };
    let config = ExperimentConfig {
        window: cfg.number_or("T", default_window(sim.radius))?,
        ma: cfg.number_or("Ma", sim.profile.mass())?,
        sim,
        k,
        fit_window,
        envelope_t_end: cfg.number_or("env_t_end", 1e9)?,
        rel_tol: cfg.number_or("rel_tol", DEFAULT_REL_TOL)?,
        source,
        identity_tol: cfg.number_or("identity_tol", 1e-6)?,
        rate_tol: cfg.number_or("rate_tol", 0.25)?,
        check_rate: cfg.flag_or("check_rate", false)?,
    };
    config.validate()?;
    Ok(config)
}
