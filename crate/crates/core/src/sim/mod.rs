//! Radially symmetric damped waves outside the unit ball in three dimensions.
//!
//! With `v = r u` the equation becomes the half-line problem
//!
//! ```text
//! v_tt - v_rr + r a(r) rho(t) g(v_t / r) = 0,   r > 1,   v(t, 1) = 0,
//! ```
//!
//! solved by leapfrog with the damping evaluated at the centred velocity
//! `w = (v^{n+1} - v^{n-1}) / (2 dt)`, one scalar monotone solve per node.

mod energy;
mod oracle;
mod solve;

pub use energy::{
    dissipation_increment, energy_identity_residual, level_energy, local_energy, total_energy,
    EnergyForm, SeriesRow, TimeSeries,
};
pub use oracle::dalembert_oracle;
pub use solve::solve_velocity_update;

use std::f64::consts::PI;

use crate::damping::DampingLaw;
use crate::error::{Error, Result};
use crate::numerics::integrate;
use crate::weight::TimeWeight;

/// Uniform grid `r_i = 1 + i dr`, `i = 0..=n`, on `[1, r_max]`.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialDomain {
    /// Radius of the ball on which local energy is measured.
    pub radius: f64,
    pub r_max: f64,
    pub dr: f64,
    pub n: usize,
}

impl RadialDomain {
    pub const R_IN: f64 = 1.0;

    /// Smallest grid reaching `radius + t_end + 2 dr`, so that nothing
    /// reflected at the outer end can re-enter the ball before `t_end`.
    pub fn new(radius: f64, dr: f64, t_end: f64) -> Result<Self> {
        Self::with_outer(radius, dr, radius + t_end + 2.0 * dr)
    }

    /// Grid reaching at least `r_max`.
    pub fn with_outer(radius: f64, dr: f64, r_max: f64) -> Result<Self> {
        if !(radius > Self::R_IN && radius.is_finite()) {
            return Err(Error::Config(format!("R must exceed 1, got {radius}")));
        }
        if !(dr > 0.0 && dr < radius - Self::R_IN) {
            return Err(Error::Config(format!(
                "dr must lie in (0, R - 1), got {dr}"
            )));
        }
        if !(r_max >= radius) {
            return Err(Error::Config(format!(
                "r_max {r_max} is inside R = {radius}"
            )));
        }
        let n = ((r_max - Self::R_IN) / dr - 1e-9).ceil() as usize;
        Ok(Self {
            radius,
            r_max: Self::R_IN + n as f64 * dr,
            dr,
            n,
        })
    }

    pub fn r(&self, i: usize) -> f64 {
        Self::R_IN + i as f64 * self.dr
    }

    /// Index of the grid node nearest to `radius`.
    pub fn radius_index(&self) -> usize {
        (((self.radius - Self::R_IN) / self.dr).round() as usize).min(self.n)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProfileShape {
    /// `a = amplitude` on `1 < r < r_a`.
    Annulus { r_a: f64 },
    /// `a = amplitude exp(-1 / (1 - xi^2))`, `xi = (2r - 1 - r_a) / (r_a - 1)`.
    SmoothBump { r_a: f64 },
}

/// Spatial damping coefficient `a(r)`; amplitude 0 switches damping off.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DampingProfile {
    pub shape: ProfileShape,
    pub amplitude: f64,
}

impl DampingProfile {
    pub fn new(shape: ProfileShape, amplitude: f64) -> Result<Self> {
        let r_a = match shape {
            ProfileShape::Annulus { r_a } | ProfileShape::SmoothBump { r_a } => r_a,
        };
        if !(r_a > RadialDomain::R_IN && r_a.is_finite()) {
            return Err(Error::Config(format!("r_a must exceed 1, got {r_a}")));
        }
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(Error::Config(format!(
                "damping amplitude must be non-negative, got {amplitude}"
            )));
        }
        Ok(Self { shape, amplitude })
    }

    pub fn smooth_bump(r_a: f64, amplitude: f64) -> Result<Self> {
        Self::new(ProfileShape::SmoothBump { r_a }, amplitude)
    }

    pub fn annulus(r_a: f64, amplitude: f64) -> Result<Self> {
        Self::new(ProfileShape::Annulus { r_a }, amplitude)
    }

    /// `a = 0` everywhere.
    pub fn undamped() -> Self {
        Self {
            shape: ProfileShape::SmoothBump { r_a: 2.0 },
            amplitude: 0.0,
        }
    }

    pub fn outer_radius(&self) -> f64 {
        match self.shape {
            ProfileShape::Annulus { r_a } | ProfileShape::SmoothBump { r_a } => r_a,
        }
    }

    pub fn a(&self, r: f64) -> f64 {
        let r_a = self.outer_radius();
        if self.amplitude == 0.0 || r <= RadialDomain::R_IN || r >= r_a {
            return 0.0;
        }
        match self.shape {
            ProfileShape::Annulus { .. } => self.amplitude,
            ProfileShape::SmoothBump { .. } => {
                let xi = (2.0 * r - 1.0 - r_a) / (r_a - 1.0);
                self.amplitude * (-1.0 / (1.0 - xi * xi)).exp()
            }
        }
    }

    /// `M_a = 4 pi ∫_1^{r_a} a(r) r^2 dr`.
    pub fn mass(&self) -> f64 {
        let r_a = self.outer_radius();
        match self.shape {
            ProfileShape::Annulus { .. } => 4.0 * PI * self.amplitude * (r_a.powi(3) - 1.0) / 3.0,
            ProfileShape::SmoothBump { .. } => {
                4.0 * PI * integrate(|r| self.a(r) * r * r, 1.0, r_a, 1e-13)
            }
        }
    }
}

/// Initial data `(u(0), u_t(0)) = (phi0, phi1)`.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialData {
    /// `phi0 = exp(-((r - c) / w)^2)` cut off at `|r - c| > 6w`, `phi1 = 0`.
    GaussianBump { c: f64, w: f64 },
    /// The Gaussian `phi0` with `v_t = -v_r`, a purely outgoing wave.
    OutgoingPulse { c: f64, w: f64 },
    /// `phi0`, `phi1` sampled on the grid nodes.
    Custom { phi0: Vec<f64>, phi1: Vec<f64> },
}

pub(crate) const GAUSS_CUTOFF: f64 = 6.0;

fn gaussian(c: f64, w: f64, r: f64) -> (f64, f64) {
    let x = (r - c) / w;
    if x.abs() > GAUSS_CUTOFF {
        return (0.0, 0.0);
    }
    let g = (-x * x).exp();
    (g, -2.0 * x / w * g)
}

impl InitialData {
    /// `(v, v_r, v_t)` at `r` in reduced variables, for the analytic families.
    pub(crate) fn reduced(&self, r: f64) -> Option<(f64, f64, f64)> {
        match *self {
            InitialData::GaussianBump { c, w } => {
                let (g, gp) = gaussian(c, w, r);
                Some((r * g, g + r * gp, 0.0))
            }
            InitialData::OutgoingPulse { c, w } => {
                let (g, gp) = gaussian(c, w, r);
                let vr = g + r * gp;
                Some((r * g, vr, -vr))
            }
            InitialData::Custom { .. } => None,
        }
    }

    /// Reduced displacement `v0(r) = r phi0(r)` of the analytic families.
    pub fn displacement_at(&self, r: f64) -> Option<f64> {
        self.reduced(r).map(|d| d.0)
    }

    fn check(&self, domain: &RadialDomain) -> Result<()> {
        match self {
            InitialData::GaussianBump { c, w } | InitialData::OutgoingPulse { c, w } => {
                if !(*w > 0.0) {
                    return Err(Error::Config(format!(
                        "pulse width must be positive, got {w}"
                    )));
                }
                let (lo, hi) = (c - GAUSS_CUTOFF * w, c + GAUSS_CUTOFF * w);
                if lo <= RadialDomain::R_IN || hi >= domain.radius {
                    return Err(Error::Config(format!(
                        "data support [{lo}, {hi}] must lie inside (1, R = {})",
                        domain.radius
                    )));
                }
            }
            InitialData::Custom { phi0, phi1 } => {
                if phi0.len() != domain.n + 1 || phi1.len() != domain.n + 1 {
                    return Err(Error::Config(format!(
                        "custom data needs {} samples",
                        domain.n + 1
                    )));
                }
                if phi0[0] != 0.0 || phi1[0] != 0.0 {
                    return Err(Error::Config("custom data must vanish at r = 1".into()));
                }
                let last = domain.radius_index();
                let outside = phi0[last..].iter().chain(&phi1[last..]).any(|&v| v != 0.0);
                if outside {
                    return Err(Error::Config("custom data must vanish outside B_R".into()));
                }
            }
        }
        Ok(())
    }

    /// Reduced data `(v0, v1) = (r phi0, r phi1)` on the grid.
    pub fn sample(&self, domain: &RadialDomain) -> (Vec<f64>, Vec<f64>) {
        match self {
            InitialData::Custom { phi0, phi1 } => (0..=domain.n)
                .map(|i| (domain.r(i) * phi0[i], domain.r(i) * phi1[i]))
                .unzip(),
            _ => (0..=domain.n)
                .map(|i| {
                    let (v, _, vt) = self.reduced(domain.r(i)).expect("analytic data");
                    (v, vt)
                })
                .unzip(),
        }
    }
}

/// Two consecutive time levels plus everything needed to advance them.
#[derive(Clone, Debug)]
pub struct SimState {
    pub domain: RadialDomain,
    pub profile: DampingProfile,
    pub law: DampingLaw,
    pub weight: TimeWeight,
    pub dt: f64,
    /// Index of the current level `v_curr`; `t = step * dt`.
    pub step: usize,
    pub v_prev: Vec<f64>,
    pub v_curr: Vec<f64>,
    /// Centred velocity at level `velocity_step`: the data velocity before
    /// the first centred step, afterwards the level preceding `v_curr`.
    pub velocity: Vec<f64>,
    pub velocity_step: usize,
    a_nodes: Vec<f64>,
    seeded: bool,
    /// Staggered energies `[total, local]` at the half levels on either side
    /// of the velocity level.
    half_energy: Option<([f64; 2], [f64; 2])>,
}

impl SimState {
    pub fn t(&self) -> f64 {
        self.step as f64 * self.dt
    }

    pub fn a_nodes(&self) -> &[f64] {
        &self.a_nodes
    }

    /// The displacement at the level whose velocity is stored.
    pub fn displacement(&self) -> &[f64] {
        if self.velocity_step == self.step {
            &self.v_curr
        } else {
            &self.v_prev
        }
    }

    pub fn velocity_time(&self) -> f64 {
        self.velocity_step as f64 * self.dt
    }

    /// Staggered `[total, local]` energies averaged onto the velocity level.
    pub fn staggered_energy(&self) -> Option<[f64; 2]> {
        self.half_energy
            .map(|(a, b)| [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])])
    }
}

/// Sample the data and prepare the first time level.
///
/// The level after it is produced by the first [`step`], through a Taylor
/// expansion consistent with the equation to `O(dt^3)`.
pub fn initialize(
    domain: RadialDomain,
    profile: DampingProfile,
    law: DampingLaw,
    weight: TimeWeight,
    data: &InitialData,
    dt: f64,
) -> Result<SimState> {
    if !(dt > 0.0 && dt <= 0.9 * domain.dr) {
        return Err(Error::Config(format!(
            "dt = {dt} violates dt <= 0.9 dr = {}",
            0.9 * domain.dr
        )));
    }
    if profile.amplitude > 0.0 && profile.outer_radius() >= domain.radius {
        return Err(Error::Config(format!(
            "damping support r_a = {} must lie inside R = {}",
            profile.outer_radius(),
            domain.radius
        )));
    }
    data.check(&domain)?;
    let (v0, v1) = data.sample(&domain);
    let a_nodes = (0..=domain.n).map(|i| profile.a(domain.r(i))).collect();
    Ok(SimState {
        v_prev: vec![0.0; domain.n + 1],
        v_curr: v0,
        velocity: v1,
        velocity_step: 0,
        domain,
        profile,
        law,
        weight,
        dt,
        step: 0,
        a_nodes,
        seeded: false,
        half_energy: None,
    })
}

/// Advance one level. Afterwards `velocity` holds the centred velocity of
/// the level that was current on entry, and `v_curr` is the next level.
pub fn step(state: &mut SimState) -> Result<()> {
    let n = state.domain.n;
    let dt = state.dt;
    let dr2 = state.domain.dr * state.domain.dr;
    let rho = state.weight.rho(state.t());
    let mut next = vec![0.0; n + 1];
    next[n] = state.v_curr[n];
    let v = &state.v_curr;

    if !state.seeded {
        // v^1 = v^0 + dt v_t + dt^2 / 2 (v_rr - r a rho g(v_t / r)).
        for i in 1..n {
            let r = state.domain.r(i);
            let lap = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / dr2;
            let vt = state.velocity[i];
            let damp = r * state.a_nodes[i] * rho * state.law.g(vt / r);
            next[i] = v[i] + dt * vt + 0.5 * dt * dt * (lap - damp);
        }
        // The seed is the centred step from the ghost level v^1 - 2 dt v_t.
        let ghost: Vec<f64> = next
            .iter()
            .zip(&state.velocity)
            .map(|(a, b)| a - 2.0 * dt * b)
            .collect();
        let before = energy::staggered_pair(&state.domain, &ghost, v, dt);
        let after = energy::staggered_pair(&state.domain, v, &next, dt);
        state.half_energy = Some((before, after));
        state.seeded = true;
    } else {
        let t = state.t();
        for i in 1..n {
            let r = state.domain.r(i);
            let lap = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / dr2;
            let b = (v[i] - state.v_prev[i]) / dt + 0.5 * dt * lap;
            let c = 0.5 * dt * state.a_nodes[i] * rho;
            let w = solve_velocity_update(c, b, &state.law, r).map_err(|_| Error::Step {
                node: i,
                t,
                reason: "velocity solve did not converge",
            })?;
            state.velocity[i] = w;
            next[i] = state.v_prev[i] + 2.0 * dt * w;
        }
        state.velocity[0] = 0.0;
        state.velocity[n] = 0.0;
        state.velocity_step = state.step;
        let after = energy::staggered_pair(&state.domain, v, &next, dt);
        state.half_energy = state.half_energy.map(|(_, prev)| (prev, after));
    }
    state.v_prev = std::mem::replace(&mut state.v_curr, next);
    state.step += 1;
    Ok(())
}

/// Everything [`run`] needs.
#[derive(Clone, Debug)]
pub struct SimConfig {
    pub law: DampingLaw,
    pub weight: TimeWeight,
    pub radius: f64,
    pub profile: DampingProfile,
    pub dr: f64,
    pub dt: f64,
    pub t_end: f64,
    pub data: InitialData,
    pub sample_every: usize,
    /// Outer grid end; `None` uses `R + t_end + 2 dr`.
    pub r_max: Option<f64>,
    pub energy_form: EnergyForm,
}

impl SimConfig {
    pub fn domain(&self) -> Result<RadialDomain> {
        let min_outer = self.radius + self.t_end + 2.0 * self.dr;
        match self.r_max {
            None => RadialDomain::new(self.radius, self.dr, self.t_end),
            Some(r_max) if r_max >= min_outer => {
                RadialDomain::with_outer(self.radius, self.dr, r_max)
            }
            Some(r_max) => Err(Error::Config(format!(
                "r_max = {r_max} is below R + t_end + 2 dr = {min_outer}"
            ))),
        }
    }
}

/// Run to `t_end`, recording a row every `sample_every` levels and at the end.
///
/// A failing step ends the run early; the series is returned with
/// `complete = false` and the failure recorded.
pub fn run(config: &SimConfig) -> Result<TimeSeries> {
    if config.sample_every == 0 {
        return Err(Error::Config("sample_every must be at least 1".into()));
    }
    if !(config.t_end > 0.0) {
        return Err(Error::Config(format!(
            "t_end must be positive, got {}",
            config.t_end
        )));
    }
    let domain = config.domain()?;
    let mut state = initialize(
        domain,
        config.profile,
        config.law.clone(),
        config.weight,
        &config.data,
        config.dt,
    )?;
    let levels = (config.t_end / config.dt - 1e-9).ceil() as usize;
    let mut series = TimeSeries::default();

    let mut rate_prev = energy::dissipation_rate(&state);
    let mut d_cum = 0.0;
    step(&mut state)?;
    series.record(&state, config.energy_form, d_cum);

    for level in 1..=levels {
        // Computing level + 1 makes the centred velocity of `level` available.
        if let Err(e) = step(&mut state) {
            series.failure = Some(e.to_string());
            return Ok(series);
        }
        let rate = energy::dissipation_rate(&state);
        d_cum += 0.5 * config.dt * (rate_prev + rate);
        rate_prev = rate;
        if level % config.sample_every == 0 || level == levels {
            series.record(&state, config.energy_form, d_cum);
        }
    }
    series.complete = true;
    Ok(series)
}
