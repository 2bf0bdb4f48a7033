use std::f64::consts::PI;

use super::{RadialDomain, SimState};

/// How the energy of a time level is evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EnergyForm {
    /// Mean of the scheme's conserved energies on the two adjacent half
    /// levels. Satisfies the discrete energy identity to rounding.
    #[default]
    Staggered,
    /// Trapezoidal rule with centred differences at the level itself;
    /// differs from the staggered form by `O(dt^2 + dr^2)`.
    Collocated,
}

/// One sample of a simulation run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesRow {
    pub t: f64,
    pub e_total: f64,
    /// Energy inside `B_R`.
    pub e_r: f64,
    /// Dissipation accumulated on `[0, t]`.
    pub d_cum: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TimeSeries {
    pub rows: Vec<SeriesRow>,
    /// False when a step failed before `t_end`.
    pub complete: bool,
    pub failure: Option<String>,
}

impl TimeSeries {
    pub(crate) fn record(&mut self, state: &SimState, form: EnergyForm, d_cum: f64) {
        let [e_total, e_r] = level_energy(state, form);
        self.rows.push(SeriesRow {
            t: state.velocity_time(),
            e_total,
            e_r,
            d_cum,
        });
    }

    pub fn initial_energy(&self) -> f64 {
        self.rows.first().map_or(0.0, |r| r.e_total)
    }

    /// Row whose time is nearest to `t`.
    pub fn nearest(&self, t: f64) -> Option<&SeriesRow> {
        let i = self.rows.partition_point(|r| r.t < t);
        let after = self.rows.get(i);
        let before = i.checked_sub(1).and_then(|j| self.rows.get(j));
        match (before, after) {
            (Some(b), Some(a)) => Some(if t - b.t <= a.t - t { b } else { a }),
            (b, a) => b.or(a),
        }
    }
}

/// `2 pi ∫_1^{r_m} ((v_r - v/r)^2 + v_t^2) dr` by the trapezoidal rule on
/// nodes `0..=m`, with centred `v_r` inside and second-order one-sided
/// differences at the ends of the grid.
pub(crate) fn energy_of(domain: &RadialDomain, v: &[f64], vt: &[f64], m: usize) -> f64 {
    let n = domain.n;
    let dr = domain.dr;
    let density = |i: usize| {
        let vr = if i == 0 {
            (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dr)
        } else if i == n {
            (3.0 * v[n] - 4.0 * v[n - 1] + v[n - 2]) / (2.0 * dr)
        } else {
            (v[i + 1] - v[i - 1]) / (2.0 * dr)
        };
        let ur = vr - v[i] / domain.r(i);
        ur * ur + vt[i] * vt[i]
    };
    let inner: f64 = (1..m).map(density).sum();
    2.0 * PI * dr * (inner + 0.5 * (density(0) + density(m)))
}

/// Staggered energy `[total, local]` of the half level between `old` and
/// `new`: kinetic part from `(new - old) / dt` at the nodes, potential part
/// from products of forward differences on the cells. The local part uses
/// `∫_1^R (v_r - v/r)^2 = ∫_1^R v_r^2 - v(R)^2 / R`.
pub(crate) fn staggered_pair(domain: &RadialDomain, old: &[f64], new: &[f64], dt: f64) -> [f64; 2] {
    let n = domain.n;
    let m = domain.radius_index();
    let dr = domain.dr;
    let kin = |i: usize| {
        let d = (new[i] - old[i]) / dt;
        d * d * dr
    };
    let pot = |i: usize| (new[i + 1] - new[i]) * (old[i + 1] - old[i]) / dr;
    let mut total = 0.0;
    let mut local = 0.0;
    for i in 0..n {
        let k = if i == 0 { 0.0 } else { kin(i) };
        let e = k + pot(i);
        if i < m {
            local += e;
        } else if i == m {
            local += 0.5 * k;
        }
        total += e;
    }
    local -= new[m] * old[m] / domain.r(m);
    [2.0 * PI * total, 2.0 * PI * local]
}

/// `[total, local]` energy of the state's velocity level in the given form.
pub fn level_energy(state: &SimState, form: EnergyForm) -> [f64; 2] {
    match (form, state.staggered_energy()) {
        (EnergyForm::Staggered, Some(e)) => e,
        _ => {
            let v = state.displacement();
            [
                energy_of(&state.domain, v, &state.velocity, state.domain.n),
                energy_of(
                    &state.domain,
                    v,
                    &state.velocity,
                    state.domain.radius_index(),
                ),
            ]
        }
    }
}

/// Total energy of the velocity level. Staggered once the first step has
/// been taken, collocated with the data velocity before that.
pub fn total_energy(state: &SimState) -> f64 {
    level_energy(state, EnergyForm::Staggered)[0]
}

/// Energy inside the ball of the domain's radius, as [`total_energy`].
pub fn local_energy(state: &SimState) -> f64 {
    level_energy(state, EnergyForm::Staggered)[1]
}

/// `4 pi ∫ a rho(t) g(u_t) u_t r^2 dr` at the velocity level, trapezoidal in `r`.
pub(crate) fn dissipation_rate(state: &SimState) -> f64 {
    let rho = state.weight.rho(state.velocity_time());
    let a = state.a_nodes();
    let sum: f64 = (1..state.domain.n)
        .filter(|&i| a[i] > 0.0)
        .map(|i| {
            let r = state.domain.r(i);
            let w = state.velocity[i];
            // a g(u_t) u_t r^2 with u_t = w / r.
            a[i] * r * state.law.g(w / r) * w
        })
        .sum();
    4.0 * PI * rho * state.domain.dr * sum
}

/// `dt` times the dissipation rate at the stored velocity.
pub fn dissipation_increment(state: &SimState) -> f64 {
    state.dt * dissipation_rate(state)
}

/// `max_t |E(t) + D(t) - E(0)| / E(0)` over the recorded rows.
pub fn energy_identity_residual(series: &TimeSeries) -> f64 {
    let e0 = series.initial_energy();
    if e0 == 0.0 {
        return 0.0;
    }
    series
        .rows
        .iter()
        .map(|r| (r.e_total + r.d_cum - e0).abs() / e0)
        .fold(0.0, f64::max)
}
