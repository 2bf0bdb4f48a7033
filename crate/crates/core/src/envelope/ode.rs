use super::EnvelopeProblem;
use crate::error::{Error, Result};

/// Accepted samples of the envelope ODE solution.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvelopeTrajectory {
    /// `(t, S)` pairs, `t` strictly increasing, starting at `(0, S0)`.
    pub samples: Vec<(f64, f64)>,
    /// Relative tolerance used for local error control.
    pub tolerance: f64,
}

impl EnvelopeTrajectory {
    pub fn last(&self) -> (f64, f64) {
        *self
            .samples
            .last()
            .expect("trajectory has at least one sample")
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.0)
    }

    /// Linear interpolation in `ln S` between the bracketing samples.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        let i = self.samples.partition_point(|s| s.0 < t);
        if i == self.samples.len() {
            return None;
        }
        let (t1, s1) = self.samples[i];
        if t1 == t || i == 0 {
            return (t1 == t).then_some(s1);
        }
        let (t0, s0) = self.samples[i - 1];
        if s0 <= 0.0 || s1 <= 0.0 {
            return Some(s0 + (s1 - s0) * (t - t0) / (t1 - t0));
        }
        let w = (t - t0) / (t1 - t0);
        Some((s0.ln() * (1.0 - w) + s1.ln() * w).exp())
    }
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

const MAX_STEPS: usize = 5_000_000;

/// Below this the solution is no longer resolvable in `f64`; it is
/// continued by zero.
pub const UNDERFLOW: f64 = 1e-280;

/// Adaptive Dormand-Prince solve of `y' = -q(t, y)` for a non-negative rate
/// `q`, keeping `y` positive and non-increasing.
///
/// Every time in `stops` that lies in `(t0, t_end]` is hit exactly and
/// recorded. A step whose result is non-positive, larger than the current
/// value, or whose rate evaluation fails is rejected and halved. Once `y`
/// drops below [`UNDERFLOW`] the remaining stops and `t_end` are recorded
/// with value 0.
pub fn solve_decreasing<Q>(
    q: Q,
    t0: f64,
    y0: f64,
    t_end: f64,
    rel_tol: f64,
    stops: &[f64],
) -> Result<Vec<(f64, f64)>>
where
    Q: Fn(f64, f64) -> Result<f64>,
{
    let mut out = vec![(t0, y0)];
    if y0 == 0.0 {
        out.extend(
            stops
                .iter()
                .copied()
                .filter(|&s| s > t0 && s < t_end)
                .map(|s| (s, 0.0)),
        );
        out.push((t_end, 0.0));
        return Ok(out);
    }
    let mut stops: Vec<f64> = stops
        .iter()
        .copied()
        .filter(|&s| s > t0 && s < t_end)
        .collect();
    stops.sort_by(f64::total_cmp);
    stops.dedup();
    stops.push(t_end);
    let mut next_stop = 0;

    let (mut t, mut y) = (t0, y0);
    let mut k = [0.0f64; 7];
    k[0] = -q(t, y)?;
    let mut h = if k[0] < 0.0 {
        (0.01 * y / -k[0]).min(t_end - t0)
    } else {
        (t_end - t0) / 100.0
    };

    for _ in 0..MAX_STEPS {
        if y < UNDERFLOW {
            out.extend(stops[next_stop..].iter().map(|&s| (s, 0.0)));
            return Ok(out);
        }
        let target = stops[next_stop];
        let mut step = h.min(target - t);
        let hits_stop = step >= target - t;
        if hits_stop {
            step = target - t;
        }
        if step < 1e-15 * t.abs().max(1.0) && !hits_stop {
            return Err(Error::IntegrationStall { t, value: y });
        }

        match dp_step(&q, t, y, step, &mut k) {
            Some((y5, y4)) if y5 > 0.0 && y5 <= y => {
                let err = (y5 - y4).abs() / (rel_tol * y.max(y5));
                if err <= 1.0 {
                    t = if hits_stop { target } else { t + step };
                    y = y5;
                    out.push((t, y));
                    k[0] = k[6];
                    let grow = if err == 0.0 {
                        5.0
                    } else {
                        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                    };
                    // Keep the unclipped step when a stop truncated it.
                    h = if hits_stop {
                        h.max(step * grow)
                    } else {
                        step * grow
                    };
                    if hits_stop {
                        next_stop += 1;
                        if next_stop == stops.len() {
                            return Ok(out);
                        }
                    }
                } else {
                    h = step * (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
                }
            }
            _ => h = 0.5 * step,
        }
        if h < 1e-15 * t.abs().max(1.0) {
            return Err(Error::IntegrationStall { t, value: y });
        }
    }
    Err(Error::IntegrationStall { t, value: y })
}

/// One trial step. `k[0]` holds the slope at `(t, y)`; on success `k[6]`
/// holds the slope at the new point.
fn dp_step<Q>(q: &Q, t: f64, y: f64, h: f64, k: &mut [f64; 7]) -> Option<(f64, f64)>
where
    Q: Fn(f64, f64) -> Result<f64>,
{
    for i in 1..7 {
        let yi = y + h * (0..i).map(|j| A[i][j] * k[j]).sum::<f64>();
        if !(yi >= 0.0) {
            return None;
        }
        k[i] = -q(t + C[i] * h, yi).ok()?;
    }
    let y5 = y + h * (0..7).map(|i| B5[i] * k[i]).sum::<f64>();
    let y4 = y + h * (0..7).map(|i| B4[i] * k[i]).sum::<f64>();
    Some((y5, y4))
}

fn check_args(t_end: f64, rel_tol: f64) -> Result<()> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::Config(format!(
            "t_end must be positive, got {t_end}"
        )));
    }
    if !(rel_tol > 1e-12 && rel_tol < 1e-2) {
        return Err(Error::Config(format!(
            "rel_tol must lie in (1e-12, 1e-2), got {rel_tol}"
        )));
    }
    Ok(())
}

/// Integrate `S' = -q(t, S)`, `S(0) = S0` on `[0, t_end]`.
pub fn integrate_envelope(
    prob: &EnvelopeProblem,
    t_end: f64,
    rel_tol: f64,
) -> Result<EnvelopeTrajectory> {
    integrate_envelope_at(prob, t_end, rel_tol, &[])
}

/// As [`integrate_envelope`], additionally landing exactly on each of `stops`.
pub fn integrate_envelope_at(
    prob: &EnvelopeProblem,
    t_end: f64,
    rel_tol: f64,
    stops: &[f64],
) -> Result<EnvelopeTrajectory> {
    check_args(t_end, rel_tol)?;
    let samples = solve_decreasing(
        |t, s| prob.q_eval(t, s),
        0.0,
        prob.s0,
        t_end,
        rel_tol,
        stops,
    )?;
    Ok(EnvelopeTrajectory {
        samples,
        tolerance: rel_tol,
    })
}
