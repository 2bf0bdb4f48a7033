use crate::damping::DampingLaw;
use crate::error::{Error, Result};

const MAX_ITER: usize = 200;

/// Solve `w + c r g(w / r) = b` for `w`.
///
/// The left side is odd and strictly increasing in `w`, so the root is unique
/// and lies between `0` and `b`. The magnitude `x = |w|` is found by Newton
/// steps kept inside a shrinking bracket; a step that leaves the bracket is
/// replaced by a bisection, geometric when the bracket spans many decades
/// (sublinear laws put the root far below `|b|`).
pub fn solve_velocity_update(c: f64, b: f64, law: &DampingLaw, r: f64) -> Result<f64> {
    if c == 0.0 || b == 0.0 {
        return Ok(b);
    }
    let target = b.abs();
    let tol = 1e-12 * target.max(1.0);
    let residual = |x: f64| x + c * r * law.g(x / r) - target;
    let (mut lo, mut hi) = (0.0f64, target);
    // The linearised solution is exact for the linear law.
    let slope0 = law.g_prime(target / r);
    let mut x = if slope0.is_finite() {
        target / (1.0 + c * slope0)
    } else {
        0.5 * target
    };
    for _ in 0..MAX_ITER {
        let f = residual(x);
        if f.abs() <= tol {
            return Ok(x.copysign(b));
        }
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        let newton = x - f / (1.0 + c * law.g_prime(x / r));
        x = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else if hi > 4.0 * lo.max(f64::MIN_POSITIVE) {
            lo.max(f64::MIN_POSITIVE).sqrt() * hi.sqrt()
        } else {
            0.5 * (lo + hi)
        };
    }
    Err(Error::Step {
        node: 0,
        t: f64::NAN,
        reason: "velocity solve did not converge",
    })
}
