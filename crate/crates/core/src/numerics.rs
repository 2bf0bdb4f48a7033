//! Small numerical kernels shared by the envelope and harness code: monotone
//! bisection, adaptive Simpson quadrature and least-squares line fits.

/// Solve `f(x) = target` for a non-decreasing `f` on `[lo, hi]`.
///
/// The bracket is assumed valid (`f(lo) <= target <= f(hi)`). When both ends
/// are positive and far apart the midpoint is taken geometrically, so roots
/// many decades below `hi` are reached in a few dozen iterations. Iteration
/// stops once the bracket is relatively narrower than `rel_tol` or after
/// `max_iter` halvings.
pub fn bisect_increasing<F>(
    f: F,
    target: f64,
    mut lo: f64,
    mut hi: f64,
    rel_tol: f64,
    max_iter: usize,
) -> f64
where
    F: Fn(f64) -> f64,
{
    for _ in 0..max_iter {
        if hi - lo <= rel_tol * hi.abs().max(lo.abs()) {
            break;
        }
        let mid = if lo > 0.0 && hi > 4.0 * lo {
            lo.sqrt() * hi.sqrt()
        } else {
            0.5 * (lo + hi)
        };
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid);
        if v == target {
            return mid;
        }
        if v < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

const SIMPSON_MAX_DEPTH: u32 = 48;

/// Adaptive Simpson quadrature of `f` over `[a, b]` to relative tolerance `rel_tol`.
pub fn integrate<F>(f: F, a: f64, b: f64, rel_tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return 0.0;
    }
    // Coarse pre-split so that narrow features are not skipped by the
    // first Simpson estimate.
    const PANELS: usize = 16;
    let h = (b - a) / PANELS as f64;
    let mut coarse = 0.0;
    let mut panels = Vec::with_capacity(PANELS);
    for k in 0..PANELS {
        let x0 = a + k as f64 * h;
        let x1 = if k + 1 == PANELS { b } else { x0 + h };
        let xm = 0.5 * (x0 + x1);
        let (f0, fm, f1) = (f(x0), f(xm), f(x1));
        let s = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
        coarse += s.abs();
        panels.push((x0, x1, f0, fm, f1, s));
    }
    let abs_tol = (rel_tol * coarse).max(f64::MIN_POSITIVE);
    panels
        .into_iter()
        .map(|(x0, x1, f0, fm, f1, s)| {
            simpson_step(
                &f,
                x0,
                x1,
                f0,
                fm,
                f1,
                s,
                abs_tol / PANELS as f64,
                SIMPSON_MAX_DEPTH,
            )
        })
        .sum()
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64
where
    F: Fn(f64) -> f64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Quadrature over `[a, b]` with `0 < a < b` in the variable `u = ln s`.
///
/// Suited to integrands that vary over many decades, such as `1/p(s)` near 0.
pub fn integrate_log<F>(f: F, a: f64, b: f64, rel_tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    debug_assert!(a > 0.0 && b >= a);
    integrate(
        |u| {
            let s = u.exp();
            s * f(s)
        },
        a.ln(),
        b.ln(),
        rel_tol,
    )
}

/// Ordinary least-squares line through `(x, y)` points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Pearson correlation coefficient of the points.
    pub correlation: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let correlation = if syy == 0.0 {
        1.0
    } else {
        sxy / (sxx * syy).sqrt()
    };
    Some(LineFit {
        slope,
        intercept: my - slope * mx,
        correlation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_finds_tiny_roots() {
        let root = bisect_increasing(|x| x * x, 1e-40, 0.0, 1.0, 1e-14, 400);
        assert!((root / 1e-20 - 1.0).abs() < 1e-12);
        let root = bisect_increasing(|x| x.powi(3) + x, 2.0, 0.0, 2.0, 1e-15, 200);
        assert!((root - 1.0).abs() < 1e-14);
    }

    #[test]
    fn simpson_polynomial_and_log() {
        let v = integrate(|x| x * x * x - x, 0.0, 2.0, 1e-12);
        assert!((v - 2.0).abs() < 1e-12);
        let v = integrate_log(|s| 1.0 / s, 1e-8, 1.0, 1e-12);
        assert!((v - 8.0 * 10f64.ln()).abs() < 1e-9);
        let v = integrate_log(|s| 1.0 / (s * s), 1e-3, 1.0, 1e-12);
        assert!((v - 999.0).abs() < 1e-7);
    }

    #[test]
    fn line_fit_exact() {
        let xs: Vec<f64> = (0..10).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 1.5 * x).collect();
        let fit = fit_line(&xs, &ys).unwrap();
        assert!((fit.slope + 1.5).abs() < 1e-14);
        assert!((fit.intercept - 3.0).abs() < 1e-13);
        assert!((fit.correlation + 1.0).abs() < 1e-14);
        assert!(fit_line(&[1.0], &[2.0]).is_none());
    }
}
