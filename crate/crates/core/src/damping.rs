//! Damping nonlinearities `g`, their near-origin classification and the
//! concave majorant `h0`.
//!
//! Each family is given by an explicit formula for `|y| < eta0` and is
//! continued linearly (with matching value and slope) for `|y| >= eta0`, so
//! that every law is monotone, odd and linearly bounded at infinity.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numerics::bisect_increasing;
use crate::validation::ValidationReport;

/// The supported damping families.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DampingFamily {
    /// `g(s) = s`.
    Linear,
    /// `g(s) = s|s|^(r0-1)` with `r0 > 1`.
    SuperlinearPower { r0: f64 },
    /// `g(s) = s|s|^(theta0-1)` with `0 < theta0 < 1`.
    SublinearPower { theta0: f64 },
    /// `g(s) = s exp(-1/s^2)`, with `g(0) = 0`.
    ExponentialOrigin,
}

/// Near-origin behaviour classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OriginBehavior {
    /// `y^2/m0 <= g(y) y <= m0 y^2` on `I`.
    LinearlyBounded,
    /// `g(y) y <= m0 y^2` on `I`.
    Superlinear,
    /// `y^2/m0 <= g(y) y` on `I`.
    Sublinear,
}

impl DampingFamily {
    pub fn origin_behavior(&self) -> OriginBehavior {
        match self {
            DampingFamily::Linear => OriginBehavior::LinearlyBounded,
            DampingFamily::SuperlinearPower { .. } | DampingFamily::ExponentialOrigin => {
                OriginBehavior::Superlinear
            }
            DampingFamily::SublinearPower { .. } => OriginBehavior::Sublinear,
        }
    }

    fn check(&self) -> Result<()> {
        match *self {
            DampingFamily::SuperlinearPower { r0 } if !(r0 > 1.0 && r0.is_finite()) => Err(
                Error::Config(format!("superlinear exponent r0 must exceed 1, got {r0}")),
            ),
            DampingFamily::SublinearPower { theta0 } if !(theta0 > 0.0 && theta0 < 1.0) => {
                Err(Error::Config(format!(
                    "sublinear exponent theta0 must lie in (0,1), got {theta0}"
                )))
            }
            _ => Ok(()),
        }
    }

    /// Magnitude of the near-origin formula for `y >= 0`.
    fn origin_formula(&self, y: f64) -> f64 {
        match *self {
            DampingFamily::Linear => y,
            DampingFamily::SuperlinearPower { r0 } => y.powf(r0),
            DampingFamily::SublinearPower { theta0 } => y.powf(theta0),
            DampingFamily::ExponentialOrigin => {
                if y == 0.0 {
                    0.0
                } else {
                    y * (-1.0 / (y * y)).exp()
                }
            }
        }
    }

    fn origin_slope(&self, y: f64) -> f64 {
        match *self {
            DampingFamily::Linear => 1.0,
            DampingFamily::SuperlinearPower { r0 } => r0 * y.powf(r0 - 1.0),
            DampingFamily::SublinearPower { theta0 } => {
                if y == 0.0 {
                    f64::INFINITY
                } else {
                    theta0 * y.powf(theta0 - 1.0)
                }
            }
            DampingFamily::ExponentialOrigin => {
                if y == 0.0 {
                    0.0
                } else {
                    let inv = 1.0 / (y * y);
                    (-inv).exp() * (1.0 + 2.0 * inv)
                }
            }
        }
    }
}

impl fmt::Display for DampingFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DampingFamily::Linear => write!(f, "linear"),
            DampingFamily::SuperlinearPower { r0 } => write!(f, "superlinear:r0={r0}"),
            DampingFamily::SublinearPower { theta0 } => write!(f, "sublinear:theta0={theta0}"),
            DampingFamily::ExponentialOrigin => write!(f, "exp-origin"),
        }
    }
}

impl FromStr for DampingFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, param) = match s.split_once(':') {
            Some((h, p)) => (h.trim(), Some(p.trim())),
            None => (s, None),
        };
        let value = |key: &str| -> Result<f64> {
            let p =
                param.ok_or_else(|| Error::Config(format!("law `{s}` needs parameter `{key}`")))?;
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("malformed law parameter `{p}`")))?;
            if k.trim() != key {
                return Err(Error::Config(format!(
                    "law `{head}` expects `{key}`, got `{}`",
                    k.trim()
                )));
            }
            v.trim()
                .parse()
                .map_err(|_| Error::Config(format!("cannot parse `{}` as a number", v.trim())))
        };
        let family = match head {
            "linear" => DampingFamily::Linear,
            "superlinear" => DampingFamily::SuperlinearPower { r0: value("r0")? },
            "sublinear" => DampingFamily::SublinearPower {
                theta0: value("theta0")?,
            },
            "exp-origin" => DampingFamily::ExponentialOrigin,
            other => return Err(Error::Config(format!("unknown damping law `{other}`"))),
        };
        family.check()?;
        Ok(family)
    }
}

/// Bound constants attached to a law.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LawConstants {
    /// Near-origin bound constant (`>= 1`).
    pub m0: f64,
    /// Radius of the near-origin interval `I = [-eta, eta]`.
    pub eta: f64,
    /// Threshold between the origin and infinity regimes.
    pub eta0: f64,
    /// Bound constant at infinity (`>= 1`).
    pub m: f64,
    /// Constant in the majorant inequality `h0(g(y) y) >= eps0 (g(y)^2 + y^2)`.
    pub eps0: f64,
}

/// A monotone damping nonlinearity together with its concave majorant.
///
/// Values are immutable after construction.
#[derive(Clone, Debug, PartialEq)]
pub struct DampingLaw {
    family: DampingFamily,
    constants: LawConstants,
    /// `g(eta0)` and `g'(eta0)` of the near-origin formula.
    edge_value: f64,
    edge_slope: f64,
}

const EPS0_SAMPLES: usize = 4001;
const EPS0_SAFETY: f64 = 0.999;

impl DampingLaw {
    /// Build a law with the default constants: `eta = eta0 = 1`, the tightest
    /// `m0` on `I`, `m` from the linear continuation, and `eps0` from a sampled
    /// minimisation of `h0(g(y) y) / (g(y)^2 + y^2)`.
    pub fn new(family: DampingFamily) -> Result<Self> {
        family.check()?;
        let mut law = Self::with_thresholds(family, 1.0, 1.0)?;
        law.constants.m0 = law.tightest_m0(EPS0_SAMPLES);
        law.constants.eps0 = law.sampled_eps0(EPS0_SAMPLES) * EPS0_SAFETY;
        Ok(law)
    }

    pub fn linear() -> Self {
        Self::new(DampingFamily::Linear).expect("linear law is always valid")
    }

    pub fn superlinear(r0: f64) -> Result<Self> {
        Self::new(DampingFamily::SuperlinearPower { r0 })
    }

    pub fn sublinear(theta0: f64) -> Result<Self> {
        Self::new(DampingFamily::SublinearPower { theta0 })
    }

    pub fn exponential_origin() -> Self {
        Self::new(DampingFamily::ExponentialOrigin).expect("exponential law is always valid")
    }

    /// Build a law with explicit constants. `m` is always recomputed from the
    /// continuation at `eta0`, since it is fixed by the shape of `g`.
    pub fn with_constants(
        family: DampingFamily,
        m0: f64,
        eta: f64,
        eta0: f64,
        eps0: f64,
    ) -> Result<Self> {
        family.check()?;
        if !(m0 >= 1.0) {
            return Err(Error::Config(format!("m0 must be at least 1, got {m0}")));
        }
        if !(eps0 > 0.0) {
            return Err(Error::Config(format!("eps0 must be positive, got {eps0}")));
        }
        let mut law = Self::with_thresholds(family, eta, eta0)?;
        law.constants.m0 = m0;
        law.constants.eps0 = eps0;
        Ok(law)
    }

    fn with_thresholds(family: DampingFamily, eta: f64, eta0: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::Config(format!("eta must lie in (0,1], got {eta}")));
        }
        if !(eta0 > 0.0 && eta0 <= 1.0) {
            return Err(Error::Config(format!("eta0 must lie in (0,1], got {eta0}")));
        }
        let edge_value = family.origin_formula(eta0);
        let edge_slope = family.origin_slope(eta0);
        let secant = edge_value / eta0;
        let m = [edge_slope, 1.0 / edge_slope, secant, 1.0 / secant]
            .into_iter()
            .fold(1.0, f64::max);
        Ok(Self {
            family,
            constants: LawConstants {
                m0: 1.0,
                eta,
                eta0,
                m,
                eps0: 1.0,
            },
            edge_value,
            edge_slope,
        })
    }

    pub fn family(&self) -> DampingFamily {
        self.family
    }

    pub fn constants(&self) -> LawConstants {
        self.constants
    }

    pub fn origin_behavior(&self) -> OriginBehavior {
        self.family.origin_behavior()
    }

    /// `g(y)`, returning a domain error for non-finite input.
    pub fn eval_g(&self, y: f64) -> Result<f64> {
        if !y.is_finite() {
            return Err(Error::Domain {
                what: "g",
                value: y,
            });
        }
        Ok(self.g(y))
    }

    /// Infallible `g(y)` for finite `y`. Odd by construction.
    pub fn g(&self, y: f64) -> f64 {
        let a = y.abs();
        let mag = if a < self.constants.eta0 {
            self.family.origin_formula(a)
        } else {
            self.edge_value + self.edge_slope * (a - self.constants.eta0)
        };
        if y < 0.0 {
            -mag
        } else {
            mag
        }
    }

    /// `g'(y)`; infinite at the origin for sublinear laws.
    pub fn g_prime(&self, y: f64) -> f64 {
        let a = y.abs();
        if a < self.constants.eta0 {
            self.family.origin_slope(a)
        } else {
            self.edge_slope
        }
    }

    /// Explicit inverse of the concave majorant, defined on `[0, 1]`.
    pub fn h0_inverse(&self, s: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::Domain {
                what: "h0_inverse",
                value: s,
            });
        }
        Ok(self.h0_inverse_unchecked(s))
    }

    fn h0_inverse_unchecked(&self, s: f64) -> f64 {
        match self.family {
            DampingFamily::Linear => s,
            DampingFamily::SuperlinearPower { r0 } => s.powf(0.5 * (1.0 + r0)),
            DampingFamily::SublinearPower { theta0 } => s.powf((1.0 + theta0) / (2.0 * theta0)),
            DampingFamily::ExponentialOrigin => {
                if s == 0.0 {
                    0.0
                } else {
                    s * (-1.0 / s).exp()
                }
            }
        }
    }

    /// Upper end of the domain of `h0`, i.e. `h0_inverse(1)`.
    pub fn h0_max(&self) -> f64 {
        self.h0_inverse_unchecked(1.0)
    }

    /// The concave majorant `h0` on `[0, h0_max]`.
    pub fn h0(&self, x: f64) -> Result<f64> {
        let max = self.h0_max();
        if !(x >= 0.0) {
            return Err(Error::Domain {
                what: "h0",
                value: x,
            });
        }
        if x > max * (1.0 + 4.0 * f64::EPSILON) {
            return Err(Error::Range {
                what: "h0",
                value: x,
                bound: max,
            });
        }
        Ok(self.h0_unchecked(x.min(max)))
    }

    pub(crate) fn h0_unchecked(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        match self.family {
            DampingFamily::Linear => x,
            DampingFamily::SuperlinearPower { r0 } => x.powf(2.0 / (1.0 + r0)),
            DampingFamily::SublinearPower { theta0 } => x.powf(2.0 * theta0 / (1.0 + theta0)),
            DampingFamily::ExponentialOrigin => {
                // s e^{-1/s} = x  <=>  ln s - 1/s = ln x, increasing in s.
                // Every positive f64 x has its root above 1e-4.
                bisect_increasing(|s| s.ln() - 1.0 / s, x.ln(), 1e-4, 1.0, 1e-15, 200)
            }
        }
    }

    fn tightest_m0(&self, n: usize) -> f64 {
        let eta = self.constants.eta;
        let mut worst: f64 = 1.0;
        for i in 1..n {
            let y = eta * i as f64 / (n - 1) as f64;
            let ratio = self.g(y) * y / (y * y);
            if ratio <= 0.0 {
                continue;
            }
            match self.origin_behavior() {
                OriginBehavior::LinearlyBounded => worst = worst.max(ratio).max(1.0 / ratio),
                OriginBehavior::Superlinear => worst = worst.max(ratio),
                OriginBehavior::Sublinear => worst = worst.max(1.0 / ratio),
            }
        }
        worst
    }

    fn sampled_eps0(&self, n: usize) -> f64 {
        let eta0 = self.constants.eta0;
        let mut best = f64::INFINITY;
        for i in 1..n {
            let y = eta0 * i as f64 / n as f64;
            if let Some(r) = majorant_ratio(self, y) {
                best = best.min(r);
            }
        }
        best
    }
}

/// `h0(g(y) y) / (g(y)^2 + y^2)`, or `None` where `g(y) y` underflows.
fn majorant_ratio<L: Nonlinearity + ?Sized>(law: &L, y: f64) -> Option<f64> {
    let g = law.g(y);
    let gy = g * y;
    if y != 0.0 && gy < f64::MIN_POSITIVE {
        return None;
    }
    let h = law.h0(gy)?;
    Some(h / (g * g + y * y))
}

/// The sampling interface [`validate_law`] checks. Implemented by
/// [`DampingLaw`]; test code implements it for deliberately broken laws.
pub trait Nonlinearity {
    fn g(&self, y: f64) -> f64;
    fn constants(&self) -> LawConstants;
    fn origin_behavior(&self) -> OriginBehavior;
    /// `h0(x)` for `x` in `[0, h0_max]`, or `None` if no majorant is supplied.
    fn h0(&self, x: f64) -> Option<f64>;
    fn h0_max(&self) -> f64;
    /// Half-width of the sampled interval for `g`.
    fn sample_half_width(&self) -> f64 {
        10.0
    }
    fn describe(&self) -> String;
}

impl Nonlinearity for DampingLaw {
    fn g(&self, y: f64) -> f64 {
        DampingLaw::g(self, y)
    }

    fn constants(&self) -> LawConstants {
        self.constants
    }

    fn origin_behavior(&self) -> OriginBehavior {
        self.family.origin_behavior()
    }

    fn h0(&self, x: f64) -> Option<f64> {
        DampingLaw::h0(self, x).ok()
    }

    fn h0_max(&self) -> f64 {
        DampingLaw::h0_max(self)
    }

    fn describe(&self) -> String {
        self.family.to_string()
    }
}

const REL_TOL: f64 = 1e-12;

/// Check the standing assumptions on `g` and `h0` by dense sampling.
///
/// `n_samples` (at least 100) points are taken on `[-W, W]` for `g`, where
/// `W` is the law's sample half-width, and on `[0, h0_max]` for `h0`.
pub fn validate_law<L: Nonlinearity + ?Sized>(law: &L, n_samples: usize) -> ValidationReport {
    let n = n_samples.max(100);
    let c = law.constants();
    let width = law.sample_half_width();
    let mut report = ValidationReport::new(format!("damping law {}", law.describe()));

    // Open interval when the law is only defined on (-W, W).
    let ys: Vec<f64> = (0..n)
        .map(|i| width * (2.0 * i as f64 / (n - 1) as f64 - 1.0) * (1.0 - 1e-9))
        .collect();
    let gs: Vec<f64> = ys.iter().map(|&y| law.g(y)).collect();

    report.push("g(0) = 0", -law.g(0.0).abs(), 0.0);

    let monotone = gs
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    report.push("g monotone increasing", monotone, 0.0);

    let sign = ys
        .iter()
        .zip(&gs)
        .map(|(y, g)| y * g)
        .fold(f64::INFINITY, f64::min);
    report.push("g(y) y >= 0", sign, 0.0);

    let odd = ys
        .iter()
        .zip(&gs)
        .map(|(&y, g)| -(law.g(-y) + g).abs())
        .fold(0.0, f64::min);
    report.push("g odd", odd, 0.0);

    // Near-origin class on I = [-eta, eta].
    let mut origin = f64::INFINITY;
    for k in 1..n {
        let y = c.eta * k as f64 / (n - 1) as f64;
        for y in [y, -y] {
            let ratio = law.g(y) * y / (y * y);
            let lower = ratio - 1.0 / c.m0;
            let upper = c.m0 - ratio;
            let m = match law.origin_behavior() {
                OriginBehavior::LinearlyBounded => lower.min(upper),
                OriginBehavior::Superlinear => upper,
                OriginBehavior::Sublinear => lower,
            };
            origin = origin.min(m);
        }
    }
    report.push("origin class bound on I", origin, REL_TOL);

    let mut infinity = f64::INFINITY;
    for (&y, &g) in ys.iter().zip(&gs) {
        if y.abs() >= c.eta0 {
            let ratio = g * y / (y * y);
            infinity = infinity.min((ratio - 1.0 / c.m).min(c.m - ratio));
        }
    }
    if infinity.is_finite() {
        report.push("linear bound at infinity", infinity, REL_TOL);
    }

    let max = law.h0_max();
    let xs: Vec<f64> = (0..n).map(|i| max * i as f64 / (n - 1) as f64).collect();
    let hs: Option<Vec<f64>> = xs.iter().map(|&x| law.h0(x)).collect();
    if let Some(hs) = hs {
        report.push("h0(0) = 0", -hs[0].abs(), 0.0);
        let inc = hs
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        report.push("h0 monotone increasing", inc, 0.0);
        // Midpoint concavity on neighbouring triples and on pairs with 0.
        let mut concave = f64::INFINITY;
        for w in hs.windows(3) {
            concave = concave.min(w[1] - 0.5 * (w[0] + w[2]));
        }
        for (i, &x) in xs.iter().enumerate().skip(1) {
            if let Some(mid) = law.h0(0.5 * x) {
                concave = concave.min(mid - 0.5 * (hs[0] + hs[i]));
            }
        }
        report.push("h0 concave", concave, REL_TOL);

        let mut majorant = f64::INFINITY;
        for k in 1..n {
            let y = c.eta0 * k as f64 / n as f64;
            for y in [y, -y] {
                let g = law.g(y);
                let gy = g * y;
                if gy < f64::MIN_POSITIVE {
                    continue;
                }
                if let Some(h) = law.h0(gy) {
                    let rhs = c.eps0 * (g * g + y * y);
                    majorant = majorant.min((h - rhs) / rhs);
                }
            }
        }
        if majorant.is_finite() {
            report.push("h0 majorant inequality", majorant, REL_TOL);
        }
    }

    report.measured.push(("m0", c.m0));
    report.measured.push(("m", c.m));
    report.measured.push(("eps0", c.eps0));
    let mut eps = f64::INFINITY;
    for k in 1..n {
        if let Some(r) = majorant_ratio(law, c.eta0 * k as f64 / n as f64) {
            eps = eps.min(r);
        }
    }
    if eps.is_finite() {
        report.measured.push(("sampled eps0", eps));
    }
    report
}
