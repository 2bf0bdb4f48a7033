use super::{InitialData, RadialDomain};

/// Exact undamped solution `v(t, r_i)` on the grid nodes.
///
/// With `v0`, `v1` extended oddly about `r = 1`,
/// `v(t, r) = (v0(r - t) + v0(r + t)) / 2 + (1/2) ∫_{r-t}^{r+t} v1`.
/// The antiderivative of the odd extension of `v1` is the even extension of
/// `V1(s) = ∫_1^s v1`. Custom data are interpolated linearly between nodes.
pub fn dalembert_oracle(data: &InitialData, t: f64, domain: &RadialDomain) -> Vec<f64> {
    let reflect = |s: f64| RadialDomain::R_IN + (s - RadialDomain::R_IN).abs();
    let odd = |s: f64| if s < RadialDomain::R_IN { -1.0 } else { 1.0 };

    match data {
        InitialData::Custom { .. } => {
            let (v0, v1) = data.sample(domain);
            let mut anti = vec![0.0; v1.len()];
            for i in 1..v1.len() {
                anti[i] = anti[i - 1] + 0.5 * domain.dr * (v1[i - 1] + v1[i]);
            }
            let interp = |f: &[f64], s: f64| {
                let x = (s - RadialDomain::R_IN) / domain.dr;
                if x >= domain.n as f64 {
                    return f[domain.n];
                }
                let i = x.floor() as usize;
                let w = x - i as f64;
                f[i] * (1.0 - w) + f[i + 1] * w
            };
            let ext0 = |s: f64| odd(s) * interp(&v0, reflect(s));
            let big_v1 = |s: f64| interp(&anti, reflect(s));
            (0..=domain.n)
                .map(|i| {
                    let r = domain.r(i);
                    0.5 * (ext0(r - t) + ext0(r + t)) + 0.5 * (big_v1(r + t) - big_v1(r - t))
                })
                .collect()
        }
        _ => {
            let v0 = |s: f64| data.reduced(s).map_or(0.0, |d| d.0);
            let ext0 = |s: f64| odd(s) * v0(reflect(s));
            let outgoing = matches!(data, InitialData::OutgoingPulse { .. });
            // v1 = -v0' gives V1 = -v0 (v0 vanishes at r = 1).
            let big_v1 = |s: f64| if outgoing { -v0(reflect(s)) } else { 0.0 };
            (0..=domain.n)
                .map(|i| {
                    let r = domain.r(i);
                    0.5 * (ext0(r - t) + ext0(r + t)) + 0.5 * (big_v1(r + t) - big_v1(r - t))
                })
                .collect()
        }
    }
}
