use alloc::vec::Vec;
use core::f64::consts::PI;

use super::grid::bump_profile;
use super::seminorm::SeminormParams;
use crate::math::{abs_pow, panel_rule, pow_nonneg, Float};
use crate::{Error, DIM};

/// Growth of the truncated full seminorm of a fixed bump on the whole plane.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SharpnessReport {
    pub params: SeminormParams,
    pub radii: Vec<f64>,
    /// `F(R) = int_{|x|<R} (int |phi(x)-phi(y)|^q / |x-y|^(sq+d) dy)^(p/q) dx`.
    pub values: Vec<f64>,
    /// Least-squares slope of `log F` against `log R`.
    pub slope: f64,
    /// Slopes between consecutive radii.
    pub local_slopes: Vec<f64>,
    /// `d - sp - dp/q`.
    pub expected_slope: f64,
}

/// Measures how fast `F(R)` grows for the radial bump
/// `phi(x) = (1-|x|)^2 (1+2|x|)` when `s <= d/p - d/q`, where `F` diverges.
pub fn sharpness_experiment(params: SeminormParams, radii: &[f64]) -> Result<SharpnessReport, Error> {
    if params.is_supercritical() {
        return Err(Error::Refused("s > d/p - d/q: the seminorm of a bump is finite, there is no divergence to measure"));
    }
    if radii.len() < 2 || radii.windows(2).any(|w| !(w[1] > w[0])) || !(radii[0] > 1.0) || !radii.iter().all(|r| r.is_finite()) {
        return Err(Error::InvalidParameter("radii must be finite, increasing, at least two and all > 1".into()));
    }
    let d = DIM as f64;
    let SeminormParams { s, p, q } = params;
    let e = p / q;

    // Panel breaks: fine near the edge of the support, dyadic beyond it,
    // with every requested radius as a break.
    let mut breaks: Vec<f64> = alloc::vec![0.0, 0.25, 0.5, 0.75, 0.9, 1.0, 1.05, 1.15, 1.3, 1.5, 2.0];
    let mut t = 4.0;
    let r_max = *radii.last().unwrap_or(&2.0);
    while t < r_max {
        breaks.push(t);
        t *= 2.0;
    }
    breaks.extend_from_slice(radii);
    breaks.retain(|&b| b <= r_max);
    breaks.sort_by(|a, b| a.total_cmp(b));
    breaks.dedup();

    let mut values = Vec::with_capacity(radii.len());
    let mut acc = 0.0;
    let mut next = 0;
    for pair in breaks.windows(2) {
        let (x, w) = panel_rule(pair, 24);
        for (ti, wi) in x.iter().zip(&w) {
            acc += wi * 2.0 * PI * ti * pow_nonneg(inner_at(*ti, s, q), e);
        }
        while next < radii.len() && radii[next] <= pair[1] {
            values.push(acc);
            next += 1;
        }
    }

    let lx: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ly: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let local_slopes = lx.windows(2).zip(ly.windows(2)).map(|(a, b)| (b[1] - b[0]) / (a[1] - a[0])).collect();
    Ok(SharpnessReport { params, radii: radii.to_vec(), values, slope: sxy / sxx, local_slopes, expected_slope: d - s * p - d * p / q })
}

/// Inner integral `G(t)` at `x = (t, 0)` over the whole plane.
fn inner_at(t: f64, s: f64, q: f64) -> f64 {
    let alpha = s * q + 2.0;
    if t >= 1.0 {
        // phi(x) = 0: integrate phi(y)^q / |x-y|^alpha over the unit disk
        // in polar coordinates about the origin (symmetric in theta).
        let (rr, rw) = panel_rule(&[0.0, 0.5, 0.9, 1.0], 16);
        let (th, tw) = panel_rule(&[0.0, 0.05, 0.2, 0.6, PI], 16);
        let mut acc = 0.0;
        for (r, wr) in rr.iter().zip(&rw) {
            let fr = abs_pow(bump_profile(*r), q);
            for (a, wa) in th.iter().zip(&tw) {
                let d2 = t * t + r * r - 2.0 * t * r * a.cos();
                acc += wr * wa * r * fr * pow_nonneg(d2, -0.5 * alpha);
            }
        }
        2.0 * acc
    } else {
        // Polar coordinates about x. Beyond rho = 1 + t the other point is
        // outside the support and the angular integral is 2 pi phi(x)^q.
        let fx = bump_profile(t);
        let far = 1.0 + t;
        let mut breaks: Vec<f64> = (0..=14).map(|k| far / (1u32 << (14 - k)) as f64).collect();
        breaks.insert(0, 0.0);
        let (rr, rw) = panel_rule(&breaks, 12);
        let (th, tw) = panel_rule(&[0.0, PI / 4.0, PI / 2.0, 3.0 * PI / 4.0, PI], 16);
        let mut acc = 0.0;
        for (rho, wr) in rr.iter().zip(&rw) {
            let mut ang = 0.0;
            for (a, wa) in th.iter().zip(&tw) {
                let y = (t + rho * a.cos()).hypot(rho * a.sin());
                ang += wa * abs_pow(fx - bump_profile(y), q);
            }
            acc += wr * 2.0 * ang * pow_nonneg(*rho, -s * q - 1.0);
        }
        acc + abs_pow(fx, q) * 2.0 * PI * pow_nonneg(far, -s * q) / (s * q)
    }
}
