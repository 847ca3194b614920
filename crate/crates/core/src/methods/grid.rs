//! Shortest Beta interval on a fixed grid.

use crate::dist::special::{beta_quantile, inc_beta_unchecked};
use crate::error::{domain, Result};

/// Slack on the coverage constraint so that grid points whose CDF gap equals
/// the target up to rounding are accepted.
pub const COVERAGE_EPS: f64 = 1e-12;

/// Shortest `[l, u]` with both ends on the grid `{0, step, ..., 1}` and
/// `I_u(a, b) - I_l(a, b) >= coverage`; ties go to the smallest `l`.
///
/// Only lower ends with `I_l <= 1 - coverage` and upper ends with
/// `I_u >= coverage` can be feasible, so the CDF is evaluated on those two
/// stretches of the grid and a two-pointer sweep finds the optimum.
pub fn shortest_beta_interval(a: f64, b: f64, coverage: f64, step: f64) -> Result<(f64, f64)> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return domain(format!("beta shape parameters must be finite and positive (a={a}, b={b})"));
    }
    if !(coverage > 0.0 && coverage < 1.0) {
        return domain(format!("coverage must lie in (0, 1), got {coverage}"));
    }
    let cells = (1.0 / step).round();
    if !(step > 0.0) || (cells * step - 1.0).abs() > 1e-9 {
        return domain(format!("grid step {step} does not divide the unit interval"));
    }
    let k = cells as usize;
    let point = |i: usize| if i == k { 1.0 } else { i as f64 * step };
    let cdf = |i: usize| inc_beta_unchecked(point(i), a, b);

    // Conservative index ranges; the exact constraint is re-checked below.
    let l_max = ((beta_quantile(1.0 - coverage, a, b)? / step).ceil() as usize + 1).min(k);
    let u_min = ((beta_quantile(coverage, a, b)? / step).floor() as usize).saturating_sub(1);

    let lower_cdf: Vec<f64> = (0..=l_max).map(cdf).collect();
    let upper_cdf: Vec<f64> = (u_min..=k).map(cdf).collect();
    let upper_at = |u: usize| if u >= u_min { upper_cdf[u - u_min] } else { cdf(u) };

    let mut best: Option<(usize, usize)> = None;
    let mut u = u_min;
    for (l, &cl) in lower_cdf.iter().enumerate() {
        if u < l {
            u = l;
        }
        while u <= k && upper_at(u) - cl < coverage - COVERAGE_EPS {
            u += 1;
        }
        if u > k {
            break;
        }
        if best.is_none_or(|(bl, bu)| u - l < bu - bl) {
            best = Some((l, u));
        }
    }
    let (l, u) = best.expect("the full grid [0, 1] always satisfies the coverage constraint");
    Ok((point(l), point(u)))
}
