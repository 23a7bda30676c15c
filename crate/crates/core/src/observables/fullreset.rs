use serde::Serialize;

use crate::classical::find_fixed_point;
use crate::error::{Error, Result};

/// Gaussian references for the full-reset limit (`θ = π`, large `S`).
///
/// After `n` unitary steps since the last reset the state is two-mode
/// squeezed across the half cut with parameter `n r`, `r = ln|λ₊| / 2`, and
/// the waiting time `n` is geometric with parameter `p`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FullResetAnalytics {
    pub k: f64,
    pub p: f64,
    pub r: f64,
    /// `S_bip(n r)` for `n = 0, 1, …` up to truncation.
    pub entropy_table: Vec<f64>,
    pub mean: f64,
    pub second_moment: f64,
    pub binder: f64,
    /// `((1-p)/p) log₂|λ₊|`.
    pub mean_limit: f64,
    /// `(2-p)/(1-p)`.
    pub binder_limit: f64,
}

impl FullResetAnalytics {
    pub fn variance(&self) -> f64 {
        self.second_moment - self.mean * self.mean
    }
}

/// `cosh²(x) log₂ cosh²(x) - sinh²(x) log₂ sinh²(x)`.
pub fn squeezed_entropy(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    // Rewritten with cosh² = sinh² + 1 to avoid cancellation at large x.
    let s2 = x.sinh().powi(2);
    (1.0 + s2).log2() + s2 * (1.0 / s2).ln_1p() / std::f64::consts::LN_2
}

pub fn fullreset_analytics(k: f64, p: f64) -> Result<FullResetAnalytics> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::invalid("p", format!("must lie in (0, 1], got {p}")));
    }
    let lambda = find_fixed_point(k)?.instability();
    let r = 0.5 * lambda.ln();
    let q = 1.0 - p;
    let mut table = vec![0.0];
    let (mut mean, mut second) = (0.0, 0.0);
    let mut weight = p;
    // Terms grow like n² qⁿ; stop once the remaining tail is negligible.
    for n in 1..100_000usize {
        weight *= q;
        if weight == 0.0 {
            break;
        }
        let s = squeezed_entropy(n as f64 * r);
        table.push(s);
        mean += weight * s;
        second += weight * s * s;
        let tail_bound = weight * s * s * (n as f64 + 2.0) / (1.0 - q).max(1e-300);
        if n > 2 && tail_bound < 1e-13 * second {
            break;
        }
    }
    let binder = if mean > 0.0 { second / (mean * mean) } else { f64::NAN };
    Ok(FullResetAnalytics {
        k,
        p,
        r,
        entropy_table: table,
        mean,
        second_moment: second,
        binder,
        mean_limit: q / p * lambda.log2(),
        binder_limit: (2.0 - p) / q,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    #[test]
    fn entropy_limits() {
        assert_eq!(squeezed_entropy(0.0), 0.0);
        for x in [5.0, 10.0, 20.0] {
            // 2x/ln2 up to an O(1) offset of log₂(e) - 2.
            let s = squeezed_entropy(x);
            assert!((s - 2.0 * x / LN_2 - (1.0 / LN_2 - 2.0)).abs() < 1e-3, "{x}: {s}");
        }
    }

    #[test]
    fn series_against_direct_sum() {
        let a = fullreset_analytics(6.0, 0.8).unwrap();
        let direct: f64 = (0..200)
            .map(|n| 0.8 * 0.2f64.powi(n) * squeezed_entropy(n as f64 * a.r))
            .sum();
        assert!((a.mean - direct).abs() < 1e-12);
        assert!(a.binder > 1.0);
        assert_eq!(a.entropy_table[0], 0.0);
    }

    #[test]
    fn large_lambda_limits() {
        // For a very unstable fixed point the exact series approaches the
        // linear-entropy closed forms.
        let a = fullreset_analytics(60.0, 0.5).unwrap();
        assert!((a.binder_limit - 3.0).abs() < 1e-15);
        assert!((a.mean / a.mean_limit - 1.0).abs() < 0.25, "{a:?}");
        let b = fullreset_analytics(6.0, 0.5).unwrap();
        assert!(b.mean > 0.0 && b.binder > 1.0);
    }

    #[test]
    fn full_control_is_unentangled() {
        let a = fullreset_analytics(6.0, 1.0).unwrap();
        assert_eq!(a.mean, 0.0);
        assert!(fullreset_analytics(6.0, 0.0).is_err());
    }
}
