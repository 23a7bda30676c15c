//! Closed forms from the linearized multiplicative process near `r0`.

use super::fixed_point::find_fixed_point;
use crate::error::{Error, Result};

fn instability(k: f64) -> Result<f64> {
    Ok(find_fixed_point(k)?.instability())
}

/// Critical control rate `ln|λ| / (ln|λ| - ln a)`; zero when `r0` is stable.
pub fn critical_probability(k: f64, a: f64) -> Result<f64> {
    critical_probability_from(instability(k)?, a)
}

pub fn critical_probability_from(lambda_abs: f64, a: f64) -> Result<f64> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::invalid("a", format!("critical rate needs 0 < a < 1, got {a}")));
    }
    let l = lambda_abs.ln().max(0.0);
    Ok(l / (l - a.ln()))
}

/// Control rate above which the `n`-th moment of the displacement decays,
/// `(|λ|ⁿ - 1) / (|λ|ⁿ - aⁿ)`.
pub fn moment_threshold(k: f64, a: f64, n: f64) -> Result<f64> {
    moment_threshold_from(instability(k)?, a, n)
}

pub fn moment_threshold_from(lambda_abs: f64, a: f64, n: f64) -> Result<f64> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::invalid("a", format!("needs 0 < a < 1, got {a}")));
    }
    if n.is_nan() || n < 0.0 {
        return Err(Error::invalid("n", format!("moment order must be >= 0, got {n}")));
    }
    if lambda_abs <= 1.0 || n == 0.0 {
        return Ok(0.0);
    }
    // (L^n - 1)/(L^n - a^n) = (1 - L^-n)/(1 - (a/L)^n), finite for large n.
    let inv = lambda_abs.powf(-n);
    Ok((1.0 - inv) / (1.0 - (a / lambda_abs).powf(n)))
}

/// Lyapunov exponent of the linearized process, `p ln a + (1-p) ln|λ|`.
pub fn lyapunov_linearized(k: f64, a: f64, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid("p", format!("must lie in [0, 1], got {p}")));
    }
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::invalid("a", format!("needs 0 < a <= 1, got {a}")));
    }
    let l = instability(k)?.ln();
    Ok(p * a.ln() + (1.0 - p) * l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn critical_rate_at_quarter_turn_contraction() {
        let pc = critical_probability(6.0, FRAC_1_SQRT_2).unwrap();
        assert!((pc - 0.77166).abs() < 5e-5, "{pc}");
    }

    #[test]
    fn a_half_k6() {
        let pc = critical_probability(6.0, 0.5).unwrap();
        assert!((pc - 0.628213).abs() < 1e-5, "{pc}");
    }

    #[test]
    fn limits_and_symmetric_point() {
        assert!(critical_probability(6.0, 1.0 - 1e-12).unwrap() > 0.999_999);
        let lam = find_fixed_point(6.0).unwrap().instability();
        let pc = critical_probability(6.0, 1.0 / lam).unwrap();
        assert!((pc - 0.5).abs() < 1e-14);
        assert_eq!(critical_probability(4.0, 0.5).unwrap(), 0.0);
        assert!(critical_probability(6.0, 0.0).is_err());
        assert!(critical_probability(6.0, 1.0).is_err());
    }

    #[test]
    fn moment_thresholds() {
        let a = FRAC_1_SQRT_2;
        let p1 = moment_threshold(6.0, a, 1.0).unwrap();
        let p2 = moment_threshold(6.0, a, 2.0).unwrap();
        assert!((p1 - 0.88372).abs() < 1e-4, "{p1}");
        assert!((p2 - 0.95).abs() < 1e-3, "{p2}");
        let mut prev = 0.0;
        for n in 1..25 {
            let p = moment_threshold(6.0, a, n as f64).unwrap();
            assert!(p > prev && p < 1.0);
            prev = p;
        }
        assert!(moment_threshold(6.0, a, 1e4).unwrap() > 1.0 - 1e-12);
        // The n -> 0 limit recovers p_c.
        let pc = critical_probability(6.0, a).unwrap();
        assert!((moment_threshold(6.0, a, 1e-7).unwrap() - pc).abs() < 1e-6);
    }

    #[test]
    fn linearized_exponent() {
        let lam = find_fixed_point(6.0).unwrap().instability();
        assert!((lyapunov_linearized(6.0, 0.5, 0.0).unwrap() - lam.ln()).abs() < 1e-15);
        assert!((lyapunov_linearized(6.0, 0.5, 1.0).unwrap() - 0.5f64.ln()).abs() < 1e-15);
        for a in [0.1, 0.5, FRAC_1_SQRT_2, 0.9] {
            let pc = critical_probability(6.0, a).unwrap();
            assert!(lyapunov_linearized(6.0, a, pc).unwrap().abs() < 1e-14);
        }
    }
}
