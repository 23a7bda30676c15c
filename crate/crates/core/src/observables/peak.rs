use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::{point_key, stream, Purpose};
use crate::stats::{quadratic_fit, Summary};

/// Location and height of the maximum of a variance curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VariancePeak {
    pub p_max: f64,
    pub p_max_err: f64,
    pub height: f64,
    pub height_err: f64,
}

/// Quadratic fit through the largest sample variance and its two neighbours
/// on each side, falling back to the grid maximum if the fit has no interior
/// maximum.
fn locate(ps: &[f64], vars: &[f64]) -> (f64, f64) {
    let imax = vars
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    let lo = imax.saturating_sub(2);
    let hi = (imax + 3).min(ps.len());
    if hi - lo < 3 {
        return (ps[imax], vars[imax]);
    }
    let [c0, c1, c2] = quadratic_fit(&ps[lo..hi], &vars[lo..hi]);
    if c2 >= 0.0 {
        return (ps[imax], vars[imax]);
    }
    let vertex = (-c1 / (2.0 * c2)).clamp(ps[lo], ps[hi - 1]);
    (vertex, c0 + c1 * vertex + c2 * vertex * vertex)
}

/// `samples[i]` holds per-trajectory values at `ps[i]` (sorted ascending).
/// Errors are bootstrap standard deviations over `n_boot` resamplings.
pub fn variance_peak(ps: &[f64], samples: &[Vec<f64>], n_boot: usize, seed: u64) -> Result<VariancePeak> {
    if ps.len() != samples.len() || ps.len() < 3 {
        return Err(Error::invalid("grid", "need at least three p values with samples"));
    }
    if ps.windows(2).any(|w| w[0] >= w[1]) || samples.iter().any(|s| s.len() < 2) {
        return Err(Error::invalid(
            "grid",
            "p must increase and every point needs two samples",
        ));
    }
    let vars: Vec<f64> = samples.iter().map(|s| Summary::of(s).variance).collect();
    let (p_max, height) = locate(ps, &vars);
    let mut boot_p = Vec::with_capacity(n_boot);
    let mut boot_h = Vec::with_capacity(n_boot);
    let mut buf = Vec::new();
    for b in 0..n_boot as u64 {
        let vars_b: Vec<f64> = ps
            .iter()
            .zip(samples)
            .map(|(&p, s)| {
                let mut rng = stream(seed, Purpose::Bootstrap, point_key(&[p]), b);
                buf.clear();
                buf.extend((0..s.len()).map(|_| s[rng.random_range(0..s.len())]));
                Summary::of(&buf).variance
            })
            .collect();
        let (pb, hb) = locate(ps, &vars_b);
        boot_p.push(pb);
        boot_h.push(hb);
    }
    let spread = |v: &[f64]| {
        if v.len() > 1 {
            Summary::of(v).variance.sqrt()
        } else {
            0.0
        }
    };
    Ok(VariancePeak {
        p_max,
        p_max_err: spread(&boot_p),
        height,
        height_err: spread(&boot_h),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_parabolic_peak() {
        let ps: Vec<f64> = (0..11).map(|i| 0.1 * i as f64).collect();
        // Two-point samples {m - d, m + d} have variance 2d².
        let samples: Vec<Vec<f64>> = ps
            .iter()
            .map(|&p| {
                let var = 1.0 - (p - 0.43f64).powi(2) * 4.0;
                let d = (var / 2.0).sqrt();
                vec![1.0 - d, 1.0 + d]
            })
            .collect();
        let peak = variance_peak(&ps, &samples, 0, 0).unwrap();
        assert!((peak.p_max - 0.43).abs() < 1e-10, "{peak:?}");
        assert!((peak.height - 1.0).abs() < 1e-10);
    }

    #[test]
    fn edge_maximum_falls_back_to_grid() {
        let ps = [0.1, 0.2, 0.3, 0.4];
        let samples: Vec<Vec<f64>> = [4.0, 3.0, 2.0, 1.0].iter().map(|&d: &f64| vec![-d, d]).collect();
        let peak = variance_peak(&ps, &samples, 10, 1).unwrap();
        assert!(peak.p_max >= 0.1 && peak.p_max <= 0.3);
    }

    #[test]
    fn bootstrap_is_deterministic() {
        let ps = [0.1, 0.2, 0.3, 0.4, 0.5];
        let samples: Vec<Vec<f64>> = (0..5)
            .map(|i| {
                (0..50)
                    .map(|j| ((i * 31 + j * 17) % 13) as f64 * (1.0 + i as f64 % 3.0))
                    .collect()
            })
            .collect();
        let a = variance_peak(&ps, &samples, 50, 9).unwrap();
        let b = variance_peak(&ps, &samples, 50, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.p_max_err >= 0.0);
        assert!(variance_peak(&ps[..2], &samples[..2], 5, 0).is_err());
    }
}
