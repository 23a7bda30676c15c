//! Small deterministic statistics helpers. Reductions always run in slice order.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Unbiased sample variance (zero for fewer than two samples).
    pub variance: f64,
    pub n: usize,
}

impl Summary {
    pub fn of(samples: &[f64]) -> Self {
        let n = samples.len();
        if n == 0 {
            return Summary {
                mean: f64::NAN,
                variance: f64::NAN,
                n,
            };
        }
        // Welford, in slice order.
        let mut mean = 0.0;
        let mut m2 = 0.0;
        for (i, &x) in samples.iter().enumerate() {
            let d = x - mean;
            mean += d / (i + 1) as f64;
            m2 += d * (x - mean);
        }
        let variance = if n > 1 { m2 / (n - 1) as f64 } else { 0.0 };
        Summary { mean, variance, n }
    }

    pub fn stderr(&self) -> f64 {
        (self.variance / self.n as f64).sqrt()
    }

    /// Raw second moment `E[x²]` reconstructed from mean and sample variance.
    pub fn second_moment(&self) -> f64 {
        let pop_var = if self.n > 1 {
            self.variance * (self.n - 1) as f64 / self.n as f64
        } else {
            0.0
        };
        pop_var + self.mean * self.mean
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y = slope·x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
        syy += (yi - my) * (yi - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| (yi - slope * xi - intercept).powi(2))
        .sum();
    LinearFit {
        slope,
        intercept,
        r_squared: 1.0 - ss_res / syy,
    }
}

/// Least squares `y = c·x` with the centered coefficient of determination.
pub fn proportional_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let c = sxy / sxx;
    let my = y.iter().sum::<f64>() / y.len() as f64;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - c * a).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    (c, 1.0 - ss_res / ss_tot)
}

/// Least-squares parabola `c0 + c1·x + c2·x²`.
pub fn quadratic_fit(x: &[f64], y: &[f64]) -> [f64; 3] {
    assert!(x.len() >= 3 && x.len() == y.len());
    // Center for conditioning.
    let x0 = x.iter().sum::<f64>() / x.len() as f64;
    let mut a = [[0.0f64; 3]; 3];
    let mut b = [0.0f64; 3];
    for (&xi, &yi) in x.iter().zip(y) {
        let u = xi - x0;
        let pw = [1.0, u, u * u];
        for r in 0..3 {
            b[r] += pw[r] * yi;
            for c in 0..3 {
                a[r][c] += pw[r] * pw[c];
            }
        }
    }
    let [d0, d1, d2] = solve3(a, b);
    // Undo the shift.
    [d0 - d1 * x0 + d2 * x0 * x0, d1 - 2.0 * d2 * x0, d2]
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            let pivot_row = a[col];
            for (x, y) in a[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= f * y;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|c| a[row][c] * x[c]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// First `x` at which the piecewise-linear curve through `(xs, ys)` reaches
/// `level` from above, with linear interpolation inside the bracketing cell.
pub fn first_crossing_below(xs: &[f64], ys: &[f64], level: f64) -> Option<f64> {
    if ys.first().is_some_and(|&y| y <= level) {
        return xs.first().copied();
    }
    for i in 1..xs.len() {
        if ys[i] <= level && ys[i - 1] > level {
            let t = (ys[i - 1] - level) / (ys[i - 1] - ys[i]);
            return Some(xs[i - 1] + t * (xs[i] - xs[i - 1]));
        }
    }
    None
}

/// First sign change of `ys` from positive to non-positive, interpolated.
pub fn first_sign_change(xs: &[f64], ys: &[f64]) -> Option<f64> {
    first_crossing_below(xs, ys, 0.0)
}
