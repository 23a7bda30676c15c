use faer::{Mat, Side};
use num_complex::Complex64;

use super::frame::DenseUnitary;
use crate::error::{Error, Result};

/// `ln(n!)` for `n = 0..=n_max`, accumulated with compensated summation.
pub fn ln_factorials(n_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    out.push(0.0);
    for n in 1..=n_max {
        let x = (n as f64).ln();
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
        out.push(sum + comp);
    }
    out
}

/// `Jx` in the `|m⟩` basis, ascending `m`.
fn jx_matrix(two_s: usize) -> Mat<f64> {
    let s = two_s as f64 / 2.0;
    Mat::from_fn(two_s + 1, two_s + 1, |i, j| {
        if j == i + 1 || i == j + 1 {
            let m = i.min(j) as f64 - s;
            0.5 * (s * (s + 1.0) - m * (m + 1.0)).sqrt()
        } else {
            0.0
        }
    })
}

/// Eigenbasis of `Jx`, reused for every rotation angle of one spin.
pub(crate) struct JxEigen {
    v: Mat<f64>,
    two_s: usize,
}

impl JxEigen {
    pub(crate) fn new(two_s: usize) -> Result<Self> {
        let eig = jx_matrix(two_s)
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::LinAlg(format!("Jx eigendecomposition failed: {e:?}")))?;
        Ok(JxEigen {
            v: eig.U().to_owned(),
            two_s,
        })
    }

    /// Wigner small-d matrix `exp(-iβJy)`, which is real.
    ///
    /// With `D = exp(-iπ/2 Jz)`, `Jy = D Jx D†`, so the entries are
    /// `(-i)^(m-n) [exp(-iβJx)]_{mn}`. The spectrum of `Jx` is exactly
    /// `-S..=S`, so the computed eigenvalues are replaced by integers.
    pub(crate) fn wigner_d(&self, beta: f64) -> Mat<f64> {
        let n = self.two_s + 1;
        let s = self.two_s as f64 / 2.0;
        let w = |j: usize| j as f64 - s;
        let vc = Mat::from_fn(n, n, |i, j| self.v[(i, j)] * (beta * w(j)).cos());
        let vs = Mat::from_fn(n, n, |i, j| self.v[(i, j)] * (beta * w(j)).sin());
        let a = &vc * self.v.transpose();
        let b = &vs * self.v.transpose();
        Mat::from_fn(n, n, |i, j| match (i as i64 - j as i64).rem_euclid(4) {
            0 => a[(i, j)],
            1 => -b[(i, j)],
            2 => -a[(i, j)],
            _ => b[(i, j)],
        })
    }
}

/// `exp(-iβJy)` for spin `two_s / 2`.
pub fn wigner_d_y(two_s: usize, beta: f64) -> Result<Mat<f64>> {
    if two_s == 0 {
        return Err(Error::invalid("S", "spin must be at least 1/2"));
    }
    Ok(JxEigen::new(two_s)?.wigner_d(beta))
}

/// Kick phases `exp(-ik m² / 2S)` by index.
pub(crate) fn kick_phases(two_s: usize, k: f64) -> Vec<Complex64> {
    let s = two_s as f64 / 2.0;
    (0..=two_s)
        .map(|i| {
            let m = i as f64 - s;
            Complex64::from_polar(1.0, -k * m * m / (2.0 * s))
        })
        .collect()
}

/// One period of the top, `exp(-ik Jz²/2S) exp(-iπ/2 Jy)`: the quarter turn
/// about `y` acts first, then the twist.
pub fn kicked_top_unitary(two_s: usize, k: f64) -> Result<DenseUnitary> {
    let d = wigner_d_y(two_s, std::f64::consts::FRAC_PI_2)?;
    let kick = kick_phases(two_s, k);
    Ok(DenseUnitary::from_fn(two_s + 1, |i, j| kick[i] * d[(i, j)]))
}
