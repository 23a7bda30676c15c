use faer::Mat;
use num_complex::Complex64;

use super::operators::{kick_phases, JxEigen};
use super::spin::SpinState;
use crate::classical::{find_fixed_point, FixedPointData};
use crate::error::{Error, Result};

/// Dense complex square matrix, column-major with split real and imaginary
/// parts so that the column sweep in [`DenseUnitary::apply`] vectorizes.
#[derive(Clone, Debug)]
pub struct DenseUnitary {
    n: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl DenseUnitary {
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut re = vec![0.0; n * n];
        let mut im = vec![0.0; n * n];
        for j in 0..n {
            for i in 0..n {
                let z = f(i, j);
                re[j * n + i] = z.re;
                im[j * n + i] = z.im;
            }
        }
        DenseUnitary { n, re, im }
    }

    fn from_parts(re: &Mat<f64>, im: &Mat<f64>) -> Self {
        let n = re.nrows();
        Self::from_fn(n, |i, j| Complex64::new(re[(i, j)], im[(i, j)]))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(self.re[j * self.n + i], self.im[j * self.n + i])
    }

    /// `out = U ψ`. Columns whose input amplitude is exactly zero are skipped,
    /// which makes the step after a reset O(S) instead of O(S²).
    pub fn apply_into(&self, psi: &[Complex64], out_re: &mut [f64], out_im: &mut [f64]) {
        let n = self.n;
        out_re.fill(0.0);
        out_im.fill(0.0);
        for (j, a) in psi.iter().enumerate() {
            if a.re == 0.0 && a.im == 0.0 {
                continue;
            }
            let col_re = &self.re[j * n..(j + 1) * n];
            let col_im = &self.im[j * n..(j + 1) * n];
            let (ar, ai) = (a.re, a.im);
            for i in 0..n {
                out_re[i] += ar * col_re[i] - ai * col_im[i];
                out_im[i] += ar * col_im[i] + ai * col_re[i];
            }
        }
    }

    /// Applies `U` to `state` in place.
    pub fn apply(&self, state: &mut SpinState) {
        let n = self.n;
        let mut re = vec![0.0; n];
        let mut im = vec![0.0; n];
        self.apply_into(state.amplitudes(), &mut re, &mut im);
        for (a, (r, i)) in state.amplitudes_mut().iter_mut().zip(re.into_iter().zip(im)) {
            *a = Complex64::new(r, i);
        }
    }

    /// Largest entry of `|U†U - I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.n;
        let re = Mat::from_fn(n, n, |i, j| self.re[j * n + i]);
        let im = Mat::from_fn(n, n, |i, j| self.im[j * n + i]);
        // (A - iB)ᵀ (A + iB) = AᵀA + BᵀB + i(AᵀB - BᵀA)
        let pr = re.transpose() * &re + im.transpose() * &im;
        let pi = re.transpose() * &im - im.transpose() * &re;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let d = Complex64::new(pr[(i, j)] - if i == j { 1.0 } else { 0.0 }, pi[(i, j)]);
                worst = worst.max(d.norm());
            }
        }
        worst
    }
}

/// Step unitary in the frame where the target fixed point is `|m = S⟩`.
///
/// The frame rotation is `R = exp(-iφ0 Jz) exp(-iθ0 Jy)` and the step is
/// `R† U_KT R`.
#[derive(Clone, Debug)]
pub struct RotatedFrame {
    two_s: usize,
    k: f64,
    theta0: f64,
    phi0: f64,
    fixed_point: Option<FixedPointData>,
    u_rot: DenseUnitary,
}

impl RotatedFrame {
    /// Frame centered on the nontrivial fixed point of kick strength `k`.
    pub fn new(two_s: usize, k: f64) -> Result<Self> {
        let fp = find_fixed_point(k)?;
        let (theta0, phi0) = fp.angles();
        let mut frame = Self::with_target(two_s, k, theta0, phi0)?;
        frame.fixed_point = Some(fp);
        Ok(frame)
    }

    /// Frame centered on an arbitrary direction `(θ0, φ0)`.
    pub fn with_target(two_s: usize, k: f64, theta0: f64, phi0: f64) -> Result<Self> {
        if two_s == 0 {
            return Err(Error::invalid("S", "spin must be at least 1/2"));
        }
        if k.is_nan() || k <= 0.0 {
            return Err(Error::invalid("k", format!("kick strength must be positive, got {k}")));
        }
        let n = two_s + 1;
        let s = two_s as f64 / 2.0;
        let eig = JxEigen::new(two_s)?;
        let d_quarter = eig.wigner_d(std::f64::consts::FRAC_PI_2);
        let d_theta = eig.wigner_d(theta0);
        let kick = kick_phases(two_s, k);
        let z: Vec<Complex64> = (0..n)
            .map(|i| Complex64::from_polar(1.0, -phi0 * (i as f64 - s)))
            .collect();
        // M = exp(iφ0 Jz) U_KT exp(-iφ0 Jz), then U_rot = d(θ0)ᵀ M d(θ0).
        let m_entry = |i: usize, j: usize| z[i].conj() * kick[i] * d_quarter[(i, j)] * z[j];
        let m_re = Mat::from_fn(n, n, |i, j| m_entry(i, j).re);
        let m_im = Mat::from_fn(n, n, |i, j| m_entry(i, j).im);
        let dt = d_theta.transpose();
        let u_re = dt * (&m_re * &d_theta);
        let u_im = dt * (&m_im * &d_theta);
        Ok(RotatedFrame {
            two_s,
            k,
            theta0,
            phi0,
            fixed_point: None,
            u_rot: DenseUnitary::from_parts(&u_re, &u_im),
        })
    }

    pub fn two_s(&self) -> usize {
        self.two_s
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn target_angles(&self) -> (f64, f64) {
        (self.theta0, self.phi0)
    }

    pub fn fixed_point(&self) -> Option<&FixedPointData> {
        self.fixed_point.as_ref()
    }

    pub fn step_unitary(&self) -> &DenseUnitary {
        &self.u_rot
    }

    /// The frame rotation `R` as a dense matrix.
    pub fn rotation(&self) -> Result<DenseUnitary> {
        let s = self.two_s as f64 / 2.0;
        let d = JxEigen::new(self.two_s)?.wigner_d(self.theta0);
        Ok(DenseUnitary::from_fn(self.two_s + 1, |i, j| {
            Complex64::from_polar(1.0, -self.phi0 * (i as f64 - s)) * d[(i, j)]
        }))
    }

    /// One unitary period in the rotated frame.
    pub fn step(&self, state: &mut SpinState) {
        self.u_rot.apply(state);
    }
}
