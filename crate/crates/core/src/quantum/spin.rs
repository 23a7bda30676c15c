use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::operators::ln_factorials;
use crate::error::{Error, Result};

/// Normalized amplitudes `ψ_m`, `m = -S..=S`, stored at index `m + S`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinState {
    two_s: usize,
    amps: Vec<Complex64>,
}

impl SpinState {
    /// Basis state with index `i = m + S`.
    pub fn basis(two_s: usize, i: usize) -> Result<Self> {
        if two_s == 0 {
            return Err(Error::invalid("S", "spin must be at least 1/2"));
        }
        if i > two_s {
            return Err(Error::invalid("m", format!("index {i} outside 0..={two_s}")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); two_s + 1];
        amps[i] = Complex64::new(1.0, 0.0);
        Ok(SpinState { two_s, amps })
    }

    /// The control target `|m = S⟩`.
    pub fn top(two_s: usize) -> Result<Self> {
        Self::basis(two_s, two_s)
    }

    /// Wraps and normalizes an amplitude vector of length `2S + 1`.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() < 2 {
            return Err(Error::invalid("amplitudes", "need at least two components"));
        }
        let mut s = SpinState {
            two_s: amps.len() - 1,
            amps,
        };
        let n = s.norm_sqr();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::NormViolation { deviation: n - 1.0 });
        }
        s.scale(1.0 / n.sqrt());
        Ok(s)
    }

    /// Spin coherent state pointing along `(θ, φ)`, equal to
    /// `exp(-iφJz) exp(-iθJy) |S⟩`.
    pub fn coherent(two_s: usize, theta: f64, phi: f64) -> Result<Self> {
        let lf = ln_factorials(two_s);
        let (c, s) = ((0.5 * theta).cos(), (0.5 * theta).sin());
        let half = two_s as f64 / 2.0;
        let amps = (0..=two_s)
            .map(|i| {
                // i = S + m factors of cos, 2S - i of sin.
                let ln_binom = lf[two_s] - lf[i] - lf[two_s - i];
                let mag = (0.5 * ln_binom).exp() * c.powi(i as i32) * s.powi((two_s - i) as i32);
                let m = i as f64 - half;
                Complex64::from_polar(mag, -m * phi)
            })
            .collect();
        Self::from_amplitudes(amps)
    }

    pub fn two_s(&self) -> usize {
        self.two_s
    }

    pub fn spin(&self) -> f64 {
        self.two_s as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.two_s + 1
    }

    /// Magnetic quantum number of index `i`.
    pub fn m_of(&self, i: usize) -> f64 {
        i as f64 - self.spin()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn scale(&mut self, f: f64) {
        for a in &mut self.amps {
            *a *= f;
        }
    }

    /// Renormalizes in place and returns the prior squared norm.
    pub fn normalize(&mut self) -> f64 {
        let n = self.norm_sqr();
        self.scale(1.0 / n.sqrt());
        n
    }

    pub fn check_norm(&self, tol: f64) -> Result<()> {
        let dev = self.norm_sqr() - 1.0;
        if dev.abs() > tol {
            return Err(Error::NormViolation { deviation: dev });
        }
        Ok(())
    }

    /// `⟨Jx⟩, ⟨Jy⟩, ⟨Jz⟩` from the ladder-operator band.
    pub fn expect_j(&self) -> [f64; 3] {
        let s = self.spin();
        let mut jz = 0.0;
        let mut jplus = Complex64::new(0.0, 0.0);
        for (i, a) in self.amps.iter().enumerate() {
            let m = i as f64 - s;
            jz += m * a.norm_sqr();
            if i < self.two_s {
                let c = (s * (s + 1.0) - m * (m + 1.0)).sqrt();
                jplus += self.amps[i + 1].conj() * a * c;
            }
        }
        [jplus.re, jplus.im, jz]
    }

    /// `⟨Jz²⟩`.
    pub fn expect_jz2(&self) -> f64 {
        let s = self.spin();
        self.amps
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let m = i as f64 - s;
                m * m * a.norm_sqr()
            })
            .sum()
    }

    /// `⟨J²⟩` computed from the components, for consistency checks.
    pub fn expect_j_squared(&self) -> f64 {
        let s = self.spin();
        let mut jz2 = 0.0;
        let mut jpjm = 0.0;
        for (i, a) in self.amps.iter().enumerate() {
            let m = i as f64 - s;
            jz2 += m * m * a.norm_sqr();
            // J+J- |m⟩ = (S(S+1) - m(m-1)) |m⟩
            jpjm += (s * (s + 1.0) - m * (m - 1.0)) * a.norm_sqr();
        }
        // J² = J+J- + Jz² - Jz
        let jz = self.expect_j()[2];
        jpjm + jz2 - jz
    }

    pub fn inner(&self, other: &SpinState) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }
}
