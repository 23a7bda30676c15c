use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution};

use super::operators::ln_factorials;
use super::spin::SpinState;
use crate::error::{Error, Result};

/// Measurement-and-feedback channel toward `|m = S⟩`.
///
/// In terms of the excitation number `n = S - m`, the Kraus operator with
/// outcome `m_a` removes `j = S - m_a` quanta:
/// `K_j |n⟩ = sqrt(C(n, j)) cos(θ/2)^(n-j) sin(θ/2)^j |n - j⟩`.
/// Each column of every `K_j` has a single nonzero entry.
#[derive(Clone, Debug)]
pub struct ControlChannel {
    two_s: usize,
    theta: f64,
    cos_half: f64,
    sin_half: f64,
    ln_fact: Vec<f64>,
}

/// Result of one control application.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KrausOutcome {
    /// Quanta removed, `S - m_a`.
    pub lost: usize,
}

impl KrausOutcome {
    /// Ancilla outcome label `m_a`.
    pub fn m_a(&self, two_s: usize) -> f64 {
        two_s as f64 / 2.0 - self.lost as f64
    }
}

impl ControlChannel {
    pub fn new(two_s: usize, theta: f64) -> Result<Self> {
        if two_s == 0 {
            return Err(Error::invalid("S", "spin must be at least 1/2"));
        }
        if !(0.0..=std::f64::consts::PI).contains(&theta) {
            return Err(Error::invalid("theta", format!("must lie in [0, π], got {theta}")));
        }
        let mut cos_half = (0.5 * theta).cos();
        // cos(π/2) is 6e-17 in floating point; treat θ = π as a full reset.
        if cos_half.abs() < 1e-15 {
            cos_half = 0.0;
        }
        Ok(ControlChannel {
            two_s,
            theta,
            cos_half,
            sin_half: (0.5 * theta).sin(),
            ln_fact: ln_factorials(two_s),
        })
    }

    pub fn two_s(&self) -> usize {
        self.two_s
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Contraction factor `a = cos(θ/2)`.
    pub fn a(&self) -> f64 {
        self.cos_half
    }

    pub fn is_full_reset(&self) -> bool {
        self.cos_half == 0.0
    }

    /// `ln |⟨n - j| K_j |n⟩|`, or `None` where the element vanishes.
    fn ln_element(&self, n: usize, j: usize) -> Option<f64> {
        if j > n {
            return None;
        }
        let kept = n - j;
        let mut ln = 0.5 * (self.ln_fact[n] - self.ln_fact[j] - self.ln_fact[kept]);
        if kept > 0 {
            if self.cos_half == 0.0 {
                return None;
            }
            ln += kept as f64 * self.cos_half.ln();
        }
        if j > 0 {
            if self.sin_half == 0.0 {
                return None;
            }
            ln += j as f64 * self.sin_half.ln();
        }
        Some(ln)
    }

    /// Matrix element `⟨n - j| K_j |n⟩`.
    pub fn element(&self, n: usize, j: usize) -> f64 {
        self.ln_element(n, j).map_or(0.0, f64::exp)
    }

    /// `K_j ψ` without normalization. Indices follow the state (`i = S + m`,
    /// so `n = 2S - i`).
    pub fn apply_kraus(&self, psi: &SpinState, lost: usize) -> Vec<Complex64> {
        let dim = self.two_s + 1;
        let mut out = vec![Complex64::new(0.0, 0.0); dim];
        for n in lost..dim {
            if let Some(ln) = self.ln_element(n, lost) {
                out[self.two_s - (n - lost)] = psi.amplitudes()[self.two_s - n] * ln.exp();
            }
        }
        out
    }

    /// Born probabilities `p(j) = ‖K_j ψ‖²` for `j = 0..=2S`. Costs O(S²).
    pub fn born_probabilities(&self, psi: &SpinState) -> Vec<f64> {
        let dim = self.two_s + 1;
        let weights = excitation_weights(psi.amplitudes());
        (0..dim)
            .map(|j| {
                (j..dim)
                    .filter_map(|n| self.ln_element(n, j).map(|ln| weights[n] * (2.0 * ln).exp()))
                    .sum()
            })
            .collect()
    }

    /// Draws the outcome from the exact Born distribution in O(S): pick
    /// `n` with weight `|ψ_n|²`, then `j ~ Binomial(n, sin²(θ/2))`. The
    /// marginal of `j` is `Σ_n |ψ_n|² C(n,j) s^{2j} c^{2(n-j)} = p(j)`.
    pub fn sample_outcome<R: Rng + ?Sized>(&self, psi: &SpinState, rng: &mut R) -> Result<KrausOutcome> {
        self.sample_from_weights(&excitation_weights(psi.amplitudes()), rng)
    }

    /// Two-stage draw from excitation weights `w_n` that must sum to one.
    pub(crate) fn sample_from_weights<R: Rng + ?Sized>(&self, weights: &[f64], rng: &mut R) -> Result<KrausOutcome> {
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-8 {
            return Err(Error::ChannelCompleteness { deviation: total - 1.0 });
        }
        let u: f64 = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut n = 0;
        for (idx, w) in weights.iter().enumerate() {
            if *w > 0.0 {
                n = idx;
            }
            acc += w;
            if u < acc {
                break;
            }
        }
        let s2 = self.sin_half * self.sin_half;
        let lost = if self.cos_half == 0.0 {
            n
        } else if s2 == 0.0 || n == 0 {
            0
        } else {
            Binomial::new(n as u64, s2)
                .map_err(|e| Error::LinAlg(format!("binomial sampler: {e}")))?
                .sample(rng) as usize
        };
        Ok(KrausOutcome { lost })
    }

    /// Samples an outcome and replaces `psi` by `K_j ψ / sqrt(p(j))`.
    pub fn sample_and_update<R: Rng + ?Sized>(&self, psi: &mut SpinState, rng: &mut R) -> Result<KrausOutcome> {
        let outcome = self.sample_outcome(psi, rng)?;
        self.update(psi, outcome)?;
        Ok(outcome)
    }

    /// Applies a given outcome.
    pub fn update(&self, psi: &mut SpinState, outcome: KrausOutcome) -> Result<()> {
        self.update_branches(&mut [psi.amplitudes_mut()], outcome)
    }

    /// Applies `K_j` to every branch of a joint state and renormalizes them
    /// together. Log-magnitudes are shifted by their common maximum so the
    /// result never underflows.
    pub(crate) fn update_branches(&self, branches: &mut [&mut [Complex64]], outcome: KrausOutcome) -> Result<()> {
        let j = outcome.lost;
        let dim = self.two_s + 1;
        let mut best = f64::NEG_INFINITY;
        let mut logs = vec![vec![f64::NEG_INFINITY; dim]; branches.len()];
        for (b, amps) in branches.iter().enumerate() {
            for n in j..dim {
                let a = amps[self.two_s - n];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                if let Some(ln) = self.ln_element(n, j) {
                    logs[b][n] = ln + a.norm().ln();
                    best = best.max(logs[b][n]);
                }
            }
        }
        if best == f64::NEG_INFINITY {
            return Err(Error::ChannelCompleteness { deviation: -1.0 });
        }
        let mut norm = 0.0;
        for (b, amps) in branches.iter_mut().enumerate() {
            let mut out = vec![Complex64::new(0.0, 0.0); dim];
            for n in j..dim {
                if logs[b][n] > f64::NEG_INFINITY {
                    let a = amps[self.two_s - n];
                    let v = Complex64::from_polar((logs[b][n] - best).exp(), a.arg());
                    norm += v.norm_sqr();
                    out[self.two_s - (n - j)] = v;
                }
            }
            amps.copy_from_slice(&out);
        }
        let f = 1.0 / norm.sqrt();
        for amps in branches.iter_mut() {
            for a in amps.iter_mut() {
                *a *= f;
            }
        }
        Ok(())
    }

    /// Largest entry of `|Σ_j K_j† K_j - I|`. Because `K_j` maps `|n⟩` to
    /// `|n - j⟩` only, the sum is diagonal and each diagonal entry is
    /// accumulated explicitly over all outcomes.
    pub fn completeness_defect(&self) -> f64 {
        let dim = self.two_s + 1;
        (0..dim)
            .map(|n| {
                let sum: f64 = (0..=n).map(|j| self.element(n, j).powi(2)).sum();
                (sum - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// `|ψ_n|²` indexed by excitation number `n = S - m`.
pub(crate) fn excitation_weights(amps: &[Complex64]) -> Vec<f64> {
    amps.iter().rev().map(|a| a.norm_sqr()).collect()
}
