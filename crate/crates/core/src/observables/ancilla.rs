use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::entropy::entropy_bits;
use crate::error::{Error, Result};
use crate::quantum::{excitation_weights, ControlChannel, RotatedFrame, SpinState};

/// How the logical qubit is embedded in the top.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Encoding {
    /// Two Haar-random orthonormal states, drawn per trajectory.
    #[default]
    Haar,
    /// `|S⟩` and `|S - 1⟩`.
    TopPair,
}

/// Joint state `(|0⟩|ψ0⟩ + |1⟩|ψ1⟩)/√2` of an ancilla qubit and the top,
/// stored as two unnormalized branches.
#[derive(Clone, Debug, PartialEq)]
pub struct AncillaEncodedState {
    two_s: usize,
    branches: [Vec<Complex64>; 2],
}

impl AncillaEncodedState {
    pub fn new(psi0: &SpinState, psi1: &SpinState) -> Result<Self> {
        if psi0.two_s() != psi1.two_s() {
            return Err(Error::invalid("encoding", "states have different spins"));
        }
        if psi0.inner(psi1).norm() > 1e-10 {
            return Err(Error::invalid("encoding", "states must be orthogonal"));
        }
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let scale = |s: &SpinState| s.amplitudes().iter().map(|a| a * h).collect();
        Ok(AncillaEncodedState {
            two_s: psi0.two_s(),
            branches: [scale(psi0), scale(psi1)],
        })
    }

    pub fn encode<R: Rng + ?Sized>(two_s: usize, encoding: Encoding, rng: &mut R) -> Result<Self> {
        match encoding {
            Encoding::TopPair => Self::new(&SpinState::top(two_s)?, &SpinState::basis(two_s, two_s - 1)?),
            Encoding::Haar => {
                let mut draw = || -> Vec<Complex64> {
                    (0..=two_s)
                        .map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
                        .collect()
                };
                let psi0 = SpinState::from_amplitudes(draw())?;
                let raw = SpinState::from_amplitudes(draw())?;
                let overlap = psi0.inner(&raw);
                let amps = raw
                    .amplitudes()
                    .iter()
                    .zip(psi0.amplitudes())
                    .map(|(b, a)| b - a * overlap)
                    .collect();
                Self::new(&psi0, &SpinState::from_amplitudes(amps)?)
            }
        }
    }

    pub fn joint_norm_sqr(&self) -> f64 {
        self.branches.iter().flat_map(|b| b.iter()).map(|a| a.norm_sqr()).sum()
    }

    /// Reduced ancilla density matrix `[[ρ00, ρ01], [ρ10, ρ11]]`.
    pub fn reduced_ancilla(&self) -> [[Complex64; 2]; 2] {
        let ip = |a: &[Complex64], b: &[Complex64]| -> Complex64 { a.iter().zip(b).map(|(x, y)| x * y.conj()).sum() };
        let [b0, b1] = &self.branches;
        [[ip(b0, b0), ip(b0, b1)], [ip(b1, b0), ip(b1, b1)]]
    }

    /// Von Neumann entropy of the ancilla in bits.
    pub fn ancilla_entropy(&self) -> f64 {
        let rho = self.reduced_ancilla();
        let tr = rho[0][0].re + rho[1][1].re;
        let det = rho[0][0].re * rho[1][1].re - rho[0][1].norm_sqr();
        let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
        entropy_bits([0.5 * tr + disc, 0.5 * tr - disc])
    }

    pub fn unitary_step(&mut self, frame: &RotatedFrame) {
        let n = self.two_s + 1;
        let (mut re, mut im) = (vec![0.0; n], vec![0.0; n]);
        for b in &mut self.branches {
            frame.step_unitary().apply_into(b, &mut re, &mut im);
            for (a, (r, i)) in b.iter_mut().zip(re.iter().zip(&im)) {
                *a = Complex64::new(*r, *i);
            }
        }
    }

    /// One control application; outcome probabilities are summed over the
    /// ancilla index.
    pub fn control_step<R: Rng + ?Sized>(&mut self, channel: &ControlChannel, rng: &mut R) -> Result<()> {
        let mut w = excitation_weights(&self.branches[0]);
        for (x, y) in w.iter_mut().zip(excitation_weights(&self.branches[1])) {
            *x += y;
        }
        let outcome = channel.sample_from_weights(&w, rng)?;
        let [b0, b1] = &mut self.branches;
        channel.update_branches(&mut [b0.as_mut_slice(), b1.as_mut_slice()], outcome)
    }
}

/// Evolves one Bell-encoded trajectory and returns `S_anc` at the scheduled
/// times. The coin and Born draws share `rng`; `encoding_rng` only feeds the
/// Haar encoding.
#[allow(clippy::too_many_arguments)]
pub fn ancilla_evolve_and_entropy<R: Rng + ?Sized, E: Rng + ?Sized>(
    frame: &RotatedFrame,
    channel: &ControlChannel,
    p: f64,
    schedule: &[usize],
    encoding: Encoding,
    encoding_rng: &mut E,
    rng: &mut R,
) -> Result<Vec<(usize, f64)>> {
    if schedule.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid("schedule", "must be sorted"));
    }
    let mut state = AncillaEncodedState::encode(frame.two_s(), encoding, encoding_rng)?;
    let steps = schedule.last().copied().unwrap_or(0);
    let mut out = Vec::with_capacity(schedule.len());
    let mut next = 0;
    for t in 0..=steps {
        if t > 0 {
            let u: f64 = rng.random();
            if u < p {
                state.control_step(channel, rng)?;
            } else {
                state.unitary_step(frame);
            }
            let dev = state.joint_norm_sqr() - 1.0;
            if dev.abs() > 1e-8 {
                return Err(Error::NormViolation { deviation: dev });
            }
        }
        while next < schedule.len() && schedule[next] == t {
            out.push((t, state.ancilla_entropy()));
            next += 1;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};
    use std::f64::consts::PI;

    #[test]
    fn starts_maximally_entangled() {
        let mut rng = stream(0, Purpose::Encoding, 0, 0);
        for enc in [Encoding::Haar, Encoding::TopPair] {
            let st = AncillaEncodedState::encode(16, enc, &mut rng).unwrap();
            assert!((st.ancilla_entropy() - 1.0).abs() < 1e-12);
            assert!((st.joint_norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn unitary_dynamics_keep_one_bit() {
        let frame = RotatedFrame::new(16, 8.0).unwrap();
        let ch = ControlChannel::new(16, PI / 2.0).unwrap();
        let sched: Vec<usize> = (0..=100).collect();
        let mut enc = stream(1, Purpose::Encoding, 0, 0);
        let mut rng = stream(1, Purpose::Dynamics, 0, 0);
        let out = ancilla_evolve_and_entropy(&frame, &ch, 0.0, &sched, Encoding::Haar, &mut enc, &mut rng).unwrap();
        assert!(out.iter().all(|(_, s)| (s - 1.0).abs() < 1e-12));
    }

    #[test]
    fn one_full_reset_purifies() {
        let frame = RotatedFrame::new(16, 8.0).unwrap();
        let ch = ControlChannel::new(16, PI).unwrap();
        let mut enc = stream(2, Purpose::Encoding, 0, 0);
        let mut rng = stream(2, Purpose::Dynamics, 0, 0);
        let out = ancilla_evolve_and_entropy(&frame, &ch, 1.0, &[0, 1], Encoding::Haar, &mut enc, &mut rng).unwrap();
        assert!((out[0].1 - 1.0).abs() < 1e-12);
        assert!(out[1].1.abs() < 1e-12);
    }

    #[test]
    fn top_pair_is_partly_protected() {
        // |S⟩ is dark, so the |S-1⟩ branch decides what a control step learns.
        let frame = RotatedFrame::new(8, 8.0).unwrap();
        let ch = ControlChannel::new(8, PI / 2.0).unwrap();
        let mut enc = stream(3, Purpose::Encoding, 0, 0);
        let mut rng = stream(3, Purpose::Dynamics, 0, 0);
        let out = ancilla_evolve_and_entropy(&frame, &ch, 1.0, &[1], Encoding::TopPair, &mut enc, &mut rng).unwrap();
        assert!(out[0].1 < 1.0 && out[0].1 >= 0.0);
    }

    #[test]
    fn rejects_non_orthogonal_pair() {
        let a = SpinState::top(4).unwrap();
        assert!(AncillaEncodedState::new(&a, &a).is_err());
    }
}
