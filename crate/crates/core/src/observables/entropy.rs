use faer::{c64, Mat};

use crate::error::{Error, Result};
use crate::quantum::{ln_factorials, SpinState};

/// `-Σ w log₂ w` over the nonzero weights.
pub fn entropy_bits(weights: impl IntoIterator<Item = f64>) -> f64 {
    weights.into_iter().filter(|&w| w > 0.0).map(|w| -w * w.log2()).sum()
}

/// Half-cut entanglement entropy, in bits, of the symmetric `2S`-qubit state
/// with Dicke amplitudes `ψ`. Requires integer `S`.
///
/// Writing the Dicke state with `k` excitations as a sum over splits
/// `k = k_A + k_B` gives the `(S+1)×(S+1)` coefficient matrix
/// `M[k_A, k_B] = ψ_k sqrt(C(S,k_A) C(S,k_B) / C(2S,k))`, whose squared
/// singular values are the Schmidt weights.
pub fn bipartite_entropy(psi: &SpinState) -> Result<f64> {
    let two_s = psi.two_s();
    if two_s % 2 != 0 {
        return Err(Error::invalid("S", "bipartite entropy needs an integer spin"));
    }
    let half = two_s / 2;
    let lf = ln_factorials(two_s);
    let amps = psi.amplitudes();
    let m = Mat::<c64>::from_fn(half + 1, half + 1, |ka, kb| {
        let k = ka + kb;
        let ln = 0.5
            * ((lf[half] - lf[ka] - lf[half - ka]) + (lf[half] - lf[kb] - lf[half - kb])
                - (lf[two_s] - lf[k] - lf[two_s - k]));
        let a = amps[k];
        c64::new(a.re, a.im) * ln.exp()
    });
    let sv = m
        .singular_values()
        .map_err(|e| Error::LinAlg(format!("singular values failed: {e:?}")))?;
    let weights: Vec<f64> = sv.iter().map(|s| s * s).collect();
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-8 {
        return Err(Error::NormViolation { deviation: total - 1.0 });
    }
    Ok(entropy_bits(weights.into_iter().map(|w| w / total)))
}

/// `B = E[S²] / E[S]²`, or `Undefined` when the mean is too close to zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BinderRatio {
    Defined(f64),
    Undefined,
}

impl BinderRatio {
    pub fn value(&self) -> Option<f64> {
        match self {
            BinderRatio::Defined(b) => Some(*b),
            BinderRatio::Undefined => None,
        }
    }
}

pub fn binder_ratio(samples: &[f64]) -> BinderRatio {
    if samples.len() < 2 {
        return BinderRatio::Undefined;
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if mean.abs() < 1e-12 {
        return BinderRatio::Undefined;
    }
    let second = samples.iter().map(|x| x * x).sum::<f64>() / n;
    BinderRatio::Defined(second / (mean * mean))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};
    use num_complex::Complex64;
    use rand_distr::{Distribution, StandardNormal};

    fn random_symmetric(two_s: usize, seed: u64, i: u64) -> SpinState {
        let mut rng = stream(seed, Purpose::Encoding, two_s as u64, i);
        let amps = (0..=two_s)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im)
            })
            .collect();
        SpinState::from_amplitudes(amps).unwrap()
    }

    /// Entropy from the explicit 2^{2S}-dimensional qubit vector.
    fn brute_force(psi: &SpinState) -> f64 {
        let n_qubits = psi.two_s();
        let half = n_qubits / 2;
        let lf = ln_factorials(n_qubits);
        let dim_a = 1usize << half;
        let m = Mat::<c64>::from_fn(dim_a, dim_a, |a, b| {
            let bits = (a << half) | b;
            let k = bits.count_ones() as usize;
            // Index i = S + m counts excitations from the bottom: m = k - S.
            let norm = (-(lf[n_qubits] - lf[k] - lf[n_qubits - k]) * 0.5).exp();
            let amp = psi.amplitudes()[k] * norm;
            c64::new(amp.re, amp.im)
        });
        let sv = m.singular_values().unwrap();
        entropy_bits(sv.iter().map(|s| s * s))
    }

    #[test]
    fn matches_brute_force() {
        for s in 2..=6 {
            for i in 0..100 {
                let psi = random_symmetric(2 * s, 1, i);
                let fast = bipartite_entropy(&psi).unwrap();
                let slow = brute_force(&psi);
                assert!((fast - slow).abs() < 1e-10, "S={s} i={i}: {fast} vs {slow}");
                assert!(fast <= ((s + 1) as f64).log2() + 1e-12);
            }
        }
    }

    #[test]
    fn product_and_single_excitation() {
        let top = SpinState::top(20).unwrap();
        assert!(bipartite_entropy(&top).unwrap().abs() < 1e-12);
        let bottom = SpinState::basis(20, 0).unwrap();
        assert!(bipartite_entropy(&bottom).unwrap().abs() < 1e-12);
        let one = SpinState::basis(20, 19).unwrap();
        assert!((bipartite_entropy(&one).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invariant_under_z_phases() {
        let psi = random_symmetric(12, 3, 0);
        let base = bipartite_entropy(&psi).unwrap();
        let chi = 0.37;
        let amps = psi
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(i, a)| a * Complex64::from_polar(1.0, chi * i as f64 + 1.1))
            .collect();
        let rotated = SpinState::from_amplitudes(amps).unwrap();
        assert!((bipartite_entropy(&rotated).unwrap() - base).abs() < 1e-12);
    }

    #[test]
    fn half_integer_rejected() {
        assert!(bipartite_entropy(&SpinState::top(3).unwrap()).is_err());
    }

    #[test]
    fn binder_edge_cases() {
        assert!((binder_ratio(&[0.7, 0.7, 0.7]).value().unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(binder_ratio(&[0.0, 3.0]), BinderRatio::Defined(2.0));
        assert_eq!(binder_ratio(&[0.0, 0.0]), BinderRatio::Undefined);
        assert_eq!(binder_ratio(&[1.0]), BinderRatio::Undefined);
        assert!(binder_ratio(&[0.1, 0.5, 0.9]).value().unwrap() >= 1.0);
    }
}
