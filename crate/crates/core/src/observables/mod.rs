//! Measures evaluated on quantum states and trajectory ensembles.
//!
//! All single-state functions take the state in the rotated frame, where the
//! target is `|m = S⟩`.

mod ancilla;
mod entropy;
mod fullreset;
mod peak;
mod runner;

use crate::quantum::SpinState;

pub use ancilla::{ancilla_evolve_and_entropy, AncillaEncodedState, Encoding};
pub use entropy::{binder_ratio, bipartite_entropy, entropy_bits, BinderRatio};
pub use fullreset::{fullreset_analytics, FullResetAnalytics};
pub use peak::{variance_peak, VariancePeak};
pub use runner::{
    ancilla_point, quantum_point, InitialQuantumState, ObservableKind, QuantumPointConfig, QuantumPointResult,
};

/// Fidelity to the target, `|ψ_S|²`.
pub fn fidelity(psi: &SpinState) -> f64 {
    psi.amplitudes()[psi.two_s()].norm_sqr()
}

/// `|⟨S⟩/S - ẑ|²`, the squared displacement of the mean spin from the target.
pub fn displacement_r2(psi: &SpinState) -> f64 {
    let s = psi.spin();
    let [x, y, z] = psi.expect_j();
    (x / s).powi(2) + (y / s).powi(2) + (z / s - 1.0).powi(2)
}

/// `(⟨Sx²⟩ + ⟨Sy²⟩) / S(S+1) = 1 - ⟨Sz²⟩ / S(S+1)`.
pub fn transverse_fluctuations(psi: &SpinState) -> f64 {
    let s = psi.spin();
    1.0 - psi.expect_jz2() / (s * (s + 1.0))
}
