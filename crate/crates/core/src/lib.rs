//! Stochastic measurement-and-feedback control of the kicked top.
//!
//! The crate covers three regimes of the same protocol:
//!
//! * [`classical`]: the stroboscopic map on the unit sphere, its nontrivial
//!   fixed point and stability, the contraction maps used for control, and the
//!   closed-form critical control rates.
//! * [`experiments`]: stochastic classical evolution with the order parameter
//!   `O²`, Benettin Lyapunov estimates, phase-space densities and phase-diagram
//!   sweeps.
//! * [`quantum`]: spin-`S` trajectories in the frame where the target fixed
//!   point is `|m = S⟩`, with a Kraus control channel and Born sampling.
//! * [`observables`]: fidelity, displacement, transverse fluctuations,
//!   symmetric-subspace entanglement, ancilla purification and the
//!   full-reset Gaussian references.
//! * [`twa`]: truncated-Wigner semiclassics valid up to `S = 2⁶⁴`.
//! * [`harness`]: configuration, sweep orchestration and the CSV/JSON output
//!   consumed by downstream plotting.
//!
//! All Monte Carlo work is keyed by counter-based RNG streams ([`rng`]) so that
//! results are bitwise independent of the number of worker threads.

pub mod classical;
pub mod error;
pub mod experiments;
pub mod harness;
pub mod observables;
pub mod quantum;
pub mod rng;
pub mod stats;
pub mod twa;

pub use classical::{
    critical_probability, find_fixed_point, kicked_top_step, lyapunov_linearized, moment_threshold, ControlKind,
    ControlParams, ControlRegion, FixedPointData, KickParams, OutsidePolicy, PhasePoint, K_CRITICAL,
};
pub use error::{Error, Result};
pub use harness::{Engine, ExperimentConfig, SweepRow, SweepTable};
pub use quantum::{ControlChannel, RotatedFrame, SpinState};
