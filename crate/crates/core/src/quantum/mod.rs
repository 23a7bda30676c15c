//! Spin-`S` trajectories in the frame where the control target is `|m = S⟩`.
//!
//! States are stored by index `i = m + S`. Spin lengths are carried as
//! `two_s = 2S` so half-integer spins are exact.

mod channel;
mod frame;
mod operators;
mod spin;
mod trajectory;

pub(crate) use channel::excitation_weights;
pub use channel::{ControlChannel, KrausOutcome};
pub use frame::{DenseUnitary, RotatedFrame};
pub use operators::{kicked_top_unitary, ln_factorials, wigner_d_y};
pub use spin::SpinState;
pub use trajectory::{evolve_quantum_trajectory, QuantumStep, TrajectoryRecord};
