//! Counter-based random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 stream addressed by
//! `(master seed, purpose, grid point, trajectory)`. Within a trajectory the
//! stream is consumed sequentially, so the step index is the stream position.
//! Nothing depends on which worker runs a trajectory or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// What a stream is used for. Distinct purposes never share key material.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    Initial = 0x1d1,
    Dynamics = 0xd7a,
    Encoding = 0xe4c,
    Bootstrap = 0xb00,
    Reseed = 0x5ee,
}

/// SplitMix64 finalizer.
#[inline]
pub fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[inline]
pub fn combine(a: u64, b: u64) -> u64 {
    splitmix(a ^ splitmix(b))
}

/// Stable key for a grid point, built from the bit patterns of its parameters.
pub fn point_key(params: &[f64]) -> u64 {
    params
        .iter()
        .fold(0x006b_6963_6b74_6f70_u64, |acc, x| combine(acc, x.to_bits()))
}

/// The stream for one trajectory of one grid point.
pub fn stream(seed: u64, purpose: Purpose, point: u64, trajectory: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(combine(combine(seed, purpose as u64), point));
    rng.set_stream(trajectory);
    rng
}
