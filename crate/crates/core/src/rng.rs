//! Deterministic random streams.
//!
//! Every stochastic routine takes a `u64` seed. Child seeds are derived from a
//! parent seed and a task index with SplitMix64, and each seed drives a
//! ChaCha8 stream. ChaCha is counter-based, so the sequence for a given seed
//! is fixed by the algorithm and reproducible in any language.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// The generator used throughout the crate.
pub type StreamRng = ChaCha8Rng;

/// One round of the SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `index`-th child task of `parent`.
pub fn child_seed(parent: u64, index: u64) -> u64 {
    splitmix64(splitmix64(parent) ^ splitmix64(index.wrapping_add(0x632B_E59B_D9B4_E019)))
}

/// Seed for a path of task indices, e.g. `(suite, case, task)`.
pub fn path_seed(root: u64, path: &[u64]) -> u64 {
    path.iter().fold(root, |s, &i| child_seed(s, i))
}

pub fn stream(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniformly distributed unit vector.
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        let n = v.norm();
        if n > 1e-12 {
            return v / n;
        }
    }
}

/// Uniformly distributed point in the closed ball of the given radius.
pub fn in_ball<R: Rng + ?Sized>(rng: &mut R, dim: usize, radius: f64) -> DVector<f64> {
    let dir = unit_vector(rng, dim);
    let u: f64 = rng.random();
    dir * (radius * u.powf(1.0 / dim as f64))
}
