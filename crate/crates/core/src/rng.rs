//! Seeded random substreams.
//!
//! Every random draw in the crate comes from `substream(seed, name)`: one
//! user-level seed fans out into independent named ChaCha streams, so adding
//! draws to one experiment never perturbs another.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type StreamRng = ChaCha8Rng;

pub const TEMPLATES: &str = "templates";
pub const DATASET: &str = "dataset";
pub const SAMPLER: &str = "sampler";
pub const QUERIES: &str = "queries";

fn fnv1a(name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

pub fn substream(seed: u64, name: &str) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(fnv1a(name));
    rng
}

pub fn gaussian_vec<R: Rng + ?Sized>(rng: &mut R, dim: usize, scale: f64) -> Vec<f64> {
    (0..dim).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Uniform sample from the closed ball of radius `radius` in `ℝ^dim`.
pub fn ball_vec<R: Rng + ?Sized>(rng: &mut R, dim: usize, radius: f64) -> Vec<f64> {
    let dir = gaussian_vec(rng, dim, 1.0);
    let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return vec![0.0; dim];
    }
    let u: f64 = rng.random();
    let r = radius * u.powf(1.0 / dim as f64);
    dir.into_iter().map(|v| v * r / norm).collect()
}
