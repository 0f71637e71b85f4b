//! Deterministic random streams.
//!
//! Every stream is a `ChaCha8Rng` seeded from a `u64`. Gaussian draws use the
//! Box–Muller transform so that golden files do not depend on the sampling
//! algorithms of external crates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geom::Point2;

pub type Stream = ChaCha8Rng;

pub fn stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of sub-stream `index` derived from `seed`.
pub fn substream_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

/// Two independent standard normals.
pub fn normal_pair<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    let u1 = 1.0 - rng.random::<f64>();
    let u2 = rng.random::<f64>();
    let r = (-2.0 * u1.ln()).sqrt();
    let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
    (r * c, r * s)
}

/// Uniform draw on `[-1,1)^2`.
pub fn uniform_square<R: Rng + ?Sized>(rng: &mut R) -> Point2 {
    let a = rng.random::<f64>();
    let b = rng.random::<f64>();
    Point2::new(2.0 * a - 1.0, 2.0 * b - 1.0)
}

/// Runs `job` on consecutive batches of at most `batch` draws, each with its
/// own sub-stream, in parallel. Results come back in batch order, so any
/// reduction over them is deterministic.
pub fn par_batches<T, F>(total: usize, batch: usize, seed: u64, job: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut Stream, usize) -> T + Sync,
{
    use rayon::prelude::*;
    let batch = batch.max(1);
    let count = total.div_ceil(batch);
    (0..count)
        .into_par_iter()
        .map(|b| {
            let size = batch.min(total - b * batch);
            let mut rng = stream(substream_seed(seed, b as u64));
            job(&mut rng, size)
        })
        .collect()
}

/// Batch size used by Monte Carlo estimators.
pub const MC_BATCH: usize = 4096;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substreams_differ_and_repeat() {
        assert_ne!(substream_seed(1, 0), substream_seed(1, 1));
        assert_ne!(substream_seed(1, 0), substream_seed(2, 0));
        assert_eq!(substream_seed(7, 3), substream_seed(7, 3));
    }

    #[test]
    fn normal_moments() {
        let mut rng = stream(11);
        let n = 200_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n / 2 {
            let (a, b) = normal_pair(&mut rng);
            s += a + b;
            s2 += a * a + b * b;
        }
        let mean = s / n as f64;
        let var = s2 / n as f64 - mean * mean;
        assert!(mean.abs() < 0.01);
        assert!((var - 1.0).abs() < 0.02);
    }
}
