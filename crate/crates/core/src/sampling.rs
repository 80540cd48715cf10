//! Seeded random sample points for pointwise checks.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::point::Dims;

/// Default half-width of the sampling box.
pub const DEFAULT_RADIUS: f64 = 2.0;

/// `count` points drawn uniformly from `[-radius, radius]^dim`.
pub fn uniform_points(dims: Dims, count: usize, seed: u64, radius: f64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (0..dims.dim()).map(|_| rng.random_range(-radius..radius)).collect())
        .collect()
}

/// Points drawn from boxes centred on `centre` with per-coordinate
/// half-widths `radius`.
pub fn points_around(centre: &[f64], radius: &[f64], count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            centre
                .iter()
                .zip(radius)
                .map(|(&c, &r)| if r > 0.0 { c + rng.random_range(-r..r) } else { c })
                .collect()
        })
        .collect()
}
