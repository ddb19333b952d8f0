//! Seeded random streams.
//!
//! Every stochastic routine draws from ChaCha8 keyed by the user seed. Work
//! items that may be processed in parallel (sample points, outlier rows)
//! each get their own stream number, so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream reserved for sequential work (shuffles, splits).
pub const SEQUENTIAL_STREAM: u64 = u64::MAX;

/// Generator for sequential draws under `seed`.
pub fn sequential(seed: u64) -> ChaCha8Rng {
    stream(seed, SEQUENTIAL_STREAM)
}

/// Independent stream `index` under `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Unit exponential by inversion, `-ln(1 - U)` with `U` in `[0, 1)`.
pub fn unit_exponential<R: rand::Rng>(rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    -(-u).ln_1p()
}

/// Uniform on the open interval `(0, 1)`.
pub fn open_uniform<R: rand::Rng>(rng: &mut R) -> f64 {
    rng.sample(rand::distr::Open01)
}
