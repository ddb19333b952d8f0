//! Exact sampling from a learned copula.
//!
//! The generator is the Laplace transform of a discrete mixing variable `M`
//! whose atoms are the network's input-to-output paths. `M` is drawn by a
//! backward walk from the output node, picking each predecessor with the
//! probabilities of the current unit's mixing row and collecting the decay
//! rate of every unit visited. Given `M`, the coordinates
//! `phi(E_i / M)` with `E_i ~ Exp(1)` follow the copula.

use rand::Rng;
use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::network::{GeneratorNetwork, NetTape};
use crate::rng;

/// One draw of the mixing variable.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingSample {
    /// Sum of the decay rates along `path`.
    pub m: f64,
    /// Hidden unit visited in each layer, layer 1 first (0-based indices).
    pub path: Vec<usize>,
}

/// Index drawn from a discrete distribution given by `probs`.
fn categorical<R: Rng>(probs: &[f64], rng: &mut R) -> usize {
    let x: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if x < acc {
            return i;
        }
    }
    // Rounding left a sliver above the cumulative sum: take the last
    // category with positive mass.
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
}

/// Draw `M` by the backward reward walk.
pub fn sample_m<R: Rng>(net: &GeneratorNetwork, rng: &mut R) -> MixingSample {
    let depth = net.depth();
    let widths = net.widths();
    let mut path = vec![0; depth];
    let mut m = 0.0;
    // Output layer has a single row over the last hidden layer.
    let mut unit = categorical(net.mixing(depth + 1), rng);
    for layer in (1..=depth).rev() {
        path[layer - 1] = unit;
        m += net.rates(layer)[unit];
        if layer > 1 {
            let cols = widths[layer - 2];
            let row = &net.mixing(layer)[unit * cols..(unit + 1) * cols];
            unit = categorical(row, rng);
        }
    }
    MixingSample { m, path }
}

/// `n` points from the `d`-dimensional copula; point `i` uses its own random
/// stream, so the output is identical whatever the thread count.
pub fn sample_u(net: &GeneratorNetwork, dim: usize, n: usize, seed: u64) -> Result<Dataset> {
    if dim < 2 {
        return Err(Error::domain(format!("sample dimension must be at least 2, got {dim}")));
    }
    if n == 0 {
        return Err(Error::domain("sample count must be positive"));
    }
    let rows: Vec<Result<Vec<f64>>> = (0..n)
        .into_par_iter()
        .map_init(NetTape::default, |tape, i| {
            let mut r = rng::stream(seed, i as u64);
            let mix = sample_m(net, &mut r);
            (0..dim)
                .map(|_| {
                    let e = rng::unit_exponential(&mut r);
                    net.forward(e / mix.m, 0, tape)?;
                    Ok(tape.output()[0].clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0))
                })
                .collect()
        })
        .collect();
    let mut values = Vec::with_capacity(n * dim);
    for row in rows {
        values.extend(row?);
    }
    Dataset::normalized(dim, values)
}
