//! The layered exponential-mixture generator.
//!
//! Every hidden unit multiplies a convex combination of the previous layer by
//! `exp(-B t)`; the output is a convex combination of the last hidden layer.
//! Mixing rows are the softmax of unconstrained weights `phi_A`, decay rates
//! are `exp(phi_B)`. The resulting function is a finite mixture of negative
//! exponentials with unit total mass, hence completely monotone with
//! `phi(0) = 1`.

use rand::distr::{Distribution, Open01, StandardUniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::series::{binomials, leibniz_into, SeriesValue, WeightGradient};

/// Default hidden widths: two layers of ten units.
pub const DEFAULT_WIDTHS: [usize; 2] = [10, 10];

/// Default cap on the number of enumerated mixture atoms.
pub const DEFAULT_PATH_CAP: u128 = 1_000_000;

/// Raw weights and architecture of the generator.
///
/// Immutable once built; training produces fresh networks through
/// [`GeneratorNetwork::with_raw_weights`].
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorNetwork {
    widths: Vec<usize>,
    raw: Vec<f64>,
    /// Offsets of each `phi_A` layer (L + 1 of them) and then each `phi_B`
    /// layer (L of them) into `raw`.
    a_offsets: Vec<usize>,
    b_offsets: Vec<usize>,
    /// Row-stochastic mixing matrices, one per layer 1..=L+1, row-major.
    mix: Vec<Vec<f64>>,
    /// Decay rates, one vector per hidden layer.
    rates: Vec<Vec<f64>>,
}

impl GeneratorNetwork {
    /// Number of raw weights for the given hidden widths.
    pub fn weight_count(widths: &[usize]) -> usize {
        let mut n = 0;
        let mut prev = 1;
        for &h in widths {
            n += h * prev + h;
            prev = h;
        }
        n + prev
    }

    /// Build from a flat raw weight vector in canonical layout.
    pub fn new(widths: Vec<usize>, raw: Vec<f64>) -> Result<Self> {
        if widths.is_empty() {
            return Err(Error::domain("network needs at least one hidden layer"));
        }
        if widths.contains(&0) {
            return Err(Error::domain("hidden widths must be positive"));
        }
        let expected = Self::weight_count(&widths);
        if raw.len() != expected {
            return Err(Error::Structural(format!(
                "expected {expected} raw weights, got {}",
                raw.len()
            )));
        }
        if raw.iter().any(|w| !w.is_finite()) {
            return Err(Error::domain("raw weights must be finite"));
        }

        let depth = widths.len();
        let mut a_offsets = Vec::with_capacity(depth + 1);
        let mut off = 0;
        for layer in 1..=depth + 1 {
            a_offsets.push(off);
            off += layer_rows(&widths, layer) * layer_cols(&widths, layer);
        }
        let mut b_offsets = Vec::with_capacity(depth);
        for &h in &widths {
            b_offsets.push(off);
            off += h;
        }

        let mut net = GeneratorNetwork {
            widths,
            raw,
            a_offsets,
            b_offsets,
            mix: Vec::new(),
            rates: Vec::new(),
        };
        net.derive();
        Ok(net)
    }

    /// Build from nested `phi_A` (layer, row, column) and `phi_B` (layer, unit).
    pub fn from_nested(widths: Vec<usize>, phi_a: &[Vec<Vec<f64>>], phi_b: &[Vec<f64>]) -> Result<Self> {
        let depth = widths.len();
        if phi_a.len() != depth + 1 || phi_b.len() != depth {
            return Err(Error::Structural(format!(
                "depth {depth} needs {} phi_A layers and {depth} phi_B layers, got {} and {}",
                depth + 1,
                phi_a.len(),
                phi_b.len()
            )));
        }
        let mut raw = Vec::with_capacity(Self::weight_count(&widths));
        for (l, layer) in phi_a.iter().enumerate() {
            let (rows, cols) = (layer_rows(&widths, l + 1), layer_cols(&widths, l + 1));
            if layer.len() != rows || layer.iter().any(|r| r.len() != cols) {
                return Err(Error::Structural(format!(
                    "phi_A layer {} must be {rows}x{cols}",
                    l + 1
                )));
            }
            for row in layer {
                raw.extend_from_slice(row);
            }
        }
        for (l, layer) in phi_b.iter().enumerate() {
            if layer.len() != widths[l] {
                return Err(Error::Structural(format!(
                    "phi_B layer {} must have {} entries",
                    l + 1,
                    widths[l]
                )));
            }
            raw.extend_from_slice(layer);
        }
        Self::new(widths, raw)
    }

    /// Seeded initialisation: `phi_A ~ U[0, 1)`, `phi_B ~ U(0, 2)`.
    pub fn init(widths: &[usize], seed: u64) -> Result<Self> {
        if widths.is_empty() || widths.contains(&0) {
            return Err(Error::domain("init needs at least one layer and positive widths"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = Self::weight_count(widths);
        let n_b: usize = widths.iter().sum();
        let mut raw = Vec::with_capacity(n);
        for _ in 0..n - n_b {
            let x: f64 = StandardUniform.sample(&mut rng);
            raw.push(x);
        }
        for _ in 0..n_b {
            let x: f64 = Open01.sample(&mut rng);
            raw.push(2.0 * x);
        }
        Self::new(widths.to_vec(), raw)
    }

    /// Same architecture, new raw weights.
    pub fn with_raw_weights(&self, raw: Vec<f64>) -> Result<Self> {
        Self::new(self.widths.clone(), raw)
    }

    fn derive(&mut self) {
        let depth = self.widths.len();
        self.mix = (1..=depth + 1)
            .map(|layer| {
                let rows = layer_rows(&self.widths, layer);
                let cols = layer_cols(&self.widths, layer);
                let off = self.a_offsets[layer - 1];
                let mut out = vec![0.0; rows * cols];
                for r in 0..rows {
                    let src = &self.raw[off + r * cols..off + (r + 1) * cols];
                    softmax_into(src, &mut out[r * cols..(r + 1) * cols]);
                }
                out
            })
            .collect();
        self.rates = (0..depth)
            .map(|l| {
                let off = self.b_offsets[l];
                self.raw[off..off + self.widths[l]].iter().map(|x| x.exp()).collect()
            })
            .collect();
    }

    /// Number of hidden layers `L`.
    pub fn depth(&self) -> usize {
        self.widths.len()
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn raw_weights(&self) -> &[f64] {
        &self.raw
    }

    pub fn num_weights(&self) -> usize {
        self.raw.len()
    }

    /// Row-stochastic matrix of layer `layer` (1-based, up to `L + 1`), row-major.
    pub fn mixing(&self, layer: usize) -> &[f64] {
        &self.mix[layer - 1]
    }

    /// Decay rates of hidden layer `layer` (1-based).
    pub fn rates(&self, layer: usize) -> &[f64] {
        &self.rates[layer - 1]
    }

    /// `phi_A` as nested (layer, row, column) arrays.
    pub fn phi_a_nested(&self) -> Vec<Vec<Vec<f64>>> {
        (1..=self.depth() + 1)
            .map(|layer| {
                let cols = layer_cols(&self.widths, layer);
                let off = self.a_offsets[layer - 1];
                (0..layer_rows(&self.widths, layer))
                    .map(|r| self.raw[off + r * cols..off + (r + 1) * cols].to_vec())
                    .collect()
            })
            .collect()
    }

    /// `phi_B` as nested (layer, unit) arrays.
    pub fn phi_b_nested(&self) -> Vec<Vec<f64>> {
        (0..self.depth())
            .map(|l| self.raw[self.b_offsets[l]..self.b_offsets[l] + self.widths[l]].to_vec())
            .collect()
    }

    /// Number of input-to-output paths, i.e. mixture atoms.
    pub fn path_count(&self) -> u128 {
        self.widths.iter().map(|&h| h as u128).product()
    }

    /// Derivative stack of the generator at `t`, optionally with the gradient
    /// of every coefficient with respect to the raw weights.
    pub fn phi_eval(&self, t: f64, order: usize, want_adjoints: bool) -> Result<SeriesValue> {
        let mut tape = NetTape::default();
        self.forward(t, order, &mut tape)?;
        let series = SeriesValue::from_coeffs(tape.output().to_vec())?;
        if !want_adjoints {
            return Ok(series);
        }
        let mut adjoints = Vec::with_capacity(order + 1);
        let mut cot = vec![0.0; order + 1];
        for k in 0..=order {
            cot.iter_mut().for_each(|c| *c = 0.0);
            cot[k] = 1.0;
            let mut g = WeightGradient::zeros(self.num_weights());
            self.backprop(&tape, &cot, &mut g);
            adjoints.push(g);
        }
        series.with_adjoints(adjoints)
    }

    /// `(phi(t), phi'(t))` without recording anything for the backward pass.
    pub fn value_and_slope(&self, t: f64, tape: &mut NetTape) -> Result<(f64, f64)> {
        self.forward(t, 1, tape)?;
        Ok((tape.out[0], tape.out[1]))
    }

    /// Forward pass that records every intermediate in `tape` (buffers are
    /// reused between calls).
    pub fn forward(&self, t: f64, order: usize, tape: &mut NetTape) -> Result<()> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::domain(format!("generator argument must be finite and >= 0, got {t}")));
        }
        if order > crate::series::ABSOLUTE_MAX_ORDER {
            return Err(Error::Capacity {
                what: "derivative order",
                requested: order as u128,
                cap: crate::series::ABSOLUTE_MAX_ORDER as u128,
            });
        }
        let n = order + 1;
        let depth = self.depth();
        tape.reset(t, n, &self.widths);

        for l in 0..depth {
            let h = self.widths[l];
            let cols = layer_cols(&self.widths, l + 1);
            let a = &self.mix[l];
            let rates = &self.rates[l];
            let (done, rest) = tape.y.split_at_mut(l);
            let y = &mut rest[0];
            let z = &mut tape.z[l];
            let e = &mut tape.e[l];
            for i in 0..h {
                let zi = &mut z[i * n..(i + 1) * n];
                if l == 0 {
                    zi.iter_mut().for_each(|c| *c = 0.0);
                    zi[0] = 1.0;
                } else {
                    let prev = &done[l - 1];
                    zi.iter_mut().for_each(|c| *c = 0.0);
                    for j in 0..cols {
                        let w = a[i * cols + j];
                        let pj = &prev[j * n..(j + 1) * n];
                        for k in 0..n {
                            zi[k] += w * pj[k];
                        }
                    }
                }
                let ei = &mut e[i * n..(i + 1) * n];
                let b = rates[i];
                let mut c = (-b * t).exp();
                for ek in ei.iter_mut() {
                    *ek = c;
                    c *= -b;
                }
                if l == 0 {
                    y[i * n..(i + 1) * n].copy_from_slice(ei);
                } else {
                    leibniz_into(zi, ei, &mut y[i * n..(i + 1) * n]);
                }
            }
        }

        let a_out = &self.mix[depth];
        let last = &tape.y[depth - 1];
        tape.out.iter_mut().for_each(|c| *c = 0.0);
        for (j, &w) in a_out.iter().enumerate() {
            for k in 0..n {
                tape.out[k] += w * last[j * n + k];
            }
        }
        if t == 0.0 {
            // Convex weights sum to one only up to rounding.
            tape.out[0] = 1.0;
        }
        Ok(())
    }

    /// Reverse accumulation: adds `sum_k cot[k] * d phi^(k)(t) / d raw` to
    /// `grad`, where `t` and the order are those recorded in `tape`.
    pub fn backprop(&self, tape: &NetTape, cot: &[f64], grad: &mut [f64]) {
        let n = tape.n;
        debug_assert_eq!(cot.len(), n);
        debug_assert_eq!(grad.len(), self.num_weights());
        let depth = self.depth();
        let binom = binomials();
        let t = tape.t;

        // Output layer.
        let h_last = self.widths[depth - 1];
        let a_out = &self.mix[depth];
        let last = &tape.y[depth - 1];
        let mut y_bar = vec![0.0; h_last * n];
        let mut a_bar = vec![0.0; h_last];
        for j in 0..h_last {
            let yj = &last[j * n..(j + 1) * n];
            a_bar[j] = dot(cot, yj);
            for k in 0..n {
                y_bar[j * n + k] = a_out[j] * cot[k];
            }
        }
        softmax_backprop(a_out, &a_bar, &mut grad[self.a_offsets[depth]..]);

        let mut z_bar = vec![0.0; n];
        let mut e_bar = vec![0.0; n];
        for l in (0..depth).rev() {
            let h = self.widths[l];
            let cols = layer_cols(&self.widths, l + 1);
            let a = &self.mix[l];
            let rates = &self.rates[l];
            let z = &tape.z[l];
            let e = &tape.e[l];
            let mut prev_bar = if l > 0 { vec![0.0; cols * n] } else { Vec::new() };
            let mut row_bar = vec![0.0; cols];
            for i in 0..h {
                let yb = &y_bar[i * n..(i + 1) * n];
                let zi = &z[i * n..(i + 1) * n];
                let ei = &e[i * n..(i + 1) * n];

                // y = z (Leibniz) e
                for j in 0..n {
                    let mut zb = 0.0;
                    let mut eb = 0.0;
                    for k in j..n {
                        let c = binom.get(k, j);
                        zb += c * yb[k] * ei[k - j];
                        eb += c * yb[k] * zi[k - j];
                    }
                    z_bar[j] = zb;
                    e_bar[j] = eb;
                }

                // e[k] = (-b)^k exp(-b t); de[k]/db = -k e[k-1] - t e[k]
                let mut b_bar = 0.0;
                for k in 0..n {
                    let mut de = -t * ei[k];
                    if k > 0 {
                        de -= k as f64 * ei[k - 1];
                    }
                    b_bar += e_bar[k] * de;
                }
                grad[self.b_offsets[l] + i] += b_bar * rates[i];

                if l == 0 {
                    // z is the constant 1; the single-column softmax has no gradient.
                    continue;
                }
                let prev = &tape.y[l - 1];
                let arow = &a[i * cols..(i + 1) * cols];
                for j in 0..cols {
                    row_bar[j] = dot(&z_bar, &prev[j * n..(j + 1) * n]);
                    let w = arow[j];
                    for k in 0..n {
                        prev_bar[j * n + k] += w * z_bar[k];
                    }
                }
                let off = self.a_offsets[l] + i * cols;
                softmax_backprop(arow, &row_bar, &mut grad[off..off + cols]);
            }
            y_bar = prev_bar;
        }
    }

    /// Explicit mixture `sum_k alpha_k exp(-beta_k t)`, one atom per path.
    pub fn enumerate_mixture(&self, cap: u128) -> Result<MixtureRepresentation> {
        let paths = self.path_count();
        if paths > cap {
            return Err(Error::Capacity { what: "mixture paths", requested: paths, cap });
        }
        let depth = self.depth();
        let mut atoms = Vec::with_capacity(paths as usize);
        let mut path = vec![0usize; depth];
        loop {
            let mut weight = 1.0;
            let mut rate = 0.0;
            for l in 0..depth {
                let cols = layer_cols(&self.widths, l + 1);
                let from = if l == 0 { 0 } else { path[l - 1] };
                weight *= self.mix[l][path[l] * cols + from];
                rate += self.rates[l][path[l]];
            }
            weight *= self.mix[depth][path[depth - 1]];
            atoms.push(MixtureAtom { weight, rate, path: path.clone() });

            // Odometer increment, last layer fastest.
            let mut l = depth;
            loop {
                if l == 0 {
                    return Ok(MixtureRepresentation { atoms });
                }
                l -= 1;
                path[l] += 1;
                if path[l] < self.widths[l] {
                    break;
                }
                path[l] = 0;
            }
        }
    }
}

/// Forward-pass record, reusable across evaluations.
#[derive(Debug, Clone, Default)]
pub struct NetTape {
    t: f64,
    n: usize,
    z: Vec<Vec<f64>>,
    e: Vec<Vec<f64>>,
    y: Vec<Vec<f64>>,
    out: Vec<f64>,
}

impl NetTape {
    fn reset(&mut self, t: f64, n: usize, widths: &[usize]) {
        self.t = t;
        self.n = n;
        let depth = widths.len();
        for buf in [&mut self.z, &mut self.e, &mut self.y] {
            buf.resize_with(depth, Vec::new);
            for (v, &h) in buf.iter_mut().zip(widths) {
                v.resize(h * n, 0.0);
            }
        }
        self.out.resize(n, 0.0);
    }

    /// Point at which the pass was recorded.
    pub fn t(&self) -> f64 {
        self.t
    }

    /// Recorded derivative stack of the generator.
    pub fn output(&self) -> &[f64] {
        &self.out
    }
}

/// One exponential component of the generator.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureAtom {
    pub weight: f64,
    pub rate: f64,
    /// Hidden unit visited in each layer (0-based).
    pub path: Vec<usize>,
}

/// The generator written as an explicit finite exponential mixture; the
/// distribution of the mixing variable `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureRepresentation {
    pub atoms: Vec<MixtureAtom>,
}

impl MixtureRepresentation {
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    /// `d^k/dt^k sum_k alpha_k exp(-beta_k t)` for `k = 0..=order`.
    pub fn derivatives(&self, t: f64, order: usize) -> Vec<f64> {
        let mut out = vec![0.0; order + 1];
        for atom in &self.atoms {
            let mut c = atom.weight * (-atom.rate * t).exp();
            for o in out.iter_mut() {
                *o += c;
                c *= -atom.rate;
            }
        }
        out
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight * a.rate).sum()
    }
}

/// Rows of `phi_A` layer `layer` (1-based); the output layer has one row.
fn layer_rows(widths: &[usize], layer: usize) -> usize {
    if layer > widths.len() {
        1
    } else {
        widths[layer - 1]
    }
}

/// Columns of `phi_A` layer `layer`; the first layer reads the constant input.
fn layer_cols(widths: &[usize], layer: usize) -> usize {
    if layer == 1 {
        1
    } else {
        widths[layer - 2]
    }
}

fn softmax_into(src: &[f64], out: &mut [f64]) {
    let max = src.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (o, &x) in out.iter_mut().zip(src) {
        *o = (x - max).exp();
        sum += *o;
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
}

/// Pull a gradient on softmax outputs `p` back onto the raw row.
fn softmax_backprop(p: &[f64], p_bar: &[f64], raw_grad: &mut [f64]) {
    let inner = dot(p, p_bar);
    for j in 0..p.len() {
        raw_grad[j] += p[j] * (p_bar[j] - inner);
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
