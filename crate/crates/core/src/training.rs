//! Negative log-likelihood losses with exact weight gradients, and the
//! minibatch momentum trainer.
//!
//! Gradients are assembled by reverse accumulation through recorded forward
//! passes. For a point `u` with `t_i = phi^{-1}(u_i)` and `s = sum t_i` the
//! log density is `ln|phi^(d)(s)| - sum ln(-phi'(t_i))`; each `t_i` moves
//! with the weights as `dt_i = -d_w phi(t_i) / phi'(t_i)`, which turns every
//! term into cotangents on generator derivatives at `s` or at some `t_i`.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::copula::CLAMP_FLOOR;
use crate::data::{CensoredDataset, Dataset};
use crate::error::{Error, Result};
use crate::inversion::{invert_value, InversionSettings};
use crate::network::{GeneratorNetwork, NetTape};
use crate::rng;
use crate::series::{WeightGradient, DEFAULT_MAX_ORDER};

/// Points per work unit in the parallel batch reduction. Fixed, so the
/// summation tree and therefore the result never depend on thread count.
const CHUNK: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Pointwise,
    Censored,
}

/// How minibatch gradients are reduced before the optimizer step. The loss
/// itself is always reported as a per-point mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reduction {
    Mean,
    Sum,
}

impl Reduction {
    /// Factor that turns a mean gradient over `n` points into the reduced one.
    pub fn scale(self, n: usize) -> f64 {
        match self {
            Reduction::Mean => 1.0,
            Reduction::Sum => n as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub loss: LossKind,
    pub reduction: Reduction,
    /// Rescale the reduced gradient to at most this Euclidean norm.
    pub grad_clip: Option<f64>,
    /// L2 penalty coefficient added to the reduced gradient.
    pub weight_decay: f64,
    /// Evaluate the test loss every this many epochs; 0 means only at the end.
    pub test_interval: usize,
    /// Append one telemetry row per epoch to this CSV file.
    pub telemetry: Option<PathBuf>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-5,
            momentum: 0.9,
            batch_size: 200,
            epochs: 40_000,
            seed: 0,
            loss: LossKind::Pointwise,
            reduction: Reduction::Sum,
            grad_clip: None,
            weight_decay: 0.0,
            test_interval: 0,
            telemetry: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::domain(format!("learning rate must be positive, got {}", self.learning_rate)));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::domain(format!("momentum must lie in [0, 1), got {}", self.momentum)));
        }
        if self.batch_size == 0 {
            return Err(Error::domain("batch size must be at least 1"));
        }
        if let Some(c) = self.grad_clip {
            if !(c > 0.0) {
                return Err(Error::domain(format!("gradient clip must be positive, got {c}")));
            }
        }
        if !(self.weight_decay >= 0.0) || !self.weight_decay.is_finite() {
            return Err(Error::domain("weight decay must be finite and >= 0"));
        }
        Ok(())
    }
}

/// Training or evaluation data for either loss.
#[derive(Debug, Clone, Copy)]
pub enum TrainData<'a> {
    Points(&'a Dataset),
    Censored(&'a CensoredDataset),
}

impl TrainData<'_> {
    pub fn len(&self) -> usize {
        match self {
            TrainData::Points(d) => d.len(),
            TrainData::Censored(d) => d.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        match self {
            TrainData::Points(d) => d.dim(),
            TrainData::Censored(d) => d.dim(),
        }
    }

    pub fn kind(&self) -> LossKind {
        match self {
            TrainData::Points(_) => LossKind::Pointwise,
            TrainData::Censored(_) => LossKind::Censored,
        }
    }
}

impl<'a> From<&'a Dataset> for TrainData<'a> {
    fn from(d: &'a Dataset) -> Self {
        TrainData::Points(d)
    }
}

impl<'a> From<&'a CensoredDataset> for TrainData<'a> {
    fn from(d: &'a CensoredDataset) -> Self {
        TrainData::Censored(d)
    }
}

/// Per-thread scratch buffers.
#[derive(Default)]
struct Scratch {
    tape: NetTape,
    ts: Vec<f64>,
    cot: Vec<f64>,
}

fn check_interior(u: &[f64], index: usize) -> Result<()> {
    if u.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
        return Err(Error::domain("pointwise loss needs strictly interior points").at_point(index));
    }
    Ok(())
}

fn inverse(net: &GeneratorNetwork, u: f64, tape: &mut NetTape) -> Result<f64> {
    Ok(invert_value(net, u.max(CLAMP_FLOOR), &InversionSettings::default(), tape)?.t)
}

/// Negative log density of one point; adds its weight gradient to `grad`.
fn point_loss(net: &GeneratorNetwork, u: &[f64], grad: &mut [f64], sc: &mut Scratch) -> Result<f64> {
    let d = u.len();
    sc.ts.clear();
    for &x in u {
        let t = inverse(net, x, &mut sc.tape)?;
        sc.ts.push(t);
    }
    let mut sorted = sc.ts.clone();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let s: f64 = sorted.iter().sum();

    net.forward(s, d + 1, &mut sc.tape)?;
    let out = sc.tape.output();
    let f_d = out[d];
    let signed = if d.is_multiple_of(2) { f_d } else { -f_d };
    if !(signed > 0.0) || !signed.is_finite() {
        return Err(Error::degenerate(format!("(-1)^{d} phi^({d})({s}) = {signed} is not positive")));
    }
    let ratio = out[d + 1] / f_d;
    let mut loss = -signed.ln();
    sc.cot.clear();
    sc.cot.resize(d + 2, 0.0);
    sc.cot[d] = -1.0 / f_d;
    net.backprop(&sc.tape, &sc.cot, grad);

    for i in 0..d {
        let t = sc.ts[i];
        net.forward(t, 2, &mut sc.tape)?;
        let out = sc.tape.output();
        let (d1, d2) = (out[1], out[2]);
        if !(d1 < 0.0) || !d1.is_finite() {
            return Err(Error::degenerate(format!("generator slope {d1} at t = {t}")));
        }
        loss += (-d1).ln();
        let cot = [(ratio - d2 / d1) / d1, 1.0 / d1, 0.0];
        net.backprop(&sc.tape, &cot, grad);
    }
    Ok(loss)
}

/// Negative log probability of one rectangle; adds its weight gradient.
fn rectangle_loss(
    net: &GeneratorNetwork,
    lower: &[f64],
    upper: &[f64],
    grad: &mut [f64],
    sc: &mut Scratch,
) -> Result<f64> {
    let d = lower.len();
    // Inverse levels: index 2i for the lower side, 2i + 1 for the upper one.
    // u = 0 maps to +inf and removes every corner that touches it.
    let mut t = vec![0.0; 2 * d];
    for i in 0..d {
        for (slot, u) in [(2 * i, lower[i]), (2 * i + 1, upper[i])] {
            t[slot] = if u == 0.0 {
                f64::INFINITY
            } else if u == 1.0 {
                0.0
            } else {
                inverse(net, u, &mut sc.tape)?
            };
        }
    }

    let mut prob = 0.0;
    let mut corners: Vec<(u32, f64, f64)> = Vec::with_capacity(1 << d);
    let mut sum_buf = Vec::with_capacity(d);
    for mask in 0u32..(1 << d) {
        sum_buf.clear();
        let mut n_low = 0;
        for i in 0..d {
            let low = mask >> i & 1 == 1;
            n_low += low as usize;
            sum_buf.push(t[2 * i + usize::from(!low)]);
        }
        if sum_buf.iter().any(|x| x.is_infinite()) {
            continue;
        }
        sum_buf.sort_by(|a, b| a.total_cmp(b));
        let s: f64 = sum_buf.iter().sum();
        let sign = if n_low % 2 == 0 { 1.0 } else { -1.0 };
        net.forward(s, 1, &mut sc.tape)?;
        let (v, slope) = (sc.tape.output()[0], sc.tape.output()[1]);
        prob += sign * v;
        corners.push((mask, s, sign * slope));
    }
    if !(prob > 0.0) || !prob.is_finite() {
        return Err(Error::Data(format!("rectangle has probability {prob}; its loss is infinite")));
    }

    // Corner terms.
    for &(mask, s, _) in &corners {
        let sign = if mask.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        net.forward(s, 1, &mut sc.tape)?;
        net.backprop(&sc.tape, &[-sign / prob, 0.0], grad);
    }
    // Inverse-level terms.
    for i in 0..d {
        for low in [true, false] {
            let ti = t[2 * i + usize::from(!low)];
            if ti == 0.0 || ti.is_infinite() {
                continue;
            }
            let c: f64 = corners
                .iter()
                .filter(|(mask, _, _)| (mask >> i & 1 == 1) == low)
                .map(|&(_, _, signed_slope)| signed_slope)
                .sum();
            if c == 0.0 {
                continue;
            }
            net.forward(ti, 1, &mut sc.tape)?;
            let slope = sc.tape.output()[1];
            if !(slope < 0.0) {
                return Err(Error::degenerate(format!("generator slope {slope} at t = {ti}")));
            }
            net.backprop(&sc.tape, &[c / (prob * slope), 0.0], grad);
        }
    }
    Ok(-prob.ln())
}

fn check_order(d: usize) -> Result<()> {
    if d + 1 > DEFAULT_MAX_ORDER {
        return Err(Error::Capacity {
            what: "derivative order for training",
            requested: (d + 1) as u128,
            cap: DEFAULT_MAX_ORDER as u128,
        });
    }
    Ok(())
}

/// Mean loss and mean gradient over the rows `idx` of `data`.
pub(crate) fn batch_loss(
    net: &GeneratorNetwork,
    data: TrainData<'_>,
    idx: &[usize],
) -> Result<(f64, WeightGradient)> {
    if idx.is_empty() {
        return Err(Error::Data("empty batch".into()));
    }
    let p = net.num_weights();
    let parts: Vec<Result<(f64, Vec<f64>)>> = idx
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut sc = Scratch::default();
            let mut grad = vec![0.0; p];
            let mut loss = 0.0;
            for &i in chunk {
                let l = match data {
                    TrainData::Points(ds) => {
                        let u = ds.row(i);
                        check_interior(u, i)?;
                        point_loss(net, u, &mut grad, &mut sc)
                    }
                    TrainData::Censored(ds) => {
                        rectangle_loss(net, ds.lower(i), ds.upper(i), &mut grad, &mut sc)
                    }
                };
                loss += l.map_err(|e| e.at_point(i))?;
            }
            Ok((loss, grad))
        })
        .collect();
    let mut loss = 0.0;
    let mut grad = WeightGradient::zeros(p);
    for part in parts {
        let (l, g) = part?;
        loss += l;
        grad.axpy(1.0, &g);
    }
    let n = idx.len() as f64;
    grad.iter_mut().for_each(|g| *g /= n);
    Ok((loss / n, grad))
}

/// Mean negative log density over `batch` and its gradient in the raw
/// weights.
pub fn loss_pointwise(net: &GeneratorNetwork, batch: &Dataset) -> Result<(f64, WeightGradient)> {
    check_order(batch.dim())?;
    let idx: Vec<usize> = (0..batch.len()).collect();
    batch_loss(net, TrainData::Points(batch), &idx)
}

/// Mean negative log rectangle probability over `batch` and its gradient.
pub fn loss_censored(net: &GeneratorNetwork, batch: &CensoredDataset) -> Result<(f64, WeightGradient)> {
    if batch.dim() < 2 {
        return Err(Error::domain("censored loss needs dimension >= 2"));
    }
    if batch.dim() > 16 {
        return Err(Error::Capacity { what: "rectangle dimension", requested: batch.dim() as u128, cap: 16 });
    }
    let idx: Vec<usize> = (0..batch.len()).collect();
    batch_loss(net, TrainData::Censored(batch), &idx)
}

/// Mean loss of the whole data set, without gradients' use.
pub fn evaluate(net: &GeneratorNetwork, data: TrainData<'_>) -> Result<f64> {
    let idx: Vec<usize> = (0..data.len()).collect();
    batch_loss(net, data, &idx).map(|(l, _)| l)
}

/// Shuffle `0..n` and cut it into consecutive batches; the last may be short.
pub fn shuffled_batches<R: Rng>(n: usize, batch: usize, rng: &mut R) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    idx.chunks(batch.max(1)).map(<[usize]>::to_vec).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean of the minibatch losses seen during the epoch.
    pub train_nll: f64,
    pub test_nll: Option<f64>,
    /// Seconds since training started.
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum TrainStatus {
    Completed,
    /// Training stopped on a non-finite or failed loss; the network holds the
    /// last weights that produced a finite loss.
    Aborted { epoch: usize, reason: String },
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub network: GeneratorNetwork,
    pub status: TrainStatus,
    /// Loss of the initial network on the full training set.
    pub initial_train_nll: f64,
    pub epochs: Vec<EpochRecord>,
    pub final_test_nll: Option<f64>,
    pub wall_clock: f64,
}

impl TrainReport {
    pub fn final_train_nll(&self) -> f64 {
        self.epochs.last().map(|e| e.train_nll).unwrap_or(self.initial_train_nll)
    }

    pub fn is_completed(&self) -> bool {
        self.status == TrainStatus::Completed
    }
}

const TELEMETRY_HEADER: &str = "epoch,train_nll,test_nll,seconds";

fn telemetry_row(r: &EpochRecord) -> String {
    let test = r.test_nll.map(|v| format!("{v:.12e}")).unwrap_or_default();
    format!("{},{:.12e},{},{:.3}", r.epoch, r.train_nll, test, r.seconds)
}

/// Fit the generator weights by minibatch gradient descent with classical
/// momentum. Deterministic for a fixed configuration.
pub fn fit(
    net: &GeneratorNetwork,
    train: TrainData<'_>,
    test: Option<TrainData<'_>>,
    cfg: &TrainConfig,
) -> Result<TrainReport> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(Error::Data("empty training set".into()));
    }
    if train.kind() != cfg.loss {
        return Err(Error::Structural(format!(
            "loss kind {:?} does not match the training data",
            cfg.loss
        )));
    }
    if let Some(t) = test {
        if t.dim() != train.dim() || t.kind() != train.kind() {
            return Err(Error::Structural("test data differs from training data in shape".into()));
        }
    }
    if train.kind() == LossKind::Pointwise {
        check_order(train.dim())?;
    }

    let start = Instant::now();
    let mut telemetry = match &cfg.telemetry {
        Some(path) => {
            let fresh = !path.exists() || std::fs::metadata(path)?.len() == 0;
            let mut f = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
            if fresh {
                writeln!(f, "{TELEMETRY_HEADER}")?;
            }
            Some(f)
        }
        None => None,
    };

    let all: Vec<usize> = (0..train.len()).collect();
    let initial_train_nll = batch_loss(net, train, &all)?.0;
    let mut weights = net.raw_weights().to_vec();
    let mut current = net.clone();
    let mut velocity = vec![0.0; weights.len()];
    let mut rng = rng::sequential(cfg.seed);
    let mut epochs = Vec::with_capacity(cfg.epochs);
    let mut status = TrainStatus::Completed;

    'training: for epoch in 1..=cfg.epochs {
        let mut epoch_loss = 0.0;
        let batches = shuffled_batches(train.len(), cfg.batch_size, &mut rng);
        let n_batches = batches.len();
        for idx in batches {
            let step = batch_loss(&current, train, &idx);
            let (loss, mut grad) = match step {
                Ok((l, g)) if l.is_finite() && g.is_finite() => (l, g),
                Ok((l, _)) => {
                    status = TrainStatus::Aborted { epoch, reason: format!("non-finite loss or gradient (loss {l})") };
                    break 'training;
                }
                Err(e @ (Error::NumericDegeneracy(_)
                | Error::Convergence { .. }
                | Error::Data(_)
                | Error::InvariantViolation(_)
                | Error::Domain(_))) => {
                    status = TrainStatus::Aborted { epoch, reason: e.to_string() };
                    break 'training;
                }
                Err(e) => return Err(e),
            };
            let scale = cfg.reduction.scale(idx.len());
            for (g, w) in grad.iter_mut().zip(&weights) {
                *g = *g * scale + cfg.weight_decay * w;
            }
            if let Some(clip) = cfg.grad_clip {
                let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
                if norm > clip {
                    grad.iter_mut().for_each(|g| *g *= clip / norm);
                }
            }
            let mut next = weights.clone();
            for ((v, w), g) in velocity.iter_mut().zip(next.iter_mut()).zip(grad.iter()) {
                *v = cfg.momentum * *v - cfg.learning_rate * g;
                *w += *v;
            }
            if next.iter().any(|w| !w.is_finite()) {
                status = TrainStatus::Aborted { epoch, reason: "weights became non-finite".into() };
                break 'training;
            }
            current = current.with_raw_weights(next.clone())?;
            weights = next;
            epoch_loss += loss;
        }
        let test_nll = match test {
            Some(t) if cfg.test_interval > 0 && epoch % cfg.test_interval == 0 => evaluate(&current, t).ok(),
            _ => None,
        };
        let record = EpochRecord {
            epoch,
            train_nll: epoch_loss / n_batches as f64,
            test_nll,
            seconds: start.elapsed().as_secs_f64(),
        };
        if let Some(f) = telemetry.as_mut() {
            writeln!(f, "{}", telemetry_row(&record))?;
        }
        epochs.push(record);
    }

    // An aborted step never reaches `current`, so it already holds the last
    // good weights. If those no longer evaluate, the test loss is omitted.
    let final_test_nll = match test {
        Some(t) => evaluate(&current, t).ok(),
        None => None,
    };
    Ok(TrainReport {
        network: current,
        status,
        initial_train_nll,
        epochs,
        final_test_nll,
        wall_clock: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copula::{CopulaModel, Rectangle};
    use crate::families::{FamilyKind, ParametricFamily};

    fn small_net(seed: u64) -> GeneratorNetwork {
        GeneratorNetwork::init(&[3, 3], seed).unwrap()
    }

    fn clayton_points(n: usize, seed: u64) -> Dataset {
        ParametricFamily::new(FamilyKind::Clayton, 2.0).unwrap().sample_bivariate(n, seed).unwrap()
    }

    fn fd_check(net: &GeneratorNetwork, grad: &[f64], loss: impl Fn(&GeneratorNetwork) -> f64) {
        let raw = net.raw_weights().to_vec();
        for k in 0..raw.len() {
            let h = 1e-5;
            let mut plus = raw.clone();
            plus[k] += h;
            let mut minus = raw.clone();
            minus[k] -= h;
            let fp = loss(&net.with_raw_weights(plus).unwrap());
            let fm = loss(&net.with_raw_weights(minus).unwrap());
            let fd = (fp - fm) / (2.0 * h);
            let scale = grad[k].abs().max(fd.abs()).max(1e-3);
            assert!((fd - grad[k]).abs() / scale <= 1e-5, "weight {k}: analytic {} vs fd {fd}", grad[k]);
        }
    }

    #[test]
    fn independence_net_has_zero_loss() {
        let net = GeneratorNetwork::new(vec![1], vec![0.0, 0.0, 0.0]).unwrap();
        let (loss, grad) = loss_pointwise(&net, &clayton_points(20, 1)).unwrap();
        assert!(loss.abs() < 1e-12);
        assert!(grad.is_finite());
    }

    #[test]
    fn loss_matches_copula_density() {
        let net = small_net(5);
        let data = clayton_points(10, 2);
        let (loss, _) = loss_pointwise(&net, &data).unwrap();
        let model = CopulaModel::new(2, net).unwrap();
        let expected = -data.rows().map(|r| model.log_density(r).unwrap()).sum::<f64>() / 10.0;
        assert!((loss - expected).abs() < 1e-10);
    }

    #[test]
    fn pointwise_gradient_matches_finite_differences() {
        let net = small_net(11);
        let data = clayton_points(10, 3);
        let (_, grad) = loss_pointwise(&net, &data).unwrap();
        fd_check(&net, &grad, |n| loss_pointwise(n, &data).unwrap().0);
    }

    #[test]
    fn censored_gradient_matches_finite_differences() {
        let net = small_net(12);
        let data = crate::data::censor(&clayton_points(5, 4), 0.3, 8).unwrap();
        let (_, grad) = loss_censored(&net, &data).unwrap();
        fd_check(&net, &grad, |n| loss_censored(n, &data).unwrap().0);
    }

    #[test]
    fn full_square_has_zero_censored_loss() {
        let r = Rectangle::unit(2);
        let data = CensoredDataset::new(2, r.lower.repeat(3), r.upper.repeat(3)).unwrap();
        let (loss, _) = loss_censored(&small_net(1), &data).unwrap();
        assert!(loss.abs() < 1e-15);
    }

    #[test]
    fn narrow_boxes_approach_density() {
        let net = small_net(4);
        let u = [0.3, 0.6];
        let w = 1e-4;
        let data = CensoredDataset::new(2, u.iter().map(|x| x - w / 2.0).collect(), u.iter().map(|x| x + w / 2.0).collect()).unwrap();
        let (censored, _) = loss_censored(&net, &data).unwrap();
        let point = Dataset::normalized(2, u.to_vec()).unwrap();
        let (pointwise, _) = loss_pointwise(&net, &point).unwrap();
        assert!((censored + (w * w).ln() - pointwise).abs() < 1e-2);
    }

    #[test]
    fn zero_probability_rectangle_is_data_error() {
        let data = CensoredDataset::new(2, vec![0.2, 0.3], vec![0.2, 0.5]).unwrap();
        assert!(matches!(loss_censored(&small_net(2), &data), Err(Error::Data(_))));
    }

    #[test]
    fn zero_epochs_keep_initial_weights() {
        let net = small_net(3);
        let data = clayton_points(50, 5);
        let cfg = TrainConfig { epochs: 0, ..TrainConfig::default() };
        let report = fit(&net, (&data).into(), None, &cfg).unwrap();
        assert_eq!(report.network, net);
        assert_eq!(report.final_train_nll(), report.initial_train_nll);
    }

    #[test]
    fn small_full_batch_step_decreases_loss() {
        let net = small_net(6);
        let data = clayton_points(100, 6);
        let cfg = TrainConfig {
            epochs: 1,
            learning_rate: 1e-7,
            momentum: 0.0,
            batch_size: 100,
            ..TrainConfig::default()
        };
        let report = fit(&net, (&data).into(), None, &cfg).unwrap();
        let after = evaluate(&report.network, (&data).into()).unwrap();
        assert!(after < report.initial_train_nll);
    }

    #[test]
    fn training_is_deterministic() {
        let net = small_net(7);
        let data = clayton_points(60, 7);
        let cfg = TrainConfig { epochs: 3, batch_size: 20, seed: 4, ..TrainConfig::default() };
        let a = fit(&net, (&data).into(), None, &cfg).unwrap();
        let b = fit(&net, (&data).into(), None, &cfg).unwrap();
        assert_eq!(a.network.raw_weights(), b.network.raw_weights());
        assert_eq!(a.epochs.iter().map(|e| e.train_nll).collect::<Vec<_>>(), b.epochs.iter().map(|e| e.train_nll).collect::<Vec<_>>());
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig { momentum: 1.0, ..TrainConfig::default() }.validate().is_err());
        assert!(TrainConfig { batch_size: 0, ..TrainConfig::default() }.validate().is_err());
        assert!(TrainConfig { learning_rate: -1.0, ..TrainConfig::default() }.validate().is_err());
    }
}
