//! Closed-form Archimedean families used as data generators, fitting
//! baselines and test oracles.

use std::fmt;
use std::str::FromStr;

use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::copula::CopulaModel;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::inversion::{solve_decreasing, InversionSettings};
use crate::rng;
use crate::series::SeriesValue;
use crate::training::{shuffled_batches, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Independence,
    Clayton,
    Frank,
    Joe,
    Gumbel,
}

impl FamilyKind {
    /// Smallest admissible parameter and whether it is itself admissible.
    fn lower_bound(self) -> (f64, bool) {
        match self {
            FamilyKind::Independence => (f64::NEG_INFINITY, true),
            FamilyKind::Clayton | FamilyKind::Frank => (0.0, false),
            FamilyKind::Joe | FamilyKind::Gumbel => (1.0, true),
        }
    }

    fn default_start(self) -> f64 {
        match self {
            FamilyKind::Independence => 0.0,
            FamilyKind::Clayton | FamilyKind::Frank => 1.0,
            FamilyKind::Joe | FamilyKind::Gumbel => 1.5,
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FamilyKind::Independence => "independence",
            FamilyKind::Clayton => "clayton",
            FamilyKind::Frank => "frank",
            FamilyKind::Joe => "joe",
            FamilyKind::Gumbel => "gumbel",
        };
        f.write_str(s)
    }
}

impl FromStr for FamilyKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "independence" | "indep" | "product" => Ok(FamilyKind::Independence),
            "clayton" => Ok(FamilyKind::Clayton),
            "frank" => Ok(FamilyKind::Frank),
            "joe" => Ok(FamilyKind::Joe),
            "gumbel" => Ok(FamilyKind::Gumbel),
            other => Err(Error::domain(format!("unknown copula family '{other}'"))),
        }
    }
}

/// A one-parameter Archimedean family restricted to its completely monotone
/// range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParametricFamily {
    kind: FamilyKind,
    theta: f64,
}

impl ParametricFamily {
    pub fn new(kind: FamilyKind, theta: f64) -> Result<Self> {
        if kind == FamilyKind::Independence {
            return Ok(Self::independence());
        }
        let (lo, inclusive) = kind.lower_bound();
        let ok = theta.is_finite() && (theta > lo || inclusive && theta == lo);
        if !ok {
            let op = if inclusive { ">=" } else { ">" };
            return Err(Error::domain(format!("{kind} needs theta {op} {lo}, got {theta}")));
        }
        Ok(ParametricFamily { kind, theta })
    }

    pub fn independence() -> Self {
        ParametricFamily { kind: FamilyKind::Independence, theta: 0.0 }
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Families that collapse to the product copula at this parameter.
    fn is_product(&self) -> bool {
        match self.kind {
            FamilyKind::Independence => true,
            FamilyKind::Joe | FamilyKind::Gumbel => self.theta == 1.0,
            _ => false,
        }
    }

    /// Derivative stack of the generator at `t >= 0`.
    pub fn generator(&self, t: f64, order: usize) -> Result<SeriesValue> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::domain(format!("generator argument must be finite and >= 0, got {t}")));
        }
        if self.is_product() {
            let mut c = (-t).exp();
            let coeffs = (0..=order)
                .map(|_| {
                    let v = c;
                    c = -c;
                    v
                })
                .collect();
            return SeriesValue::from_coeffs(coeffs);
        }
        let theta = self.theta;
        let decay = || -> Result<SeriesValue> { crate::series::series_exp_decay(1.0, t, order) };
        match self.kind {
            FamilyKind::Clayton => {
                let alpha = -1.0 / theta;
                let mut coef = 1.0;
                let coeffs = (0..=order)
                    .map(|k| {
                        let v = coef * (1.0 + t).powf(alpha - k as f64);
                        coef *= alpha - k as f64;
                        v
                    })
                    .collect();
                SeriesValue::from_coeffs(coeffs)
            }
            FamilyKind::Frank => {
                // -(1/theta) ln(1 - c e^{-t}), c = 1 - e^{-theta}. Near t = 0
                // the argument of ln is small; it is then formed as
                // e^{-theta} + c (1 - e^{-t}) to avoid cancellation.
                let c = -(-theta).exp_m1();
                let ce = c * (-t).exp();
                let inner0 = if ce < 0.5 { 1.0 - ce } else { (-theta).exp() - c * (-t).exp_m1() };
                let mut inner = decay()?.scale(-c).into_coeffs();
                inner[0] = inner0;
                let mut coeffs = SeriesValue::from_coeffs(inner)?.ln()?.scale(-1.0 / theta).into_coeffs();
                coeffs[0] = if ce < 0.5 { -(-ce).ln_1p() / theta } else { -inner0.ln() / theta };
                SeriesValue::from_coeffs(coeffs)
            }
            FamilyKind::Joe => {
                // 1 - (1 - e^{-t})^{1/theta}
                if order > 0 && t == 0.0 {
                    return Err(Error::domain("Joe generator derivatives diverge at t = 0"));
                }
                let one_minus = -(-t).exp_m1();
                let mut base = decay()?.scale(-1.0).into_coeffs();
                base[0] = one_minus;
                let base = SeriesValue::from_coeffs(base)?;
                let mut coeffs = base.powf(1.0 / theta)?.scale(-1.0).offset(1.0).into_coeffs();
                coeffs[0] = -(one_minus.ln() / theta).exp_m1();
                SeriesValue::from_coeffs(coeffs)
            }
            FamilyKind::Gumbel => {
                // exp(-t^{1/theta})
                if order > 0 && t == 0.0 {
                    return Err(Error::domain("Gumbel generator derivatives diverge at t = 0"));
                }
                let p = SeriesValue::variable(t, order).powf(1.0 / theta)?;
                Ok(p.scale(-1.0).exp())
            }
            FamilyKind::Independence => unreachable!("handled above"),
        }
    }

    /// Closed-form `phi^{-1}(u)` for `u` in `(0, 1]`.
    pub fn inverse(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u <= 1.0) {
            return Err(Error::domain(format!("inverse level must lie in (0, 1], got {u}")));
        }
        if u == 1.0 {
            return Ok(0.0);
        }
        if self.is_product() {
            return Ok(-u.ln());
        }
        let theta = self.theta;
        let t = match self.kind {
            FamilyKind::Clayton => (-theta * u.ln()).exp_m1(),
            FamilyKind::Frank => {
                // ratio - 1 with e^{-theta u} - e^{-theta} factored exactly
                let x = -(-theta * u).exp() * (-theta * (1.0 - u)).exp_m1() / (-theta).exp_m1();
                if x.abs() < 0.5 {
                    -x.ln_1p()
                } else {
                    -((-theta * u).exp_m1() / (-theta).exp_m1()).ln()
                }
            }
            FamilyKind::Joe => -(-(1.0 - u).powf(theta)).ln_1p(),
            FamilyKind::Gumbel => (-u.ln()).powf(theta),
            FamilyKind::Independence => unreachable!("handled above"),
        };
        Ok(t.max(0.0))
    }

    /// Bivariate sampler by conditional inversion: draw `(u, v)` uniform and
    /// solve `dC/du(u, w) = v` for `w`.
    pub fn sample_bivariate(&self, n: usize, seed: u64) -> Result<Dataset> {
        if n == 0 {
            return Err(Error::domain("sample count must be positive"));
        }
        let settings = InversionSettings::default();
        let mut values = Vec::with_capacity(2 * n);
        for i in 0..n {
            let mut r = rng::stream(seed, i as u64);
            let u = rng::open_uniform(&mut r);
            let v = rng::open_uniform(&mut r);
            let w = self.conditional_inverse(u, v, &settings)?;
            values.push(u);
            values.push(w);
        }
        Dataset::normalized(2, values)
    }

    fn conditional_inverse(&self, u: f64, v: f64, settings: &InversionSettings) -> Result<f64> {
        if self.is_product() {
            return Ok(v);
        }
        let t_u = self.inverse(u)?;
        // dC/du(u, w) = phi'(t_u + t_w) / phi'(t_u); -phi' is positive,
        // decreasing and log-convex, so the root finder applies directly.
        let slope_u = -self.generator(t_u, 1)?.derivative(1);
        let target = v * slope_u;
        let root = solve_decreasing(target, t_u, settings, |s| {
            let g = self.generator(s, 2)?;
            Ok((-g.derivative(1), -g.derivative(2)))
        })
        .map_err(|e| match e {
            Error::Convergence { .. } => Error::Data(format!("conditional sampler failed: {e}")),
            other => other,
        })?;
        let w = self.generator((root.t - t_u).max(0.0), 0)?.value();
        Ok(w.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0))
    }

    /// Draw `n` points in `d` dimensions. Bivariate draws use conditional
    /// inversion; higher dimensions use the gamma frailty construction and
    /// are available for Clayton and the product copula.
    pub fn sample(&self, dim: usize, n: usize, seed: u64) -> Result<Dataset> {
        if dim < 2 {
            return Err(Error::domain("sample dimension must be at least 2"));
        }
        if dim == 2 {
            return self.sample_bivariate(n, seed);
        }
        if n == 0 {
            return Err(Error::domain("sample count must be positive"));
        }
        let frailty = match self.kind {
            _ if self.is_product() => None,
            FamilyKind::Clayton => Some(
                Gamma::new(1.0 / self.theta, 1.0)
                    .map_err(|e| Error::domain(format!("gamma frailty: {e}")))?,
            ),
            _ => {
                return Err(Error::Unsupported(format!(
                    "{} sampling is implemented for d = 2 only",
                    self.kind
                )))
            }
        };
        let mut values = Vec::with_capacity(dim * n);
        for i in 0..n {
            let mut r = rng::stream(seed, i as u64);
            let m = frailty.as_ref().map(|g| g.sample(&mut r)).unwrap_or(1.0);
            for _ in 0..dim {
                let e = rng::unit_exponential(&mut r);
                let u = self.generator(e / m, 0)?.value();
                values.push(u.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0));
            }
        }
        Dataset::normalized(dim, values)
    }
}

/// Outcome of [`fit_parametric`].
#[derive(Debug, Clone, PartialEq)]
pub struct ParametricFit {
    pub family: ParametricFamily,
    pub train_nll: f64,
    pub test_nll: Option<f64>,
    /// `(epoch, theta, mean train NLL over the epoch's batches)`
    pub trace: Vec<(usize, f64, f64)>,
}

/// Mean negative log density of `data` under `model`.
pub fn mean_nll(model: &CopulaModel, data: &Dataset) -> Result<f64> {
    let mut total = 0.0;
    for (i, row) in data.rows().enumerate() {
        total -= model.log_density(row).map_err(|e| e.at_point(i))?;
    }
    Ok(total / data.len() as f64)
}

fn batch_nll(kind: FamilyKind, theta: f64, data: &Dataset, idx: &[usize]) -> Result<f64> {
    let model = CopulaModel::new(data.dim(), ParametricFamily::new(kind, theta)?)?;
    let mut total = 0.0;
    for &i in idx {
        total -= model.log_density(data.row(i)).map_err(|e| e.at_point(i))?;
    }
    Ok(total / idx.len() as f64)
}

/// Fit the family parameter by minibatch gradient descent with momentum on
/// the mean negative log density, using the optimizer settings of `cfg`.
///
/// Iterates are projected back onto the admissible range; the derivative in
/// `theta` is a central difference (one-sided at the boundary).
pub fn fit_parametric(
    kind: FamilyKind,
    train: &Dataset,
    test: Option<&Dataset>,
    cfg: &TrainConfig,
) -> Result<ParametricFit> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(Error::Data("empty training set".into()));
    }
    if kind == FamilyKind::Independence {
        let model = CopulaModel::new(train.dim(), ParametricFamily::independence())?;
        return Ok(ParametricFit {
            family: ParametricFamily::independence(),
            train_nll: mean_nll(&model, train)?,
            test_nll: test.map(|t| mean_nll(&model, t)).transpose()?,
            trace: Vec::new(),
        });
    }
    let (lower, inclusive) = kind.lower_bound();
    let floor = if inclusive { lower } else { lower + 1e-6 };
    let mut theta = kind.default_start();
    let mut velocity = 0.0;
    let mut trace = Vec::with_capacity(cfg.epochs);
    let mut rng = rng::sequential(cfg.seed);

    for epoch in 1..=cfg.epochs {
        let mut epoch_loss = 0.0;
        let mut batches = 0;
        for idx in shuffled_batches(train.len(), cfg.batch_size, &mut rng) {
            let h = 1e-6 * theta.abs().max(1.0);
            let here = batch_nll(kind, theta, train, &idx)?;
            let up = batch_nll(kind, theta + h, train, &idx)?;
            let slope = if theta - h >= floor {
                (up - batch_nll(kind, theta - h, train, &idx)?) / (2.0 * h)
            } else {
                (up - here) / h
            };
            let grad = cfg.reduction.scale(idx.len()) * slope;
            if !here.is_finite() || !grad.is_finite() {
                return Err(Error::Fit(format!(
                    "{kind} fit diverged at epoch {epoch} (theta = {theta}); trace: {trace:?}"
                )));
            }
            velocity = cfg.momentum * velocity - cfg.learning_rate * grad;
            theta += velocity;
            if theta < floor {
                // Project back onto the admissible range and drop the momentum
                // that pushed past it.
                theta = floor;
                velocity = 0.0;
            }
            epoch_loss += here;
            batches += 1;
        }
        trace.push((epoch, theta, epoch_loss / batches as f64));
    }

    let family = ParametricFamily::new(kind, theta)?;
    let model = CopulaModel::new(train.dim(), family)?;
    Ok(ParametricFit {
        family,
        train_nll: mean_nll(&model, train)?,
        test_nll: test.map(|t| mean_nll(&model, t)).transpose()?,
        trace,
    })
}
