//! Truncated derivative stacks of scalar quantities.
//!
//! A [`SeriesValue`] carries `f(t), f'(t), ..., f^(K)(t)` for a single scalar
//! input `t`, optionally together with the gradient of every coefficient
//! with respect to a flat parameter vector. The generator network builds its
//! derivative stacks from three primitives: exponential decay, convex
//! combination and the truncated Leibniz product.
//!
//! Coefficients are stored as derivatives, not Taylor coefficients. The
//! composition helpers (`exp`, `ln`, `powf`) convert internally.

use std::ops::{Deref, DerefMut};

use crate::error::{Error, Result};

/// Default cap on the derivative order.
pub const DEFAULT_MAX_ORDER: usize = 6;

/// Hard ceiling for any series, independent of configuration.
pub const ABSOLUTE_MAX_ORDER: usize = 16;

/// Gradient over the raw weight set of a generator network.
///
/// Entries are laid out as all `phi_A` entries followed by all `phi_B`
/// entries, layer-major, row-major.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WeightGradient(pub Vec<f64>);

impl WeightGradient {
    pub fn zeros(len: usize) -> Self {
        WeightGradient(vec![0.0; len])
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|g| g.is_finite())
    }

    /// `self += scale * other`
    pub fn axpy(&mut self, scale: f64, other: &[f64]) {
        debug_assert_eq!(self.0.len(), other.len());
        for (a, b) in self.0.iter_mut().zip(other) {
            *a += scale * b;
        }
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for WeightGradient {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for WeightGradient {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for WeightGradient {
    fn from(v: Vec<f64>) -> Self {
        WeightGradient(v)
    }
}

/// Derivative stack `coeffs[k] = d^k f / dt^k` truncated at `order`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesValue {
    coeffs: Vec<f64>,
    adjoints: Option<Vec<WeightGradient>>,
}

impl SeriesValue {
    /// Build from raw derivative coefficients. `coeffs` must be non-empty.
    pub fn from_coeffs(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Structural("series needs at least one coefficient".into()));
        }
        check_order(coeffs.len() - 1)?;
        Ok(SeriesValue { coeffs, adjoints: None })
    }

    /// Attach per-coefficient parameter gradients.
    pub fn with_adjoints(mut self, adjoints: Vec<WeightGradient>) -> Result<Self> {
        if adjoints.len() != self.coeffs.len() {
            return Err(Error::Structural(format!(
                "expected {} adjoint vectors, got {}",
                self.coeffs.len(),
                adjoints.len()
            )));
        }
        if let Some(first) = adjoints.first() {
            if adjoints.iter().any(|a| a.len() != first.len()) {
                return Err(Error::Structural("adjoint vectors differ in length".into()));
            }
        }
        self.adjoints = Some(adjoints);
        Ok(self)
    }

    pub fn constant(value: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = value;
        SeriesValue { coeffs, adjoints: None }
    }

    /// The independent variable itself: `(t, 1, 0, ...)`.
    pub fn variable(t: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = t;
        if order >= 1 {
            coeffs[1] = 1.0;
        }
        SeriesValue { coeffs, adjoints: None }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// k-th derivative; panics if `k > order`.
    pub fn derivative(&self, k: usize) -> f64 {
        self.coeffs[k]
    }

    pub fn adjoints(&self) -> Option<&[WeightGradient]> {
        self.adjoints.as_deref()
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Drop coefficients above `order`.
    pub fn truncate(mut self, order: usize) -> Self {
        self.coeffs.truncate(order + 1);
        if let Some(adj) = self.adjoints.as_mut() {
            adj.truncate(order + 1);
        }
        self
    }

    pub fn scale(&self, c: f64) -> SeriesValue {
        SeriesValue {
            coeffs: self.coeffs.iter().map(|x| c * x).collect(),
            adjoints: self.adjoints.as_ref().map(|adj| {
                adj.iter()
                    .map(|g| WeightGradient(g.iter().map(|x| c * x).collect()))
                    .collect()
            }),
        }
    }

    /// Add a constant to the value coefficient.
    pub fn offset(&self, c: f64) -> SeriesValue {
        let mut out = self.clone();
        out.coeffs[0] += c;
        out
    }

    /// `exp(f)` via the Taylor recurrence. Adjoints are not propagated.
    pub fn exp(&self) -> SeriesValue {
        let a = to_taylor(&self.coeffs);
        let n = a.len();
        let mut b = vec![0.0; n];
        b[0] = a[0].exp();
        for m in 1..n {
            let mut acc = 0.0;
            for k in 1..=m {
                acc += k as f64 * a[k] * b[m - k];
            }
            b[m] = acc / m as f64;
        }
        SeriesValue { coeffs: from_taylor(b), adjoints: None }
    }

    /// `ln(f)`; requires `f(t) > 0`. Adjoints are not propagated.
    pub fn ln(&self) -> Result<SeriesValue> {
        if !(self.coeffs[0] > 0.0) {
            return Err(Error::domain(format!("ln of non-positive value {}", self.coeffs[0])));
        }
        let a = to_taylor(&self.coeffs);
        let n = a.len();
        let mut b = vec![0.0; n];
        b[0] = a[0].ln();
        for m in 1..n {
            let mut acc = 0.0;
            for k in 1..m {
                acc += k as f64 * b[k] * a[m - k];
            }
            b[m] = (a[m] - acc / m as f64) / a[0];
        }
        Ok(SeriesValue { coeffs: from_taylor(b), adjoints: None })
    }

    /// `f^alpha`; requires `f(t) > 0` unless only the value is requested.
    pub fn powf(&self, alpha: f64) -> Result<SeriesValue> {
        let a = to_taylor(&self.coeffs);
        let n = a.len();
        if a[0] == 0.0 && n == 1 && alpha > 0.0 {
            return Ok(SeriesValue::constant(0.0, 0));
        }
        if !(a[0] > 0.0) {
            return Err(Error::domain(format!(
                "derivatives of x^{alpha} undefined at x = {}",
                a[0]
            )));
        }
        let mut b = vec![0.0; n];
        b[0] = a[0].powf(alpha);
        for m in 1..n {
            let mut acc = 0.0;
            for k in 1..=m {
                acc += (alpha * k as f64 - (m - k) as f64) * a[k] * b[m - k];
            }
            b[m] = acc / (m as f64 * a[0]);
        }
        Ok(SeriesValue { coeffs: from_taylor(b), adjoints: None })
    }
}

fn check_order(order: usize) -> Result<()> {
    if order > ABSOLUTE_MAX_ORDER {
        return Err(Error::Capacity {
            what: "derivative order",
            requested: order as u128,
            cap: ABSOLUTE_MAX_ORDER as u128,
        });
    }
    Ok(())
}

fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

fn to_taylor(derivs: &[f64]) -> Vec<f64> {
    derivs.iter().enumerate().map(|(k, d)| d / factorial(k)).collect()
}

fn from_taylor(taylor: Vec<f64>) -> Vec<f64> {
    taylor.into_iter().enumerate().map(|(k, c)| c * factorial(k)).collect()
}

/// Binomial coefficient table for orders up to [`ABSOLUTE_MAX_ORDER`].
pub(crate) struct Binomials {
    rows: Vec<Vec<f64>>,
}

impl Binomials {
    pub(crate) fn new(max: usize) -> Self {
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(max + 1);
        for n in 0..=max {
            let mut row = vec![1.0; n + 1];
            for k in 1..n {
                row[k] = rows[n - 1][k - 1] + rows[n - 1][k];
            }
            rows.push(row);
        }
        Binomials { rows }
    }

    #[inline]
    pub(crate) fn get(&self, n: usize, k: usize) -> f64 {
        self.rows[n][k]
    }
}

pub(crate) fn binomials() -> &'static Binomials {
    use std::sync::OnceLock;
    static TABLE: OnceLock<Binomials> = OnceLock::new();
    TABLE.get_or_init(|| Binomials::new(ABSOLUTE_MAX_ORDER + 1))
}

/// Truncated Leibniz product written into `out`.
#[inline]
pub(crate) fn leibniz_into(a: &[f64], b: &[f64], out: &mut [f64]) {
    let binom = binomials();
    for k in 0..out.len() {
        let mut acc = 0.0;
        for j in 0..=k {
            acc += binom.get(k, j) * a[j] * b[k - j];
        }
        out[k] = acc;
    }
}

/// Derivative stack of `exp(-rate * t)`.
pub fn series_exp_decay(rate: f64, t: f64, order: usize) -> Result<SeriesValue> {
    if !rate.is_finite() || !t.is_finite() {
        return Err(Error::domain("exp decay needs finite rate and t"));
    }
    if rate < 0.0 || t < 0.0 {
        return Err(Error::domain(format!("exp decay needs rate >= 0 and t >= 0, got rate={rate}, t={t}")));
    }
    check_order(order)?;
    let mut coeffs = Vec::with_capacity(order + 1);
    let mut c = (-rate * t).exp();
    for _ in 0..=order {
        coeffs.push(c);
        c *= -rate;
    }
    Ok(SeriesValue { coeffs, adjoints: None })
}

fn check_same_order(values: &[&SeriesValue]) -> Result<usize> {
    let order = values
        .first()
        .ok_or_else(|| Error::Structural("no series given".into()))?
        .order();
    if values.iter().any(|v| v.order() != order) {
        return Err(Error::Structural("series orders differ".into()));
    }
    Ok(order)
}

fn adjoint_len(values: &[&SeriesValue]) -> Result<Option<usize>> {
    let mut len = None;
    for v in values {
        if let Some(adj) = v.adjoints() {
            let l = adj[0].len();
            match len {
                None => len = Some(l),
                Some(prev) if prev != l => {
                    return Err(Error::Structural("adjoint lengths differ".into()))
                }
                _ => {}
            }
        }
    }
    Ok(len)
}

/// Convex combination `sum_j w_j * values[j]` with constant weights.
pub fn series_combine(values: &[SeriesValue], weights: &[f64]) -> Result<SeriesValue> {
    combine(values, weights, None)
}

/// Convex combination whose weights themselves depend on the parameters;
/// `weight_adjoints[j]` is the gradient of `weights[j]`.
pub fn series_combine_param(
    values: &[SeriesValue],
    weights: &[f64],
    weight_adjoints: &[WeightGradient],
) -> Result<SeriesValue> {
    if weight_adjoints.len() != weights.len() {
        return Err(Error::Structural("one weight gradient per weight required".into()));
    }
    combine(values, weights, Some(weight_adjoints))
}

fn combine(
    values: &[SeriesValue],
    weights: &[f64],
    weight_adjoints: Option<&[WeightGradient]>,
) -> Result<SeriesValue> {
    if values.len() != weights.len() {
        return Err(Error::Structural(format!(
            "{} values but {} weights",
            values.len(),
            weights.len()
        )));
    }
    let refs: Vec<&SeriesValue> = values.iter().collect();
    let order = check_same_order(&refs)?;
    if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
        return Err(Error::domain("combination weights must be finite and non-negative"));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::domain(format!("combination weights sum to {total}, not 1")));
    }

    let mut coeffs = vec![0.0; order + 1];
    for (v, &w) in values.iter().zip(weights) {
        for (c, x) in coeffs.iter_mut().zip(v.coeffs()) {
            *c += w * x;
        }
    }

    let mut glen = adjoint_len(&refs)?;
    if let Some(wa) = weight_adjoints {
        let l = wa.first().map(|g| g.len()).unwrap_or(0);
        match glen {
            Some(prev) if prev != l => {
                return Err(Error::Structural("adjoint lengths differ".into()))
            }
            _ => glen = Some(l),
        }
    }
    let adjoints = glen.map(|len| {
        let mut adj = vec![WeightGradient::zeros(len); order + 1];
        for (j, (v, &w)) in values.iter().zip(weights).enumerate() {
            if let Some(va) = v.adjoints() {
                for k in 0..=order {
                    adj[k].axpy(w, &va[k]);
                }
            }
            if let Some(wa) = weight_adjoints {
                for k in 0..=order {
                    adj[k].axpy(v.coeffs[k], &wa[j]);
                }
            }
        }
        adj
    });
    Ok(SeriesValue { coeffs, adjoints })
}

/// Truncated Leibniz product `out[k] = sum_j C(k,j) a[j] b[k-j]`.
pub fn series_multiply(a: &SeriesValue, b: &SeriesValue) -> Result<SeriesValue> {
    let order = check_same_order(&[a, b])?;
    let mut coeffs = vec![0.0; order + 1];
    leibniz_into(&a.coeffs, &b.coeffs, &mut coeffs);

    let adjoints = adjoint_len(&[a, b])?.map(|len| {
        let binom = binomials();
        let mut adj = vec![WeightGradient::zeros(len); order + 1];
        for k in 0..=order {
            for j in 0..=k {
                let c = binom.get(k, j);
                if let Some(aa) = a.adjoints() {
                    adj[k].axpy(c * b.coeffs[k - j], &aa[j]);
                }
                if let Some(ba) = b.adjoints() {
                    adj[k].axpy(c * a.coeffs[j], &ba[k - j]);
                }
            }
        }
        adj
    });
    Ok(SeriesValue { coeffs, adjoints })
}
