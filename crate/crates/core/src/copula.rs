//! Probabilistic queries over an Archimedean copula
//! `C(u) = phi(phi^{-1}(u_1) + ... + phi^{-1}(u_d))`.
//!
//! Every quantity reduces to derivatives of the generator at sums of inverse
//! levels: the mixed partial of `C` over a coordinate set `K` is
//! `phi^(|K|)(s) / prod_{i in K} phi'(t_i)` because each `u_i` enters only
//! through its own `t_i`. Sums of inverse levels are accumulated in sorted
//! order so that every query is exactly symmetric in its arguments.

use crate::error::{Error, Result};
use crate::families::ParametricFamily;
use crate::inversion::{invert_value, InversionSettings};
use crate::network::{GeneratorNetwork, NetTape};
use crate::series::{SeriesValue, DEFAULT_MAX_ORDER};

/// Inputs below this are raised to it before inversion.
pub const CLAMP_FLOOR: f64 = 1e-12;

/// A completely monotone generator: learned or closed-form.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    Network(GeneratorNetwork),
    Family(ParametricFamily),
}

impl Generator {
    /// Derivative stack of the generator at `t`.
    pub fn series(&self, t: f64, order: usize) -> Result<SeriesValue> {
        match self {
            Generator::Network(net) => net.phi_eval(t, order, false),
            Generator::Family(f) => f.generator(t, order),
        }
    }

    /// `phi^{-1}(u)` for `u` in `(0, 1]`.
    pub fn inverse(&self, u: f64, settings: &InversionSettings) -> Result<f64> {
        match self {
            Generator::Network(net) => {
                let mut tape = NetTape::default();
                Ok(invert_value(net, u, settings, &mut tape)?.t)
            }
            Generator::Family(f) => f.inverse(u),
        }
    }
}

impl From<GeneratorNetwork> for Generator {
    fn from(net: GeneratorNetwork) -> Self {
        Generator::Network(net)
    }
}

impl From<ParametricFamily> for Generator {
    fn from(f: ParametricFamily) -> Self {
        Generator::Family(f)
    }
}

/// Evaluation knobs shared by every query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalSettings {
    /// Highest generator derivative any query may request.
    pub max_order: usize,
    pub inversion: InversionSettings,
}

impl Default for EvalSettings {
    fn default() -> Self {
        EvalSettings { max_order: DEFAULT_MAX_ORDER, inversion: InversionSettings::default() }
    }
}

/// Dimension plus generator: the full query surface.
#[derive(Debug, Clone, PartialEq)]
pub struct CopulaModel {
    dim: usize,
    generator: Generator,
    settings: EvalSettings,
}

/// Observed coordinates `K` with their values, and values for the rest.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditioningQuery {
    /// Observed coordinate indices (0-based), distinct.
    pub observed: Vec<usize>,
    /// Values of the observed coordinates, aligned with `observed`.
    pub observed_values: Vec<f64>,
    /// Values of the remaining coordinates in increasing index order.
    pub query_values: Vec<f64>,
}

/// Axis-aligned box `[lower_i, upper_i]` inside the unit cube.
#[derive(Debug, Clone, PartialEq)]
pub struct Rectangle {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Rectangle {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let r = Rectangle { lower, upper };
        r.validate()?;
        Ok(r)
    }

    pub fn unit(dim: usize) -> Self {
        Rectangle { lower: vec![0.0; dim], upper: vec![1.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn volume(&self) -> f64 {
        self.lower.iter().zip(&self.upper).map(|(l, h)| h - l).product()
    }

    pub fn validate(&self) -> Result<()> {
        if self.lower.len() != self.upper.len() {
            return Err(Error::Structural("rectangle bounds differ in length".into()));
        }
        for (i, (&lo, &hi)) in self.lower.iter().zip(&self.upper).enumerate() {
            if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) {
                return Err(Error::domain(format!("rectangle side {i} [{lo}, {hi}] leaves [0, 1]")));
            }
            if lo > hi {
                return Err(Error::domain(format!("rectangle side {i} has lower {lo} > upper {hi}")));
            }
        }
        Ok(())
    }
}

/// One row of a tail-dependence profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailRatio {
    pub level: f64,
    /// `C(u, u) / u`
    pub lower: f64,
    /// `(C(u, u) - 2u + 1) / (1 - u)`
    pub upper: f64,
}

fn sorted_sum(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    values.iter().sum()
}

fn clamp_level(u: f64) -> f64 {
    u.clamp(CLAMP_FLOOR, 1.0)
}

fn sign_pow(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

impl CopulaModel {
    pub fn new(dim: usize, generator: impl Into<Generator>) -> Result<Self> {
        Self::with_settings(dim, generator, EvalSettings::default())
    }

    pub fn with_settings(
        dim: usize,
        generator: impl Into<Generator>,
        settings: EvalSettings,
    ) -> Result<Self> {
        if dim < 2 {
            return Err(Error::domain(format!("copula dimension must be at least 2, got {dim}")));
        }
        Ok(CopulaModel { dim, generator: generator.into(), settings })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn settings(&self) -> &EvalSettings {
        &self.settings
    }

    fn check_point(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.dim {
            return Err(Error::Structural(format!(
                "point has {} coordinates, model dimension is {}",
                u.len(),
                self.dim
            )));
        }
        if let Some(bad) = u.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::domain(format!("coordinate {bad} outside [0, 1]")));
        }
        Ok(())
    }

    fn check_order(&self, order: usize) -> Result<()> {
        if order > self.settings.max_order {
            return Err(Error::Capacity {
                what: "derivative order",
                requested: order as u128,
                cap: self.settings.max_order as u128,
            });
        }
        Ok(())
    }

    /// `phi^{-1}` of a level already known to be positive.
    fn inv(&self, u: f64) -> Result<f64> {
        self.generator.inverse(clamp_level(u), &self.settings.inversion)
    }

    /// `-phi'(t)`, required to be strictly positive.
    fn neg_slope(&self, t: f64) -> Result<f64> {
        let s = self.generator.series(t, 1)?;
        let v = -s.derivative(1);
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::degenerate(format!("generator slope {} at t = {t}", -v)));
        }
        Ok(v)
    }

    /// `(-1)^k phi^(k)(s)`, required to be strictly positive.
    fn signed_derivative(&self, s: f64, k: usize) -> Result<f64> {
        let v = sign_pow(k) * self.generator.series(s, k)?.derivative(k);
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::degenerate(format!(
                "(-1)^{k} phi^({k})({s}) = {v} is not positive"
            )));
        }
        Ok(v)
    }

    /// The copula distribution function.
    pub fn cdf(&self, u: &[f64]) -> Result<f64> {
        self.check_point(u)?;
        if u.contains(&0.0) {
            return Ok(0.0);
        }
        let mut ts = u
            .iter()
            .filter(|&&x| x < 1.0)
            .map(|&x| self.inv(x))
            .collect::<Result<Vec<_>>>()?;
        if ts.is_empty() {
            return Ok(1.0);
        }
        let s = sorted_sum(&mut ts);
        Ok(self.generator.series(s, 0)?.value().clamp(0.0, 1.0))
    }

    /// Log of the joint density `d^d C / du_1 ... du_d`.
    pub fn log_density(&self, u: &[f64]) -> Result<f64> {
        self.check_point(u)?;
        self.check_order(self.dim)?;
        if u.iter().any(|&x| x <= 0.0 || x >= 1.0) {
            return Err(Error::domain("density needs a strictly interior point"));
        }
        let mut ts = u.iter().map(|&x| self.inv(x)).collect::<Result<Vec<_>>>()?;
        let s = sorted_sum(&mut ts);
        let numerator = self.signed_derivative(s, self.dim)?;
        let mut log_den = 0.0;
        for &t in &ts {
            log_den += self.neg_slope(t)?.ln();
        }
        Ok(numerator.ln() - log_den)
    }

    /// Joint density; `exp(log_density)`.
    pub fn density(&self, u: &[f64]) -> Result<f64> {
        self.log_density(u).map(f64::exp)
    }

    fn check_query(&self, q: &ConditioningQuery) -> Result<Vec<f64>> {
        let k = q.observed.len();
        if k == 0 || k >= self.dim {
            return Err(Error::domain("observed set must be non-empty and proper"));
        }
        if q.observed_values.len() != k || q.query_values.len() != self.dim - k {
            return Err(Error::Structural("conditioning values do not match the index set".into()));
        }
        let mut seen = vec![false; self.dim];
        for &i in &q.observed {
            if i >= self.dim || seen[i] {
                return Err(Error::domain(format!("invalid or repeated observed index {i}")));
            }
            seen[i] = true;
        }
        if q.observed_values.iter().any(|&x| !(x > 0.0 && x <= 1.0)) {
            return Err(Error::domain("observed values must lie in (0, 1]"));
        }
        if q.query_values.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::domain("query values must lie in [0, 1]"));
        }
        let mut point = vec![0.0; self.dim];
        for (&i, &v) in q.observed.iter().zip(&q.observed_values) {
            point[i] = v;
        }
        let mut rest = q.query_values.iter();
        for (i, slot) in point.iter_mut().enumerate() {
            if !seen[i] {
                *slot = *rest.next().expect("length checked");
            }
        }
        Ok(point)
    }

    /// `P(U_rest <= x_rest | U_K = x_K)`.
    pub fn conditional_cdf(&self, q: &ConditioningQuery) -> Result<f64> {
        self.check_query(q)?;
        let k = q.observed.len();
        self.check_order(k + 1)?;
        if q.query_values.contains(&0.0) {
            return Ok(0.0);
        }
        let mut t_obs = q.observed_values.iter().map(|&x| self.inv(x)).collect::<Result<Vec<_>>>()?;
        let mut t_all = t_obs.clone();
        for &x in &q.query_values {
            if x < 1.0 {
                t_all.push(self.inv(x)?);
            }
        }
        let s_obs = sorted_sum(&mut t_obs);
        let s_all = sorted_sum(&mut t_all);
        if s_all == s_obs {
            return Ok(1.0);
        }
        let den = self.signed_derivative(s_obs, k)?;
        let num = sign_pow(k) * self.generator.series(s_all, k)?.derivative(k);
        Ok((num / den).clamp(0.0, 1.0))
    }

    /// Log of `p(x_rest | x_K)`: joint density over the `|K|`-fold mixed
    /// partial of `C` at `(x_K, 1)`.
    pub fn conditional_log_density(&self, q: &ConditioningQuery) -> Result<f64> {
        let point = self.check_query(q)?;
        let k = q.observed.len();
        let joint = self.log_density(&point)?;
        let mut t_obs = q.observed_values.iter().map(|&x| self.inv(x)).collect::<Result<Vec<_>>>()?;
        let s_obs = sorted_sum(&mut t_obs);
        let mut log_marg = self.signed_derivative(s_obs, k)?.ln();
        for &t in &t_obs {
            log_marg -= self.neg_slope(t)?.ln();
        }
        Ok(joint - log_marg)
    }

    /// Probability of the rectangle by inclusion-exclusion over its corners.
    pub fn rectangle_prob(&self, r: &Rectangle) -> Result<f64> {
        r.validate()?;
        if r.dim() != self.dim {
            return Err(Error::Structural(format!(
                "rectangle has {} sides, model dimension is {}",
                r.dim(),
                self.dim
            )));
        }
        // Inverse levels per side; None encodes u = 0 (t = infinity).
        let inv_or_none = |u: f64| -> Result<Option<f64>> {
            if u == 0.0 {
                Ok(None)
            } else if u == 1.0 {
                Ok(Some(0.0))
            } else {
                self.inv(u).map(Some)
            }
        };
        let lows = r.lower.iter().map(|&u| inv_or_none(u)).collect::<Result<Vec<_>>>()?;
        let highs = r.upper.iter().map(|&u| inv_or_none(u)).collect::<Result<Vec<_>>>()?;

        let mut total = 0.0;
        let mut ts = Vec::with_capacity(self.dim);
        'corners: for mask in 0u32..(1 << self.dim) {
            ts.clear();
            let mut n_low = 0;
            for i in 0..self.dim {
                let t = if mask >> i & 1 == 1 {
                    n_low += 1;
                    lows[i]
                } else {
                    highs[i]
                };
                match t {
                    Some(t) => ts.push(t),
                    None => continue 'corners,
                }
            }
            let s = sorted_sum(&mut ts);
            let c = self.generator.series(s, 0)?.value();
            total += if n_low % 2 == 0 { c } else { -c };
        }
        if total < -1e-9 {
            return Err(Error::InvariantViolation(format!(
                "rectangle probability {total} is negative"
            )));
        }
        Ok(total.max(0.0))
    }

    /// Log of [`CopulaModel::rectangle_prob`]; `-inf` for zero-volume boxes.
    pub fn rectangle_log_prob(&self, r: &Rectangle) -> Result<f64> {
        self.rectangle_prob(r).map(f64::ln)
    }

    /// Finite-level lower and upper tail-dependence ratios (bivariate only).
    pub fn tail_dependence_profile(&self, levels: &[f64]) -> Result<Vec<TailRatio>> {
        if self.dim != 2 {
            return Err(Error::Unsupported("tail-dependence ratios are defined for d = 2".into()));
        }
        levels
            .iter()
            .map(|&u| {
                if !(u > 0.0 && u < 1.0) {
                    return Err(Error::domain(format!("tail level {u} outside (0, 1)")));
                }
                let c = self.cdf(&[u, u])?;
                let tail = 1.0 - u;
                Ok(TailRatio { level: u, lower: c / u, upper: (tail - (u - c)) / tail })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{FamilyKind, ParametricFamily};

    fn independence() -> CopulaModel {
        CopulaModel::new(2, ParametricFamily::independence()).unwrap()
    }

    fn clayton(theta: f64) -> CopulaModel {
        CopulaModel::new(2, ParametricFamily::new(FamilyKind::Clayton, theta).unwrap()).unwrap()
    }

    #[test]
    fn independence_cdf_is_product() {
        let m = independence();
        assert!((m.cdf(&[0.3, 0.5]).unwrap() - 0.15).abs() < 1e-15);
        assert_eq!(m.cdf(&[0.0, 0.5]).unwrap(), 0.0);
        assert_eq!(m.cdf(&[1.0, 1.0]).unwrap(), 1.0);
    }

    #[test]
    fn clayton_cdf_closed_form() {
        let m = clayton(5.0);
        let expected = 63f64.powf(-0.2);
        assert!((m.cdf(&[0.5, 0.5]).unwrap() - expected).abs() < 1e-14);
        assert!((m.cdf(&[0.37, 1.0]).unwrap() - 0.37).abs() < 1e-12);
    }

    #[test]
    fn independence_density_is_flat() {
        let m = independence();
        assert!(m.log_density(&[0.2, 0.9]).unwrap().abs() < 1e-12);
        let q = ConditioningQuery { observed: vec![0], observed_values: vec![0.3], query_values: vec![0.6] };
        assert!((m.conditional_cdf(&q).unwrap() - 0.6).abs() < 1e-12);
        assert!(m.conditional_log_density(&q).unwrap().abs() < 1e-12);
    }

    #[test]
    fn boundary_density_rejected() {
        let m = clayton(2.0);
        assert!(matches!(m.log_density(&[0.0, 0.4]), Err(Error::Domain(_))));
        assert!(matches!(m.log_density(&[1.0, 0.4]), Err(Error::Domain(_))));
    }

    #[test]
    fn conditional_total_mass() {
        let m = clayton(3.0);
        let q = ConditioningQuery { observed: vec![1], observed_values: vec![0.4], query_values: vec![1.0] };
        assert_eq!(m.conditional_cdf(&q).unwrap(), 1.0);
    }

    #[test]
    fn query_validation() {
        let m = clayton(3.0);
        let q = ConditioningQuery { observed: vec![], observed_values: vec![], query_values: vec![0.2, 0.3] };
        assert!(matches!(m.conditional_cdf(&q), Err(Error::Domain(_))));
        let q = ConditioningQuery { observed: vec![0, 1], observed_values: vec![0.2, 0.3], query_values: vec![] };
        assert!(matches!(m.conditional_cdf(&q), Err(Error::Domain(_))));
        let q = ConditioningQuery { observed: vec![2], observed_values: vec![0.2], query_values: vec![0.3] };
        assert!(matches!(m.conditional_cdf(&q), Err(Error::Domain(_))));
    }

    #[test]
    fn rectangles() {
        let m = independence();
        assert_eq!(m.rectangle_log_prob(&Rectangle::unit(2)).unwrap(), 0.0);
        let r = Rectangle::new(vec![0.2, 0.3], vec![0.5, 0.6]).unwrap();
        assert!((m.rectangle_log_prob(&r).unwrap() - 0.09f64.ln()).abs() < 1e-12);
        let flat = Rectangle::new(vec![0.2, 0.3], vec![0.2, 0.6]).unwrap();
        assert_eq!(m.rectangle_log_prob(&flat).unwrap(), f64::NEG_INFINITY);
        assert!(Rectangle::new(vec![0.5, 0.3], vec![0.2, 0.6]).is_err());
    }

    #[test]
    fn tail_profile_requires_bivariate() {
        let m = CopulaModel::new(3, ParametricFamily::independence()).unwrap();
        assert!(matches!(m.tail_dependence_profile(&[0.1]), Err(Error::Unsupported(_))));
        let r = independence().tail_dependence_profile(&[0.01]).unwrap();
        assert!((r[0].lower - 0.01).abs() < 1e-12);
    }

    #[test]
    fn density_order_cap_enforced() {
        let settings = EvalSettings { max_order: 2, ..EvalSettings::default() };
        let m = CopulaModel::with_settings(3, ParametricFamily::independence(), settings).unwrap();
        assert!(matches!(m.log_density(&[0.5, 0.5, 0.5]), Err(Error::Capacity { .. })));
    }
}
