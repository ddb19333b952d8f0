//! Generator inversion by safeguarded Newton iteration, plus the implicit
//! derivatives of the inverse with respect to its argument and the weights.

use crate::error::{Error, Result};
use crate::network::{GeneratorNetwork, NetTape};
use crate::series::WeightGradient;

/// Stopping and safety limits for the root finder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionSettings {
    /// Maximum accepted `|phi(t) - u|` at the returned root.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for InversionSettings {
    fn default() -> Self {
        InversionSettings { tolerance: 1e-10, max_iterations: 200 }
    }
}

/// Result of inverting the generator at one level `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseResult {
    pub t_star: f64,
    pub residual: f64,
    pub iterations: usize,
    /// `d phi^{-1}(u) / du = 1 / phi'(t_star)`
    pub d_du: f64,
    /// `d phi^{-1}(u) / d raw = -(d phi / d raw) / phi'` at `t_star`
    pub d_dphi: WeightGradient,
}

/// Root of a decreasing function, as found by [`solve_decreasing`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub t: f64,
    pub value: f64,
    pub iterations: usize,
}

const DOUBLING_CAP: f64 = 1.2676506002282294e30; // 2^100

/// Solve `f(t) = target` for a positive, strictly decreasing, log-convex `f`
/// on `[start, inf)` with `f(start) >= target > 0`.
///
/// `eval` returns `(f(t), f'(t))`. Newton steps are taken on `ln f`, which
/// for log-convex `f` approach the root monotonically from the left; any step
/// that leaves the current bracket falls back to bisection. The bracket
/// grows by doubling steps of `max(1, start)`, up to 2^100 such steps.
pub fn solve_decreasing<F>(
    target: f64,
    start: f64,
    settings: &InversionSettings,
    mut eval: F,
) -> Result<Root>
where
    F: FnMut(f64) -> Result<(f64, f64)>,
{
    if !(target > 0.0) || !target.is_finite() {
        return Err(Error::domain(format!("root target must be positive, got {target}")));
    }
    let mut lo = start;
    let (f_lo, mut slope) = eval(lo)?;
    if f_lo < target {
        return Err(Error::domain(format!(
            "f({start}) = {f_lo} is already below the target {target}"
        )));
    }
    if f_lo == target {
        return Ok(Root { t: lo, value: f_lo, iterations: 0 });
    }

    let mut iterations = 0;
    let mut t = lo;
    let mut value = f_lo;
    let scale = start.max(1.0);
    let mut step = scale;
    let mut hi = lo + step;
    loop {
        let (v, d) = eval(hi)?;
        iterations += 1;
        if v < target {
            break;
        }
        lo = hi;
        t = hi;
        value = v;
        slope = d;
        if v == target {
            return Ok(Root { t, value, iterations });
        }
        step *= 2.0;
        hi = start + step;
        if step > DOUBLING_CAP * scale {
            return Err(Error::Convergence { iterations, lo, hi });
        }
    }

    // The doubling phase has its own cap; refinement gets the full budget.
    let ln_target = target.ln();
    let mut refinements = 0;
    while refinements < settings.max_iterations {
        refinements += 1;
        iterations += 1;
        let newton = if value > 0.0 && slope < 0.0 {
            t - (value.ln() - ln_target) * value / slope
        } else {
            f64::NAN
        };
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if next == t {
            break;
        }
        let (v, d) = eval(next)?;
        let moved = (next - t).abs();
        t = next;
        value = v;
        slope = d;
        if v >= target {
            lo = t;
        } else {
            hi = t;
        }
        if ((v - target) / target).abs() <= 1e-15
            || moved <= 4.0 * f64::EPSILON * t.abs()
            || hi - lo <= 4.0 * f64::EPSILON * hi
        {
            break;
        }
    }
    if ((value - target) / target).abs() > 1e-12 && refinements >= settings.max_iterations {
        return Err(Error::Convergence { iterations, lo, hi });
    }
    Ok(Root { t, value, iterations })
}

fn check_level(u: f64) -> Result<()> {
    if !(u > 0.0 && u <= 1.0) {
        return Err(Error::domain(format!("inversion level must lie in (0, 1], got {u}")));
    }
    Ok(())
}

/// `phi^{-1}(u)` only, reusing `tape` as scratch space.
pub fn invert_value(
    net: &GeneratorNetwork,
    u: f64,
    settings: &InversionSettings,
    tape: &mut NetTape,
) -> Result<Root> {
    check_level(u)?;
    if u == 1.0 {
        return Ok(Root { t: 0.0, value: 1.0, iterations: 0 });
    }
    let root = solve_decreasing(u, 0.0, settings, |t| net.value_and_slope(t, tape))?;
    let residual = (root.value - u).abs();
    if residual > settings.tolerance {
        return Err(Error::Convergence { iterations: root.iterations, lo: root.t, hi: root.t });
    }
    Ok(root)
}

/// Invert the generator at `u` and supply both implicit derivatives.
pub fn invert(net: &GeneratorNetwork, u: f64) -> Result<InverseResult> {
    invert_with(net, u, &InversionSettings::default())
}

pub fn invert_with(
    net: &GeneratorNetwork,
    u: f64,
    settings: &InversionSettings,
) -> Result<InverseResult> {
    let mut tape = NetTape::default();
    let root = invert_value(net, u, settings, &mut tape)?;
    net.forward(root.t, 1, &mut tape)?;
    let slope = tape.output()[1];
    if !(slope < 0.0) {
        return Err(Error::degenerate(format!("generator slope {slope} at t = {} is not negative", root.t)));
    }
    let mut d_dphi = WeightGradient::zeros(net.num_weights());
    net.backprop(&tape, &[-1.0 / slope, 0.0], &mut d_dphi);
    Ok(InverseResult {
        t_star: root.t,
        residual: (tape.output()[0] - u).abs(),
        iterations: root.iterations,
        d_du: 1.0 / slope,
        d_dphi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_exponential() -> GeneratorNetwork {
        GeneratorNetwork::new(vec![1], vec![0.0, 0.0, 0.0]).unwrap()
    }

    #[test]
    fn bracket_scales_with_a_distant_start() {
        // Power-law tail whose root sits far beyond start + 2^100.
        let f = |s: f64| -> Result<(f64, f64)> { Ok(((1.0 + s).powf(-1.2), -1.2 * (1.0 + s).powf(-2.2))) };
        let start = 1e31;
        let target = 0.01 * f(start).unwrap().0;
        let root = solve_decreasing(target, start, &InversionSettings::default(), f).unwrap();
        assert!(((root.value - target) / target).abs() < 1e-14);
    }

    #[test]
    fn exponential_closed_form() {
        let r = invert(&unit_exponential(), 0.5).unwrap();
        assert!((r.t_star - std::f64::consts::LN_2).abs() < 1e-14);
        assert!((r.d_du + 2.0).abs() < 1e-12);
        assert!(r.residual <= 1e-15);
    }

    #[test]
    fn level_one_is_zero_without_iterations() {
        let net = GeneratorNetwork::init(&[10, 10], 1).unwrap();
        let r = invert(&net, 1.0).unwrap();
        assert_eq!(r.t_star, 0.0);
        assert_eq!(r.iterations, 0);
        assert!(r.d_dphi.iter().all(|g| g.abs() < 1e-15));
    }

    #[test]
    fn rejects_out_of_range_levels() {
        let net = unit_exponential();
        for u in [0.0, -0.2, 1.0000001, f64::NAN] {
            assert!(matches!(invert(&net, u), Err(Error::Domain(_))), "u = {u}");
        }
    }

    #[test]
    fn round_trip_on_random_net() {
        let net = GeneratorNetwork::init(&[10, 10], 17).unwrap();
        let mut tape = NetTape::default();
        for i in 1..200 {
            let u = i as f64 / 200.0;
            let r = invert(&net, u).unwrap();
            let phi = net.phi_eval(r.t_star, 0, false).unwrap().value();
            assert!((phi - u).abs() <= 1e-10);
            let t = 0.05 * i as f64;
            let v = net.value_and_slope(t, &mut tape).unwrap().0;
            let back = invert_value(&net, v, &InversionSettings::default(), &mut tape).unwrap();
            assert!((back.t - t).abs() <= 1e-8 * t.max(1.0));
        }
    }

    #[test]
    fn tiny_levels_converge() {
        let net = GeneratorNetwork::init(&[10, 10], 2).unwrap();
        for u in [1e-12, 1e-50, 1e-300] {
            let r = invert(&net, u).unwrap();
            assert!(r.residual <= 1e-10);
            assert!(r.iterations < 200);
        }
    }
}
