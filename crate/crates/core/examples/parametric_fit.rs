//! Fit each reference family to the same sample by maximum likelihood.
//!
//! cargo run --release --example parametric_fit -- [epochs]

use acnet::families::fit_parametric;
use acnet::training::TrainConfig;
use acnet::{FamilyKind, ParametricFamily};

fn main() -> acnet::Result<()> {
    let epochs: usize = std::env::args().nth(1).map(|s| s.parse().expect("epochs")).unwrap_or(500);
    let truth = ParametricFamily::new(FamilyKind::Gumbel, 2.0)?;
    let train = truth.sample_bivariate(2000, 1)?;
    let test = truth.sample_bivariate(1000, 2)?;

    let cfg = TrainConfig { epochs, ..TrainConfig::default() };
    for kind in [FamilyKind::Clayton, FamilyKind::Frank, FamilyKind::Joe, FamilyKind::Gumbel] {
        let f = fit_parametric(kind, &train, Some(&test), &cfg)?;
        println!("{kind:<8} theta {:>7.3}  train {:+.4}  test {:+.4}", f.family.theta(), f.train_nll, f.test_nll.unwrap());
    }
    Ok(())
}
