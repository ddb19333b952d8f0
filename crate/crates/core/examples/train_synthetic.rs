//! Fit the default generator network to synthetic Clayton data and compare
//! it with the fitted parametric Clayton copula.
//!
//! cargo run --release --example train_synthetic -- [epochs] [family] [theta]

use acnet::families::fit_parametric;
use acnet::training::{fit, TrainConfig, TrainData};
use acnet::{FamilyKind, GeneratorNetwork, ParametricFamily};

fn main() -> acnet::Result<()> {
    let mut args = std::env::args().skip(1);
    let epochs: usize = args.next().map(|s| s.parse().expect("epochs")).unwrap_or(200);
    let kind: FamilyKind = args.next().map(|s| s.parse()).transpose()?.unwrap_or(FamilyKind::Clayton);
    let theta: f64 = args.next().map(|s| s.parse().expect("theta")).unwrap_or(5.0);

    let truth = ParametricFamily::new(kind, theta)?;
    let train = truth.sample_bivariate(2000, 1)?;
    let test = truth.sample_bivariate(1000, 2)?;

    let net = GeneratorNetwork::init(&[10, 10], 0)?;
    let cfg = TrainConfig { epochs, test_interval: (epochs / 10).max(1), ..TrainConfig::default() };
    let report = fit(&net, TrainData::Points(&train), Some(TrainData::Points(&test)), &cfg)?;
    for e in report.epochs.iter().filter(|e| e.test_nll.is_some()) {
        println!("epoch {:>6}  train {:+.4}  test {:+.4}  {:.1}s", e.epoch, e.train_nll, e.test_nll.unwrap(), e.seconds);
    }
    println!("network test NLL   {:+.4} ({:?})", report.final_test_nll.unwrap_or(f64::NAN), report.status);

    let param_cfg = TrainConfig { epochs: 100, ..TrainConfig::default() };
    let param = fit_parametric(kind, &train, Some(&test), &param_cfg)?;
    println!("fitted {kind} theta {:.3}, test NLL {:+.4}", param.family.theta(), param.test_nll.unwrap());
    let model = acnet::CopulaModel::new(2, truth)?;
    println!("true {kind} test NLL {:+.4}", acnet::families::mean_nll(&model, &test)?);
    Ok(())
}
