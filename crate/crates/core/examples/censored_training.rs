//! Train on interval-censored Clayton data and compare cell probabilities
//! on a 10 x 10 grid with the true copula.
//!
//! cargo run --release --example censored_training -- [epochs] [lambda]

use acnet::data::censor;
use acnet::training::{fit, LossKind, TrainConfig, TrainData};
use acnet::{CopulaModel, FamilyKind, GeneratorNetwork, ParametricFamily, Rectangle};

fn cell(i: usize, j: usize) -> Rectangle {
    let lo = |k: usize| k as f64 / 10.0;
    Rectangle::new(vec![lo(i), lo(j)], vec![lo(i + 1), lo(j + 1)]).unwrap()
}

fn main() -> acnet::Result<()> {
    let mut args = std::env::args().skip(1);
    let epochs: usize = args.next().map(|s| s.parse().expect("epochs")).unwrap_or(200);
    let lambda: f64 = args.next().map(|s| s.parse().expect("lambda")).unwrap_or(0.1);

    let truth = ParametricFamily::new(FamilyKind::Clayton, 5.0)?;
    let points = truth.sample_bivariate(2000, 1)?;
    let boxes = censor(&points, lambda, 3)?;

    let cfg = TrainConfig { epochs, loss: LossKind::Censored, test_interval: 0, ..TrainConfig::default() };
    let net = GeneratorNetwork::init(&[10, 10], 0)?;
    let report = fit(&net, TrainData::Censored(&boxes), None, &cfg)?;
    println!("status {:?}, final censored NLL {:+.4}", report.status, report.final_train_nll());

    let fitted = CopulaModel::new(2, report.network)?;
    let reference = CopulaModel::new(2, truth)?;
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        for j in 0..10 {
            let gap = fitted.rectangle_prob(&cell(i, j))? - reference.rectangle_prob(&cell(i, j))?;
            worst = worst.max(gap.abs());
        }
    }
    println!("largest cell gap {worst:.4}");
    println!(
        "lower-tail cell: fitted {:.4}, true {:.4}",
        fitted.rectangle_prob(&cell(0, 0))?,
        reference.rectangle_prob(&cell(0, 0))?
    );
    Ok(())
}
