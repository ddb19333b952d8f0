//! Load a CSV (or simulate one), rank-normalise, split, and derive the
//! flipped, contaminated and censored variants used for training.
//!
//! cargo run --release --example data_pipeline -- [raw.csv]

use acnet::data::{censor, flip, inject_outliers, kendall_tau, rank_normalize, split, DEFAULT_OUTLIER_RATE};
use acnet::{Dataset, FamilyKind, ParametricFamily};

fn main() -> acnet::Result<()> {
    let raw = match std::env::args().nth(1) {
        Some(path) => Dataset::load(path.as_ref())?,
        None => {
            let u = ParametricFamily::new(FamilyKind::Clayton, 3.0)?.sample_bivariate(1000, 4)?;
            // Arbitrary monotone margins: ranks are unchanged.
            let values = u.values().iter().map(|x| (x / (1.0 - x)).ln() * 10.0 + 50.0).collect();
            Dataset::raw(2, values)?
        }
    };
    let pseudo = rank_normalize(&raw)?;
    println!("{} rows, Kendall tau {:.3}", pseudo.len(), kendall_tau(&pseudo, 0, 1));

    let (train, test) = split(&raw, 0.6, 9)?;
    println!("split: {} train / {} test", train.len(), test.len());

    let flipped = flip(&train, &[1])?;
    println!("after flipping column 1: tau {:.3}", kendall_tau(&flipped, 0, 1));

    let noisy = inject_outliers(&train, DEFAULT_OUTLIER_RATE, 10)?;
    println!("with {:.0}% outliers: tau {:.3}", 100.0 * DEFAULT_OUTLIER_RATE, kendall_tau(&noisy, 0, 1));

    let boxes = censor(&train, 0.1, 11)?;
    let (lo, hi) = (boxes.lower(0), boxes.upper(0));
    println!("first censored row: [{:.3}, {:.3}] x [{:.3}, {:.3}]", lo[0], hi[0], lo[1], hi[1]);
    Ok(())
}
