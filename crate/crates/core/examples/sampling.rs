//! Draw from a network copula by sampling its mixing variable, then check
//! the draws against the model cdf.
//!
//! cargo run --release --example sampling -- [n] [dim]

use acnet::rng;
use acnet::sampling::{sample_m, sample_u};
use acnet::{CopulaModel, GeneratorNetwork};

fn main() -> acnet::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map(|s| s.parse().expect("n")).unwrap_or(50_000);
    let dim: usize = args.next().map(|s| s.parse().expect("dim")).unwrap_or(3);

    let net = GeneratorNetwork::init(&[10, 10], 21)?;
    let mix = net.enumerate_mixture(acnet::network::DEFAULT_PATH_CAP)?;
    let mut r = rng::stream(1, 0);
    let mean_m = (0..n).map(|_| sample_m(&net, &mut r).m).sum::<f64>() / n as f64;
    println!("E[M]: sampled {mean_m:.4}, exact {:.4}", mix.mean());

    let ds = sample_u(&net, dim, n, 2)?;
    let model = CopulaModel::new(dim, net)?;
    for level in [0.2, 0.5, 0.8] {
        let inside = ds.rows().filter(|row| row.iter().all(|&x| x <= level)).count() as f64 / n as f64;
        println!("P(all <= {level}): empirical {inside:.4}, model {:.4}", model.cdf(&vec![level; dim])?);
    }
    Ok(())
}
