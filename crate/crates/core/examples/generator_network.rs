//! Inspect a generator network: derivative stacks, the exact mixture it
//! represents, weight adjoints and generator inversion.
//!
//! cargo run --release --example generator_network -- [seed]

use acnet::network::DEFAULT_PATH_CAP;
use acnet::{invert, GeneratorNetwork};

fn main() -> acnet::Result<()> {
    let seed: u64 = std::env::args().nth(1).map(|s| s.parse().expect("seed")).unwrap_or(3);
    let net = GeneratorNetwork::init(&[4, 3], seed)?;
    let mix = net.enumerate_mixture(DEFAULT_PATH_CAP)?;
    println!("{} weights, {} mixture atoms, E[M] = {:.4}", net.num_weights(), mix.len(), mix.mean());

    for t in [0.0, 0.5, 2.0] {
        let s = net.phi_eval(t, 4, true)?;
        let exact = mix.derivatives(t, 4);
        println!("t = {t}");
        for k in 0..=4 {
            println!("  phi^({k}) = {:+.10e}   mixture {:+.10e}", s.derivative(k), exact[k]);
        }
        let adj = &s.adjoints().expect("requested")[0];
        let norm = adj.0.iter().map(|g| g * g).sum::<f64>().sqrt();
        println!("  |d phi / d weights| = {norm:.4e}");
    }

    for u in [0.9, 0.5, 1e-3, 1e-12] {
        let inv = invert(&net, u)?;
        println!(
            "phi^-1({u:e}) = {:.10}  residual {:.1e}  after {} iterations",
            inv.t_star, inv.residual, inv.iterations
        );
    }
    Ok(())
}
