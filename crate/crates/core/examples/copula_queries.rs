//! Every query on one model: cdf, density, conditionals, rectangles and
//! tail ratios. Works for a saved model file or a fresh network.
//!
//! cargo run --release --example copula_queries -- [model.json]

use acnet::{ConditioningQuery, CopulaModel, GeneratorNetwork, ModelFile, Rectangle};

fn main() -> acnet::Result<()> {
    let model = match std::env::args().nth(1) {
        Some(path) => {
            let file = ModelFile::load(path.as_ref())?;
            CopulaModel::new(file.dimension.unwrap_or(2), file.generator)?
        }
        None => CopulaModel::new(2, GeneratorNetwork::init(&[10, 10], 7)?)?,
    };
    let d = model.dim();
    let u = vec![0.4; d];

    println!("C({u:?}) = {:.6}", model.cdf(&u)?);
    println!("c({u:?}) = {:.6}", model.density(&u)?);

    let q = ConditioningQuery { observed: vec![0], observed_values: vec![0.2], query_values: vec![0.3; d - 1] };
    println!("P(U_rest <= 0.3 | U_0 = 0.2) = {:.6}", model.conditional_cdf(&q)?);
    println!("conditional log density = {:.6}", model.conditional_log_density(&q)?);

    let r = Rectangle::new(vec![0.1; d], vec![0.5; d])?;
    println!("P(U in [0.1, 0.5]^{d}) = {:.6} (independence {:.6})", model.rectangle_prob(&r)?, r.volume());

    if d == 2 {
        let eps = [0.1, 0.01, 0.001];
        let near_one: Vec<f64> = eps.iter().map(|e| 1.0 - e).collect();
        let lower = model.tail_dependence_profile(&eps)?;
        let upper = model.tail_dependence_profile(&near_one)?;
        println!("eps     C(e,e)/e  upper ratio at 1-e");
        for (l, u) in lower.iter().zip(&upper) {
            println!("{:<7} {:.4}    {:.4}", l.level, l.lower, u.upper);
        }
    }
    Ok(())
}
