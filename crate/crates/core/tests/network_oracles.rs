use acnet::network::DEFAULT_PATH_CAP;
use acnet::GeneratorNetwork;
use proptest::prelude::*;

mod common;
use common::rel_err;

#[test]
fn derivative_stacks_match_enumerated_mixture() {
    for seed in 0..10 {
        let net = GeneratorNetwork::init(&[10, 10], seed).unwrap();
        let mix = net.enumerate_mixture(DEFAULT_PATH_CAP).unwrap();
        assert_eq!(mix.len(), 100);
        assert!((mix.total_weight() - 1.0).abs() < 1e-14);
        for &t in &[0.0, 0.01, 0.3, 1.0, 4.0, 12.0] {
            let s = net.phi_eval(t, 6, false).unwrap();
            let oracle = mix.derivatives(t, 6);
            for k in 0..=6 {
                assert!(rel_err(s.derivative(k), oracle[k]) <= 1e-12, "seed {seed} t {t} k {k}");
            }
        }
    }
}

#[test]
fn slope_at_zero_is_minus_mean_rate() {
    let net = GeneratorNetwork::init(&[4, 5, 3], 8).unwrap();
    let mix = net.enumerate_mixture(DEFAULT_PATH_CAP).unwrap();
    let s = net.phi_eval(0.0, 1, false).unwrap();
    assert!(rel_err(-s.derivative(1), mix.mean()) < 1e-13);
}

#[test]
fn complete_monotonicity_on_random_nets() {
    for seed in 100..120 {
        let net = GeneratorNetwork::init(&[10, 10], seed).unwrap();
        for i in 0..100 {
            let t = 0.15 * i as f64;
            let s = net.phi_eval(t, 6, false).unwrap();
            for k in 0..=6 {
                let signed = if k % 2 == 0 { 1.0 } else { -1.0 } * s.derivative(k);
                assert!(signed >= -1e-12, "seed {seed} t {t} k {k}: {signed}");
            }
        }
    }
}

#[test]
fn tape_adjoints_match_finite_differences() {
    let net = GeneratorNetwork::init(&[3, 4], 3).unwrap();
    let t = 0.7;
    let s = net.phi_eval(t, 3, true).unwrap();
    let adj = s.adjoints().unwrap();
    let raw = net.raw_weights().to_vec();
    for w in 0..raw.len() {
        let h = 1e-6;
        let mut p = raw.clone();
        p[w] += h;
        let mut m = raw.clone();
        m[w] -= h;
        let sp = net.with_raw_weights(p).unwrap().phi_eval(t, 3, false).unwrap();
        let sm = net.with_raw_weights(m).unwrap().phi_eval(t, 3, false).unwrap();
        for k in 0..=3 {
            let fd = (sp.derivative(k) - sm.derivative(k)) / (2.0 * h);
            let scale = fd.abs().max(adj[k][w].abs()).max(1e-8);
            assert!((fd - adj[k][w]).abs() / scale < 1e-6, "w {w} k {k}: {} vs {fd}", adj[k][w]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generator_is_a_decreasing_probability(seed in 0u64..10_000, t in 0.0f64..50.0) {
        let net = GeneratorNetwork::init(&[5, 5], seed).unwrap();
        let s = net.phi_eval(t, 2, false).unwrap();
        prop_assert!(s.value() > 0.0 && s.value() <= 1.0);
        prop_assert!(s.derivative(1) < 0.0);
        prop_assert!(s.derivative(2) > 0.0);
    }

    #[test]
    fn raw_weights_round_trip(seed in 0u64..10_000) {
        let net = GeneratorNetwork::init(&[3, 7], seed).unwrap();
        let rebuilt = GeneratorNetwork::from_nested(vec![3, 7], &net.phi_a_nested(), &net.phi_b_nested()).unwrap();
        prop_assert_eq!(rebuilt.raw_weights(), net.raw_weights());
    }
}
