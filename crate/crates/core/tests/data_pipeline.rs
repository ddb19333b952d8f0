use acnet::data::{censor, flip, inject_outliers, kendall_tau, rank_normalize, split};
use acnet::{Dataset, FamilyKind, ParametricFamily};
use proptest::prelude::*;

#[test]
fn injected_points_are_uniform() {
    let n = 100_000;
    let base = Dataset::normalized(2, vec![0.5; 2 * n]).unwrap();
    let out = inject_outliers(&base, 1.0, 5).unwrap();
    assert_eq!(out.len(), 2 * n);
    let mut cells = [0usize; 16];
    for r in out.rows().skip(n) {
        let i = (r[0] * 4.0) as usize;
        let j = (r[1] * 4.0) as usize;
        cells[i * 4 + j] += 1;
    }
    let expected = n as f64 / 16.0;
    let chi2: f64 = cells.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    // 99th percentile of chi-square with 15 degrees of freedom.
    assert!(chi2 < 30.578, "chi2 {chi2}");
}

#[test]
fn flipping_reverses_kendall_tau() {
    let ds = ParametricFamily::new(FamilyKind::Clayton, 2.0).unwrap().sample_bivariate(500, 1).unwrap();
    let tau = kendall_tau(&ds, 0, 1);
    assert!(tau > 0.4);
    let flipped = kendall_tau(&flip(&ds, &[1]).unwrap(), 0, 1);
    assert!((tau + flipped).abs() < 1e-12);
}

#[test]
fn censoring_width_matches_noise_level() {
    let n = 100_000;
    let lambda = 0.1;
    // Keep entries away from the edges so no interval is truncated.
    let values: Vec<f64> = (0..n).map(|i| lambda + (1.0 - 2.0 * lambda) * (i as f64 + 0.5) / n as f64).collect();
    let ds = Dataset::normalized(1, values).unwrap();
    let c = censor(&ds, lambda, 3).unwrap();
    let width: f64 = (0..n).map(|i| c.upper(i)[0] - c.lower(i)[0]).sum::<f64>() / n as f64;
    assert!((width - lambda).abs() <= 0.02 * lambda, "mean width {width}");
}

#[test]
fn tiny_noise_degenerates_to_points() {
    let ds = Dataset::normalized(2, vec![0.3, 0.7]).unwrap();
    let c = censor(&ds, 1e-12, 0).unwrap();
    assert!((c.upper(0)[0] - c.lower(0)[0]) <= 2e-12);
}

#[test]
fn split_is_reproducible() {
    let raw = Dataset::raw(2, (0..800).map(|i| ((i * 7919) % 1009) as f64).collect()).unwrap();
    assert_eq!(split(&raw, 0.75, 4).unwrap(), split(&raw, 0.75, 4).unwrap());
    assert_ne!(split(&raw, 0.75, 4).unwrap(), split(&raw, 0.75, 5).unwrap());
}

#[test]
fn sorted_column_maps_to_uniform_grid() {
    let ds = Dataset::raw(1, (0..9).map(|i| i as f64 * 3.0).collect()).unwrap();
    let r = rank_normalize(&ds).unwrap();
    let expected: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
    assert_eq!(r.values(), &expected[..]);
}

proptest! {
    #[test]
    fn normalized_entries_are_interior(values in prop::collection::vec(-1e6f64..1e6, 4..60)) {
        let n = values.len() / 2 * 2;
        let ds = Dataset::raw(2, values[..n].to_vec()).unwrap();
        if let Ok(r) = rank_normalize(&ds) {
            prop_assert!(r.values().iter().all(|&v| v > 0.0 && v < 1.0));
        }
    }

    #[test]
    fn flip_involution(seed in 0u64..1000) {
        let ds = ParametricFamily::independence().sample_bivariate(20, seed).unwrap();
        prop_assert_eq!(flip(&flip(&ds, &[0, 1]).unwrap(), &[0, 1]).unwrap(), ds);
    }
}
