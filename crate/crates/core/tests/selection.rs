use mellin_deconv::distributions::{sample, sample_product, DistSpec};
use mellin_deconv::empirical::{empirical_mellin, sigma_hat_sq, threshold_mask};
use mellin_deconv::mellin::{MellinFn, TGrid, WeightFn};
use mellin_deconv::selection::{select_known, select_unknown, PenaltyConfig, Regime, SelectionResult};
use mellin_deconv::simulation::{preset, replication_seed, Experiment};
use proptest::prelude::*;
use std::collections::BTreeMap;

struct Dataset {
    my: MellinFn,
    mu: MellinFn,
    mu_hat: MellinFn,
    sigma: f64,
    n: usize,
    m: usize,
}

fn dataset(seed: u64, n: usize, m: usize, c: f64) -> Dataset {
    let grid = TGrid::default();
    let x = DistSpec::gamma(1.0, 3.0).unwrap();
    let u = DistSpec::pareto(1.0, 1.0).unwrap();
    let y = sample_product(&x, &u, n, seed).unwrap();
    let us = sample(&u, m, seed ^ 0xABCD).unwrap();
    Dataset {
        my: empirical_mellin(&y, c, &grid).unwrap(),
        mu: u.analytic_mellin_fn(c, &grid).unwrap(),
        mu_hat: empirical_mellin(&us, c, &grid).unwrap(),
        sigma: sigma_hat_sq(&y, c),
        n,
        m,
    }
}

fn run_unknown(d: &Dataset, a: f64, kappa: f64, sigma: f64) -> SelectionResult {
    let grid = *d.my.grid();
    let v = WeightFn::new(grid, 0.5, a).unwrap();
    let mask = threshold_mask(&d.mu_hat, d.m, d.n).unwrap();
    let cfg = PenaltyConfig::new(Regime::Unknown, kappa).unwrap();
    select_unknown(&d.my, &d.mu_hat, &mask, &v, sigma, d.n, &cfg).unwrap()
}

fn run_known(d: &Dataset, kappa: f64, sigma: f64) -> SelectionResult {
    let grid = *d.my.grid();
    let v = WeightFn::new(grid, 0.5, 0.0).unwrap();
    let cfg = PenaltyConfig::new(Regime::Known, kappa).unwrap();
    select_known(&d.my, &d.mu, &v, sigma, d.n, &cfg).unwrap()
}

fn check_scan(r: &SelectionResult) {
    assert_eq!(r.per_k.len(), r.k_n);
    for (i, row) in r.per_k.iter().enumerate() {
        assert_eq!(row.k, i + 1);
        assert!(row.small_delta >= 1.0);
    }
    for w in r.per_k.windows(2) {
        assert!(w[1].contrast <= w[0].contrast);
        assert!(w[1].delta >= w[0].delta);
    }
    let best = r.per_k.iter().map(|t| t.objective).fold(f64::INFINITY, f64::min);
    let first = r.per_k.iter().find(|t| t.objective == best).unwrap();
    assert_eq!(first.k, r.k_hat);
}

#[test]
fn k_hat_nonincreasing_in_kappa() {
    let kappas = [0.1, 0.3, 1.0, 3.0, 10.0];
    for j in 0..10 {
        let d = dataset(replication_seed(12, j), 400, 400, 0.5);
        let unknown: Vec<usize> = kappas.iter().map(|&k| run_unknown(&d, 0.0, k, d.sigma).k_hat).collect();
        let known: Vec<usize> = kappas.iter().map(|&k| run_known(&d, k, d.sigma).k_hat).collect();
        for ks in [unknown, known] {
            assert!(ks.windows(2).all(|w| w[1] <= w[0]), "dataset {j}: {ks:?}");
        }
    }
}

#[test]
fn scans_are_total_and_monotone() {
    for j in 0..10 {
        let d = dataset(replication_seed(13, j), 300, 150, 0.5);
        for kappa in [0.0, 0.01, 0.3] {
            check_scan(&run_unknown(&d, 0.0, kappa, d.sigma));
            check_scan(&run_unknown(&d, 1.0, kappa, d.sigma));
            check_scan(&run_known(&d, kappa, d.sigma));
        }
    }
}

#[test]
fn tie_break_is_deterministic() {
    let d = dataset(7, 300, 300, 0.5);
    let a = run_unknown(&d, 0.0, 0.3, d.sigma);
    let b = run_unknown(&d, 0.0, 0.3, d.sigma);
    assert_eq!(a, b);
    let grid = *d.my.grid();
    let empty = mellin_deconv::empirical::ThresholdMask::none(grid, 300, 300);
    let v = WeightFn::new(grid, 0.5, 0.0).unwrap();
    let r =
        select_unknown(&d.my, &d.mu_hat, &empty, &v, d.sigma, 300, &PenaltyConfig::new(Regime::Unknown, 0.0).unwrap())
            .unwrap();
    // every objective is exactly zero, so the smallest k wins
    assert!(r.per_k.iter().all(|t| t.objective == 0.0));
    assert_eq!(r.k_hat, 1);
}

#[test]
fn known_error_modal_cutoff() {
    let mut spec = preset("fig4").unwrap();
    spec.replications = 100;
    let exp = Experiment::new(&spec).unwrap();
    let mut hist = BTreeMap::new();
    for j in 0..100 {
        let r = exp.replicate(replication_seed(spec.seed, j)).unwrap();
        *hist.entry(r.k_hat).or_insert(0usize) += 1;
    }
    let modal = hist.iter().max_by_key(|(_, c)| **c).map(|(k, _)| *k).unwrap();
    assert_eq!(modal, 1, "histogram {hist:?}");
    assert!(hist.keys().all(|&k| k <= 3), "histogram {hist:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn contrast_is_nonincreasing(seed in any::<u64>(), n in 20usize..400, m in 20usize..400, a in 0.0f64..2.0) {
        let d = dataset(seed, n, m, 0.5);
        let r = run_unknown(&d, a, 0.3, d.sigma);
        for w in r.per_k.windows(2) {
            prop_assert!(w[1].contrast <= w[0].contrast);
        }
        prop_assert!(r.k_hat >= 1 && r.k_hat <= r.k_n);
    }

    #[test]
    fn larger_sigma_never_raises_k_hat(seed in any::<u64>(), n in 20usize..400, lambda in 1.0f64..20.0) {
        let d = dataset(seed, n, n, 0.5);
        let base = run_unknown(&d, 0.0, 0.05, d.sigma);
        let scaled = run_unknown(&d, 0.0, 0.05, d.sigma * lambda);
        prop_assert!(scaled.k_hat <= base.k_hat);
        let base = run_known(&d, 0.05, d.sigma);
        let scaled = run_known(&d, 0.05, d.sigma * lambda);
        prop_assert!(scaled.k_hat <= base.k_hat);
    }

    #[test]
    fn larger_kappa_never_raises_k_hat(seed in any::<u64>(), n in 20usize..400, k1 in 0.0f64..5.0, k2 in 0.0f64..5.0) {
        let d = dataset(seed, n, n, 0.5);
        let (lo, hi) = if k1 <= k2 { (k1, k2) } else { (k2, k1) };
        prop_assert!(run_unknown(&d, 0.0, hi, d.sigma).k_hat <= run_unknown(&d, 0.0, lo, d.sigma).k_hat);
    }
}
