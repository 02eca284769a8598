//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use mellin_deconv::distributions::{sample, sample_product, DistSpec};
use mellin_deconv::empirical::{empirical_mellin, mx_hat, sigma_hat_sq, threshold_mask, ThresholdMask};
use mellin_deconv::estimators::diagnostics::risk_terms;
use mellin_deconv::estimators::{density_known, density_unknown};
use mellin_deconv::mellin::{l2_norm_sq, mellin_inverse, mellin_numeric, Interval, TGrid, Weight, WeightFn};
use mellin_deconv::oracle::{integrate, quad_ise, quad_mellin, quad_mult_convolution, QuadSpec};
use mellin_deconv::selection::{select_known, select_unknown, PenaltyConfig, Regime};
use mellin_deconv::simulation::{
    preset, published_emise, replication_seed, run_experiment, Experiment, ExperimentReport, PRESET_NAMES,
};
use num_complex::Complex64;
use std::time::Instant;

const REPLICATIONS: usize = 500;

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(id: usize, title: &str, o: &Outcome) {
    println!("[{}] criterion {id}: {title}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
}

fn families() -> Vec<DistSpec> {
    vec![
        DistSpec::gamma(1.0, 3.0).unwrap(),
        DistSpec::weibull(1.0, 3.0).unwrap(),
        DistSpec::beta(10.0, 5.0).unwrap(),
        DistSpec::log_normal(0.0, 1.0).unwrap(),
        DistSpec::pareto(1.0, 1.0).unwrap(),
    ]
}

fn run_presets() -> Vec<(&'static str, ExperimentReport, f64)> {
    PRESET_NAMES
        .iter()
        .map(|&name| {
            let mut spec = preset(name).unwrap();
            spec.replications = REPLICATIONS;
            let start = Instant::now();
            let r = run_experiment(&spec).unwrap();
            (name, r, start.elapsed().as_secs_f64())
        })
        .collect()
}

fn emise_reproduction(runs: &[(&str, ExperimentReport, f64)]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, (name, r, secs)) in runs.iter().enumerate() {
        let reference = published_emise(name).unwrap();
        let ratio = r.emise / reference;
        let band = if i < 4 { 0.3 } else { 0.5 };
        let ok = (ratio - 1.0).abs() <= band;
        pass &= ok;
        parts.push(format!(
            "{name} {:.5}±{:.5} vs {reference} (x{ratio:.2}, band ±{:.0}%, {}, {secs:.0}s)",
            r.emise,
            r.emise_se,
            band * 100.0,
            if ok { "ok" } else { "out" }
        ));
    }
    Outcome { pass, detail: format!("N = {REPLICATIONS}; {}", parts.join("; ")) }
}

fn ordering(runs: &[(&str, ExperimentReport, f64)]) -> Outcome {
    let e = |i: usize| (runs[i].1.emise, runs[i].1.emise_se);
    let gap = |a: usize, b: usize| {
        let ((ea, sa), (eb, sb)) = (e(a), e(b));
        (ea - eb) / (sa * sa + sb * sb).sqrt()
    };
    let order = e(0).0 > e(1).0 && e(1).0 >= e(2).0 && e(2).0 > e(3).0;
    let g12 = gap(0, 1);
    let g34 = gap(2, 3);
    Outcome {
        pass: order && g12 > 2.0 && g34 > 2.0,
        detail: format!(
            "fig1 {:.5} > fig2 {:.5} >= fig3 {:.5} > fig4 {:.5}: {order}; gaps fig1-fig2 {g12:.2} SE, fig3-fig4 {g34:.2} SE (need > 2)",
            e(0).0,
            e(1).0,
            e(2).0,
            e(3).0
        ),
    }
}

fn plancherel() -> Outcome {
    let grid = TGrid::default();
    let spec = QuadSpec::default();
    let mut worst: f64 = 0.0;
    for d in [DistSpec::gamma(1.0, 3.0).unwrap(), DistSpec::log_normal(0.0, 1.0).unwrap()] {
        for c in [0.5, 1.0] {
            let xs = d.default_x_grid();
            let dens: Vec<f64> = xs.points().iter().map(|&x| d.pdf(x)).collect();
            let m = mellin_numeric(&xs, &dens, c, &grid).unwrap();
            let spectral = l2_norm_sq(&m, &Weight::ones(grid), Interval::Full).unwrap();
            let direct = integrate(
                &|u: f64| Complex64::new(d.pdf(u.exp()).powi(2) * (2.0 * c * u).exp(), 0.0),
                -40.0,
                40.0,
                &spec,
            )
            .unwrap()
            .re;
            worst = worst.max((spectral - direct).abs() / direct);
        }
    }
    Outcome { pass: worst <= 1e-3, detail: format!("max relative error {worst:.2e} (limit 1e-3)") }
}

fn convolution_theorem() -> Outcome {
    let x = DistSpec::gamma(1.0, 3.0).unwrap();
    let u = DistSpec::pareto(1.0, 1.0).unwrap();
    let inner = QuadSpec::default();
    let outer = QuadSpec { abs_tol: 1e-9, rel_tol: 1e-8, max_depth: 40 };
    let fy = |y: f64| quad_mult_convolution(&|s| x.pdf(s), &|s| u.pdf(s), y, &inner).unwrap();
    let mut worst: f64 = 0.0;
    for t in [0.0, 0.5, 1.0, 2.0] {
        let lhs = quad_mellin(&fy, 0.5, t, &outer).unwrap();
        let rhs = x.analytic_mellin(0.5, t).unwrap() * u.analytic_mellin(0.5, t).unwrap();
        worst = worst.max((lhs - rhs).norm());
    }
    Outcome {
        pass: worst <= 1e-3,
        detail: format!("max |M[f⊛g] − M[f]M[g]| = {worst:.2e} at t ∈ {{0, 0.5, 1, 2}} (limit 1e-3)"),
    }
}

fn bridging() -> Outcome {
    let grid = TGrid::default();
    let x = DistSpec::gamma(1.0, 3.0).unwrap();
    let u = DistSpec::pareto(1.0, 1.0).unwrap();
    let xs: Vec<f64> = (1..=400).map(|i| 0.02 * i as f64).collect();
    let mut mismatches = 0;
    for j in 0..20 {
        let n = 500 + 25 * j as usize;
        let y = sample_product(&x, &u, n, replication_seed(2718, j)).unwrap();
        let my = empirical_mellin(&y, 0.5, &grid).unwrap();
        let mu = u.analytic_mellin_fn(0.5, &grid).unwrap();
        let mask = ThresholdMask::all(grid, n, n);
        let mx = mx_hat(&my, &mu, &mask).unwrap();
        let sel = select_known(
            &my,
            &mu,
            &WeightFn::new(grid, 0.5, 0.0).unwrap(),
            sigma_hat_sq(&y, 0.5),
            n,
            &PenaltyConfig::practical(Regime::Known),
        )
        .unwrap();
        let k = sel.k_hat as f64;
        let a = density_known(&my, &mu, k, 0.5, &xs).unwrap();
        let b = density_unknown(&mx, k, 0.5, &xs).unwrap();
        if a.values().iter().zip(b.values()).any(|(p, q)| p.to_bits() != q.to_bits()) {
            mismatches += 1;
        }
    }
    Outcome { pass: mismatches == 0, detail: format!("{mismatches} of 20 datasets differ bit-wise") }
}

fn risk_representation() -> Outcome {
    let start = Instant::now();
    let n = 200;
    let k = 2.0;
    let c = 0.5;
    let grid = TGrid::new(5.0, 0.01).unwrap();
    let fx = DistSpec::gamma(1.0, 3.0).unwrap();
    let fu = DistSpec::pareto(1.0, 1.0).unwrap();
    let mx = fx.analytic_mellin_fn(c, &grid).unwrap();
    let mu = fu.analytic_mellin_fn(c, &grid).unwrap();
    let my = mx.mul(&mu).unwrap();
    let second =
        fx.analytic_mellin(2.0 * c - 1.0, 0.0).unwrap().re * fu.analytic_mellin(2.0 * c - 1.0, 0.0).unwrap().re;
    let vy_sq = Weight::new(grid, my.values().iter().map(|m| (second - m.norm_sqr()).max(0.0)).collect()).unwrap();
    let v = Weight::ones(grid);
    let (mut lhs, mut rhs) = (Vec::new(), Vec::new());
    for j in 0..300 {
        let y = sample_product(&fx, &fu, n, replication_seed(31, j)).unwrap();
        let us = sample(&fu, n, replication_seed(32, j)).unwrap();
        let my_hat = empirical_mellin(&y, c, &grid).unwrap();
        let mu_hat = empirical_mellin(&us, c, &grid).unwrap();
        let mask = threshold_mask(&mu_hat, n, n).unwrap();
        let mxh = mx_hat(&my_hat, &mu_hat, &mask).unwrap();
        let r = risk_terms(&mx, &mu, &mxh, &mu_hat, &mask, &vy_sq, n, k, &v).unwrap();
        lhs.push(r.total);
        rhs.push(r.right_hand_side());
    }
    let stats = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
        (m, (var / v.len() as f64).sqrt())
    };
    let ((ml, sl), (mr, sr)) = (stats(&lhs), stats(&rhs));
    let combined = (sl * sl + sr * sr).sqrt();
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        pass: (ml - mr).abs() <= 3.0 * combined && secs <= 120.0,
        detail: format!(
            "total risk {ml:.5} vs sum of terms {mr:.5}, gap {:.2} combined SE (limit 3), {secs:.1}s (limit 120s)",
            (ml - mr).abs() / combined
        ),
    }
}

fn selection_properties() -> Outcome {
    let grid = TGrid::default();
    let x = DistSpec::gamma(1.0, 3.0).unwrap();
    let u = DistSpec::pareto(1.0, 1.0).unwrap();
    let v = WeightFn::new(grid, 0.5, 0.0).unwrap();
    let kappas = [0.1, 0.3, 1.0, 3.0, 10.0];
    let (mut monotone_kappa, mut monotone_contrast, mut deterministic) = (true, true, true);
    for j in 0..10 {
        let n = 1000;
        let y = sample_product(&x, &u, n, replication_seed(161, j)).unwrap();
        let us = sample(&u, n, replication_seed(162, j)).unwrap();
        let my = empirical_mellin(&y, 0.5, &grid).unwrap();
        let mu_hat = empirical_mellin(&us, 0.5, &grid).unwrap();
        let mask = threshold_mask(&mu_hat, n, n).unwrap();
        let sigma = sigma_hat_sq(&y, 0.5);
        let run = |kappa: f64| {
            select_unknown(&my, &mu_hat, &mask, &v, sigma, n, &PenaltyConfig::new(Regime::Unknown, kappa).unwrap())
                .unwrap()
        };
        let runs: Vec<_> = kappas.iter().map(|&k| run(k)).collect();
        monotone_kappa &= runs.windows(2).all(|w| w[1].k_hat <= w[0].k_hat);
        let free = run(0.0);
        monotone_contrast &= free.per_k.windows(2).all(|w| w[1].contrast <= w[0].contrast);
        deterministic &= run(0.3) == run(0.3);
        let best = runs[1].per_k.iter().map(|t| t.objective).fold(f64::INFINITY, f64::min);
        deterministic &= runs[1].per_k.iter().find(|t| t.objective == best).map(|t| t.k) == Some(runs[1].k_hat);
    }
    Outcome {
        pass: monotone_kappa && monotone_contrast && deterministic,
        detail: format!(
            "10 datasets: k_hat nonincreasing in kappa {monotone_kappa}, contrast nonincreasing in k {monotone_contrast}, tie-break deterministic {deterministic}"
        ),
    }
}

fn oracle_equivalence() -> Outcome {
    let spec = QuadSpec::default();
    let grid = TGrid::new(5.0, 0.05).unwrap();
    let (mut worst_num, mut worst_ana): (f64, f64) = (0.0, 0.0);
    for d in families() {
        for c in [0.5, 1.5] {
            let xs = d.default_x_grid();
            let dens: Vec<f64> = xs.points().iter().map(|&x| d.pdf(x)).collect();
            let num = mellin_numeric(&xs, &dens, c, &grid).unwrap();
            for (i, v) in num.values().iter().enumerate() {
                let t = grid.t_at(i);
                let q = quad_mellin(&|x| d.pdf(x), c, t, &spec).unwrap();
                worst_num = worst_num.max((v - q).norm());
                worst_ana = worst_ana.max((d.analytic_mellin(c, t).unwrap() - q).norm());
            }
        }
    }
    let mut worst_ise: f64 = 0.0;
    for name in PRESET_NAMES {
        let p = preset(name).unwrap();
        let exp = Experiment::new(&p).unwrap();
        for j in 0..2 {
            let r = exp.replicate(replication_seed(5, j)).unwrap();
            let est = |x: f64| mellin_inverse(&r.mx, r.k_hat as f64, p.c, x).unwrap();
            let reference = quad_ise(&est, &|x| p.target.pdf(x), p.c, r.curve.x_points());
            worst_ise = worst_ise.max((r.ise - reference).abs() / reference);
        }
    }
    Outcome {
        pass: worst_num <= 1e-3 && worst_ana <= 1e-6 && worst_ise <= 1e-2,
        detail: format!(
            "numeric vs oracle {worst_num:.2e} (limit 1e-3), analytic vs oracle {worst_ana:.2e} (limit 1e-6), ISE relative gap {worst_ise:.2e} (limit 1e-2)"
        ),
    }
}

fn main() {
    let runs = run_presets();
    let outcomes = [
        ("eMISE reproduction", emise_reproduction(&runs)),
        ("ordering reproduction", ordering(&runs)),
        ("Plancherel suite", plancherel()),
        ("convolution-theorem suite", convolution_theorem()),
        ("bridging suite", bridging()),
        ("risk-representation diagnostic", risk_representation()),
        ("selection properties", selection_properties()),
        ("oracle equivalence", oracle_equivalence()),
    ];
    for (i, (title, o)) in outcomes.iter().enumerate() {
        report(i + 1, title, o);
    }
    let failed = outcomes.iter().filter(|(_, o)| !o.pass).count();
    println!("acceptance: {} of {} criteria pass", outcomes.len() - failed, outcomes.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
