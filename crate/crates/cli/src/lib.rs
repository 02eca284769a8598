//! Command implementations behind the `mellin-deconv` binary.

// `!(c > 1.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use anyhow::{anyhow, bail, Context, Result};
use clap::{ArgGroup, Args, Parser, Subcommand};
use mellin_deconv::distributions::{DistSpec, Sample};
use mellin_deconv::empirical::{empirical_mellin, mx_hat, sigma_hat_sq, threshold_mask};
use mellin_deconv::estimators::{density_known, density_unknown, survival_known, survival_unknown, CurveEstimate};
use mellin_deconv::mellin::{TGrid, WeightFn, XGrid};
use mellin_deconv::selection::{select_known, select_unknown, PenaltyConfig, Regime, SelectionResult};
use mellin_deconv::simulation::{preset, published_emise, run_experiment, ExperimentReport, ExperimentSpec};
use serde::Deserialize;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "mellin-deconv", version, about = "Multiplicative deconvolution by Mellin spectral cut-off")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a Monte Carlo experiment and write report.csv and curves.csv.
    Simulate(SimulateArgs),
    /// Estimate a density or survival function from sample files.
    Estimate(EstimateArgs),
    /// Tabulate a closed-form Mellin transform into mellin.csv.
    MellinTable(MellinTableArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["preset", "config"])))]
pub struct SimulateArgs {
    /// One of fig1 ... fig8.
    #[arg(long)]
    pub preset: Option<String>,
    /// TOML file holding a full experiment description.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub replications: Option<usize>,
    /// Worker threads for the replications (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Observations of Y, one positive number per line.
    #[arg(long)]
    pub y_file: PathBuf,
    /// Independent draws of the error U.
    #[arg(long)]
    pub u_file: Option<PathBuf>,
    /// TOML file with c, a, kappa, grids and the error law.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Use the closed-form transform of the configured error law.
    #[arg(long)]
    pub known_error: bool,
    /// Estimate the survival function instead of the density (needs c > 1).
    #[arg(long)]
    pub survival: bool,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MellinTableArgs {
    /// TOML file with `dist`, `c` and optionally `t_max` and `t_step`.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

/// Settings for `estimate`; every field has a default.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimateConfig {
    pub c: f64,
    /// Exponent of the selection weight `t_c^a`; defaults to 0 for
    /// densities and 1 for survival functions.
    pub a: Option<f64>,
    pub kappa: Option<f64>,
    /// Fixed cut-off, bypassing the data-driven choice.
    pub k: Option<f64>,
    pub x_min: f64,
    pub x_max: f64,
    pub x_count: usize,
    pub t_max: f64,
    pub t_step: f64,
    pub error: Option<DistSpec>,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        EstimateConfig {
            c: 0.5,
            a: None,
            kappa: None,
            k: None,
            x_min: 0.01,
            x_max: 8.0,
            x_count: 400,
            t_max: 20.0,
            t_step: 0.01,
            error: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MellinTableConfig {
    pub dist: DistSpec,
    #[serde(default = "half")]
    pub c: f64,
    #[serde(default = "twenty")]
    pub t_max: f64,
    #[serde(default = "hundredth")]
    pub t_step: f64,
}

fn half() -> f64 {
    0.5
}
fn twenty() -> f64 {
    20.0
}
fn hundredth() -> f64 {
    0.01
}

fn read_toml<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
}

/// Parses a sample file: one strictly positive number per line, blank lines
/// and `#` comments ignored.
pub fn parse_sample(text: &str) -> Result<Sample> {
    let mut values = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| anyhow!("line {}: '{line}' is not a number", i + 1))?;
        if !(v > 0.0 && v.is_finite()) {
            bail!("line {}: '{line}' is not strictly positive", i + 1);
        }
        values.push(v);
    }
    Sample::new(values).map_err(|e| anyhow!("{e}"))
}

pub fn read_sample(path: &Path) -> Result<Sample> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_sample(&text).with_context(|| format!("in {}", path.display()))
}

fn writer(dir: &Path, name: &str) -> Result<csv::Writer<fs::File>> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let path = dir.join(name);
    csv::Writer::from_path(&path).with_context(|| format!("cannot write {}", path.display()))
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

pub fn simulate(args: &SimulateArgs) -> Result<ExperimentReport> {
    let mut spec: ExperimentSpec = match (&args.preset, &args.config) {
        (Some(name), _) => preset(name)?,
        (None, Some(path)) => read_toml(path)?,
        (None, None) => bail!("either --preset or --config is required"),
    };
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    if let Some(r) = args.replications {
        spec.replications = r;
    }
    spec.validate()?;
    let report = match args.jobs {
        Some(j) => rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build()?.install(|| run_experiment(&spec))?,
        None => run_experiment(&spec)?,
    };
    write_report(&args.out, &spec, args.preset.as_deref(), &report)?;
    Ok(report)
}

fn write_report(out: &Path, spec: &ExperimentSpec, preset: Option<&str>, report: &ExperimentReport) -> Result<()> {
    let mut w = writer(out, "report.csv")?;
    w.write_record(["section", "name", "value"])?;
    w.write_record(["summary", "emise", &num(report.emise)])?;
    w.write_record(["summary", "emise_se", &num(report.emise_se)])?;
    w.write_record(["summary", "replications", &spec.replications.to_string()])?;
    w.write_record(["summary", "seed", &spec.seed.to_string()])?;
    if let Some(p) = preset.and_then(published_emise) {
        w.write_record(["summary", "published_emise", &num(p)])?;
    }
    for (j, ise) in report.per_replication_ise.iter().enumerate() {
        w.write_record(["ise", &j.to_string(), &num(*ise)])?;
    }
    for (j, k) in report.k_hats.iter().enumerate() {
        w.write_record(["k_hat", &j.to_string(), &k.to_string()])?;
    }
    for (k, count) in &report.k_hat_histogram {
        w.write_record(["k_hat_histogram", &k.to_string(), &count.to_string()])?;
    }
    w.flush()?;

    let mut w = writer(out, "curves.csv")?;
    w.write_record(["x", "truth", "median"])?;
    for ((x, t), m) in report.x_points.iter().zip(&report.truth).zip(&report.median_curve) {
        w.write_record([num(*x), num(*t), num(*m)])?;
    }
    w.flush()?;
    Ok(())
}

/// Result of `estimate`: the curve and the selection trace, if a
/// data-driven cut-off was used.
pub struct EstimateOutput {
    pub curve: CurveEstimate,
    pub selection: SelectionResult,
}

pub fn estimate(args: &EstimateArgs) -> Result<EstimateOutput> {
    let mut cfg: EstimateConfig = match &args.config {
        Some(p) => read_toml(p)?,
        None => EstimateConfig::default(),
    };
    if let Some(c) = args.c {
        cfg.c = c;
    }
    if let Some(k) = args.kappa {
        cfg.kappa = Some(k);
    }
    let c = cfg.c;
    if args.survival && !(c > 1.0) {
        bail!("survival estimation requires c > 1, got c = {c}");
    }
    let regime = if args.known_error { Regime::Known } else { Regime::Unknown };
    let kappa = PenaltyConfig::new(regime, cfg.kappa.unwrap_or(regime.practical_constant()))?;
    let a = cfg.a.unwrap_or(if args.survival { 1.0 } else { 0.0 });
    let grid = TGrid::new(cfg.t_max, cfg.t_step)?;
    let xs = XGrid::linear(cfg.x_min, cfg.x_max, cfg.x_count)?.points().to_vec();
    let v = WeightFn::new(grid, c, a)?;

    let y = read_sample(&args.y_file)?;
    let n = y.len();
    let my = empirical_mellin(&y, c, &grid)?;
    let sigma = sigma_hat_sq(&y, c);

    let (selection, curve) = if args.known_error {
        let error = cfg.error.ok_or_else(|| anyhow!("--known-error needs an [error] table in the config"))?;
        let mu = error.analytic_mellin_fn(c, &grid)?;
        let sel = select_known(&my, &mu, &v, sigma, n, &kappa)?;
        let k = cfg.k.unwrap_or(sel.k_hat as f64);
        let curve =
            if args.survival { survival_known(&my, &mu, k, c, &xs)? } else { density_known(&my, &mu, k, c, &xs)? };
        (sel, curve)
    } else {
        let path = args.u_file.as_ref().ok_or_else(|| anyhow!("--u-file is required unless --known-error is given"))?;
        let u = read_sample(path)?;
        let m = u.len();
        let mu_hat = empirical_mellin(&u, c, &grid)?;
        let mask = threshold_mask(&mu_hat, m, n)?;
        let sel = select_unknown(&my, &mu_hat, &mask, &v, sigma, n, &kappa)?;
        let k = cfg.k.unwrap_or(sel.k_hat as f64);
        let mx = mx_hat(&my, &mu_hat, &mask)?;
        let curve = if args.survival { survival_unknown(&mx, k, c, &xs)? } else { density_unknown(&mx, k, c, &xs)? };
        (sel, curve)
    };

    let mut w = writer(&args.out, "estimate.csv")?;
    w.write_record(["x", if args.survival { "survival" } else { "density" }])?;
    for (x, f) in curve.x_points().iter().zip(curve.values()) {
        w.write_record([num(*x), num(*f)])?;
    }
    w.flush()?;

    let mut w = writer(&args.out, "selection.csv")?;
    w.write_record([
        "k",
        "contrast",
        "penalty",
        "weighted_penalty",
        "objective",
        "k_hat",
        "k_n",
        "sigma_hat_sq",
        "kappa_effective",
    ])?;
    for t in &selection.per_k {
        w.write_record([
            t.k.to_string(),
            num(t.contrast),
            num(t.penalty),
            num(2.0 * selection.sigma_hat_sq * t.penalty),
            num(t.objective),
            selection.k_hat.to_string(),
            selection.k_n.to_string(),
            num(selection.sigma_hat_sq),
            num(selection.kappa_effective),
        ])?;
    }
    w.flush()?;
    Ok(EstimateOutput { curve, selection })
}

pub fn mellin_table(args: &MellinTableArgs) -> Result<()> {
    let mut cfg: MellinTableConfig = read_toml(&args.config)?;
    if let Some(c) = args.c {
        cfg.c = c;
    }
    let grid = TGrid::new(cfg.t_max, cfg.t_step)?;
    let m = cfg.dist.analytic_mellin_fn(cfg.c, &grid)?;
    let mut w = writer(&args.out, "mellin.csv")?;
    w.write_record(["t", "re", "im", "abs"])?;
    let n = grid.n_half();
    for (i, v) in m.values().iter().enumerate().skip(n) {
        w.write_record([num(grid.t_at(i)), num(v.re), num(v.im), num(v.norm())])?;
    }
    w.flush()?;
    Ok(())
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Simulate(a) => {
            let r = simulate(a)?;
            log::info!("eMISE {:.6} ± {:.6}", r.emise, r.emise_se);
        }
        Command::Estimate(a) => {
            let r = estimate(a)?;
            log::info!("k_hat {} of k_n {}", r.selection.k_hat, r.selection.k_n);
        }
        Command::MellinTable(a) => mellin_table(a)?,
    }
    Ok(())
}
