//! Monte Carlo harness: replicated data-driven density estimation, the
//! empirical mean integrated squared error and the preset experiments.

use crate::distributions::{sample_product_with, sample_with, DistSpec};
use crate::empirical::{empirical_mellin, mx_hat, sigma_hat_sq, threshold_mask};
use crate::error::{DeconvError, Result};
use crate::estimators::{density_known, density_unknown, mx_tilde, CurveEstimate};
use crate::mellin::{mellin_inverse_many, trapezoid, MellinFn, TGrid, WeightFn, XGrid};
use crate::selection::{select_known, select_unknown, PenaltyConfig, Regime, SelectionResult};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

fn default_a() -> f64 {
    0.0
}
fn default_replications() -> usize {
    500
}
fn default_x_min() -> f64 {
    0.01
}
fn default_x_max() -> f64 {
    8.0
}
fn default_x_count() -> usize {
    400
}
fn default_t_max() -> f64 {
    20.0
}
fn default_t_step() -> f64 {
    0.01
}

/// Full description of one simulation experiment.
///
/// `m = None` means the error transform is known and taken in closed form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub target: DistSpec,
    pub error: DistSpec,
    pub n: usize,
    #[serde(default)]
    pub m: Option<usize>,
    pub c: f64,
    #[serde(default = "default_a")]
    pub a: f64,
    pub kappa: f64,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default = "default_x_min")]
    pub x_min: f64,
    #[serde(default = "default_x_max")]
    pub x_max: f64,
    #[serde(default = "default_x_count")]
    pub x_count: usize,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_t_step")]
    pub t_step: f64,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(DeconvError::InvalidParameter(msg));
        if self.n == 0 || self.m == Some(0) || self.replications == 0 {
            return bad("n, m and replications must be at least 1".into());
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return bad(format!("kappa must be positive, got {}", self.kappa));
        }
        if !self.c.is_finite() || !self.a.is_finite() || self.a < 0.0 {
            return bad(format!("c must be finite and a non-negative, got c = {}, a = {}", self.c, self.a));
        }
        if self.t_max < 1.0 {
            return bad(format!("t_max must be at least 1, got {}", self.t_max));
        }
        self.target.check_moment(self.c)?;
        self.error.check_moment(self.c)?;
        self.x_grid()?;
        self.t_grid()?;
        WeightFn::new(self.t_grid()?, self.c, self.a)?;
        Ok(())
    }

    pub fn is_known_error(&self) -> bool {
        self.m.is_none()
    }

    pub fn regime(&self) -> Regime {
        if self.is_known_error() {
            Regime::Known
        } else {
            Regime::Unknown
        }
    }

    pub fn x_grid(&self) -> Result<XGrid> {
        XGrid::linear(self.x_min, self.x_max, self.x_count)
    }

    /// The x-grid refined [`ISE_REFINE`] times, on which the ISE is integrated.
    pub fn ise_grid(&self) -> Result<XGrid> {
        XGrid::linear(self.x_min, self.x_max, (self.x_count - 1) * ISE_REFINE + 1)
    }

    pub fn t_grid(&self) -> Result<TGrid> {
        TGrid::new(self.t_max, self.t_step)
    }
}

/// Refinement of the display grid used for ISE integration.
pub const ISE_REFINE: usize = 10;

/// Names accepted by [`preset`].
pub const PRESET_NAMES: [&str; 8] = ["fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8"];

/// The eMISE reported alongside each preset's figure.
pub fn published_emise(name: &str) -> Option<f64> {
    match name {
        "fig1" => Some(0.00575),
        "fig2" => Some(0.00458),
        "fig3" => Some(0.00449),
        "fig4" => Some(0.00299),
        "fig5" => Some(0.00184),
        "fig6" => Some(0.0241),
        "fig7" => Some(0.129),
        "fig8" => Some(0.00179),
        _ => None,
    }
}

/// The preset experiments `fig1` to `fig8`.
pub fn preset(name: &str) -> Result<ExperimentSpec> {
    let f1 = DistSpec::gamma(1.0, 3.0)?;
    let base = ExperimentSpec {
        target: f1,
        error: DistSpec::pareto(1.0, 1.0)?,
        n: 1000,
        m: Some(1000),
        c: 0.5,
        a: 0.0,
        kappa: 0.3,
        replications: 500,
        x_min: default_x_min(),
        x_max: default_x_max(),
        x_count: default_x_count(),
        t_max: default_t_max(),
        t_step: default_t_step(),
        seed: 0,
    };
    let large = |target: DistSpec| ExperimentSpec { target, n: 2000, m: Some(2000), ..base.clone() };
    let spec = match name {
        "fig1" => ExperimentSpec { m: Some(100), ..base.clone() },
        "fig2" => base.clone(),
        "fig3" => ExperimentSpec { m: Some(4000), ..base.clone() },
        "fig4" => ExperimentSpec { m: None, kappa: 0.6, ..base.clone() },
        "fig5" => large(f1),
        "fig6" => large(DistSpec::weibull(1.0, 3.0)?),
        "fig7" => ExperimentSpec { x_min: 0.001, x_max: 1.2, ..large(DistSpec::beta(10.0, 5.0)?) },
        "fig8" => large(DistSpec::log_normal(0.0, 1.0)?),
        other => return Err(DeconvError::UnknownPreset(other.to_string())),
    };
    Ok(spec)
}

/// Seed of replication `j`, mixed with SplitMix64.
pub fn replication_seed(seed: u64, j: u64) -> u64 {
    let mut z = seed ^ j.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Outcome of one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct Replication {
    pub ise: f64,
    pub curve: CurveEstimate,
    pub k_hat: usize,
    pub selection: SelectionResult,
    /// The estimated `M_X` that was inverted.
    pub mx: MellinFn,
}

/// Everything that does not depend on the replication seed.
#[derive(Debug, Clone)]
pub struct Experiment {
    spec: ExperimentSpec,
    grid: TGrid,
    x_points: Vec<f64>,
    truth: Vec<f64>,
    ise_points: Vec<f64>,
    ise_truth: Vec<f64>,
    ise_weight: Vec<f64>,
    v: WeightFn,
    mu: Option<MellinFn>,
    cfg: PenaltyConfig,
}

impl Experiment {
    pub fn new(spec: &ExperimentSpec) -> Result<Self> {
        spec.validate()?;
        let grid = spec.t_grid()?;
        let x_points = spec.x_grid()?.points().to_vec();
        let truth = x_points.iter().map(|&x| spec.target.pdf(x)).collect();
        let ise_points = spec.ise_grid()?.points().to_vec();
        let ise_truth = ise_points.iter().map(|&x| spec.target.pdf(x)).collect();
        let ise_weight = ise_points.iter().map(|&x| x.powf(2.0 * spec.c - 1.0)).collect();
        let mu = if spec.is_known_error() { Some(spec.error.analytic_mellin_fn(spec.c, &grid)?) } else { None };
        Ok(Experiment {
            spec: spec.clone(),
            grid,
            x_points,
            truth,
            ise_points,
            ise_truth,
            ise_weight,
            v: WeightFn::new(grid, spec.c, spec.a)?,
            mu,
            cfg: PenaltyConfig::new(spec.regime(), spec.kappa)?,
        })
    }

    pub fn spec(&self) -> &ExperimentSpec {
        &self.spec
    }

    pub fn x_points(&self) -> &[f64] {
        &self.x_points
    }

    pub fn truth(&self) -> &[f64] {
        &self.truth
    }

    pub fn ise_points(&self) -> &[f64] {
        &self.ise_points
    }

    /// `∫ (f̂ − f)² x^{2c−1} dx` by trapezoid, with `values` tabulated on
    /// [`Experiment::ise_points`].
    pub fn ise(&self, values: &[f64]) -> f64 {
        let integrand: Vec<f64> = values
            .iter()
            .zip(&self.ise_truth)
            .zip(&self.ise_weight)
            .map(|((f_hat, f), w)| (f_hat - f).powi(2) * w)
            .collect();
        trapezoid(&self.ise_points, &integrand)
    }

    pub fn replicate(&self, seed: u64) -> Result<Replication> {
        let spec = &self.spec;
        let c = spec.c;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y = sample_product_with(&spec.target, &spec.error, spec.n, &mut rng)?;
        let my = empirical_mellin(&y, c, &self.grid)?;
        let sigma = sigma_hat_sq(&y, c);
        let (selection, curve, mx) = match (&self.mu, spec.m) {
            (Some(mu), _) => {
                let sel = select_known(&my, mu, &self.v, sigma, spec.n, &self.cfg)?;
                let curve = density_known(&my, mu, sel.k_hat as f64, c, &self.x_points)?;
                (sel, curve, mx_tilde(&my, mu)?)
            }
            (None, Some(m)) => {
                let u = sample_with(&spec.error, m, &mut rng)?;
                let mu_hat = empirical_mellin(&u, c, &self.grid)?;
                let mask = threshold_mask(&mu_hat, m, spec.n)?;
                let sel = select_unknown(&my, &mu_hat, &mask, &self.v, sigma, spec.n, &self.cfg)?;
                let mx = mx_hat(&my, &mu_hat, &mask)?;
                let curve = density_unknown(&mx, sel.k_hat as f64, c, &self.x_points)?;
                (sel, curve, mx)
            }
            (None, None) => unreachable!("known-error experiments always carry M_U"),
        };
        let dense: Vec<f64> =
            mellin_inverse_many(&mx, selection.k_hat as f64, c, &self.ise_points)?.iter().map(|v| v.re).collect();
        Ok(Replication { ise: self.ise(&dense), k_hat: selection.k_hat, curve, selection, mx })
    }
}

/// One replication of `spec` driven by `seed`.
pub fn run_replication(spec: &ExperimentSpec, seed: u64) -> Result<(f64, CurveEstimate, usize)> {
    let r = Experiment::new(spec)?.replicate(seed)?;
    Ok((r.ise, r.curve, r.k_hat))
}

/// Aggregated Monte Carlo results.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub emise: f64,
    /// Standard error of `emise`.
    pub emise_se: f64,
    pub per_replication_ise: Vec<f64>,
    pub k_hats: Vec<usize>,
    pub x_points: Vec<f64>,
    pub truth: Vec<f64>,
    pub median_curve: Vec<f64>,
    pub k_hat_histogram: BTreeMap<usize, usize>,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn replicate_all(exp: &Experiment) -> Result<Vec<Replication>> {
    let seed = exp.spec.seed;
    let jobs = 0..exp.spec.replications as u64;
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        jobs.into_par_iter().map(|j| exp.replicate(replication_seed(seed, j))).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        jobs.map(|j| exp.replicate(replication_seed(seed, j))).collect()
    }
}

/// Runs every replication and aggregates them in replication order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let exp = Experiment::new(spec)?;
    let reps = replicate_all(&exp)?;
    let n = reps.len() as f64;
    let per_replication_ise: Vec<f64> = reps.iter().map(|r| r.ise).collect();
    let emise = per_replication_ise.iter().sum::<f64>() / n;
    let emise_se = if reps.len() > 1 {
        let var = per_replication_ise.iter().map(|e| (e - emise).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    let k_hats: Vec<usize> = reps.iter().map(|r| r.k_hat).collect();
    let mut k_hat_histogram = BTreeMap::new();
    for k in &k_hats {
        *k_hat_histogram.entry(*k).or_insert(0) += 1;
    }
    let mut column = vec![0.0; reps.len()];
    let median_curve = (0..exp.x_points.len())
        .map(|i| {
            for (slot, r) in column.iter_mut().zip(&reps) {
                *slot = r.curve.values()[i];
            }
            median(&mut column)
        })
        .collect();
    Ok(ExperimentReport {
        emise,
        emise_se,
        per_replication_ise,
        k_hats,
        x_points: exp.x_points.clone(),
        truth: exp.truth.clone(),
        median_curve,
        k_hat_histogram,
    })
}
