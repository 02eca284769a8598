//! Browser bindings: Mellin modulus curves, a single data-driven estimate
//! with its selection trace, and a small Monte Carlo run.
//!
//! The plain Rust functions carry the logic so they can be tested natively;
//! the `#[wasm_bindgen]` exports only translate errors.

use mellin_deconv::distributions::DistSpec;
use mellin_deconv::error::{DeconvError, Result};
use mellin_deconv::mellin::{mellin_inverse_many, TGrid};
use mellin_deconv::simulation::{run_experiment, Experiment, ExperimentSpec};
use wasm_bindgen::prelude::*;

const T_STEP: f64 = 0.01;
const T_MAX: f64 = 20.0;
const X_COUNT: usize = 200;

/// Target densities offered by the page.
pub fn target(name: &str) -> Result<DistSpec> {
    match name {
        "f1" => DistSpec::gamma(1.0, 3.0),
        "f2" => DistSpec::weibull(1.0, 3.0),
        "f3" => DistSpec::beta(10.0, 5.0),
        "f4" => DistSpec::log_normal(0.0, 1.0),
        other => Err(DeconvError::InvalidParameter(format!("unknown target '{other}'"))),
    }
}

/// A two-parameter family by name, in the parameter order of its config table.
pub fn family(kind: &str, p1: f64, p2: f64) -> Result<DistSpec> {
    match kind {
        "gamma" => DistSpec::gamma(p1, p2),
        "weibull" => DistSpec::weibull(p1, p2),
        "beta" => DistSpec::beta(p1, p2),
        "lognormal" => DistSpec::log_normal(p1, p2),
        "pareto" => DistSpec::pareto(p1, p2),
        other => Err(DeconvError::InvalidParameter(format!("unknown family '{other}'"))),
    }
}

/// Experiment with the demo's defaults. `m = 0` means the error is known.
pub fn demo_spec(target_name: &str, n: usize, m: usize, kappa: f64, seed: u64) -> Result<ExperimentSpec> {
    let target = target(target_name)?;
    let (x_min, x_max) = if target_name == "f3" { (0.001, 1.2) } else { (0.01, 8.0) };
    let spec = ExperimentSpec {
        target,
        error: DistSpec::pareto(1.0, 1.0)?,
        n,
        m: (m > 0).then_some(m),
        c: 0.5,
        a: 0.0,
        kappa,
        replications: 1,
        x_min,
        x_max,
        x_count: X_COUNT,
        t_max: T_MAX,
        t_step: T_STEP,
        seed,
    };
    spec.validate()?;
    Ok(spec)
}

#[wasm_bindgen]
#[derive(Debug, Clone, PartialEq)]
pub struct ModulusCurve {
    t: Vec<f64>,
    modulus: Vec<f64>,
}

#[wasm_bindgen]
impl ModulusCurve {
    #[wasm_bindgen(getter)]
    pub fn t(&self) -> Vec<f64> {
        self.t.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn modulus(&self) -> Vec<f64> {
        self.modulus.clone()
    }
}

/// `|M_c[f](t)|` for `t ∈ [0, t_max]`.
pub fn modulus_curve(kind: &str, p1: f64, p2: f64, c: f64, t_max: f64) -> Result<ModulusCurve> {
    let dist = family(kind, p1, p2)?;
    let grid = TGrid::new(t_max, T_STEP)?;
    let mfn = dist.analytic_mellin_fn(c, &grid)?;
    let h = grid.n_half();
    Ok(ModulusCurve {
        t: (h..grid.len()).map(|i| grid.t_at(i)).collect(),
        modulus: mfn.values()[h..].iter().map(|v| v.norm()).collect(),
    })
}

#[wasm_bindgen]
#[derive(Debug, Clone, PartialEq)]
pub struct SingleEstimate {
    x: Vec<f64>,
    truth: Vec<f64>,
    estimate: Vec<f64>,
    k_used: f64,
    k_hat: usize,
    k_n: usize,
    ise: f64,
    trace_contrast: Vec<f64>,
    trace_penalty: Vec<f64>,
    trace_objective: Vec<f64>,
}

#[wasm_bindgen]
impl SingleEstimate {
    #[wasm_bindgen(getter)]
    pub fn x(&self) -> Vec<f64> {
        self.x.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn truth(&self) -> Vec<f64> {
        self.truth.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn estimate(&self) -> Vec<f64> {
        self.estimate.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn k_used(&self) -> f64 {
        self.k_used
    }
    #[wasm_bindgen(getter)]
    pub fn k_hat(&self) -> usize {
        self.k_hat
    }
    #[wasm_bindgen(getter)]
    pub fn k_n(&self) -> usize {
        self.k_n
    }
    #[wasm_bindgen(getter)]
    pub fn ise(&self) -> f64 {
        self.ise
    }
    /// Contrast for `k = 1..=k_n`.
    #[wasm_bindgen(getter)]
    pub fn trace_contrast(&self) -> Vec<f64> {
        self.trace_contrast.clone()
    }
    /// `2σ̂² pen(k)`, the term added to the contrast.
    #[wasm_bindgen(getter)]
    pub fn trace_penalty(&self) -> Vec<f64> {
        self.trace_penalty.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn trace_objective(&self) -> Vec<f64> {
        self.trace_objective.clone()
    }
}

/// One simulated data set, its selected cut-off and the resulting estimate.
/// A positive `k_override` replaces the selected cut-off for the curve.
pub fn single_estimate(
    target_name: &str,
    n: usize,
    m: usize,
    kappa: f64,
    k_override: f64,
    seed: u64,
) -> Result<SingleEstimate> {
    let spec = demo_spec(target_name, n, m, kappa, seed)?;
    let exp = Experiment::new(&spec)?;
    let r = exp.replicate(seed)?;
    let sel = &r.selection;
    let (k_used, estimate, ise) = if k_override > 0.0 {
        let re = |xs: &[f64]| -> Result<Vec<f64>> {
            Ok(mellin_inverse_many(&r.mx, k_override, spec.c, xs)?.iter().map(|v| v.re).collect())
        };
        (k_override, re(exp.x_points())?, exp.ise(&re(exp.ise_points())?))
    } else {
        (r.k_hat as f64, r.curve.values().to_vec(), r.ise)
    };
    Ok(SingleEstimate {
        x: exp.x_points().to_vec(),
        truth: exp.truth().to_vec(),
        estimate,
        k_used,
        k_hat: sel.k_hat,
        k_n: sel.k_n,
        ise,
        trace_contrast: sel.per_k.iter().map(|t| t.contrast).collect(),
        trace_penalty: sel.per_k.iter().map(|t| 2.0 * sel.sigma_hat_sq * t.penalty).collect(),
        trace_objective: sel.per_k.iter().map(|t| t.objective).collect(),
    })
}

#[wasm_bindgen]
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarlo {
    x: Vec<f64>,
    truth: Vec<f64>,
    median: Vec<f64>,
    emise: f64,
    emise_se: f64,
    k_hats: Vec<u32>,
}

#[wasm_bindgen]
impl MonteCarlo {
    #[wasm_bindgen(getter)]
    pub fn x(&self) -> Vec<f64> {
        self.x.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn truth(&self) -> Vec<f64> {
        self.truth.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn median(&self) -> Vec<f64> {
        self.median.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn emise(&self) -> f64 {
        self.emise
    }
    #[wasm_bindgen(getter)]
    pub fn emise_se(&self) -> f64 {
        self.emise_se
    }
    #[wasm_bindgen(getter)]
    pub fn k_hats(&self) -> Vec<u32> {
        self.k_hats.clone()
    }
}

/// Pointwise median curve and eMISE over `replications` runs.
pub fn monte_carlo(
    target_name: &str,
    n: usize,
    m: usize,
    kappa: f64,
    replications: usize,
    seed: u64,
) -> Result<MonteCarlo> {
    let spec = ExperimentSpec { replications, ..demo_spec(target_name, n, m, kappa, seed)? };
    let report = run_experiment(&spec)?;
    Ok(MonteCarlo {
        x: report.x_points,
        truth: report.truth,
        median: report.median_curve,
        emise: report.emise,
        emise_se: report.emise_se,
        k_hats: report.k_hats.iter().map(|&k| k as u32).collect(),
    })
}

fn js(e: DeconvError) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = modulusCurve)]
pub fn modulus_curve_js(
    kind: &str,
    p1: f64,
    p2: f64,
    c: f64,
    t_max: f64,
) -> std::result::Result<ModulusCurve, JsError> {
    modulus_curve(kind, p1, p2, c, t_max).map_err(js)
}

#[wasm_bindgen(js_name = singleEstimate)]
pub fn single_estimate_js(
    target_name: &str,
    n: usize,
    m: usize,
    kappa: f64,
    k_override: f64,
    seed: u32,
) -> std::result::Result<SingleEstimate, JsError> {
    single_estimate(target_name, n, m, kappa, k_override, seed as u64).map_err(js)
}

#[wasm_bindgen(js_name = monteCarlo)]
pub fn monte_carlo_js(
    target_name: &str,
    n: usize,
    m: usize,
    kappa: f64,
    replications: usize,
    seed: u32,
) -> std::result::Result<MonteCarlo, JsError> {
    monte_carlo(target_name, n, m, kappa, replications, seed as u64).map_err(js)
}
