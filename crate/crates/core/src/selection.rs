//! Data-driven choice of the cut-off by penalised contrast minimisation.
//!
//! For integer `k = 1..=k_n` the objective is
//! `-‖M̂_X^k‖²_{L²(v)} + 2σ̂²_Y · κ Δ_k δ_k k / n`,
//! where `Δ_k` is the supremum over `[-k, k]` of the penalty weight
//! (`v_U = |M_U†|² v` for a known error, `v̂ = |M̂_U† 1_mask|² v` otherwise)
//! and `δ_k = log(Δ_k ∨ (k+2)) / log(k+2)`.

use crate::empirical::{mx_hat, ThresholdMask};
use crate::error::{DeconvError, Result};
use crate::estimators::mx_tilde;
use crate::mellin::{l2_norm_sq, Interval, MellinFn, Weight};
use log::warn;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Known,
    Unknown,
}

impl Regime {
    /// Penalty constant under which the risk bounds are proven.
    pub fn theory_constant(&self) -> f64 {
        match self {
            Regime::Known => 48.0,
            Regime::Unknown => 24.0,
        }
    }

    /// Constant used in practice for the reproduced simulations.
    pub fn practical_constant(&self) -> f64 {
        match self {
            Regime::Known => 0.6,
            Regime::Unknown => 0.3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyConfig {
    pub kappa: f64,
    pub regime: Regime,
}

impl PenaltyConfig {
    /// `kappa` may be zero (no penalty) but not negative.
    pub fn new(regime: Regime, kappa: f64) -> Result<Self> {
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(DeconvError::InvalidParameter(format!("kappa must be non-negative, got {kappa}")));
        }
        Ok(PenaltyConfig { kappa, regime })
    }

    pub fn theory(regime: Regime) -> Self {
        PenaltyConfig { kappa: regime.theory_constant(), regime }
    }

    pub fn practical(regime: Regime) -> Self {
        PenaltyConfig { kappa: regime.practical_constant(), regime }
    }
}

/// One row of the cut-off scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KTrace {
    pub k: usize,
    pub contrast: f64,
    /// `κ Δ_k δ_k k / n`, before the `2σ̂²` factor.
    pub penalty: f64,
    pub objective: f64,
    pub delta: f64,
    pub small_delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionResult {
    pub k_hat: usize,
    pub k_n: usize,
    pub sigma_hat_sq: f64,
    /// `κ · 2σ̂²`, the constant actually multiplying `Δ_k δ_k k / n`.
    pub kappa_effective: f64,
    pub per_k: Vec<KTrace>,
}

impl SelectionResult {
    pub fn trace_for(&self, k: usize) -> Option<&KTrace> {
        self.per_k.iter().find(|t| t.k == k)
    }
}

/// Running supremum of a weight over `[-h·step, h·step]` for every `h`.
fn running_sup(weight: &Weight) -> Vec<f64> {
    let n = weight.grid().n_half();
    let v = weight.values();
    let mut out = Vec::with_capacity(n + 1);
    let mut best = v[n];
    out.push(best);
    for h in 1..=n {
        best = best.max(v[n - h]).max(v[n + h]);
        out.push(best);
    }
    out
}

/// `Δ_k = sup_{|t| ≤ k} w(t)` over grid points.
pub fn delta_k(weight: &Weight, k: usize) -> Result<f64> {
    let h = weight.grid().cutoff_index(k as f64)?;
    let n = weight.grid().n_half();
    Ok(weight.values()[n - h..=n + h].iter().cloned().fold(f64::NEG_INFINITY, f64::max))
}

/// `δ_k = log(Δ ∨ (k+2)) / log(k+2)`, always `≥ 1`.
pub fn small_delta_k(delta: f64, k: usize) -> f64 {
    let base = (k as f64 + 2.0).ln();
    delta.max(k as f64 + 2.0).ln() / base
}

/// `κ Δ δ k / n`.
pub fn penalty(cfg: &PenaltyConfig, k: usize, n: usize, delta: f64, small_delta: f64) -> f64 {
    cfg.kappa * delta * small_delta * k as f64 / n as f64
}

fn max_integer_k(weight: &Weight) -> usize {
    (weight.grid().t_max() + 1e-9).floor() as usize
}

fn kn_generic(bound: usize, weight: &Weight) -> usize {
    let cap = max_integer_k(weight);
    if cap == 0 {
        return 1;
    }
    let sup = running_sup(weight);
    let step = weight.grid().step();
    let delta_at = |k: usize| sup[((k as f64 / step) - 1e-9).ceil() as usize];
    let delta_1 = delta_at(1);
    let limit = bound as f64 * delta_1;
    let scan_to = bound.min(cap);
    if bound > cap {
        // only warn when the grid, not the sample size, is binding
        let binding = (cap + 1..=bound.min(cap + 1)).any(|_| (cap as f64) * delta_at(cap) <= limit);
        if binding {
            warn!("k_n capped at the grid half-width {cap}");
        }
    }
    (1..=scan_to).filter(|&k| k as f64 * delta_at(k) <= limit).max().unwrap_or(1)
}

/// `k_n = max{k ≤ n² : k Δ_k^{v_U} ≤ n² Δ_1^{v_U}}`, capped at the grid.
pub fn kn_known(n: usize, weight_vu: &Weight) -> usize {
    let bound = n.saturating_mul(n).max(1);
    kn_generic(bound, weight_vu)
}

/// `k_n = max{k ≤ n : k Δ_k^v ≤ n Δ_1^v}`, capped at the grid.
pub fn kn_unknown(n: usize, weight_v: &Weight) -> usize {
    kn_generic(n.max(1), weight_v)
}

fn scan(
    mx: &MellinFn,
    v: &Weight,
    penalty_weight: &Weight,
    k_n: usize,
    sigma_hat_sq: f64,
    n: usize,
    cfg: &PenaltyConfig,
) -> Result<SelectionResult> {
    let sup = running_sup(penalty_weight);
    let grid = mx.grid();
    let mut per_k = Vec::with_capacity(k_n);
    let mut best: Option<(usize, f64)> = None;
    for k in 1..=k_n {
        let h = grid.cutoff_index(k as f64)?;
        let contrast = -l2_norm_sq(mx, v, Interval::Within(k as f64))?;
        let delta = sup[h];
        let small_delta = small_delta_k(delta, k);
        let pen = penalty(cfg, k, n, delta, small_delta);
        let objective = contrast + 2.0 * sigma_hat_sq * pen;
        if best.is_none_or(|(_, b)| objective < b) {
            best = Some((k, objective));
        }
        per_k.push(KTrace { k, contrast, penalty: pen, objective, delta, small_delta });
    }
    let k_hat = best.map(|(k, _)| k).unwrap_or(1);
    Ok(SelectionResult { k_hat, k_n, sigma_hat_sq, kappa_effective: cfg.kappa * 2.0 * sigma_hat_sq, per_k })
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(DeconvError::InvalidParameter("n must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// Selection with a known error transform `mu`.
pub fn select_known(
    my_hat: &MellinFn,
    mu: &MellinFn,
    v: &impl AsRef<Weight>,
    sigma_hat_sq: f64,
    n: usize,
    cfg: &PenaltyConfig,
) -> Result<SelectionResult> {
    check_n(n)?;
    let v = v.as_ref();
    let mx = mx_tilde(my_hat, mu)?;
    let v_u = mu.dagger().abs_sq().mul(v)?;
    let k_n = kn_known(n, &v_u);
    scan(&mx, v, &v_u, k_n, sigma_hat_sq, n, cfg)
}

/// Selection with an estimated error transform and its threshold set.
pub fn select_unknown(
    my_hat: &MellinFn,
    mu_hat: &MellinFn,
    mask: &ThresholdMask,
    v: &impl AsRef<Weight>,
    sigma_hat_sq: f64,
    n: usize,
    cfg: &PenaltyConfig,
) -> Result<SelectionResult> {
    check_n(n)?;
    let v = v.as_ref();
    let mx = mx_hat(my_hat, mu_hat, mask)?;
    let masked_dagger = mx_hat(&MellinFn::constant(*mu_hat.grid(), Complex64::new(1.0, 0.0)), mu_hat, mask)?;
    let v_hat = masked_dagger.abs_sq().mul(v)?;
    let k_n = kn_unknown(n, v);
    scan(&mx, v, &v_hat, k_n, sigma_hat_sq, n, cfg)
}
