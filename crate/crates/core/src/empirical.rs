//! Sample-based quantities: empirical Mellin transforms, the variance
//! proxy `σ̂²_Y`, the threshold set for the estimated error transform and
//! the plug-in transform `M̂_X`.

use crate::distributions::Sample;
use crate::error::{DeconvError, Result};
use crate::mellin::{accumulate_phases, dagger_value, MellinFn, TGrid};
use num_complex::Complex64;

/// `M̂(t) = n⁻¹ Σ_i Y_i^{c-1+ι2πt}` on every grid frequency.
pub fn empirical_mellin(sample: &Sample, c: f64, grid: &TGrid) -> Result<MellinFn> {
    if sample.is_empty() {
        return Err(DeconvError::EmptySample);
    }
    let n = sample.len() as f64;
    let logs: Vec<f64> = sample.values().iter().map(|y| y.ln()).collect();
    let amps: Vec<f64> = logs.iter().map(|l| ((c - 1.0) * l).exp() / n).collect();
    let half_len = grid.n_half();
    let mut half = vec![Complex64::new(0.0, 0.0); half_len + 1];
    accumulate_phases(&amps, &logs, grid.step(), &mut half);
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    for j in 0..=half_len {
        values[half_len + j] = half[j];
        values[half_len - j] = half[j].conj();
    }
    MellinFn::new(*grid, values)
}

/// `σ̂²_Y = 1 + n⁻¹ Σ_i Y_i^{2(c-1)}`.
pub fn sigma_hat_sq(sample: &Sample, c: f64) -> f64 {
    let n = sample.len() as f64;
    1.0 + sample.values().iter().map(|y| y.powf(2.0 * (c - 1.0))).sum::<f64>() / n
}

/// The frequencies where `(m ∧ n)|M̂_U(t)|² ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdMask {
    grid: TGrid,
    included: Vec<bool>,
    m: usize,
    n: usize,
}

impl ThresholdMask {
    /// A mask with every grid point included.
    pub fn all(grid: TGrid, m: usize, n: usize) -> Self {
        ThresholdMask { grid, included: vec![true; grid.len()], m, n }
    }

    /// A mask with no grid point included.
    pub fn none(grid: TGrid, m: usize, n: usize) -> Self {
        ThresholdMask { grid, included: vec![false; grid.len()], m, n }
    }

    pub fn grid(&self) -> &TGrid {
        &self.grid
    }

    pub fn included(&self) -> &[bool] {
        &self.included
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn count(&self) -> usize {
        self.included.iter().filter(|b| **b).count()
    }

    /// Whether every included frequency of `self` is also in `other`.
    pub fn is_subset_of(&self, other: &ThresholdMask) -> bool {
        self.included.iter().zip(&other.included).all(|(a, b)| !*a || *b)
    }
}

/// Builds the threshold set from an estimated error transform.
pub fn threshold_mask(mu_hat: &MellinFn, m: usize, n: usize) -> Result<ThresholdMask> {
    if m == 0 || n == 0 {
        return Err(DeconvError::InvalidParameter("sample counts must be at least 1".into()));
    }
    let scale = m.min(n) as f64;
    let included = mu_hat.values().iter().map(|v| scale * v.norm_sqr() >= 1.0).collect();
    Ok(ThresholdMask { grid: *mu_hat.grid(), included, m, n })
}

/// `M̂_X = M̂_Y · M̂_U† · 1_mask`.
pub fn mx_hat(my_hat: &MellinFn, mu_hat: &MellinFn, mask: &ThresholdMask) -> Result<MellinFn> {
    if my_hat.grid() != mu_hat.grid() || my_hat.grid() != mask.grid() {
        return Err(DeconvError::GridMismatch);
    }
    let values = my_hat
        .values()
        .iter()
        .zip(mu_hat.values())
        .zip(&mask.included)
        .map(|((&y, &u), &keep)| if keep { y * dagger_value(u) } else { Complex64::new(0.0, 0.0) })
        .collect();
    MellinFn::new(*my_hat.grid(), values)
}
