//! Spectral cut-off estimators of the density and of the survival function
//! of `X`, for known and for estimated error transforms.
//!
//! All four estimators share one code path: build an estimate of `M_X`,
//! truncate it to `[-k, k]` and invert. The known-error variants build
//! `M̂_Y · M_U†`; the unknown-error variants receive an already thresholded
//! `M̂_X` from [`crate::empirical::mx_hat`].

use crate::error::{DeconvError, Result};
use crate::mellin::{dagger_value, l2_norm_sq, mellin_inverse_many, Interval, MellinFn, Weight};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateKind {
    DensityKnown,
    DensityUnknown,
    SurvivalKnown,
    SurvivalUnknown,
}

impl EstimateKind {
    pub fn is_survival(&self) -> bool {
        matches!(self, EstimateKind::SurvivalKnown | EstimateKind::SurvivalUnknown)
    }
}

/// An estimated curve tabulated at `x_points`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveEstimate {
    x_points: Vec<f64>,
    values: Vec<f64>,
    cutoff_k: f64,
    c: f64,
    kind: EstimateKind,
}

impl CurveEstimate {
    pub fn new(x_points: Vec<f64>, values: Vec<f64>, cutoff_k: f64, c: f64, kind: EstimateKind) -> Result<Self> {
        if x_points.len() != values.len() {
            return Err(DeconvError::InvalidParameter("x_points and values differ in length".into()));
        }
        if kind.is_survival() && !(c > 1.0) {
            return Err(DeconvError::SurvivalNeedsCAboveOne(c));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(DeconvError::InvalidParameter(format!("estimate is not finite at x = {}", x_points[i])));
        }
        Ok(CurveEstimate { x_points, values, cutoff_k, c, kind })
    }

    pub fn x_points(&self) -> &[f64] {
        &self.x_points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cutoff_k(&self) -> f64 {
        self.cutoff_k
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn kind(&self) -> EstimateKind {
        self.kind
    }
}

/// `M̃_X = M̂_Y · M_U†` for a known error transform.
pub fn mx_tilde(my_hat: &MellinFn, mu: &MellinFn) -> Result<MellinFn> {
    my_hat.zip_with(mu, |y, u| y * dagger_value(u))
}

fn invert(mx: &MellinFn, k: f64, line: f64, x_points: &[f64]) -> Result<Vec<f64>> {
    Ok(mellin_inverse_many(mx, k, line, x_points)?.into_iter().map(|v| v.re).collect())
}

fn density_from_transform(
    mx: &MellinFn,
    k: f64,
    c: f64,
    x_points: &[f64],
    kind: EstimateKind,
) -> Result<CurveEstimate> {
    let values = invert(mx, k, c, x_points)?;
    CurveEstimate::new(x_points.to_vec(), values, k, c, kind)
}

/// `(c-1+ι2πt)^{-1} M(t)`, the transform of the survival function on the
/// line `c - 1`.
pub fn survival_transform(mx: &MellinFn, c: f64) -> MellinFn {
    mx.map(|t, v| v / Complex64::new(c - 1.0, 2.0 * PI * t))
}

fn survival_from_transform(
    mx: &MellinFn,
    k: f64,
    c: f64,
    x_points: &[f64],
    kind: EstimateKind,
) -> Result<CurveEstimate> {
    if !(c > 1.0) {
        return Err(DeconvError::SurvivalNeedsCAboveOne(c));
    }
    let values = invert(&survival_transform(mx, c), k, c - 1.0, x_points)?;
    CurveEstimate::new(x_points.to_vec(), values, k, c, kind)
}

/// Density estimate with a known error transform `mu`.
pub fn density_known(my_hat: &MellinFn, mu: &MellinFn, k: f64, c: f64, x_points: &[f64]) -> Result<CurveEstimate> {
    density_from_transform(&mx_tilde(my_hat, mu)?, k, c, x_points, EstimateKind::DensityKnown)
}

/// Density estimate from a thresholded `M̂_X`.
pub fn density_unknown(mx_hat: &MellinFn, k: f64, c: f64, x_points: &[f64]) -> Result<CurveEstimate> {
    density_from_transform(mx_hat, k, c, x_points, EstimateKind::DensityUnknown)
}

/// Survival-function estimate with a known error transform; needs `c > 1`.
pub fn survival_known(my_hat: &MellinFn, mu: &MellinFn, k: f64, c: f64, x_points: &[f64]) -> Result<CurveEstimate> {
    if !(c > 1.0) {
        return Err(DeconvError::SurvivalNeedsCAboveOne(c));
    }
    survival_from_transform(&mx_tilde(my_hat, mu)?, k, c, x_points, EstimateKind::SurvivalKnown)
}

/// Survival-function estimate from a thresholded `M̂_X`; needs `c > 1`.
pub fn survival_unknown(mx_hat: &MellinFn, k: f64, c: f64, x_points: &[f64]) -> Result<CurveEstimate> {
    survival_from_transform(mx_hat, k, c, x_points, EstimateKind::SurvivalUnknown)
}

/// Monte Carlo diagnostics for the four-term risk representation of the
/// thresholded estimator. Needs the true transforms, so it is only usable
/// in simulation.
pub mod diagnostics {
    use super::*;
    use crate::empirical::ThresholdMask;

    /// One replication's contribution to each side of the identity
    /// `E‖M̂_X^k − M_X‖² = bias + E[variance] + E[mask_loss] + E[u_error]`.
    #[derive(Debug, Clone, Copy, PartialEq)]
    pub struct RiskTerms {
        pub total: f64,
        pub bias: f64,
        pub variance: f64,
        pub mask_loss: f64,
        pub u_error: f64,
    }

    impl RiskTerms {
        pub fn right_hand_side(&self) -> f64 {
            self.bias + self.variance + self.mask_loss + self.u_error
        }
    }

    fn truncate(m: &MellinFn, h: usize) -> MellinFn {
        let n = m.grid().n_half();
        m.map_indexed(|i, v| if i + h >= n && i <= n + h { v } else { Complex64::new(0.0, 0.0) })
    }

    /// Evaluates both sides for one replication.
    ///
    /// `vy_sq` is the scaled variance `V_Y²(t) = E|Y^{c-1+ι2πt} − M_Y(t)|²`.
    #[allow(clippy::too_many_arguments)]
    pub fn risk_terms(
        mx_true: &MellinFn,
        mu_true: &MellinFn,
        mx_hat: &MellinFn,
        mu_hat: &MellinFn,
        mask: &ThresholdMask,
        vy_sq: &Weight,
        n: usize,
        k: f64,
        v: &Weight,
    ) -> Result<RiskTerms> {
        let grid = *mx_true.grid();
        let h = grid.cutoff_index(k)?;
        let mx_hat_k = truncate(mx_hat, h);
        let mx_k = truncate(mx_true, h);
        let diff = mx_hat_k.zip_with(mx_true, |a, b| a - b)?;
        let total = l2_norm_sq(&diff, v, Interval::Full)?;
        let n_half = grid.n_half();
        let tail =
            mx_true.map_indexed(|i, x| if i + h >= n_half && i <= n_half + h { Complex64::new(0.0, 0.0) } else { x });
        let bias = l2_norm_sq(&tail, v, Interval::Full)?;

        let inc = mask.included();
        let mu_dag_mask = MellinFn::new(
            grid,
            mu_hat
                .values()
                .iter()
                .zip(inc)
                .map(|(&u, &keep)| if keep { dagger_value(u) } else { Complex64::new(0.0, 0.0) })
                .collect(),
        )?;
        let var_fn =
            MellinFn::new(grid, mu_dag_mask.values().iter().zip(vy_sq.values()).map(|(d, s)| d * s.sqrt()).collect())?;
        let variance = l2_norm_sq(&truncate(&var_fn, h), v, Interval::Full)? / n as f64;

        let lost = MellinFn::new(
            grid,
            mx_k.values().iter().zip(inc).map(|(&x, &keep)| if keep { Complex64::new(0.0, 0.0) } else { x }).collect(),
        )?;
        let mask_loss = l2_norm_sq(&lost, v, Interval::Full)?;

        let u_err_fn = MellinFn::new(
            grid,
            mu_dag_mask
                .values()
                .iter()
                .zip(mu_true.values())
                .zip(mu_hat.values())
                .zip(mx_k.values())
                .map(|(((d, ut), uh), x)| d * (ut - uh) * x)
                .collect(),
        )?;
        let u_error = l2_norm_sq(&u_err_fn, v, Interval::Full)?;
        Ok(RiskTerms { total, bias, variance, mask_loss, u_error })
    }
}
