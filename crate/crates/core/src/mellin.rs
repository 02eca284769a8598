//! Frequency grids, numerical Mellin transforms and their truncated
//! inverses, weighted L² norms and the dagger reciprocal.
//!
//! Every Mellin-domain object lives on a [`TGrid`]: a symmetric, uniform
//! grid `t_j = j * step` for `j = -n_half ..= n_half`. All t-integrals are
//! composite trapezoid sums over such a grid, so the inverse transform is
//! linear in the tabulated values.

use crate::error::{DeconvError, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// How many rotor multiplications are chained before the phase is
/// recomputed exactly with `sin_cos`.
const REANCHOR: usize = 64;

/// Symmetric uniform frequency grid containing `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TGrid {
    step: f64,
    n_half: usize,
}

impl TGrid {
    /// Builds the grid `{-t_max, ..., 0, ..., t_max}` with spacing `step`.
    /// A `t_max` that is not a multiple of `step` is snapped up.
    pub fn new(t_max: f64, step: f64) -> Result<Self> {
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(DeconvError::InvalidParameter(format!("t_max must be positive, got {t_max}")));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(DeconvError::InvalidParameter(format!("step must be positive, got {step}")));
        }
        let n_half = ((t_max / step) - 1e-9).ceil().max(1.0) as usize;
        Ok(TGrid { step, n_half })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Number of grid points on the positive half-line (excluding 0).
    pub fn n_half(&self) -> usize {
        self.n_half
    }

    pub fn t_max(&self) -> f64 {
        self.n_half as f64 * self.step
    }

    pub fn len(&self) -> usize {
        2 * self.n_half + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Frequency at storage index `idx` (`idx = n_half` is `t = 0`).
    #[inline]
    pub fn t_at(&self, idx: usize) -> f64 {
        (idx as f64 - self.n_half as f64) * self.step
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.t_at(i)).collect()
    }

    /// Half-width in grid steps of the smallest grid-aligned interval
    /// covering `[-k, k]`.
    pub fn cutoff_index(&self, k: f64) -> Result<usize> {
        if !(k >= 0.0) {
            return Err(DeconvError::InvalidParameter(format!("cutoff must be non-negative, got {k}")));
        }
        let h = ((k / self.step) - 1e-9).ceil().max(0.0) as usize;
        if h > self.n_half {
            return Err(DeconvError::CutoffBeyondGrid { cutoff: k, t_max: self.t_max() });
        }
        Ok(h)
    }

    /// Trapezoid weight of storage index `idx` within the sub-range
    /// `[lo, hi]` of storage indices.
    #[inline]
    fn trap_weight(&self, idx: usize, lo: usize, hi: usize) -> f64 {
        if lo == hi {
            0.0
        } else if idx == lo || idx == hi {
            0.5 * self.step
        } else {
            self.step
        }
    }
}

impl Default for TGrid {
    /// `t_max = 20`, `step = 0.01`.
    fn default() -> Self {
        TGrid { step: 0.01, n_half: 2000 }
    }
}

/// A complex function tabulated on a [`TGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct MellinFn {
    grid: TGrid,
    values: Vec<Complex64>,
}

impl MellinFn {
    pub fn new(grid: TGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(DeconvError::InvalidParameter(format!(
                "expected {} values for the grid, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(MellinFn { grid, values })
    }

    pub fn zeros(grid: TGrid) -> Self {
        MellinFn { grid, values: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn constant(grid: TGrid, value: Complex64) -> Self {
        MellinFn { grid, values: vec![value; grid.len()] }
    }

    pub fn from_fn(grid: TGrid, f: impl Fn(f64) -> Complex64) -> Self {
        MellinFn { grid, values: (0..grid.len()).map(|i| f(grid.t_at(i))).collect() }
    }

    /// Tabulates `f` on `t >= 0` and fills `t < 0` with conjugates, so the
    /// result is conjugate-symmetric exactly.
    pub fn from_fn_hermitian(grid: TGrid, f: impl Fn(f64) -> Complex64) -> Self {
        let n = grid.n_half();
        let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
        for j in 0..=n {
            let v = f(j as f64 * grid.step());
            values[n + j] = v;
            values[n - j] = v.conj();
        }
        MellinFn { grid, values }
    }

    pub fn grid(&self) -> &TGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Value at `t = 0`.
    pub fn at_zero(&self) -> Complex64 {
        self.values[self.grid.n_half()]
    }

    /// Pointwise product.
    pub fn mul(&self, other: &MellinFn) -> Result<MellinFn> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn zip_with(&self, other: &MellinFn, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<MellinFn> {
        if self.grid != other.grid {
            return Err(DeconvError::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(MellinFn { grid: self.grid, values })
    }

    pub fn map(&self, f: impl Fn(f64, Complex64) -> Complex64) -> MellinFn {
        let values = self.values.iter().enumerate().map(|(i, &v)| f(self.grid.t_at(i), v)).collect();
        MellinFn { grid: self.grid, values }
    }

    /// Like [`MellinFn::map`] but keyed by storage index.
    pub fn map_indexed(&self, f: impl Fn(usize, Complex64) -> Complex64) -> MellinFn {
        let values = self.values.iter().enumerate().map(|(i, &v)| f(i, v)).collect();
        MellinFn { grid: self.grid, values }
    }

    pub fn scale(&self, alpha: f64) -> MellinFn {
        self.map(|_, v| v * alpha)
    }

    /// Pointwise reciprocal on `{value != 0}` and zero elsewhere.
    pub fn dagger(&self) -> MellinFn {
        self.map(|_, v| dagger_value(v))
    }

    /// `|value|²` as a tabulated weight.
    pub fn abs_sq(&self) -> Weight {
        Weight { grid: self.grid, values: self.values.iter().map(|v| v.norm_sqr()).collect() }
    }

    /// Largest deviation from `value(-t) = conj(value(t))`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.grid.n_half();
        (0..=n).map(|j| (self.values[n - j] - self.values[n + j].conj()).norm()).fold(0.0, f64::max)
    }
}

#[inline]
pub(crate) fn dagger_value(v: Complex64) -> Complex64 {
    if v == Complex64::new(0.0, 0.0) {
        v
    } else {
        v.inv()
    }
}

/// Pointwise reciprocal `w†(t) = 1/w(t)` where `w(t) != 0`, else 0.
pub fn dagger(mfn: &MellinFn) -> MellinFn {
    mfn.dagger()
}

/// A non-negative real function tabulated on a [`TGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Weight {
    grid: TGrid,
    values: Vec<f64>,
}

impl Weight {
    pub fn new(grid: TGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(DeconvError::InvalidParameter(format!(
                "expected {} weight values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(DeconvError::InvalidParameter(format!(
                "weight must be finite and non-negative (index {bad} is {})",
                values[bad]
            )));
        }
        Ok(Weight { grid, values })
    }

    pub fn ones(grid: TGrid) -> Self {
        Weight { grid, values: vec![1.0; grid.len()] }
    }

    pub fn grid(&self) -> &TGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Pointwise product of two weights.
    pub fn mul(&self, other: &Weight) -> Result<Weight> {
        if self.grid != other.grid {
            return Err(DeconvError::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Ok(Weight { grid: self.grid, values })
    }
}

/// The weight family `v = t_c^a` with `t_c(t) = ((c-1)² + 4π²t²)^{-1}`.
///
/// `a = 0` weights the density risk, `a = 1` the survival-function risk.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightFn {
    c: f64,
    a: f64,
    weight: Weight,
}

impl WeightFn {
    pub fn new(grid: TGrid, c: f64, a: f64) -> Result<Self> {
        if !c.is_finite() || !a.is_finite() {
            return Err(DeconvError::InvalidParameter("c and a must be finite".into()));
        }
        if a != 0.0 && c == 1.0 {
            return Err(DeconvError::InvalidParameter("t_c^a is unbounded at t = 0 when c = 1 and a != 0".into()));
        }
        let values = (0..grid.len()).map(|i| if a == 0.0 { 1.0 } else { t_c(c, grid.t_at(i)).powf(a) }).collect();
        Ok(WeightFn { c, a, weight: Weight { grid, values } })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn weight(&self) -> &Weight {
        &self.weight
    }
}

impl AsRef<Weight> for WeightFn {
    fn as_ref(&self) -> &Weight {
        &self.weight
    }
}

impl AsRef<Weight> for Weight {
    fn as_ref(&self) -> &Weight {
        self
    }
}

/// `t_c(t) = ((c-1)² + 4π²t²)^{-1}`.
#[inline]
pub fn t_c(c: f64, t: f64) -> f64 {
    1.0 / ((c - 1.0).powi(2) + 4.0 * PI * PI * t * t)
}

/// Integration domain for [`l2_norm_sq`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Interval {
    /// `[-k, k]`, snapped outward to grid points.
    Within(f64),
    /// The part of the grid outside `(-k, k)`.
    Outside(f64),
    /// The whole grid.
    Full,
}

/// Trapezoid approximation of `∫ |mfn(t)|² w(t) dt` over `interval`.
pub fn l2_norm_sq(mfn: &MellinFn, w: &impl AsRef<Weight>, interval: Interval) -> Result<f64> {
    let w = w.as_ref();
    if mfn.grid != w.grid {
        return Err(DeconvError::GridMismatch);
    }
    let grid = mfn.grid;
    let n = grid.n_half();
    let term = |i: usize, lo: usize, hi: usize| grid.trap_weight(i, lo, hi) * mfn.values[i].norm_sqr() * w.values[i];
    let sum_range = |lo: usize, hi: usize| (lo..=hi).map(|i| term(i, lo, hi)).sum::<f64>();
    match interval {
        Interval::Full => Ok(sum_range(0, 2 * n)),
        Interval::Within(k) => {
            let h = grid.cutoff_index(k)?;
            Ok(sum_range(n - h, n + h))
        }
        Interval::Outside(k) => {
            let h = grid.cutoff_index(k)?;
            Ok(sum_range(0, n - h) + sum_range(n + h, 2 * n))
        }
    }
}

/// Strictly positive, strictly increasing abscissae for x-domain
/// quadrature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct XGrid {
    points: Vec<f64>,
}

impl XGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(DeconvError::InvalidParameter("x-grid must not be empty".into()));
        }
        for (i, &x) in points.iter().enumerate() {
            if !(x > 0.0 && x.is_finite()) || (i > 0 && x <= points[i - 1]) {
                return Err(DeconvError::BadXGrid(i));
            }
        }
        Ok(XGrid { points })
    }

    /// `n` points equally spaced in `ln x` from `lo` to `hi`.
    pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo > 0.0) || !(hi > lo) || n < 2 {
            return Err(DeconvError::InvalidParameter(format!("invalid log grid [{lo}, {hi}] with {n} points")));
        }
        let (a, b) = (lo.ln(), hi.ln());
        let step = (b - a) / (n - 1) as f64;
        let mut pts: Vec<f64> = (0..n).map(|i| (a + i as f64 * step).exp()).collect();
        pts[0] = lo;
        pts[n - 1] = hi;
        XGrid::new(pts)
    }

    /// `n` equally spaced points from `lo` to `hi`.
    pub fn linear(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo > 0.0) || !(hi > lo) || n < 2 {
            return Err(DeconvError::InvalidParameter(format!("invalid linear grid [{lo}, {hi}] with {n} points")));
        }
        let step = (hi - lo) / (n - 1) as f64;
        let mut pts: Vec<f64> = (0..n).map(|i| lo + i as f64 * step).collect();
        pts[n - 1] = hi;
        XGrid::new(pts)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl TryFrom<Vec<f64>> for XGrid {
    type Error = DeconvError;
    fn try_from(points: Vec<f64>) -> Result<Self> {
        XGrid::new(points)
    }
}

impl From<XGrid> for Vec<f64> {
    fn from(g: XGrid) -> Vec<f64> {
        g.points
    }
}

/// Composite trapezoid rule on arbitrary sorted abscissae.
pub fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    xs.windows(2).zip(ys.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
}

/// Adds `Σ_i amp_i · exp(ι2π t_j u_i)` to `out[j]` for `t_j = j·step`,
/// `j = 0..out.len()`.
///
/// Phases advance by complex rotation and are re-anchored with an exact
/// `sin_cos` every [`REANCHOR`] steps.
pub(crate) fn accumulate_phases(amps: &[f64], us: &[f64], step: f64, out: &mut [Complex64]) {
    for (&amp, &u) in amps.iter().zip(us) {
        if amp == 0.0 {
            continue;
        }
        let omega = 2.0 * PI * step * u;
        let (s, c) = omega.sin_cos();
        let rotor = Complex64::new(c, s);
        let mut phase = Complex64::new(amp, 0.0);
        for (j, slot) in out.iter_mut().enumerate() {
            if j % REANCHOR == 0 && j > 0 {
                let (s, c) = (omega * j as f64).sin_cos();
                phase = Complex64::new(amp * c, amp * s);
            }
            *slot += phase;
            phase *= rotor;
        }
    }
}

/// Trapezoid approximation of `M_c[h](t) = ∫ x^{c-1+ι2πt} h(x) dx` at every
/// grid frequency.
///
/// The x-integral is taken in the variable `u = ln x` over the supplied
/// abscissae, i.e. `∫ x^{c+ι2πt} h(x) du`. Only `t >= 0` is computed; the
/// negative half is filled by conjugation.
pub fn mellin_numeric(xs: &XGrid, density: &[f64], c: f64, grid: &TGrid) -> Result<MellinFn> {
    let x = xs.points();
    if density.len() != x.len() {
        return Err(DeconvError::InvalidParameter(format!(
            "density has {} values for {} abscissae",
            density.len(),
            x.len()
        )));
    }
    if let Some(bad) = density.iter().position(|h| !(*h >= 0.0) || !h.is_finite()) {
        return Err(DeconvError::InvalidParameter(format!("density value at index {bad} is negative or not finite")));
    }
    let us: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let m = us.len();
    let amps: Vec<f64> = (0..m)
        .map(|i| {
            let du = match (i, m) {
                (_, 1) => 0.0,
                (0, _) => 0.5 * (us[1] - us[0]),
                (i, m) if i == m - 1 => 0.5 * (us[m - 1] - us[m - 2]),
                (i, _) => 0.5 * (us[i + 1] - us[i - 1]),
            };
            du * density[i] * (c * us[i]).exp()
        })
        .collect();
    let n = grid.n_half();
    let mut half = vec![Complex64::new(0.0, 0.0); n + 1];
    accumulate_phases(&amps, &us, grid.step(), &mut half);
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    for j in 0..=n {
        values[n + j] = half[j];
        values[n - j] = half[j].conj();
    }
    values[n].im = 0.0;
    MellinFn::new(*grid, values)
}

/// Complex value of the truncated inverse `∫_{[-k,k]} x^{-c-ι2πt} mfn(t) dt`.
///
/// The real part is the estimate; the imaginary part is a diagnostic that
/// vanishes for conjugate-symmetric inputs.
pub fn mellin_inverse_complex(mfn: &MellinFn, cutoff_k: f64, c: f64, x: f64) -> Result<Complex64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(DeconvError::InvalidParameter(format!("x must be positive, got {x}")));
    }
    let grid = mfn.grid();
    let h = grid.cutoff_index(cutoff_k)?;
    Ok(inverse_at(mfn, h, c, x))
}

fn inverse_at(mfn: &MellinFn, h: usize, c: f64, x: f64) -> Complex64 {
    let grid = mfn.grid();
    let n = grid.n_half();
    let (lo, hi) = (n - h, n + h);
    if lo == hi {
        return Complex64::new(0.0, 0.0);
    }
    let lx = x.ln();
    let omega = -2.0 * PI * grid.step() * lx;
    let (s, cc) = omega.sin_cos();
    let rotor = Complex64::new(cc, s);
    let phase_at = |j: isize| {
        let (s, c) = (omega * j as f64).sin_cos();
        Complex64::new(c, s)
    };
    let mut phase = phase_at(-(h as isize));
    let mut acc = Complex64::new(0.0, 0.0);
    for (count, idx) in (lo..=hi).enumerate() {
        if count % REANCHOR == 0 && count > 0 {
            phase = phase_at(idx as isize - n as isize);
        }
        let w = grid.trap_weight(idx, lo, hi);
        acc += mfn.values()[idx] * phase * w;
        phase *= rotor;
    }
    acc * x.powf(-c)
}

/// Real part of the truncated inverse Mellin transform at `x`.
pub fn mellin_inverse(mfn: &MellinFn, cutoff_k: f64, c: f64, x: f64) -> Result<f64> {
    Ok(mellin_inverse_complex(mfn, cutoff_k, c, x)?.re)
}

/// Truncated inverse at many abscissae; returns complex values.
pub fn mellin_inverse_many(mfn: &MellinFn, cutoff_k: f64, c: f64, xs: &[f64]) -> Result<Vec<Complex64>> {
    let h = mfn.grid().cutoff_index(cutoff_k)?;
    if let Some(&bad) = xs.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
        return Err(DeconvError::InvalidParameter(format!("x must be positive, got {bad}")));
    }
    Ok(xs.iter().map(|&x| inverse_at(mfn, h, c, x)).collect())
}
