//! The five parametric families used as targets and errors, their
//! densities, samplers and closed-form Mellin transforms.

use crate::error::{DeconvError, Result};
use crate::mellin::{MellinFn, TGrid, XGrid};
use crate::special::{ln_beta, ln_gamma, ln_gamma_complex};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

/// Raw family parameters, as they appear in config files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Family {
    /// `q^p / Γ(p) x^{p-1} e^{-qx}` (rate `q`, shape `p`).
    Gamma { q: f64, p: f64 },
    /// `s k (sx)^{k-1} exp(-(sx)^k)`.
    Weibull { s: f64, k: f64 },
    /// `x^{a-1}(1-x)^{b-1} / B(a, b)` on `(0, 1)`.
    Beta { a: f64, b: f64 },
    /// `ln X ~ N(mu, sigma2)`.
    #[serde(alias = "log_normal")]
    LogNormal { mu: f64, sigma2: f64 },
    /// `l x_min^l / x^{l+1}` on `[x_min, ∞)`.
    Pareto { l: f64, x_min: f64 },
}

/// A validated distribution on the positive half-line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Family", into = "Family")]
pub struct DistSpec(Family);

impl TryFrom<Family> for DistSpec {
    type Error = DeconvError;

    fn try_from(family: Family) -> Result<Self> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(DeconvError::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
            }
        };
        match family {
            Family::Gamma { q, p } => {
                positive("q", q)?;
                positive("p", p)?;
            }
            Family::Weibull { s, k } => {
                positive("s", s)?;
                positive("k", k)?;
            }
            Family::Beta { a, b } => {
                positive("a", a)?;
                positive("b", b)?;
            }
            Family::LogNormal { mu, sigma2 } => {
                if !mu.is_finite() {
                    return Err(DeconvError::InvalidParameter(format!("mu must be finite, got {mu}")));
                }
                positive("sigma2", sigma2)?;
            }
            Family::Pareto { l, x_min } => {
                positive("l", l)?;
                positive("x_min", x_min)?;
            }
        }
        Ok(DistSpec(family))
    }
}

impl From<DistSpec> for Family {
    fn from(d: DistSpec) -> Family {
        d.0
    }
}

impl fmt::Display for DistSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Family::Gamma { q, p } => write!(f, "Gamma({q},{p})"),
            Family::Weibull { s, k } => write!(f, "Weibull({s},{k})"),
            Family::Beta { a, b } => write!(f, "Beta({a},{b})"),
            Family::LogNormal { mu, sigma2 } => write!(f, "LogNormal({mu},{sigma2})"),
            Family::Pareto { l, x_min } => write!(f, "Pareto({l},{x_min})"),
        }
    }
}

impl DistSpec {
    pub fn gamma(q: f64, p: f64) -> Result<Self> {
        Family::Gamma { q, p }.try_into()
    }

    pub fn weibull(s: f64, k: f64) -> Result<Self> {
        Family::Weibull { s, k }.try_into()
    }

    pub fn beta(a: f64, b: f64) -> Result<Self> {
        Family::Beta { a, b }.try_into()
    }

    pub fn log_normal(mu: f64, sigma2: f64) -> Result<Self> {
        Family::LogNormal { mu, sigma2 }.try_into()
    }

    pub fn pareto(l: f64, x_min: f64) -> Result<Self> {
        Family::Pareto { l, x_min }.try_into()
    }

    pub fn family(&self) -> Family {
        self.0
    }

    fn name(&self) -> &'static str {
        match self.0 {
            Family::Gamma { .. } => "Gamma",
            Family::Weibull { .. } => "Weibull",
            Family::Beta { .. } => "Beta",
            Family::LogNormal { .. } => "LogNormal",
            Family::Pareto { .. } => "Pareto",
        }
    }

    /// Density at `x`; zero outside the support.
    pub fn pdf(&self, x: f64) -> f64 {
        if !(x > 0.0) || !x.is_finite() {
            return 0.0;
        }
        match self.0 {
            Family::Gamma { q, p } => (p * q.ln() - ln_gamma(p) + (p - 1.0) * x.ln() - q * x).exp(),
            Family::Weibull { s, k } => {
                let sx = s * x;
                s * k * sx.powf(k - 1.0) * (-sx.powf(k)).exp()
            }
            Family::Beta { a, b } => {
                if x >= 1.0 {
                    0.0
                } else {
                    ((a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - ln_beta(a, b)).exp()
                }
            }
            Family::LogNormal { mu, sigma2 } => {
                let z = x.ln() - mu;
                (-z * z / (2.0 * sigma2)).exp() / (x * (2.0 * PI * sigma2).sqrt())
            }
            Family::Pareto { l, x_min } => {
                if x < x_min {
                    0.0
                } else {
                    l * x_min.powf(l) / x.powf(l + 1.0)
                }
            }
        }
    }

    /// Draws one variate.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        // Parameters are validated at construction, so the rand_distr
        // constructors cannot fail.
        match self.0 {
            Family::Gamma { q, p } => rand_distr::Gamma::new(p, 1.0 / q).unwrap().sample(rng),
            Family::Weibull { s, k } => rand_distr::Weibull::new(1.0 / s, k).unwrap().sample(rng),
            Family::Beta { a, b } => rand_distr::Beta::new(a, b).unwrap().sample(rng),
            Family::LogNormal { mu, sigma2 } => rand_distr::LogNormal::new(mu, sigma2.sqrt()).unwrap().sample(rng),
            Family::Pareto { l, x_min } => rand_distr::Pareto::new(x_min, l).unwrap().sample(rng),
        }
    }

    /// Checks that `E[X^{c-1}]` exists, i.e. that the Mellin transform is
    /// defined on the line parameterised by `c`.
    pub fn check_moment(&self, c: f64) -> Result<()> {
        let e = c - 1.0;
        let ok = match self.0 {
            Family::Gamma { p, .. } => p + e > 0.0,
            Family::Weibull { k, .. } => e / k > -1.0,
            Family::Beta { a, .. } => a + e > 0.0,
            Family::LogNormal { .. } => e.is_finite(),
            Family::Pareto { l, .. } => e < l,
        };
        if ok {
            Ok(())
        } else {
            Err(DeconvError::MomentDomain { family: self.name(), exponent: e })
        }
    }

    /// Closed-form `E[X^{c-1+ι2πt}]`.
    pub fn analytic_mellin(&self, c: f64, t: f64) -> Result<Complex64> {
        self.check_moment(c)?;
        Ok(self.mellin_unchecked(Complex64::new(c - 1.0, 2.0 * PI * t)))
    }

    fn mellin_unchecked(&self, z: Complex64) -> Complex64 {
        match self.0 {
            Family::Gamma { q, p } => (-z * q.ln() + ln_gamma_complex(z + p) - ln_gamma(p)).exp(),
            Family::Weibull { s, k } => (-z * s.ln() + ln_gamma_complex(z / k + 1.0)).exp(),
            Family::Beta { a, b } => {
                (ln_gamma_complex(z + a) - ln_gamma_complex(z + a + b) + ln_gamma(a + b) - ln_gamma(a)).exp()
            }
            Family::LogNormal { mu, sigma2 } => (mu * z + 0.5 * sigma2 * z * z).exp(),
            Family::Pareto { l, x_min } => l * (z * x_min.ln()).exp() / (l - z),
        }
    }

    /// Analytic transform tabulated on `grid` (conjugate-symmetric).
    pub fn analytic_mellin_fn(&self, c: f64, grid: &TGrid) -> Result<MellinFn> {
        self.check_moment(c)?;
        Ok(MellinFn::from_fn_hermitian(*grid, |t| self.mellin_unchecked(Complex64::new(c - 1.0, 2.0 * PI * t))))
    }

    /// A log-spaced x-grid that covers the support closely enough for
    /// trapezoid Mellin transforms at moderate `c`.
    pub fn default_x_grid(&self) -> XGrid {
        const POINTS: usize = 4000;
        let (lo, hi) = match self.0 {
            Family::Gamma { q, p } => (1e-8 / q, (p + 40.0 + 10.0 * p.sqrt()) / q),
            Family::Weibull { s, k } => (1e-8 / s, 60f64.powf(1.0 / k) / s),
            Family::Beta { .. } => (1e-6, 1.0),
            Family::LogNormal { mu, sigma2 } => {
                let sd = sigma2.sqrt();
                ((mu - 9.0 * sd).exp(), (mu + 9.0 * sd).exp())
            }
            Family::Pareto { x_min, .. } => (x_min, x_min * 1e12),
        };
        XGrid::log_spaced(lo, hi, POINTS).expect("family grid bounds are valid")
    }
}

/// A batch of strictly positive observations.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
}

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(DeconvError::EmptySample);
        }
        if let Some(index) = values.iter().position(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(DeconvError::NonPositiveObservation { index, value: values[index] });
        }
        Ok(Sample { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn check_count(n: usize) -> Result<()> {
    if n == 0 {
        Err(DeconvError::InvalidParameter("sample size must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// `n` draws from `dist` using the supplied generator.
pub fn sample_with<R: Rng + ?Sized>(dist: &DistSpec, n: usize, rng: &mut R) -> Result<Sample> {
    check_count(n)?;
    Sample::new((0..n).map(|_| dist.draw(rng)).collect())
}

/// `n` products `X_i · U_i` of independent draws.
pub fn sample_product_with<R: Rng + ?Sized>(x: &DistSpec, u: &DistSpec, n: usize, rng: &mut R) -> Result<Sample> {
    check_count(n)?;
    Sample::new(
        (0..n)
            .map(|_| {
                let xv = x.draw(rng);
                xv * u.draw(rng)
            })
            .collect(),
    )
}

/// `n` i.i.d. draws from `dist`, deterministic in `seed`.
pub fn sample(dist: &DistSpec, n: usize, seed: u64) -> Result<Sample> {
    sample_with(dist, n, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// `n` draws of `Y = X · U`, deterministic in `seed`.
pub fn sample_product(x: &DistSpec, u: &DistSpec, n: usize, seed: u64) -> Result<Sample> {
    sample_product_with(x, u, n, &mut ChaCha8Rng::seed_from_u64(seed))
}
