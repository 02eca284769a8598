//! Slow reference computations used to check the production paths:
//! adaptive Gauss-Kronrod quadrature of Mellin transforms and of the
//! multiplicative convolution, and a dense-grid ISE.
//!
//! Nothing here shares code with the trapezoid and rotor machinery in
//! [`crate::mellin`].

use crate::error::{DeconvError, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: usize,
}

impl QuadSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_depth: usize) -> Result<Self> {
        if !(abs_tol > 0.0 && rel_tol > 0.0) {
            return Err(DeconvError::InvalidParameter("quadrature tolerances must be positive".into()));
        }
        Ok(QuadSpec { abs_tol, rel_tol, max_depth })
    }
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec { abs_tol: 1e-11, rel_tol: 1e-10, max_depth: 40 }
    }
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Kronrod estimate and its distance from the embedded Gauss rule.
fn gk15(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64) -> (Complex64, f64) {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(mid);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(mid - dx) + f(mid + dx);
        kronrod += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).norm())
}

fn adapt(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64, tol: f64, depth: usize, spec: &QuadSpec) -> Result<Complex64> {
    let (value, err) = gk15(f, a, b);
    if err <= tol || (b - a) <= f64::EPSILON * a.abs().max(b.abs()) * 16.0 {
        return Ok(value);
    }
    if depth >= spec.max_depth {
        return Err(DeconvError::QuadratureNonConvergence { error: err });
    }
    let mid = 0.5 * (a + b);
    Ok(adapt(f, a, mid, 0.5 * tol, depth + 1, spec)? + adapt(f, mid, b, 0.5 * tol, depth + 1, spec)?)
}

/// Adaptive quadrature of a complex integrand on a finite interval.
pub fn integrate(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64, spec: &QuadSpec) -> Result<Complex64> {
    let (rough, _) = gk15(f, a, b);
    let tol = spec.abs_tol.max(spec.rel_tol * rough.norm());
    adapt(f, a, b, tol, 0, spec)
}

const CHUNK: f64 = 2.0;
const MIN_REACH: f64 = 8.0;
const MAX_REACH: f64 = 700.0;

/// Integral over the whole real line: exact pieces between `breaks`, then
/// chunks outward until three consecutive chunks fall below `abs_tol`.
fn integrate_line(f: &dyn Fn(f64) -> Complex64, breaks: &[f64], spec: &QuadSpec) -> Result<Complex64> {
    let mut pts: Vec<f64> = breaks.to_vec();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut total = Complex64::new(0.0, 0.0);
    for w in pts.windows(2) {
        total += integrate(f, w[0], w[1], spec)?;
    }
    for dir in [1.0, -1.0] {
        let start = if dir > 0.0 { pts[pts.len() - 1] } else { pts[0] };
        let mut small = 0;
        let mut u = start;
        loop {
            let next = u + dir * CHUNK;
            let piece = integrate(f, u.min(next), u.max(next), spec)?;
            total += piece;
            small = if piece.norm() < spec.abs_tol { small + 1 } else { 0 };
            u = next;
            if small >= 3 && (u - start).abs() >= MIN_REACH {
                break;
            }
            if u.abs() > MAX_REACH {
                return Err(DeconvError::QuadratureNonConvergence { error: piece.norm() });
            }
        }
    }
    Ok(total)
}

/// `∫ x^{c−1+ι2πt} pdf(x) dx` by adaptive quadrature in `u = ln x`, split at `x = 1`.
pub fn quad_mellin(pdf: &dyn Fn(f64) -> f64, c: f64, t: f64, spec: &QuadSpec) -> Result<Complex64> {
    let f = |u: f64| {
        let x = u.exp();
        let p = pdf(x);
        if p == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::from_polar((c * u).exp() * p, 2.0 * PI * t * u)
    };
    integrate_line(&f, &[0.0], spec)
}

/// `∫ pdf_x(x) pdf_u(y/x) x⁻¹ dx`, integrated in `s = ln x`.
pub fn quad_mult_convolution(
    pdf_x: &dyn Fn(f64) -> f64,
    pdf_u: &dyn Fn(f64) -> f64,
    y: f64,
    spec: &QuadSpec,
) -> Result<f64> {
    if !(y > 0.0) {
        return Err(DeconvError::InvalidParameter(format!("y must be positive, got {y}")));
    }
    let f = |s: f64| {
        let x = s.exp();
        let px = pdf_x(x);
        if px == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::new(px * pdf_u(y / x), 0.0)
    };
    Ok(integrate_line(&f, &[0.0, y.ln()], spec)?.re)
}

/// `∫ (estimate − truth)² x^{2c−1} dx` over the range of `x_points` by
/// Simpson's rule on a grid ten times finer, evaluating both functions
/// directly rather than from tabulated values.
pub fn quad_ise(estimate: &dyn Fn(f64) -> f64, truth: &dyn Fn(f64) -> f64, c: f64, x_points: &[f64]) -> f64 {
    let g = |x: f64| (estimate(x) - truth(x)).powi(2) * x.powf(2.0 * c - 1.0);
    let mut total = 0.0;
    for w in x_points.windows(2) {
        let h = (w[1] - w[0]) / 20.0;
        let mut s = g(w[0]) + g(w[1]);
        for j in 1..20 {
            s += g(w[0] + j as f64 * h) * if j % 2 == 1 { 4.0 } else { 2.0 };
        }
        total += s * h / 3.0;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::DistSpec;
    use approx::assert_abs_diff_eq;

    fn real(f: impl Fn(f64) -> f64) -> impl Fn(f64) -> Complex64 {
        move |x| Complex64::new(f(x), 0.0)
    }

    #[test]
    fn gauss_kronrod_is_exact_on_polynomials() {
        let spec = QuadSpec::default();
        let v = integrate(&real(|x: f64| x.powi(20)), 0.0, 1.0, &spec).unwrap();
        assert_abs_diff_eq!(v.re, 1.0 / 21.0, epsilon = 1e-14);
        let v = integrate(&real(f64::sin), 0.0, PI, &spec).unwrap();
        assert_abs_diff_eq!(v.re, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn depth_limit_is_reported() {
        let spec = QuadSpec { abs_tol: 1e-14, rel_tol: 1e-14, max_depth: 2 };
        let r = integrate(&real(|x: f64| (1.0 / x).sin()), 1e-6, 1.0, &spec);
        assert!(matches!(r, Err(DeconvError::QuadratureNonConvergence { .. })));
        assert!(QuadSpec::new(0.0, 1e-3, 10).is_err());
    }

    #[test]
    fn pareto_mellin_at_zero() {
        let d = DistSpec::pareto(1.0, 1.0).unwrap();
        let v = quad_mellin(&|x| d.pdf(x), 0.5, 0.0, &QuadSpec::default()).unwrap();
        assert_abs_diff_eq!(v.re, 2.0 / 3.0, epsilon = 1e-8);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn any_density_integrates_to_one() {
        for d in [
            DistSpec::gamma(1.0, 3.0).unwrap(),
            DistSpec::weibull(1.0, 3.0).unwrap(),
            DistSpec::beta(10.0, 5.0).unwrap(),
            DistSpec::log_normal(0.0, 1.0).unwrap(),
        ] {
            let v = quad_mellin(&|x| d.pdf(x), 1.0, 0.0, &QuadSpec::default()).unwrap();
            assert_abs_diff_eq!(v.re, 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn gamma_mellin_matches_closed_form() {
        let d = DistSpec::gamma(1.0, 3.0).unwrap();
        let q = quad_mellin(&|x| d.pdf(x), 0.5, 1.0, &QuadSpec::default()).unwrap();
        let a = d.analytic_mellin(0.5, 1.0).unwrap();
        assert!((q - a).norm() < 1e-6, "{q} vs {a}");
    }

    #[test]
    fn gamma_pareto_convolution_closed_form() {
        // f^Y(y) = y⁻² ∫₀^y x f(x) dx = 3 P(4, y) / y²
        let x = DistSpec::gamma(1.0, 3.0).unwrap();
        let u = DistSpec::pareto(1.0, 1.0).unwrap();
        let spec = QuadSpec::default();
        for y in [0.5_f64, 1.0, 4.0] {
            let p4 = 1.0 - (-y).exp() * (1.0 + y + y * y / 2.0 + y * y * y / 6.0);
            let v = quad_mult_convolution(&|s| x.pdf(s), &|s| u.pdf(s), y, &spec).unwrap();
            assert_abs_diff_eq!(v, 3.0 * p4 / (y * y), epsilon = 1e-9);
        }
        let p2 = DistSpec::pareto(2.0, 1.0).unwrap();
        assert_eq!(quad_mult_convolution(&|s| p2.pdf(s), &|s| u.pdf(s), 0.9, &spec).unwrap(), 0.0);
        assert!(quad_mult_convolution(&|s| x.pdf(s), &|s| u.pdf(s), 0.0, &spec).is_err());
    }

    #[test]
    fn ise_oracle_cases() {
        let f1 = DistSpec::gamma(1.0, 3.0).unwrap();
        let xs: Vec<f64> = (0..2000).map(|i| 1e-3 + i as f64 * (20.0 - 1e-3) / 1999.0).collect();
        assert_abs_diff_eq!(quad_ise(&|_| 0.0, &|x| f1.pdf(x), 0.5, &xs), 0.1875, epsilon = 1e-4);
        assert!(quad_ise(&|x| f1.pdf(x), &|x| f1.pdf(x), 0.5, &xs) < 1e-8);
    }
}
