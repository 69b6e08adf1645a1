//! Numerical integration rules.
//!
//! * [`GaussLegendre`]: fixed rule, used in composite form for mode integrals.
//! * [`adaptive_gauss_kronrod`]: recursive G7/K15 bisection.
//! * [`tanh_sinh`]: double-exponential rule, tolerant of endpoint
//!   singularities; used as an independent cross-check of the Kronrod rule.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// `n`-point rule; nodes from Newton iteration on the three-term
    /// recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// ∫ f over `[a, b]` with this rule.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    /// Composite rule over `panels` equal subintervals of `[a, b]`.
    pub fn integrate_composite<F: FnMut(f64) -> f64>(
        &self,
        a: f64,
        b: f64,
        panels: usize,
        mut f: F,
    ) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|i| {
                let lo = a + h * i as f64;
                let hi = if i + 1 == panels { b } else { lo + h };
                self.integrate(lo, hi, &mut f)
            })
            .sum()
    }

    /// Absolute abscissas of the composite rule (for tabulating integrands).
    pub fn composite_points(&self, a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
        let h = (b - a) / panels as f64;
        let mut out = Vec::with_capacity(panels * self.nodes.len());
        for i in 0..panels {
            let lo = a + h * i as f64;
            let hi = if i + 1 == panels { b } else { lo + h };
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            for (&x, &w) in self.nodes.iter().zip(&self.weights) {
                out.push((mid + half * x, w * half));
            }
        }
        out
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

// Kronrod abscissas and weights as published, to 33 digits
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
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

/// K15 estimate and |K15 − G7| on `[a, b]`.
fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss–Kronrod integration to absolute tolerance `tol`.
pub fn adaptive_gauss_kronrod<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    const MAX_INTERVALS: usize = 4000;
    let (v, e) = gk15(&mut f, a, b);
    let mut pieces = vec![(a, b, v, e)];
    let mut err = e;
    while err > tol {
        if pieces.len() >= MAX_INTERVALS {
            return Err(Error::QuadratureNotConverged(format!(
                "Gauss-Kronrod error estimate {err:e} after {MAX_INTERVALS} intervals"
            )));
        }
        // bisect the worst interval
        let (idx, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("nonempty");
        let (lo, hi, _, pe) = pieces.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // interval cannot be split further in floating point
            if pe <= tol * 1e3 {
                break;
            }
            return Err(Error::QuadratureNotConverged(format!(
                "interval [{lo}, {hi}] exhausted with error {pe:e}"
            )));
        }
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        err += e1 + e2 - pe;
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
        if err <= tol {
            // recompute from scratch to shed accumulated rounding
            err = pieces.iter().map(|p| p.3).sum();
        }
    }
    Ok(pieces.iter().map(|p| p.2).sum())
}

/// Tanh–sinh quadrature on `[a, b]`, halving the step until successive
/// estimates agree to `tol` (absolute). The integrand is never evaluated at
/// the endpoints. Abscissas that round onto an endpoint are skipped, so an
/// integrable singularity is fully resolved only where floating-point numbers
/// are dense (at 0).
pub fn tanh_sinh<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let h2 = 0.5 * (b - a);
    // abscissa and weight at t, measured from the nearer endpoint
    let sample = |f: &mut F, t: f64| -> f64 {
        let s = FRAC_PI_2 * t.sinh();
        let cs = s.cosh();
        let w = FRAC_PI_2 * t.cosh() / (cs * cs);
        // distance from the endpoint: 1 − tanh(s) = 1/(e^s cosh s)
        let gap = 1.0 / (s.exp() * cs);
        if gap * h2 == 0.0 {
            return 0.0;
        }
        let xr = b - h2 * gap;
        let xl = a + h2 * gap;
        let mut acc = 0.0;
        if xr > a && xr < b {
            acc += f(xr);
        }
        if t != 0.0 && xl > a && xl < b {
            acc += f(xl);
        }
        w * acc
    };
    let t_max = 6.5;
    let mut h = 1.0;
    let mut sum = sample(&mut f, 0.0);
    let mut k = 1;
    while (k as f64) * h <= t_max {
        sum += sample(&mut f, k as f64 * h);
        k += 1;
    }
    let mut estimate = sum * h * h2;
    for _level in 0..12 {
        h *= 0.5;
        let mut t = h;
        while t <= t_max {
            sum += sample(&mut f, t);
            t += 2.0 * h;
        }
        let next = sum * h * h2;
        if (next - estimate).abs() <= tol {
            return Ok(next);
        }
        estimate = next;
    }
    Err(Error::QuadratureNotConverged(format!(
        "tanh-sinh did not reach {tol:e}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let gl = GaussLegendre::new(8);
        let v = gl.integrate(0.0, 2.0, |x| x.powi(15) + 3.0 * x * x);
        assert!((v - (2f64.powi(16) / 16.0 + 8.0)).abs() < 1e-9);
        let w: f64 = gl.weights.iter().sum();
        assert!((w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gauss_legendre_odd_rule_has_center_node() {
        let gl = GaussLegendre::new(5);
        assert_eq!(gl.nodes[2], 0.0);
        assert!((gl.weights[2] - 128.0 / 225.0).abs() < 1e-15);
    }

    #[test]
    fn composite_matches_analytic() {
        let gl = GaussLegendre::new(16);
        let v = gl.integrate_composite(0.0, 10.0, 8, |x| (x * 3.0).sin());
        assert!((v - (1.0 - 30f64.cos()) / 3.0).abs() < 1e-13);
    }

    #[test]
    fn kronrod_handles_sqrt_endpoint() {
        let v = adaptive_gauss_kronrod(|x: f64| x.sqrt(), 0.0, 1.0, 1e-13).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn tanh_sinh_handles_inverse_sqrt_endpoint() {
        let v = tanh_sinh(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, 1e-13).unwrap();
        assert!((v - 2.0).abs() < 1e-11, "{v}");
        let v = tanh_sinh(|x: f64| (1.0 - x).sqrt(), 0.0, 1.0, 1e-14).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-13, "{v}");
    }
}
