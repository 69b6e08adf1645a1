//! Kummer's confluent hypergeometric function `M(a, b, z)` and the Whittaker
//! function `M_{κ,μ}(z)` for complex parameters and arguments.
//!
//! All arithmetic runs in double-double. For `Re z < 0` Kummer's
//! transformation `M(a, b, z) = e^z M(b − a, b, −z)` is applied first. The
//! Taylor series is then summed at the argument itself when its estimated
//! cancellation (sum of term magnitudes over the magnitude of the sum) stays
//! below 10¹⁶. Otherwise it is summed at a point on the same ray close enough
//! to the origin, and the value and derivative are carried outward by Taylor
//! steps of Kummer's equation `zM'' + (b − z)M' − aM = 0`. A terminating
//! series (`a` a nonpositive integer) is summed directly, since that
//! polynomial solution is subdominant and would not survive the ODE march.

mod dd;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use dd::Cdd;

/// Accuracy contract of the special functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpecFunDomain {
    /// Largest `|z|` accepted.
    pub max_abs_z: f64,
    /// Relative size of the series terms at which summation stops.
    pub tol: f64,
    /// Term budget of any single series.
    pub max_terms: usize,
}

impl Default for SpecFunDomain {
    fn default() -> Self {
        Self {
            max_abs_z: 80.0,
            tol: 1e-15,
            max_terms: 2000,
        }
    }
}

/// Largest cancellation ratio tolerated in a double-double sum.
const MAX_CANCELLATION: f64 = 1e16;
/// Longest ray step of the ODE continuation.
const MAX_STEP: f64 = 10.0;

fn is_nonpositive_integer(x: Complex64) -> bool {
    x.im == 0.0 && x.re <= 0.0 && x.re.fract() == 0.0
}

/// `M(a, b, z) = Σ (a)ₙ zⁿ / ((b)ₙ n!)` on the default domain.
pub fn kummer_m(a: Complex64, b: Complex64, z: Complex64) -> Result<Complex64> {
    kummer_m_in(a, b, z, &SpecFunDomain::default())
}

/// [`kummer_m`] with an explicit domain.
pub fn kummer_m_in(
    a: Complex64,
    b: Complex64,
    z: Complex64,
    dom: &SpecFunDomain,
) -> Result<Complex64> {
    check_args(a, b, z, dom)?;
    if z == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::new(1.0, 0.0));
    }
    if z.re < 0.0 {
        let m = kummer_core(b - a, b, -z, dom)?;
        return Ok(z.exp() * m.to_c64());
    }
    Ok(kummer_core(a, b, z, dom)?.to_c64())
}

fn check_args(a: Complex64, b: Complex64, z: Complex64, dom: &SpecFunDomain) -> Result<()> {
    if !(a.is_finite() && b.is_finite() && z.is_finite()) {
        return Err(Error::Domain(format!(
            "non-finite argument a={a}, b={b}, z={z}"
        )));
    }
    if is_nonpositive_integer(b) {
        return Err(Error::PoleInB(b));
    }
    let abs_z = z.norm();
    if abs_z > dom.max_abs_z {
        return Err(Error::DomainExceeded {
            abs_z,
            max_abs_z: dom.max_abs_z,
        });
    }
    Ok(())
}

fn kummer_core(a: Complex64, b: Complex64, z: Complex64, dom: &SpecFunDomain) -> Result<Cdd> {
    if is_nonpositive_integer(a) {
        return Ok(series(a, b, z, dom)?.value);
    }
    let r = z.norm();
    let mut radius = r;
    loop {
        let zs = if radius == r { z } else { z * (radius / r) };
        let s = series(a, b, zs, dom)?;
        if s.cancellation > MAX_CANCELLATION && radius > 0.5 {
            radius = (0.5 * radius).min(30.0);
            continue;
        }
        if radius == r {
            return Ok(s.value);
        }
        return march(a, b, zs, s.value, s.derivative, z, dom);
    }
}

struct SeriesSum {
    value: Cdd,
    derivative: Cdd,
    cancellation: f64,
}

fn series(a: Complex64, b: Complex64, z: Complex64, dom: &SpecFunDomain) -> Result<SeriesSum> {
    let zd = Cdd::from_c64(z);
    let ad = Cdd::from_c64(a);
    let bd = Cdd::from_c64(b);
    let stop = dom.tol * 1e-4;
    let mut term = Cdd::ONE;
    let mut sum = Cdd::ONE;
    // Σ n tₙ, divided by z at the end to give M'
    let mut dsum = Cdd::ZERO;
    let mut abs_sum = 1.0;
    let mut small = 0;
    for n in 0..dom.max_terms {
        let nf = n as f64;
        let num = ad.add_f64(nf) * zd;
        let den = bd.add_f64(nf).scale(nf + 1.0);
        term = term * num / den;
        sum = sum + term;
        dsum = dsum + term.scale(nf + 1.0);
        let t = term.abs_f64();
        abs_sum += t;
        // only stop once the term ratio is contracting
        let ratio = (a + nf + 1.0).norm() * z.norm() / ((b + nf + 1.0).norm() * (nf + 2.0));
        if t <= stop * sum.abs_f64() && (ratio < 0.5 || t == 0.0) {
            small += 1;
            if small == 3 {
                let derivative = if z == Complex64::new(0.0, 0.0) {
                    Cdd::from_c64(a / b)
                } else {
                    dsum / zd
                };
                let cancellation = abs_sum / sum.abs_f64();
                return Ok(SeriesSum {
                    value: sum,
                    derivative,
                    cancellation,
                });
            }
        } else {
            small = 0;
        }
    }
    Err(Error::NonConvergence {
        what: format!("Kummer series at a={a}, b={b}, z={z}"),
        residual: term.abs_f64() / sum.abs_f64(),
    })
}

/// Carries `(M, M')` from `z0` to `z1` (same ray) by Taylor steps of
/// Kummer's equation.
fn march(
    a: Complex64,
    b: Complex64,
    z0: Complex64,
    mut y: Cdd,
    mut dy: Cdd,
    z1: Complex64,
    dom: &SpecFunDomain,
) -> Result<Cdd> {
    let dir = z1 / z1.norm();
    let target = Cdd::from_c64(z1);
    let mut zc = Cdd::from_c64(z0);
    let mut pos = z0.norm();
    let end = z1.norm();
    let ad = Cdd::from_c64(a);
    let bd = Cdd::from_c64(b);
    while pos < end {
        let len = (0.5 * pos).min(MAX_STEP);
        let last = pos + len >= end;
        let h = if last {
            target - zc
        } else {
            Cdd::from_c64(dir * len)
        };
        // scaled coefficients dₙ = cₙ hⁿ
        let h2 = h * h;
        let mut d0 = y;
        let mut d1 = dy * h;
        let mut val = d0 + d1;
        let mut der = d1;
        let mut small = 0;
        let mut converged = false;
        for n in 0..dom.max_terms {
            let nf = n as f64;
            let lhs = ad.add_f64(nf) * d0 * h2;
            let rhs = (bd.add_f64(nf) - zc).scale(nf + 1.0) * d1 * h;
            let d2 = (lhs - rhs) / zc.scale((nf + 1.0) * (nf + 2.0));
            val = val + d2;
            der = der + d2.scale(nf + 2.0);
            let scale = val.abs_f64().max(der.abs_f64());
            if d2.abs_f64() <= 1e-34 * scale && n > 4 {
                small += 1;
                if small == 3 {
                    converged = true;
                    break;
                }
            } else {
                small = 0;
            }
            d0 = d1;
            d1 = d2;
        }
        if !converged {
            return Err(Error::NonConvergence {
                what: format!("Kummer ODE continuation at a={a}, b={b}, z={}", zc.to_c64()),
                residual: d1.abs_f64(),
            });
        }
        y = val;
        dy = der / h;
        if last {
            break;
        }
        zc = zc + h;
        pos += len;
    }
    Ok(y)
}

/// Whittaker `M_{κ,μ}(z) = e^{−z/2} z^{μ+1/2} M(μ − κ + 1/2, 1 + 2μ, z)`
/// with the principal branch of the power.
pub fn whittaker_m(kappa: Complex64, mu: Complex64, z: Complex64) -> Result<Complex64> {
    whittaker_m_in(kappa, mu, z, &SpecFunDomain::default())
}

/// [`whittaker_m`] with an explicit domain.
pub fn whittaker_m_in(
    kappa: Complex64,
    mu: Complex64,
    z: Complex64,
    dom: &SpecFunDomain,
) -> Result<Complex64> {
    let half = Complex64::new(0.5, 0.0);
    let b = 1.0 + 2.0 * mu;
    let m = kummer_m_in(mu - kappa + half, b, z, dom)?;
    let p = mu + half;
    if z == Complex64::new(0.0, 0.0) {
        return if p.re > 0.0 {
            Ok(Complex64::new(0.0, 0.0))
        } else {
            Err(Error::Domain("z^(mu+1/2) is singular at z = 0".into()))
        };
    }
    Ok((-z * 0.5 + p * z.ln()).exp() * m)
}
