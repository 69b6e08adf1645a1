//! Radial factors of the separated eigenmodes.
//!
//! With `ψ = S(σ) T(τ) e^{imφ}` the Helmholtz equation splits into
//!
//! ```text
//! S'' + S'/σ + (k²σ² + 2ka − m²/σ²) S = 0
//! T'' + T'/τ + (k²τ² − 2ka − m²/τ²) T = 0
//! ```
//!
//! whose solutions regular at the origin are
//! `S(σ) = σ^{|m|} e^{−ikσ²/2} M((|m|+1)/2 + ia/2k, 1+|m|, ikσ²)` and the same
//! expression with `a → −a` for `T`. Kummer's transformation maps the
//! bracketed product onto its own conjugate, so it is real. The imaginary
//! part left by rounding is checked rather than dropped. `S(0) = 1` for
//! `m = 0`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::Cavity;
use crate::specfun::{kummer_m_in, SpecFunDomain};

/// Largest imaginary part tolerated in the real-form evaluation, relative
/// to `max(|Re|, 1)` of the factor `e^{−z/2}M` (which equals 1 at the origin).
pub const REALNESS_TOL: f64 = 1e-9;

/// Which radial equation: the sign of the separation term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Radial {
    Sigma,
    Tau,
}

impl Radial {
    fn sign(self) -> f64 {
        match self {
            Radial::Sigma => 1.0,
            Radial::Tau => -1.0,
        }
    }
}

/// `e^{−z/2} M(A, 1+|m|, z)` at `z = ikw²` without the `w^{|m|}` prefactor.
fn envelope(
    kind: Radial,
    w: f64,
    a: f64,
    k: f64,
    m_abs: u32,
    dom: &SpecFunDomain,
) -> Result<Complex64> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::Domain(format!(
            "wavenumber must be positive, got {k}"
        )));
    }
    if !(w >= 0.0) {
        return Err(Error::Domain(format!(
            "radial coordinate must be nonnegative, got {w}"
        )));
    }
    let mu = 0.5 * m_abs as f64;
    let pa = Complex64::new(mu + 0.5, kind.sign() * a / (2.0 * k));
    let pb = Complex64::new(1.0 + m_abs as f64, 0.0);
    let z = Complex64::new(0.0, k * w * w);
    let m = kummer_m_in(pa, pb, z, dom)?;
    Ok((-0.5 * z).exp() * m)
}

/// Real part of [`envelope`] after the realness check.
pub(crate) fn real_envelope(kind: Radial, w: f64, a: f64, k: f64, m_abs: u32) -> Result<f64> {
    let v = envelope(kind, w, a, k, m_abs, &SpecFunDomain::default())?;
    if v.im.abs() > REALNESS_TOL * v.re.abs().max(1.0) {
        return Err(Error::Domain(format!(
            "radial function lost realness at w={w}, a={a}, k={k}: {v}"
        )));
    }
    Ok(v.re)
}

fn prefactor(w: f64, m_abs: u32) -> f64 {
    if m_abs == 0 {
        1.0
    } else {
        w.powi(m_abs as i32)
    }
}

/// `S(σ; a, k, |m|)`.
pub fn radial_s(sigma: f64, a: f64, k: f64, m_abs: u32) -> Result<f64> {
    Ok(prefactor(sigma, m_abs) * real_envelope(Radial::Sigma, sigma, a, k, m_abs)?)
}

/// `T(τ; a, k, |m|)`.
pub fn radial_t(tau: f64, a: f64, k: f64, m_abs: u32) -> Result<f64> {
    Ok(prefactor(tau, m_abs) * real_envelope(Radial::Tau, tau, a, k, m_abs)?)
}

/// `S` before the imaginary part is discarded, for realness audits.
pub fn radial_s_complex(sigma: f64, a: f64, k: f64, m_abs: u32) -> Result<Complex64> {
    Ok(prefactor(sigma, m_abs)
        * envelope(Radial::Sigma, sigma, a, k, m_abs, &SpecFunDomain::default())?)
}

/// `T` before the imaginary part is discarded.
pub fn radial_t_complex(tau: f64, a: f64, k: f64, m_abs: u32) -> Result<Complex64> {
    Ok(prefactor(tau, m_abs) * envelope(Radial::Tau, tau, a, k, m_abs, &SpecFunDomain::default())?)
}

/// Dirichlet residuals `(S(σ₀), T(τ₀))`. Only `|m|` matters.
pub fn boundary_residuals(a: f64, k: f64, cavity: &Cavity, m: i32) -> Result<(f64, f64)> {
    let m_abs = m.unsigned_abs();
    Ok((
        radial_s(cavity.sigma0(), a, k, m_abs)?,
        radial_t(cavity.tau0(), a, k, m_abs)?,
    ))
}

/// Samples used for node counting and amplitude estimates.
pub(crate) const PROFILE_SAMPLES: usize = 1200;

/// Fraction of the interval next to the wall that node counting skips, so
/// that the Dirichlet zero at the wall is never counted.
const WALL_GUARD: f64 = 1e-3;

/// Interior zeros of the envelope on `(0, wall)` together with the largest
/// `|w^{|m|}·envelope|` seen.
pub(crate) fn profile(kind: Radial, wall: f64, a: f64, k: f64, m_abs: u32) -> Result<(u32, f64)> {
    let end = wall * (1.0 - WALL_GUARD);
    let mut nodes = 0;
    let mut amp: f64 = 0.0;
    let mut prev = real_envelope(kind, 0.0, a, k, m_abs)?;
    for j in 1..=PROFILE_SAMPLES {
        let w = end * j as f64 / PROFILE_SAMPLES as f64;
        let v = real_envelope(kind, w, a, k, m_abs)?;
        if v != 0.0 && (v > 0.0) != (prev > 0.0) {
            nodes += 1;
        }
        if v != 0.0 {
            prev = v;
        }
        amp = amp.max((prefactor(w, m_abs) * v).abs());
    }
    // the skipped strip can still hold the maximum when m is large
    let v_wall = real_envelope(kind, wall, a, k, m_abs)?;
    amp = amp.max((prefactor(wall, m_abs) * v_wall).abs());
    Ok((nodes, amp))
}
