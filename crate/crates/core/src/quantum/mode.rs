//! Normalized eigenmodes, overlaps and the penetration ratio.
//!
//! With `dV = στ(σ² + τ²) dσ dτ dφ` the volume integral of a product of two
//! separated modes factorizes:
//!
//! ```text
//! ∫ ψ₁* ψ₂ dV = 2π δ_{m₁m₂} N₁N₂ [ ⟨S₁S₂σ³⟩⟨T₁T₂τ⟩ + ⟨S₁S₂σ⟩⟨T₁T₂τ³⟩ ]
//! ```
//!
//! where `⟨·⟩` are one-dimensional integrals over `[0, σ₀]` or `[0, τ₀]`.
//! These run on a composite Gauss–Legendre rule, doubled until stable.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::radial::{radial_s, radial_t};
use super::EigenPair;
use crate::dynamics::caustics;
use crate::error::{Error, Result};
use crate::geometry::{Cavity, ParabolicPoint};
use crate::quadrature::GaussLegendre;

const GL_NODES: usize = 20;
const START_PANELS: usize = 4;
const MAX_PANELS: usize = 256;
/// Relative change under panel doubling accepted for the normalization.
pub const NORMALIZATION_TOL: f64 = 1e-6;
/// Absolute change under panel doubling accepted for the penetration ratio.
pub const PENETRATION_TOL: f64 = 1e-3;

/// A normalized eigenmode `ψ = N S(σ) T(τ) e^{imφ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenmode {
    pub pair: EigenPair,
    /// `N` with `∫|ψ|² dV = 1`.
    pub normalization: f64,
    pub cavity: Cavity,
    /// Relative change of `∫|S T|² dV` at the last panel doubling.
    pub quadrature_change: f64,
    /// Panels per interval at which the quadrature settled.
    pub panels: usize,
}

/// Weighted moments `∫ f g w^p dw` for `p = 1, 3` on one interval.
#[derive(Debug, Clone, Copy)]
struct Moments {
    first: f64,
    third: f64,
}

fn moments(
    f: &dyn Fn(f64) -> Result<f64>,
    g: &dyn Fn(f64) -> Result<f64>,
    lo: f64,
    hi: f64,
    panels: usize,
    rule: &GaussLegendre,
) -> Result<Moments> {
    let mut first = 0.0;
    let mut third = 0.0;
    if hi <= lo {
        return Ok(Moments { first, third });
    }
    for (x, w) in rule.composite_points(lo, hi, panels) {
        let v = f(x)? * g(x)? * w * x;
        first += v;
        third += v * x * x;
    }
    Ok(Moments { first, third })
}

fn s_of(pair: &EigenPair) -> impl Fn(f64) -> Result<f64> {
    let (a, k, m) = (pair.a, pair.k, pair.m.unsigned_abs());
    move |x| radial_s(x, a, k, m)
}

fn t_of(pair: &EigenPair) -> impl Fn(f64) -> Result<f64> {
    let (a, k, m) = (pair.a, pair.k, pair.m.unsigned_abs());
    move |x| radial_t(x, a, k, m)
}

/// `∫ S₁S₂T₁T₂ στ(σ²+τ²) dσdτ` (no `2π`, no normalization) at a panel count.
fn overlap_integral(
    p1: &EigenPair,
    p2: &EigenPair,
    cavity: &Cavity,
    panels: usize,
    rule: &GaussLegendre,
) -> Result<f64> {
    let (s1, s2, t1, t2) = (s_of(p1), s_of(p2), t_of(p1), t_of(p2));
    let ms = moments(&s1, &s2, 0.0, cavity.sigma0(), panels, rule)?;
    let mt = moments(&t1, &t2, 0.0, cavity.tau0(), panels, rule)?;
    Ok(ms.third * mt.first + ms.first * mt.third)
}

/// Integrates with doubling panels until the relative change drops below `tol`.
fn converged<F: FnMut(usize) -> Result<f64>>(
    mut f: F,
    tol: f64,
    what: &str,
) -> Result<(f64, f64, usize)> {
    let mut panels = START_PANELS;
    let mut prev = f(panels)?;
    while panels < MAX_PANELS {
        panels *= 2;
        let next = f(panels)?;
        let change = (next - prev).abs() / next.abs().max(f64::MIN_POSITIVE);
        if change < tol {
            return Ok((next, change, panels));
        }
        prev = next;
    }
    Err(Error::QuadratureNotConverged(format!(
        "{what} did not settle by {MAX_PANELS} panels"
    )))
}

/// Computes `N` so that `∫|ψ|² dV = 1`.
pub fn normalize(pair: &EigenPair, cavity: &Cavity) -> Result<Eigenmode> {
    let rule = GaussLegendre::new(GL_NODES);
    let (integral, change, panels) = converged(
        |p| overlap_integral(pair, pair, cavity, p, &rule),
        NORMALIZATION_TOL * 1e-3,
        "normalization",
    )?;
    let total = TAU * integral;
    if !(total > 0.0) {
        return Err(Error::QuadratureNotConverged(format!(
            "nonpositive norm integral {total}"
        )));
    }
    Ok(Eigenmode {
        pair: *pair,
        normalization: total.sqrt().recip(),
        cavity: *cavity,
        quadrature_change: change,
        panels,
    })
}

/// `ψ` at a point; zero outside the cavity.
pub fn eigenmode_eval(mode: &Eigenmode, p: ParabolicPoint) -> Result<Complex64> {
    if p.sigma > mode.cavity.sigma0() || p.tau > mode.cavity.tau0() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let pair = &mode.pair;
    let m_abs = pair.m.unsigned_abs();
    let r = mode.normalization
        * radial_s(p.sigma, pair.a, pair.k, m_abs)?
        * radial_t(p.tau, pair.a, pair.k, m_abs)?;
    Ok(Complex64::from_polar(r, pair.m as f64 * p.phi))
}

/// `⟨ψ₁, ψ₂⟩ = ∫ ψ₁* ψ₂ dV`. Exactly zero when the azimuthal numbers differ.
pub fn inner_product(mode1: &Eigenmode, mode2: &Eigenmode) -> Result<Complex64> {
    if mode1.pair.m != mode2.pair.m {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if mode1.cavity.sigma0() != mode2.cavity.sigma0() || mode1.cavity.tau0() != mode2.cavity.tau0()
    {
        return Err(Error::Domain("modes belong to different cavities".into()));
    }
    let rule = GaussLegendre::new(GL_NODES);
    let panels = mode1.panels.max(mode2.panels);
    let v = overlap_integral(&mode1.pair, &mode2.pair, &mode1.cavity, panels, &rule)?;
    Ok(Complex64::new(
        TAU * mode1.normalization * mode2.normalization * v,
        0.0,
    ))
}

/// Probability fraction in the classically forbidden region of the mode:
/// `σ < σ_c` or `τ < τ_c`, with caustics from `(α_q, β_q)`.
///
/// Each coordinate interval is split at its caustic, so the region
/// indicator never cuts through a quadrature panel. The forbidden part is
/// summed directly over its three sub-rectangles.
pub fn penetration_ratio(mode: &Eigenmode) -> Result<f64> {
    let q = super::quantum_constants(&mode.pair);
    let cs = caustics(q.alpha_q, q.beta_q);
    let cav = &mode.cavity;
    let sc = cs.sigma_c.min(cav.sigma0());
    let tc = cs.tau_c.min(cav.tau0());
    let rule = GaussLegendre::new(GL_NODES);
    let (s, t) = (s_of(&mode.pair), t_of(&mode.pair));
    let ratio = |panels: usize| -> Result<f64> {
        let s_in = moments(&s, &s, 0.0, sc, panels, &rule)?;
        let s_out = moments(&s, &s, sc, cav.sigma0(), panels, &rule)?;
        let t_in = moments(&t, &t, 0.0, tc, panels, &rule)?;
        let t_out = moments(&t, &t, tc, cav.tau0(), panels, &rule)?;
        let block = |a: Moments, b: Moments| a.third * b.first + a.first * b.third;
        let forbidden = block(s_in, t_in) + block(s_in, t_out) + block(s_out, t_in);
        let total = forbidden + block(s_out, t_out);
        Ok(forbidden / total)
    };
    let mut panels = START_PANELS;
    let mut prev = ratio(panels)?;
    while panels < MAX_PANELS {
        panels *= 2;
        let next = ratio(panels)?;
        if (next - prev).abs() < PENETRATION_TOL * 1e-3 {
            return Ok(next.clamp(0.0, 1.0));
        }
        prev = next;
    }
    Err(Error::QuadratureNotConverged("penetration ratio".into()))
}
