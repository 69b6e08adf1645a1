//! Classical trajectory families matching an eigenstate.

use serde::{Deserialize, Serialize};

use super::{quantum_constants, EigenPair};
use crate::actions::{theta_sigma, theta_tau, winding_number, PLANAR_BETA};
use crate::dynamics::{admissible_region, MotionConstants};
use crate::error::Result;
use crate::geometry::Cavity;
use crate::orbits::{lmax, OrbitSpec};

/// Periodic-orbit label closest to a trajectory family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitApproximant {
    pub spec: OrbitSpec,
    /// `w − s/t`.
    pub winding_error: f64,
    /// `sϑ_σ + tϑ_τ − ℓ`; zero for meridional families.
    pub azimuth_residual: f64,
}

/// Classical counterpart of an eigenstate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correspondence {
    /// `(P, α, β) = (k, 2a/k, m²/k²)`.
    pub constants: MotionConstants,
    pub winding: f64,
    pub approx: Option<OrbitApproximant>,
}

/// Continued-fraction convergents `p/q` of `x ≥ 0` with `q ≤ max_denominator`.
pub fn convergents(x: f64, max_denominator: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    if !(x >= 0.0) || !x.is_finite() || max_denominator == 0 {
        return out;
    }
    // p₋₁/q₋₁ = 1/0, p₋₂/q₋₂ = 0/1
    let (mut p0, mut q0, mut p1, mut q1) = (0u64, 1u64, 1u64, 0u64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a > u64::MAX as f64 / 4.0 {
            break;
        }
        let a = a as u64;
        let (Some(p), Some(q)) = (
            a.checked_mul(p1).and_then(|v| v.checked_add(p0)),
            a.checked_mul(q1).and_then(|v| v.checked_add(q0)),
        ) else {
            break;
        };
        if q > max_denominator {
            break;
        }
        out.push((p, q));
        (p0, q0, p1, q1) = (p1, q1, p, q);
        let frac = r - a as f64;
        if frac <= 1e-15 * r.max(1.0) {
            break;
        }
        r = frac.recip();
    }
    out
}

/// Associates an eigenpair with classical motion of the same constants.
///
/// The orbit label uses the last convergent `s/t` of the winding number with
/// `t ≤ max_denominator` and `s ≥ 1`. The azimuthal index ℓ is the integer
/// nearest `sϑ_σ + tϑ_τ` within `[0, ⌊(s+t)/2⌋]`, and 0 for meridional
/// families. No label is given when `(α, β)` lies outside the admissible
/// triangle by more than `1e-9`.
pub fn correspond(
    pair: &EigenPair,
    cavity: &Cavity,
    max_denominator: u64,
) -> Result<Correspondence> {
    let q = quantum_constants(pair);
    let constants = MotionConstants {
        p: pair.k,
        alpha: q.alpha_q,
        beta: q.beta_q,
    };
    let tri = admissible_region(cavity);
    if !tri.contains_with_tolerance(q.alpha_q, q.beta_q, 1e-9) {
        return Ok(Correspondence {
            constants,
            winding: f64::NAN,
            approx: None,
        });
    }
    let (lo, hi) = tri.alpha_range();
    let alpha = q.alpha_q.clamp(lo, hi);
    let beta = q.beta_q.clamp(0.0, tri.beta_max(alpha).max(0.0));
    let winding = winding_number(cavity, alpha, beta)?;
    let approx = convergents(winding, max_denominator)
        .into_iter()
        .rev()
        .find(|&(s, t)| s >= 1 && t >= 1 && s <= u32::MAX as u64)
        .map(|(s, t)| -> Result<OrbitApproximant> {
            let (s, t) = (s as u32, t as u32);
            let (l, azimuth_residual) = if beta < PLANAR_BETA {
                (0, 0.0)
            } else {
                let sum = s as f64 * theta_sigma(cavity, alpha, beta)?
                    + t as f64 * theta_tau(cavity, alpha, beta)?;
                let l = (sum.round().max(0.0) as u32).min(lmax(s, t));
                (l, sum - l as f64)
            };
            Ok(OrbitApproximant {
                spec: OrbitSpec::new(s, t, l)?,
                winding_error: winding - s as f64 / t as f64,
                azimuth_residual,
            })
        })
        .transpose()?;
    Ok(Correspondence {
        constants,
        winding,
        approx,
    })
}
