//! Action integrals, their derivatives, the winding number and the
//! azimuthal closure functions.
//!
//! The σ-action is
//!
//! ```text
//! J_σ = (P/π) ∫_{σ_c}^{σ₀} √(σ² − β/σ² + α) dσ
//! ```
//!
//! and `J_τ(τ₀; α, β) = J_σ(τ₀; −α, β)`. The closed form is evaluated through
//! the caustics. With `u = σ₀² − σ_c²`, `v = σ₀² + τ_c²` we have
//! `G = √(uv)`, `(α − 2A)/Δ = Δ/(A_σ + 2G)`, and the arctangent argument of
//! the printed formula collapses to
//!
//! ```text
//! X = (τ_c/σ_c) √(u/v) ≥ 0
//! ```
//!
//! which is also `tan(πϑ_σ)`. So
//!
//! ```text
//! J_σ = (P/π) [ G/2 + (α/4) ln((A_σ + 2G)/Δ) − σ_cτ_c · atan2(τ_c√u, σ_c√v) ]
//! ```
//!
//! has no 0/0 ratios and its `β → 0` and `Δ → 0` limits come out of `atan2`
//! and the `α·ln` product directly.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dynamics::{caustics, CausticPair};
use crate::error::{Error, Result};
use crate::geometry::{Cavity, WallId};
use crate::quadrature::{adaptive_gauss_kronrod, tanh_sinh};

/// The three actions of a trajectory family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionTriple {
    pub j_sigma: f64,
    pub j_tau: f64,
    pub j_phi: f64,
}

/// Auxiliary quantities of the closed-form action at one wall.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormAux {
    /// `G = √(w⁴ + αw² − β)`
    pub g: f64,
    /// `A = G − w²`
    pub a: f64,
    /// `Δ = √(α² + 4β)`
    pub delta: f64,
    /// `2w² + α` (this is `A_σ` at the σ wall and, with `α → −α`, `A_τ`).
    pub a_wall: f64,
    pub caustics: CausticPair,
    /// `w² − σ_c²`
    u: f64,
    /// `w² + τ_c²`
    v: f64,
}

impl ClosedFormAux {
    /// Auxiliary values for the σ-type integral at a wall `w` (pass `−α` for
    /// the τ wall).
    pub fn new(w: f64, alpha: f64, beta: f64) -> Self {
        let w2 = w * w;
        let cs = caustics(alpha, beta);
        let u = (w2 - cs.sigma_c * cs.sigma_c).max(0.0);
        let v = w2 + cs.tau_c * cs.tau_c;
        let g = (u * v).sqrt();
        Self {
            g,
            a: g - w2,
            delta: cs.delta,
            a_wall: 2.0 * w2 + alpha,
            caustics: cs,
            u,
            v,
        }
    }

    /// `ln((A_w + 2G)/Δ)`; `+∞` when `Δ = 0`.
    pub fn log_ratio(&self) -> f64 {
        if self.delta == 0.0 {
            return f64::INFINITY;
        }
        ((self.a_wall + 2.0 * self.g) / self.delta).ln()
    }

    /// `ϑ = (1/π) atan(X)` with `X = (τ_c/σ_c)√(u/v)`.
    pub fn theta(&self) -> f64 {
        let cs = self.caustics;
        (cs.tau_c * self.u.sqrt()).atan2(cs.sigma_c * self.v.sqrt()) / PI
    }
}

/// Closed-form `J_σ(σ₀; α, β)`.
pub fn action_sigma_closed(sigma0: f64, alpha: f64, beta: f64, p: f64) -> Result<f64> {
    Ok(p / PI * reduced_action(sigma0, alpha, beta)?)
}

/// `πJ/P` at a wall `w`: the bracket of the closed form.
pub(crate) fn reduced_action(w: f64, alpha: f64, beta: f64) -> Result<f64> {
    check_wall(w, alpha, beta)?;
    let aux = ClosedFormAux::new(w, alpha, beta);
    let cs = aux.caustics;
    // α·ln(...) → 0 as Δ → 0 because |α| ≤ Δ
    let log_term = if alpha == 0.0 {
        0.0
    } else {
        0.25 * alpha * aux.log_ratio()
    };
    let arc_term = cs.sigma_c * cs.tau_c * PI * aux.theta();
    Ok(0.5 * aux.g + log_term - arc_term)
}

fn check_wall(w: f64, alpha: f64, beta: f64) -> Result<()> {
    if !(w > 0.0) || !(beta >= 0.0) || !alpha.is_finite() || !beta.is_finite() {
        return Err(Error::Domain(format!(
            "invalid action arguments w={w}, alpha={alpha}, beta={beta}"
        )));
    }
    let cs = caustics(alpha, beta);
    let tol = 1e-12 * w * w;
    if cs.sigma_c * cs.sigma_c > w * w + tol {
        return Err(Error::EmptyInterval {
            caustic: cs.sigma_c,
            wall: w,
        });
    }
    Ok(())
}

/// `J_τ = J_σ(τ₀; −α, β)`.
pub fn action_tau(tau0: f64, alpha: f64, beta: f64, p: f64) -> Result<f64> {
    action_sigma_closed(tau0, -alpha, beta, p)
}

/// `J_φ = ±P√β`.
pub fn action_phi(beta: f64, p: f64, sign: f64) -> f64 {
    sign.signum() * p * beta.sqrt()
}

/// All three actions for a cavity (positive `J_φ`).
pub fn actions(cavity: &Cavity, alpha: f64, beta: f64, p: f64) -> Result<ActionTriple> {
    Ok(ActionTriple {
        j_sigma: action_sigma_closed(cavity.sigma0(), alpha, beta, p)?,
        j_tau: action_tau(cavity.tau0(), alpha, beta, p)?,
        j_phi: action_phi(beta, p, 1.0),
    })
}

/// Integrand `√(σ² − β/σ² + α)` factored through the caustics so that it
/// vanishes cleanly at `σ_c`.
fn sigma_integrand(cs: CausticPair, s: f64) -> f64 {
    let sc2 = cs.sigma_c * cs.sigma_c;
    let tc2 = cs.tau_c * cs.tau_c;
    let s2 = s * s;
    let v = ((s2 - sc2).max(0.0) * (s2 + tc2)).sqrt();
    if s == 0.0 {
        // only reachable with σ_c = 0, where the integrand tends to √α = τ_c
        return cs.tau_c;
    }
    v / s
}

/// Numerical `J_σ` by adaptive Gauss–Kronrod after the substitution
/// `σ = σ_c + x²`, which removes the square-root endpoint behaviour.
pub fn action_sigma_quadrature(sigma0: f64, alpha: f64, beta: f64, p: f64) -> Result<f64> {
    action_sigma_quadrature_tol(sigma0, alpha, beta, p, 1e-13)
}

/// [`action_sigma_quadrature`] with an explicit absolute tolerance on the
/// integral (before the `P/π` factor).
pub fn action_sigma_quadrature_tol(
    sigma0: f64,
    alpha: f64,
    beta: f64,
    p: f64,
    tol: f64,
) -> Result<f64> {
    let cs = caustics(alpha, beta);
    if cs.sigma_c > sigma0 * (1.0 + 1e-14) {
        return Err(Error::EmptyInterval {
            caustic: cs.sigma_c,
            wall: sigma0,
        });
    }
    if cs.sigma_c >= sigma0 {
        return Ok(0.0);
    }
    let x_max = (sigma0 - cs.sigma_c).sqrt();
    let f = |x: f64| 2.0 * x * sigma_integrand(cs, cs.sigma_c + x * x);
    // split where the integrand turns over (scale of σ_c) to help the
    // adaptive rule when σ_c is small but nonzero
    let knee = cs.sigma_c.sqrt().min(x_max);
    let mut v = 0.0;
    if knee > 0.0 && knee < x_max {
        v += adaptive_gauss_kronrod(f, 0.0, knee, 0.5 * tol)?;
        v += adaptive_gauss_kronrod(f, knee, x_max, 0.5 * tol)?;
    } else {
        v += adaptive_gauss_kronrod(f, 0.0, x_max, tol)?;
    }
    Ok(p / PI * v)
}

/// Numerical `J_σ` with tanh–sinh on the untransformed integrand; an
/// independent second rule for cross-checks.
pub fn action_sigma_tanh_sinh(sigma0: f64, alpha: f64, beta: f64, p: f64) -> Result<f64> {
    let cs = caustics(alpha, beta);
    if cs.sigma_c > sigma0 * (1.0 + 1e-14) {
        return Err(Error::EmptyInterval {
            caustic: cs.sigma_c,
            wall: sigma0,
        });
    }
    if cs.sigma_c >= sigma0 {
        return Ok(0.0);
    }
    let v = tanh_sinh(|s| sigma_integrand(cs, s), cs.sigma_c, sigma0, 1e-13)?;
    Ok(p / PI * v)
}

/// `∂J/∂α` at a wall: `+(P/4π) ln((A_σ + 2G)/Δ)` for the σ wall and
/// `−(P/4π) ln((A_τ + 2G_τ)/Δ)` for the τ wall. Returns `±∞` at `Δ = 0`.
pub fn dj_dalpha(wall: WallId, cavity: &Cavity, alpha: f64, beta: f64, p: f64) -> Result<f64> {
    let (w, sign, a) = match wall {
        WallId::SigmaWall => (cavity.sigma0(), 1.0, alpha),
        WallId::TauWall => (cavity.tau0(), -1.0, -alpha),
    };
    check_wall(w, a, beta)?;
    let aux = ClosedFormAux::new(w, a, beta);
    Ok(sign * p / (4.0 * PI) * aux.log_ratio())
}

/// `∂J/∂β = −(P/2√β) ϑ` at a wall.
pub fn dj_dbeta(wall: WallId, cavity: &Cavity, alpha: f64, beta: f64, p: f64) -> Result<f64> {
    let theta = match wall {
        WallId::SigmaWall => theta_sigma(cavity, alpha, beta)?,
        WallId::TauWall => theta_tau(cavity, alpha, beta)?,
    };
    Ok(-p / (2.0 * beta.sqrt()) * theta)
}

/// Winding number `w(α, β) = ln((A_τ + 2G_τ)/Δ) / ln((A_σ + 2G_σ)/Δ)`.
/// At `Δ = 0` both logarithms diverge and the limit 1 is returned. On the
/// edge where `σ_c = σ₀` the value is `+∞`, where `τ_c = τ₀` it is 0.
pub fn winding_number(cavity: &Cavity, alpha: f64, beta: f64) -> Result<f64> {
    check_wall(cavity.sigma0(), alpha, beta)?;
    check_wall(cavity.tau0(), -alpha, beta)?;
    let s = ClosedFormAux::new(cavity.sigma0(), alpha, beta);
    let t = ClosedFormAux::new(cavity.tau0(), -alpha, beta);
    if s.delta == 0.0 {
        return Ok(1.0);
    }
    // each log is ≥ 0 on the triangle and vanishes on the edge where the
    // matching caustic touches its wall
    let ln_delta = s.delta.ln();
    let num = ((t.a_wall + 2.0 * t.g).ln() - ln_delta).max(0.0);
    let den = ((s.a_wall + 2.0 * s.g).ln() - ln_delta).max(0.0);
    if num == 0.0 && den == 0.0 {
        return Err(Error::Domain(format!(
            "winding number is direction dependent at the apex (alpha={alpha}, beta={beta})"
        )));
    }
    Ok(num / den)
}

/// `ϑ_σ(α, β) ∈ [0, 1/2]`.
pub fn theta_sigma(cavity: &Cavity, alpha: f64, beta: f64) -> Result<f64> {
    check_wall(cavity.sigma0(), alpha, beta)?;
    Ok(ClosedFormAux::new(cavity.sigma0(), alpha, beta).theta())
}

/// `ϑ_τ(α, β) ∈ [0, 1/2]`; the σ formula at `τ₀` with `α → −α`.
pub fn theta_tau(cavity: &Cavity, alpha: f64, beta: f64) -> Result<f64> {
    check_wall(cavity.tau0(), -alpha, beta)?;
    Ok(ClosedFormAux::new(cavity.tau0(), -alpha, beta).theta())
}

/// `β` below which motion is treated as meridional.
pub const PLANAR_BETA: f64 = 1e-14;

/// Residuals `(w − s/t, sϑ_σ + tϑ_τ − ℓ)` of the closure conditions.
///
/// For meridional motion (`β < 1e-14`) the angular momentum vanishes, no
/// azimuthal angle is accumulated, and the second residual is `−ℓ`.
pub fn closure_residual(
    cavity: &Cavity,
    alpha: f64,
    beta: f64,
    s: u32,
    t: u32,
    l: u32,
) -> Result<(f64, f64)> {
    let w = winding_number(cavity, alpha, beta)?;
    let r1 = w - s as f64 / t as f64;
    let r2 = if beta < PLANAR_BETA {
        -(l as f64)
    } else {
        s as f64 * theta_sigma(cavity, alpha, beta)? + t as f64 * theta_tau(cavity, alpha, beta)?
            - l as f64
    };
    Ok((r1, r2))
}
