//! Quantum eigenmodes of the cavity.
//!
//! The Dirichlet problem `∇²ψ + k²ψ = 0` separates in parabolic
//! coordinates into `ψ = N S(σ) T(τ) e^{imφ}`. The separation constant `a`
//! and wavenumber `k` are fixed by the two wall conditions
//! `S(σ₀) = T(τ₀) = 0`. The quantum counterparts of the classical constants
//! are `α = 2a/k`, `β = m²/k²`, `C = 2ka` and `L_z = m`, with energy `k²`.

mod correspond;
mod mode;
mod radial;
mod scan;
mod search;

use serde::{Deserialize, Serialize};

pub use correspond::{convergents, correspond, Correspondence, OrbitApproximant};
pub use mode::{
    eigenmode_eval, inner_product, normalize, penetration_ratio, Eigenmode, NORMALIZATION_TOL,
    PENETRATION_TOL,
};
pub use radial::{
    boundary_residuals, radial_s, radial_s_complex, radial_t, radial_t_complex, REALNESS_TOL,
};
pub use scan::{spectrum_vs_deformation, Crossing, DeformationScan, ScanRow, StateLabel};
pub use search::{
    eigenpair_for_label, eigenpair_for_label_near, find_eigenpairs, find_eigenpairs_with, k_limit,
    EigenSearch, SearchOptions,
};

/// A Dirichlet eigenpair with its node-count labels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    /// Interior nodes of `S` on `(0, σ₀)`.
    pub l: u32,
    /// Interior nodes of `T` on `(0, τ₀)`.
    pub n: u32,
    pub m: i32,
    /// Separation constant.
    pub a: f64,
    /// Wavenumber.
    pub k: f64,
    /// Largest wall residual relative to the radial amplitude.
    pub residual: f64,
}

impl EigenPair {
    /// `E = k²`.
    pub fn energy(&self) -> f64 {
        self.k * self.k
    }

    /// The same pair with azimuthal number `m` replaced by `−m`.
    pub fn mirrored(&self) -> Self {
        Self {
            m: -self.m,
            ..*self
        }
    }
}

/// Constants of motion carried by an eigenstate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantumConstants {
    /// `2a/k`.
    pub alpha_q: f64,
    /// `m²/k²`.
    pub beta_q: f64,
    /// Eigenvalue `2ka` of the separation operator.
    pub c_q: f64,
    /// Eigenvalue `m` of `L_z`.
    pub lz_q: i32,
    /// Penetration ratio, when a normalized mode was supplied.
    pub pi: Option<f64>,
}

/// Constants `(α, β, C, L_z)` of an eigenpair.
pub fn quantum_constants(pair: &EigenPair) -> QuantumConstants {
    let m = pair.m as f64;
    QuantumConstants {
        alpha_q: 2.0 * pair.a / pair.k,
        beta_q: m * m / (pair.k * pair.k),
        c_q: 2.0 * pair.k * pair.a,
        lz_q: pair.m,
        pi: None,
    }
}

/// [`quantum_constants`] including the penetration ratio of the mode.
pub fn mode_constants(mode: &Eigenmode) -> crate::error::Result<QuantumConstants> {
    Ok(QuantumConstants {
        pi: Some(penetration_ratio(mode)?),
        ..quantum_constants(&mode.pair)
    })
}
