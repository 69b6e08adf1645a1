use thiserror::Error;

/// Errors raised by the cavity library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid cavity: sigma0={sigma0}, tau0={tau0} (both must be positive and finite)")]
    InvalidCavity { sigma0: f64, tau0: f64 },

    #[error("ray meets the rim circle at ({x}, {y}, {z}); reflection is undefined there")]
    RimHit { x: f64, y: f64, z: f64 },

    #[error("ray does not meet the cavity walls (state outside the cavity?)")]
    NoHit,

    #[error("point is not on the {wall:?} wall (coordinate mismatch {mismatch:e})")]
    OffSurface {
        wall: crate::geometry::WallId,
        mismatch: f64,
    },

    #[error("momentum vector has zero magnitude")]
    ZeroMomentum,

    #[error("point lies in the classically forbidden region ({coordinate} radicand {radicand:e})")]
    ForbiddenRegion {
        coordinate: &'static str,
        radicand: f64,
    },

    #[error("constants of motion drifted by {drift:e} after {bounce} bounces")]
    AbortOnDrift { bounce: usize, drift: f64 },

    #[error("state has nonzero angular momentum (|Lz|/P = {lz_over_p:e}); not meridional")]
    NotPlanar { lz_over_p: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("empty integration interval: caustic {caustic} lies beyond the wall {wall}")]
    EmptyInterval { caustic: f64, wall: f64 },

    #[error("constants (alpha={alpha}, beta={beta}) are outside the admissible triangle")]
    NotAdmissible { alpha: f64, beta: f64 },

    #[error("invalid orbit spec (s={s}, t={t}, l={l}): {reason}")]
    InvalidSpec {
        s: u32,
        t: u32,
        l: u32,
        reason: String,
    },

    #[error("no periodic orbit with (s={s}, t={t}, l={l}) in this cavity: {reason}")]
    NoSolution {
        s: u32,
        t: u32,
        l: u32,
        reason: String,
    },

    #[error("no eigenpair ({l},{n},{m}) below the special-function limit k = {k_limit}")]
    NoEigenpair {
        l: u32,
        n: u32,
        m: i32,
        k_limit: f64,
    },

    #[error("root is not bracketed: f(a) = {fa}, f(b) = {fb}")]
    NotBracketed { fa: f64, fb: f64 },

    #[error("iteration did not converge: {what} (best residual {residual:e})")]
    NonConvergence { what: String, residual: f64 },

    #[error("orbit failed to close: {0}")]
    ClosureFailure(String),

    #[error("parameter b = {0} is a nonpositive integer (pole of the Kummer series)")]
    PoleInB(num_complex::Complex64),

    #[error("|z| = {abs_z} exceeds the certified domain {max_abs_z}")]
    DomainExceeded { abs_z: f64, max_abs_z: f64 },

    #[error("quadrature did not converge: {0}")]
    QuadratureNotConverged(String),
}

pub type Result<T> = std::result::Result<T, Error>;
