//! Parabolic coordinates and the cavity walls.
//!
//! Parabolic coordinates `(σ, τ, φ)` map to Cartesian space as
//!
//! ```text
//! x = στ cos φ,   y = στ sin φ,   z = (τ² − σ²)/2
//! ```
//!
//! so that `σ² = r − z` and `τ² = r + z`. The cavity is the region
//! `σ ≤ σ₀, τ ≤ τ₀`. The `σ = σ₀` sheet is the bowl with its vertex at
//! `z = −σ₀²/2`; the `τ = τ₀` sheet is the cap with its vertex at
//! `z = τ₀²/2`. In Cartesian form the walls are the quadrics
//!
//! ```text
//! σ = σ₀  ⇔  x² + y² = 2σ₀²z + σ₀⁴
//! τ = τ₀  ⇔  x² + y² = −2τ₀²z + τ₀⁴
//! ```
//!
//! and they meet on the rim circle of radius `ρ₀ = σ₀τ₀` at height
//! `z₀ = (τ₀² − σ₀²)/2`.

use std::f64::consts::TAU;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Three real components; used for positions, momenta and directions.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vector3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// A position in Cartesian space.
pub type CartesianPoint = Vector3;

impl Vector3 {
    pub const ZERO: Vector3 = Vector3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Self) -> Self {
        Self::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y).hypot(self.z)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    /// Cylindrical radius `ρ = √(x² + y²)`.
    pub fn rho(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn normalized(self) -> Self {
        self / self.norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn distance(self, other: Self) -> f64 {
        (self - other).norm()
    }
}

impl Add for Vector3 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vector3 {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Sub for Vector3 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vector3 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vector3 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vector3> for f64 {
    type Output = Vector3;
    fn mul(self, v: Vector3) -> Vector3 {
        v * self
    }
}

impl Div<f64> for Vector3 {
    type Output = Self;
    fn div(self, s: f64) -> Self {
        Self::new(self.x / s, self.y / s, self.z / s)
    }
}

impl fmt::Display for Vector3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// A point in parabolic coordinates. `phi` is kept in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParabolicPoint {
    pub sigma: f64,
    pub tau: f64,
    pub phi: f64,
}

impl ParabolicPoint {
    /// Builds a point, wrapping `phi` into `[0, 2π)`.
    pub fn new(sigma: f64, tau: f64, phi: f64) -> Self {
        assert!(
            sigma >= 0.0 && tau >= 0.0,
            "parabolic coordinates must be nonnegative"
        );
        Self {
            sigma,
            tau,
            phi: wrap_angle(phi),
        }
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_angle(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// One of the two confining walls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WallId {
    /// The `σ = σ₀` bowl (bottom of the cavity).
    SigmaWall,
    /// The `τ = τ₀` cap (top of the cavity).
    TauWall,
}

impl fmt::Display for WallId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WallId::SigmaWall => "sigma",
            WallId::TauWall => "tau",
        })
    }
}

/// A confocal paraboloidal cavity bounded by `σ = σ₀` and `τ = τ₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cavity {
    sigma0: f64,
    tau0: f64,
    rim_exclusion_eps: f64,
}

impl Cavity {
    pub fn new(sigma0: f64, tau0: f64) -> Result<Self> {
        if !(sigma0 > 0.0 && tau0 > 0.0 && sigma0.is_finite() && tau0.is_finite()) {
            return Err(Error::InvalidCavity { sigma0, tau0 });
        }
        Ok(Self {
            sigma0,
            tau0,
            rim_exclusion_eps: 1e-9 * (sigma0 * sigma0 + tau0 * tau0),
        })
    }

    /// Overrides the width of the band around the rim circle in which hits
    /// are rejected.
    pub fn with_rim_exclusion(mut self, eps: f64) -> Self {
        self.rim_exclusion_eps = eps;
        self
    }

    pub fn sigma0(&self) -> f64 {
        self.sigma0
    }

    pub fn tau0(&self) -> f64 {
        self.tau0
    }

    pub fn rim_exclusion_eps(&self) -> f64 {
        self.rim_exclusion_eps
    }

    /// Radius `ρ₀ = σ₀τ₀` of the circle where the walls meet.
    pub fn rim_radius(&self) -> f64 {
        self.sigma0 * self.tau0
    }

    /// Height `z₀ = (τ₀² − σ₀²)/2` of the rim circle.
    pub fn rim_height(&self) -> f64 {
        0.5 * (self.tau0 * self.tau0 - self.sigma0 * self.sigma0)
    }

    /// Characteristic length `σ₀² + τ₀²` (the axis round-trip length).
    pub fn scale(&self) -> f64 {
        self.sigma0 * self.sigma0 + self.tau0 * self.tau0
    }

    /// The wall parameter (`σ₀` or `τ₀`) of a wall.
    pub fn wall_parameter(&self, wall: WallId) -> f64 {
        match wall {
            WallId::SigmaWall => self.sigma0,
            WallId::TauWall => self.tau0,
        }
    }

    /// The same shape with `σ₀, τ₀` multiplied by `c` (lengths scale by `c²`).
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Cavity::new(self.sigma0 * c, self.tau0 * c)
    }

    /// Quadric residual `x² + y² ∓ 2w²z − w⁴` of a point against a wall;
    /// negative inside the wall's half of space.
    pub fn quadric_residual(&self, point: CartesianPoint, wall: WallId) -> f64 {
        let rho2 = point.x * point.x + point.y * point.y;
        match wall {
            WallId::SigmaWall => {
                let w2 = self.sigma0 * self.sigma0;
                rho2 - 2.0 * w2 * point.z - w2 * w2
            }
            WallId::TauWall => {
                let w2 = self.tau0 * self.tau0;
                rho2 + 2.0 * w2 * point.z - w2 * w2
            }
        }
    }

    /// Euclidean distance from a point to the rim circle.
    pub fn rim_distance(&self, point: CartesianPoint) -> f64 {
        (point.rho() - self.rim_radius()).hypot(point.z - self.rim_height())
    }
}

/// Parabolic → Cartesian.
pub fn to_cartesian(p: ParabolicPoint) -> CartesianPoint {
    let rho = p.sigma * p.tau;
    Vector3::new(
        rho * p.phi.cos(),
        rho * p.phi.sin(),
        0.5 * (p.tau * p.tau - p.sigma * p.sigma),
    )
}

/// Cartesian → parabolic. On the axis `φ` is set to 0.
pub fn to_parabolic(c: CartesianPoint) -> ParabolicPoint {
    let rho = c.rho();
    let r = rho.hypot(c.z);
    // σ² = r − z and τ² = r + z; take the cancellation-free branch for each
    let (sigma2, tau2) = if r == 0.0 {
        (0.0, 0.0)
    } else if c.z >= 0.0 {
        let tau2 = r + c.z;
        (rho * rho / tau2, tau2)
    } else {
        let sigma2 = r - c.z;
        (sigma2, rho * rho / sigma2)
    };
    let phi = if rho == 0.0 {
        0.0
    } else {
        wrap_angle(c.y.atan2(c.x))
    };
    ParabolicPoint {
        sigma: sigma2.sqrt(),
        tau: tau2.sqrt(),
        phi,
    }
}

/// Metric scale factors `(h_σ, h_τ, h_φ)`.
pub fn scale_factors(p: ParabolicPoint) -> (f64, f64, f64) {
    let h = p.sigma.hypot(p.tau);
    (h, h, p.sigma * p.tau)
}

/// Result of tracing a ray to the cavity walls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub point: CartesianPoint,
    pub wall: WallId,
    pub path_length: f64,
}

/// Traces a ray from `origin` along the unit vector `direction` and returns
/// the first wall it meets.
pub fn wall_intersection(
    origin: CartesianPoint,
    direction: Vector3,
    cavity: &Cavity,
) -> Result<Hit> {
    let scale = cavity.scale();
    let t_eps = 1e-12 * scale;
    let sheet_tol = 1e-9 * scale * scale;

    let mut best: Option<(f64, WallId)> = None;
    for wall in [WallId::SigmaWall, WallId::TauWall] {
        let other = match wall {
            WallId::SigmaWall => WallId::TauWall,
            WallId::TauWall => WallId::SigmaWall,
        };
        for t in ray_quadric_roots(origin, direction, cavity, wall) {
            if !(t > t_eps) {
                continue;
            }
            let p = origin + direction * t;
            if cavity.quadric_residual(p, other) > sheet_tol {
                continue;
            }
            if best.is_none_or(|(bt, _)| t < bt) {
                best = Some((t, wall));
            }
        }
    }

    let (t, wall) = best.ok_or(Error::NoHit)?;
    let t = polish_root(origin, direction, cavity, wall, t);
    let point = origin + direction * t;
    if cavity.rim_distance(point) < cavity.rim_exclusion_eps() {
        return Err(Error::RimHit {
            x: point.x,
            y: point.y,
            z: point.z,
        });
    }
    Ok(Hit {
        point,
        wall,
        path_length: t,
    })
}

/// Real roots of the wall quadric restricted to the line `o + t d`.
fn ray_quadric_roots(o: Vector3, d: Vector3, cavity: &Cavity, wall: WallId) -> Vec<f64> {
    let (w2, sign) = match wall {
        WallId::SigmaWall => (cavity.sigma0 * cavity.sigma0, -1.0),
        WallId::TauWall => (cavity.tau0 * cavity.tau0, 1.0),
    };
    let a = d.x * d.x + d.y * d.y;
    let b = 2.0 * (o.x * d.x + o.y * d.y) + sign * 2.0 * w2 * d.z;
    let c = cavity.quadric_residual(o, wall);

    if a <= 1e-300 {
        return if b != 0.0 { vec![-c / b] } else { Vec::new() };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    if q == 0.0 {
        return vec![0.0];
    }
    vec![q / a, c / q]
}

/// One Newton step on the quadric residual along the ray.
fn polish_root(o: Vector3, d: Vector3, cavity: &Cavity, wall: WallId, t: f64) -> f64 {
    let (w2, sign) = match wall {
        WallId::SigmaWall => (cavity.sigma0 * cavity.sigma0, -1.0),
        WallId::TauWall => (cavity.tau0 * cavity.tau0, 1.0),
    };
    let p = o + d * t;
    let f = cavity.quadric_residual(p, wall);
    let df = 2.0 * (p.x * d.x + p.y * d.y) + sign * 2.0 * w2 * d.z;
    if df != 0.0 && f.is_finite() {
        let step = f / df;
        // only accept a correction that is small compared with the path
        if step.abs() < 1e-6 * (1.0 + t) {
            return t - step;
        }
    }
    t
}

/// Unit normal of a wall at `point`, oriented into the cavity.
pub fn surface_normal(point: CartesianPoint, wall: WallId, cavity: &Cavity) -> Result<Vector3> {
    let p = to_parabolic(point);
    let w = cavity.wall_parameter(wall);
    let coord = match wall {
        WallId::SigmaWall => p.sigma,
        WallId::TauWall => p.tau,
    };
    let mismatch = (coord - w).abs();
    if mismatch > 1e-8 * w.max(1.0) {
        return Err(Error::OffSurface { wall, mismatch });
    }
    // inward normal = −∇(quadric residual), up to a positive factor
    let n = match wall {
        WallId::SigmaWall => Vector3::new(-point.x, -point.y, w * w),
        WallId::TauWall => Vector3::new(-point.x, -point.y, -w * w),
    };
    Ok(n.normalized())
}

/// `true` when `σ ≤ σ₀` and `τ ≤ τ₀` (walls included, with a 1e-12 relative
/// allowance for points produced by [`wall_intersection`]).
pub fn contains(cavity: &Cavity, point: CartesianPoint) -> bool {
    let p = to_parabolic(point);
    p.sigma <= cavity.sigma0 * (1.0 + 1e-12) && p.tau <= cavity.tau0 * (1.0 + 1e-12)
}
