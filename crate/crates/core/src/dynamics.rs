//! Classical motion: constants of motion, canonical momenta, caustics,
//! elastic bounce simulation and Poincaré phase fields.
//!
//! The particle moves on straight segments between specular reflections.
//! Three quantities are conserved:
//!
//! * `P = |p|`,
//! * `β = L_z²/P²` with `L_z = x p_y − y p_x`,
//! * `α = C/P²` with `C = 2(p_x² + p_y²)z − 2(x p_x + y p_y)p_z`.
//!
//! The motion is confined between the caustic paraboloids `σ = σ_c`,
//! `τ = τ_c` and the walls.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    contains, surface_normal, to_parabolic, wall_intersection, CartesianPoint, Cavity,
    ParabolicPoint, Vector3, WallId,
};

/// The triple `(P, α, β)` that fixes a trajectory family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionConstants {
    /// Momentum magnitude.
    pub p: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl MotionConstants {
    pub fn new(p: f64, alpha: f64, beta: f64) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::ZeroMomentum);
        }
        if !(beta >= 0.0 && alpha.is_finite() && beta.is_finite()) {
            return Err(Error::Domain(format!(
                "invalid constants alpha={alpha}, beta={beta}"
            )));
        }
        Ok(Self { p, alpha, beta })
    }

    /// The unnormalized third constant `C = αP²`.
    pub fn c(&self) -> f64 {
        self.alpha * self.p * self.p
    }

    /// `|L_z| = P√β`.
    pub fn lz_abs(&self) -> f64 {
        self.p * self.beta.sqrt()
    }
}

/// Position and Cartesian momentum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub position: CartesianPoint,
    pub momentum: Vector3,
}

impl PhaseState {
    pub fn new(position: CartesianPoint, momentum: Vector3) -> Self {
        Self { position, momentum }
    }

    pub fn parabolic_position(&self) -> ParabolicPoint {
        to_parabolic(self.position)
    }

    /// Canonical momenta `(p_σ, p_τ, p_φ)`, i.e. the projections of `p` on
    /// the coordinate tangents `∂r/∂σ`, `∂r/∂τ`, `∂r/∂φ`.
    pub fn parabolic_momenta(&self) -> (f64, f64, f64) {
        let q = self.parabolic_position();
        let (c, s) = (q.phi.cos(), q.phi.sin());
        let p = self.momentum;
        let radial = p.x * c + p.y * s;
        let p_sigma = q.tau * radial - q.sigma * p.z;
        let p_tau = q.sigma * radial + q.tau * p.z;
        let p_phi = self.position.x * p.y - self.position.y * p.x;
        (p_sigma, p_tau, p_phi)
    }

    /// `L_z = x p_y − y p_x`.
    pub fn lz(&self) -> f64 {
        self.position.x * self.momentum.y - self.position.y * self.momentum.x
    }
}

/// Builds a Cartesian momentum from canonical momenta at a point off the axis.
pub fn momentum_from_canonical(q: ParabolicPoint, p_sigma: f64, p_tau: f64, p_phi: f64) -> Vector3 {
    let (c, s) = (q.phi.cos(), q.phi.sin());
    let h2 = q.sigma * q.sigma + q.tau * q.tau;
    let rho2 = (q.sigma * q.tau).powi(2);
    let e_sigma = Vector3::new(q.tau * c, q.tau * s, -q.sigma);
    let e_tau = Vector3::new(q.sigma * c, q.sigma * s, q.tau);
    let rho = q.sigma * q.tau;
    let e_phi = Vector3::new(-rho * s, rho * c, 0.0);
    e_sigma * (p_sigma / h2) + e_tau * (p_tau / h2) + e_phi * (p_phi / rho2)
}

/// The caustic paraboloids of a trajectory family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CausticPair {
    pub sigma_c: f64,
    pub tau_c: f64,
    /// `Δ = √(α² + 4β)`.
    pub delta: f64,
}

/// Caustics `σ_c = √((Δ−α)/2)`, `τ_c = √((Δ+α)/2)`.
pub fn caustics(alpha: f64, beta: f64) -> CausticPair {
    let delta = alpha.hypot(2.0 * beta.sqrt());
    // (Δ−α)(Δ+α) = 4β: use it on whichever side cancels
    let (sc2, tc2) = if alpha >= 0.0 {
        let tc2 = 0.5 * (delta + alpha);
        let sc2 = if tc2 > 0.0 { beta / tc2 } else { 0.0 };
        (sc2, tc2)
    } else {
        let sc2 = 0.5 * (delta - alpha);
        (sc2, beta / sc2)
    };
    CausticPair {
        sigma_c: sc2.sqrt(),
        tau_c: tc2.sqrt(),
        delta,
    }
}

/// The admissible region of the `(α, β)` plane for a cavity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Triangle {
    pub vertices: [(f64, f64); 3],
    sigma0: f64,
    tau0: f64,
}

impl Triangle {
    /// Upper bound `min(σ₀⁴ + ασ₀², τ₀⁴ − ατ₀²)` of β at a given α.
    pub fn beta_max(&self, alpha: f64) -> f64 {
        let s2 = self.sigma0 * self.sigma0;
        let t2 = self.tau0 * self.tau0;
        (s2 * s2 + alpha * s2).min(t2 * t2 - alpha * t2)
    }

    pub fn alpha_range(&self) -> (f64, f64) {
        (-self.sigma0 * self.sigma0, self.tau0 * self.tau0)
    }

    /// Closed-triangle membership.
    pub fn contains(&self, alpha: f64, beta: f64) -> bool {
        let (lo, hi) = self.alpha_range();
        alpha >= lo && alpha <= hi && beta >= 0.0 && beta <= self.beta_max(alpha)
    }

    /// Membership allowing a violation of up to `tol` in each constraint.
    pub fn contains_with_tolerance(&self, alpha: f64, beta: f64, tol: f64) -> bool {
        let (lo, hi) = self.alpha_range();
        alpha >= lo - tol && alpha <= hi + tol && beta >= -tol && beta <= self.beta_max(alpha) + tol
    }
}

/// The triangle `β ≥ 0, β ≤ σ₀⁴ + ασ₀², β ≤ τ₀⁴ − ατ₀²`.
pub fn admissible_region(cavity: &Cavity) -> Triangle {
    let s2 = cavity.sigma0().powi(2);
    let t2 = cavity.tau0().powi(2);
    Triangle {
        vertices: [(-s2, 0.0), (t2, 0.0), (t2 - s2, s2 * t2)],
        sigma0: cavity.sigma0(),
        tau0: cavity.tau0(),
    }
}

/// Constants of motion of a phase-space state.
pub fn constants_from_state(state: &PhaseState) -> Result<MotionConstants> {
    let p = state.momentum;
    let pp = p.norm();
    if !(pp > 0.0) {
        return Err(Error::ZeroMomentum);
    }
    let x = state.position;
    let lz = x.x * p.y - x.y * p.x;
    let c = 2.0 * (p.x * p.x + p.y * p.y) * x.z - 2.0 * (x.x * p.x + x.y * p.y) * p.z;
    let p2 = pp * pp;
    Ok(MotionConstants {
        p: pp,
        alpha: c / p2,
        beta: lz * lz / p2,
    })
}

/// The third constant `C` evaluated from the canonical momenta
/// `(p_σ² − p_τ²)/2 + ((τ² − σ²)/2)(P² + p_φ²/(σ²τ²))`. Only valid off the axis.
pub fn parabolic_c(state: &PhaseState) -> f64 {
    let q = state.parabolic_position();
    let (ps, pt, pf) = state.parabolic_momenta();
    let p2 = state.momentum.norm_sq();
    let (s2, t2) = (q.sigma * q.sigma, q.tau * q.tau);
    0.5 * (ps * ps - pt * pt) + 0.5 * (t2 - s2) * (p2 + pf * pf / (s2 * t2))
}

/// Canonical momenta at a point for given constants and signs.
///
/// `signs` picks the branch of each square root; entries must be ±1.
pub fn canonical_momenta(
    point: ParabolicPoint,
    mc: &MotionConstants,
    signs: [f64; 3],
) -> Result<(f64, f64, f64)> {
    let (s2, t2) = (point.sigma * point.sigma, point.tau * point.tau);
    let rad_s = radicand(s2, mc.alpha, mc.beta, "sigma")?;
    let rad_t = radicand(t2, -mc.alpha, mc.beta, "tau")?;
    Ok((
        signs[0].signum() * mc.p * rad_s.sqrt(),
        signs[1].signum() * mc.p * rad_t.sqrt(),
        signs[2].signum() * mc.p * mc.beta.sqrt(),
    ))
}

fn radicand(w2: f64, alpha: f64, beta: f64, coordinate: &'static str) -> Result<f64> {
    let centrifugal = if beta == 0.0 { 0.0 } else { beta / w2 };
    let r = w2 - centrifugal + alpha;
    let tol = 1e-12 * (w2 + alpha.abs() + centrifugal).max(1e-300);
    if r.is_nan() || r < -tol {
        return Err(Error::ForbiddenRegion {
            coordinate,
            radicand: r,
        });
    }
    Ok(r.max(0.0))
}

/// Specular reflection `p − 2(p·n̂)n̂`.
pub fn reflect(momentum: Vector3, normal: Vector3) -> Vector3 {
    momentum - normal * (2.0 * momentum.dot(normal))
}

/// Relative drift of the constants of motion. `α` and `β` are measured
/// against the cavity scale `L = σ₀² + τ₀²` (and `L²`), `P` against itself.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Drift {
    pub p: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl Drift {
    pub fn max(&self) -> f64 {
        self.p.max(self.alpha).max(self.beta)
    }

    fn between(a: &MotionConstants, b: &MotionConstants, cavity: &Cavity) -> Self {
        let l = cavity.scale();
        Drift {
            p: (a.p - b.p).abs() / a.p,
            alpha: (a.alpha - b.alpha).abs() / l,
            beta: (a.beta - b.beta).abs() / (l * l),
        }
    }

    fn merge(self, o: Drift) -> Drift {
        Drift {
            p: self.p.max(o.p),
            alpha: self.alpha.max(o.alpha),
            beta: self.beta.max(o.beta),
        }
    }
}

/// One wall contact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BounceRecord {
    pub point: CartesianPoint,
    pub wall: WallId,
    pub incoming: Vector3,
    pub outgoing: Vector3,
    /// Path length from the initial state up to this contact.
    pub cumulative_length: f64,
    /// Constants recomputed from the outgoing state.
    pub constants: MotionConstants,
    pub drift: Drift,
    /// Contact was tangential; the momentum was left unchanged.
    pub grazing: bool,
}

/// A simulated bounce sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub initial: PhaseState,
    pub initial_constants: MotionConstants,
    pub bounces: Vec<BounceRecord>,
}

impl Trajectory {
    pub fn total_length(&self) -> f64 {
        self.bounces.last().map_or(0.0, |b| b.cumulative_length)
    }

    pub fn max_drift(&self) -> Drift {
        self.bounces
            .iter()
            .fold(Drift::default(), |acc, b| acc.merge(b.drift))
    }

    /// The initial position followed by every contact point.
    pub fn vertices(&self) -> Vec<CartesianPoint> {
        std::iter::once(self.initial.position)
            .chain(self.bounces.iter().map(|b| b.point))
            .collect()
    }

    /// Number of σ-wall and τ-wall contacts (grazes excluded).
    pub fn wall_counts(&self) -> (usize, usize) {
        self.bounces
            .iter()
            .filter(|b| !b.grazing)
            .fold((0, 0), |(s, t), b| match b.wall {
                WallId::SigmaWall => (s + 1, t),
                WallId::TauWall => (s, t + 1),
            })
    }

    /// State just after the last contact (or the initial state).
    pub fn final_state(&self) -> PhaseState {
        self.bounces
            .last()
            .map_or(self.initial, |b| PhaseState::new(b.point, b.outgoing))
    }

    /// Minimum of `σ` and of `τ` over every straight segment.
    pub fn min_sigma_tau(&self) -> (f64, f64) {
        let v = self.vertices();
        v.windows(2)
            .fold((f64::INFINITY, f64::INFINITY), |(ms, mt), w| {
                let (s, t) = segment_min_sigma_tau(w[0], w[1]);
                (ms.min(s), mt.min(t))
            })
    }

    /// Total signed angle swept about the z axis by the xy projection.
    pub fn azimuthal_advance(&self) -> f64 {
        let v = self.vertices();
        v.windows(2)
            .map(|w| {
                let (a, b) = (w[0], w[1]);
                let cross = a.x * b.y - a.y * b.x;
                let dot = a.x * b.x + a.y * b.y;
                cross.atan2(dot)
            })
            .sum()
    }
}

/// Minimum of `σ` and of `τ` on the straight segment `a → b`.
///
/// `σ² = r − z` and `τ² = r + z` are convex along a line, so each has a
/// single stationary point which is clamped to the segment.
pub fn segment_min_sigma_tau(a: CartesianPoint, b: CartesianPoint) -> (f64, f64) {
    let len = a.distance(b);
    if len == 0.0 {
        let q = to_parabolic(a);
        return (q.sigma, q.tau);
    }
    let d = (b - a) / len;
    let along = a.dot(d);
    let h2 = (a.norm_sq() - along * along).max(0.0);
    let eval = |t: f64| to_parabolic(a + d * t);
    let stationary = |dz: f64| -> f64 {
        let s2 = 1.0 - dz * dz;
        if s2 <= 0.0 {
            return 0.0;
        }
        (dz * (h2 / s2).sqrt() - along).clamp(0.0, len)
    };
    let ts = stationary(d.z);
    let tt = stationary(-d.z);
    let ends = [eval(0.0), eval(len)];
    let ms = ends.iter().map(|q| q.sigma).fold(eval(ts).sigma, f64::min);
    let mt = ends.iter().map(|q| q.tau).fold(eval(tt).tau, f64::min);
    (ms, mt)
}

/// Drift beyond which [`simulate`] aborts.
pub const ABORT_DRIFT: f64 = 1e-6;

/// Runs `n_bounces` wall contacts from `initial`.
pub fn simulate(cavity: &Cavity, initial: &PhaseState, n_bounces: usize) -> Result<Trajectory> {
    let mc0 = constants_from_state(initial)?;
    if !contains(cavity, initial.position) {
        return Err(Error::Domain(format!(
            "initial position {} is outside the cavity",
            initial.position
        )));
    }
    let mut bounces = Vec::with_capacity(n_bounces);
    let mut pos = initial.position;
    let mut mom = initial.momentum;
    let mut travelled = 0.0;
    for i in 0..n_bounces {
        let pnorm = mom.norm();
        let hit = wall_intersection(pos, mom / pnorm, cavity)?;
        travelled += hit.path_length;
        let normal = surface_normal(hit.point, hit.wall, cavity)?;
        let pn = mom.dot(normal);
        let grazing = pn.abs() < 1e-12 * pnorm;
        let outgoing = if grazing { mom } else { reflect(mom, normal) };
        let state = PhaseState::new(hit.point, outgoing);
        let constants = constants_from_state(&state)?;
        let drift = Drift::between(&mc0, &constants, cavity);
        if drift.max() > ABORT_DRIFT {
            return Err(Error::AbortOnDrift {
                bounce: i + 1,
                drift: drift.max(),
            });
        }
        bounces.push(BounceRecord {
            point: hit.point,
            wall: hit.wall,
            incoming: mom,
            outgoing,
            cumulative_length: travelled,
            constants,
            drift,
            grazing,
        });
        pos = hit.point;
        mom = outgoing;
    }
    Ok(Trajectory {
        initial: *initial,
        initial_constants: mc0,
        bounces,
    })
}

/// Deterministic starting state for a trajectory family.
///
/// The particle sits on the `σ₀` wall at `φ = 0` with `τ` at the midpoint of
/// `[τ_c, τ₀]`. The canonical signs `(+, −, +)` describe the momentum arriving
/// at that point; the returned state carries the reflected (departing)
/// momentum, so `p_σ ≤ 0`. For `α = β = 0` the axial orbit starting at the
/// `σ₀` vertex is returned instead.
pub fn starting_state(cavity: &Cavity, mc: &MotionConstants) -> Result<PhaseState> {
    if mc.alpha == 0.0 && mc.beta == 0.0 {
        let s0 = cavity.sigma0();
        return Ok(PhaseState::new(
            Vector3::new(0.0, 0.0, -0.5 * s0 * s0),
            Vector3::new(0.0, 0.0, mc.p),
        ));
    }
    let cs = caustics(mc.alpha, mc.beta);
    let tau0 = cavity.tau0();
    let tau = 0.5 * (cs.tau_c.min(tau0) + tau0);
    let q = ParabolicPoint::new(cavity.sigma0(), tau, 0.0);
    let (ps, pt, pf) = canonical_momenta(q, mc, [1.0, -1.0, 1.0])?;
    let position = crate::geometry::to_cartesian(q);
    let momentum = momentum_from_canonical(q, -ps, pt, pf);
    Ok(PhaseState::new(position, momentum))
}

/// Phase plane of a Poincaré field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SectionPlane {
    /// `(σ, p_σ)`
    Sigma,
    /// `(τ, p_τ)`
    Tau,
}

/// Which constant a Poincaré field solves for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldKind {
    Alpha,
    Beta,
}

/// Rectangular sampling of a phase plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub q_min: f64,
    pub q_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub nq: usize,
    pub np: usize,
}

impl PhaseGrid {
    /// Grid symmetric in momentum, `p ∈ [−p_max, p_max]`.
    pub fn symmetric(q_min: f64, q_max: f64, p_max: f64, nq: usize, np: usize) -> Self {
        Self {
            q_min,
            q_max,
            p_min: -p_max,
            p_max,
            nq,
            np,
        }
    }

    pub fn coordinates(&self) -> Vec<f64> {
        linspace(self.q_min, self.q_max, self.nq)
    }

    pub fn momenta(&self) -> Vec<f64> {
        linspace(self.p_min, self.p_max, self.np)
    }
}

/// Evenly spaced samples; mirror-exact when `lo = −hi`.
pub(crate) fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => {
            let m = (n - 1) as f64;
            (0..n)
                .map(|j| {
                    let j = j as f64;
                    ((m - j) * lo + j * hi) / m
                })
                .collect()
        }
    }
}

/// One value of a Poincaré field. `fixed` is `β` when solving for `α` and
/// `α` when solving for `β`.
pub fn poincare_value(
    plane: SectionPlane,
    kind: FieldKind,
    q: f64,
    pq: f64,
    fixed: f64,
    p: f64,
) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::ZeroMomentum);
    }
    let q2 = q * q;
    let pn2 = (pq * pq) / (p * p);
    let centrifugal = |beta: f64| -> Result<f64> {
        if beta == 0.0 {
            Ok(0.0)
        } else if q2 == 0.0 {
            Err(Error::Domain(format!("coordinate 0 with beta={beta} > 0")))
        } else {
            Ok(beta / q2)
        }
    };
    Ok(match (plane, kind) {
        (SectionPlane::Sigma, FieldKind::Alpha) => pn2 - q2 + centrifugal(fixed)?,
        (SectionPlane::Sigma, FieldKind::Beta) => q2 * (q2 - pn2 + fixed),
        (SectionPlane::Tau, FieldKind::Alpha) => -pn2 + q2 - centrifugal(fixed)?,
        (SectionPlane::Tau, FieldKind::Beta) => q2 * (q2 - pn2 - fixed),
    })
}

/// A Poincaré field sampled on a grid; `values[i][j]` is at
/// `(coordinates[i], momenta[j])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldGrid {
    pub plane: SectionPlane,
    pub kind: FieldKind,
    pub fixed: f64,
    pub p: f64,
    pub coordinates: Vec<f64>,
    pub momenta: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

/// Evaluates a Poincaré field on a grid.
pub fn poincare_field(
    plane: SectionPlane,
    kind: FieldKind,
    fixed: f64,
    p: f64,
    grid: &PhaseGrid,
) -> Result<FieldGrid> {
    let coordinates = grid.coordinates();
    let momenta = grid.momenta();
    let values = coordinates
        .iter()
        .map(|&q| {
            momenta
                .iter()
                .map(|&pq| poincare_value(plane, kind, q, pq, fixed, p))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FieldGrid {
        plane,
        kind,
        fixed,
        p,
        coordinates,
        momenta,
        values,
    })
}

/// The meridional constant `(τ²p_σ² − σ²p_τ²)/(σ² + τ²)` of a state with
/// `L_z = 0`.
pub fn planar_constant(state: &PhaseState) -> Result<f64> {
    let pnorm = state.momentum.norm();
    if !(pnorm > 0.0) {
        return Err(Error::ZeroMomentum);
    }
    let q = state.parabolic_position();
    let lz_over_p = state.lz().abs() / pnorm;
    if lz_over_p > 1e-10 * q.sigma.hypot(q.tau) {
        return Err(Error::NotPlanar { lz_over_p });
    }
    let (ps, pt, _) = state.parabolic_momenta();
    let (s2, t2) = (q.sigma * q.sigma, q.tau * q.tau);
    let h2 = s2 + t2;
    if h2 == 0.0 {
        return Ok(0.0);
    }
    Ok((t2 * ps * ps - s2 * pt * pt) / h2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn constants_examples() {
        let s = PhaseState::new(Vector3::new(0.0, 0.0, 1.0), Vector3::new(0.0, 0.0, -1.0));
        let mc = constants_from_state(&s).unwrap();
        assert_eq!((mc.p, mc.alpha, mc.beta), (1.0, 0.0, 0.0));
        let s = PhaseState::new(Vector3::new(1.0, 0.0, 0.0), Vector3::new(0.0, 1.0, 0.0));
        let mc = constants_from_state(&s).unwrap();
        assert_eq!((mc.p, mc.alpha, mc.beta), (1.0, 0.0, 1.0));
    }

    #[test]
    fn zero_momentum_is_rejected() {
        let s = PhaseState::new(Vector3::new(1.0, 0.0, 0.0), Vector3::ZERO);
        assert_eq!(constants_from_state(&s), Err(Error::ZeroMomentum));
    }

    #[test]
    fn canonical_momenta_examples() {
        let mc = MotionConstants::new(1.0, 0.0, 0.0).unwrap();
        let q = ParabolicPoint::new(1.0, 1.0, 0.0);
        assert_eq!(
            canonical_momenta(q, &mc, [1.0, 1.0, 1.0]).unwrap(),
            (1.0, 1.0, 0.0)
        );

        let mc = MotionConstants::new(1.0, -1.0, 2.0).unwrap();
        let cs = caustics(mc.alpha, mc.beta);
        let q = ParabolicPoint::new(cs.sigma_c, 1.5, 0.0);
        let (ps, _, _) = canonical_momenta(q, &mc, [1.0, 1.0, 1.0]).unwrap();
        assert!(ps.abs() < 1e-7);
    }

    #[test]
    fn forbidden_region_is_an_error() {
        let mc = MotionConstants::new(1.0, 0.0, 4.0).unwrap();
        let q = ParabolicPoint::new(0.5, 3.0, 0.0);
        assert!(matches!(
            canonical_momenta(q, &mc, [1.0, 1.0, 1.0]),
            Err(Error::ForbiddenRegion {
                coordinate: "sigma",
                ..
            })
        ));
    }

    #[test]
    fn caustic_examples() {
        let c = caustics(0.0, 1.0);
        assert!(close(c.sigma_c, 1.0, 1e-15) && close(c.tau_c, 1.0, 1e-15) && c.delta == 2.0);
        let c = caustics(2.0, 0.0);
        assert_eq!(c.sigma_c, 0.0);
        assert!(close(c.tau_c, 2f64.sqrt(), 1e-15) && c.delta == 2.0);
        let c = caustics(-3.0, 0.0);
        assert!(close(c.sigma_c, 3f64.sqrt(), 1e-15) && c.tau_c == 0.0 && c.delta == 3.0);
    }

    #[test]
    fn triangle_vertices() {
        let tri = admissible_region(&Cavity::new(3.0, 2.0).unwrap());
        assert_eq!(tri.vertices, [(-9.0, 0.0), (4.0, 0.0), (-5.0, 36.0)]);
        assert!(tri.contains(0.0, 0.0));
        assert!(!tri.contains(4.0, 0.1));
        assert!(tri.contains(-5.0, 36.0));
        assert!(!tri.contains(-9.5, 0.0));
    }

    #[test]
    fn reflect_examples() {
        let n = Vector3::new(0.0, 0.0, 1.0);
        assert_eq!(
            reflect(Vector3::new(0.0, 0.0, -1.0), n),
            Vector3::new(0.0, 0.0, 1.0)
        );
        let p = Vector3::new(0.3, -0.2, 0.0);
        assert_eq!(reflect(p, n), p);
    }

    #[test]
    fn axial_orbit_alternates_vertices() {
        let cav = Cavity::new(3.0, 2.0).unwrap();
        let s = PhaseState::new(Vector3::new(0.0, 0.0, 2.0), Vector3::new(0.0, 0.0, -1.0));
        let tr = simulate(&cav, &s, 4).unwrap();
        let zs: Vec<f64> = tr.bounces.iter().map(|b| b.point.z).collect();
        for (z, want) in zs.iter().zip([-4.5, 2.0, -4.5, 2.0]) {
            assert!(close(*z, want, 1e-13), "{zs:?}");
        }
        assert_eq!(tr.wall_counts(), (2, 2));
        assert!(close(tr.total_length(), 26.0, 1e-12));
    }

    #[test]
    fn starting_state_lies_on_sigma_wall_and_moves_inward() {
        let cav = Cavity::new(3.0, 2.0).unwrap();
        let mc = MotionConstants::new(1.0, -2.0, 2.0).unwrap();
        let st = starting_state(&cav, &mc).unwrap();
        let q = st.parabolic_position();
        assert!(close(q.sigma, 3.0, 1e-14));
        let n = surface_normal(st.position, WallId::SigmaWall, &cav).unwrap();
        assert!(st.momentum.dot(n) > 0.0);
        let got = constants_from_state(&st).unwrap();
        assert!(close(got.alpha, -2.0, 1e-12) && close(got.beta, 2.0, 1e-12));
        assert!(st.lz() > 0.0);
    }

    #[test]
    fn poincare_examples() {
        let a = poincare_value(SectionPlane::Sigma, FieldKind::Alpha, 1.0, 0.0, 1.0, 1.0).unwrap();
        assert_eq!(a, 0.0);
        let b = poincare_value(SectionPlane::Sigma, FieldKind::Beta, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(b, 1.0);
        let a = poincare_value(SectionPlane::Tau, FieldKind::Alpha, 1.5, 0.7, 0.0, 2.0).unwrap();
        assert!(close(a, 1.5 * 1.5 - 0.7 * 0.7 / 4.0, 1e-15));
        assert!(poincare_value(SectionPlane::Sigma, FieldKind::Alpha, 0.0, 1.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn symmetric_grid_is_mirror_exact() {
        let g = PhaseGrid::symmetric(0.1, 3.0, 2.7, 5, 41);
        let m = g.momenta();
        for j in 0..m.len() {
            assert_eq!(m[j], -m[m.len() - 1 - j]);
        }
    }

    #[test]
    fn planar_constant_requires_meridional_state() {
        let s = PhaseState::new(Vector3::new(1.0, 0.0, 0.0), Vector3::new(0.0, 1.0, 0.0));
        assert!(matches!(planar_constant(&s), Err(Error::NotPlanar { .. })));
    }

    #[test]
    fn planar_constant_is_even_in_momentum() {
        let s = PhaseState::new(Vector3::new(0.7, 0.0, -0.3), Vector3::new(0.2, 0.0, 0.9));
        let r = PhaseState::new(s.position, -s.momentum);
        assert_eq!(planar_constant(&s).unwrap(), planar_constant(&r).unwrap());
    }
}
