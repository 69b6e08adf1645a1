//! Periodic orbits `(s, t, ℓ)`: closure solver, orbit construction and
//! Maupertuis length.
//!
//! An orbit with `s` bounces on the σ wall and `t` on the τ wall closes when
//! `w(α, β) = s/t` and `sϑ_σ + tϑ_τ = ℓ`. For `ℓ ≥ 1` the pair is solved by a
//! damped two-dimensional Newton iteration seeded from a scan of the
//! admissible triangle. For `ℓ = 0` the motion is meridional (`β = 0`) and
//! only `w(α, 0) = s/t` is solved, by bracketing on the triangle base.
//!
//! A meridional orbit with `α < 0` has `τ_c = 0`: every τ oscillation passes
//! through the negative z axis and moves the particle to the opposite
//! half-plane. It therefore returns to its starting point after `s + t`
//! bounces only if `t` is even (`s` even when `α > 0`). Roots violating this
//! are discarded. The axial orbit `α = β = 0` crosses nothing and closes for
//! `s = t`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::actions::{closure_residual, reduced_action, theta_sigma, theta_tau, winding_number};
use crate::dynamics::{admissible_region, simulate, starting_state, MotionConstants, Trajectory};
use crate::error::{Error, Result};
use crate::geometry::Cavity;

/// Orbit indices: `s` σ-wall bounces, `t` τ-wall bounces, `ℓ` turns about
/// the axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OrbitSpec {
    pub s: u32,
    pub t: u32,
    pub l: u32,
}

impl OrbitSpec {
    pub fn new(s: u32, t: u32, l: u32) -> Result<Self> {
        let spec = Self { s, t, l };
        if s == 0 || t == 0 {
            return Err(spec.invalid("s and t must be at least 1"));
        }
        if l > lmax(s, t) {
            return Err(spec.invalid(&format!("l exceeds lmax = {}", lmax(s, t))));
        }
        Ok(spec)
    }

    /// All valid specs with `s + t ≤ max_bounces`.
    pub fn enumerate(max_bounces: u32) -> Vec<Self> {
        let mut out = Vec::new();
        for s in 1..max_bounces {
            for t in 1..=(max_bounces - s) {
                for l in 0..=lmax(s, t) {
                    out.push(Self { s, t, l });
                }
            }
        }
        out
    }

    fn invalid(&self, reason: &str) -> Error {
        Error::InvalidSpec {
            s: self.s,
            t: self.t,
            l: self.l,
            reason: reason.to_string(),
        }
    }

    fn no_solution(&self, reason: &str) -> Error {
        Error::NoSolution {
            s: self.s,
            t: self.t,
            l: self.l,
            reason: reason.to_string(),
        }
    }

    fn ratio(&self) -> f64 {
        self.s as f64 / self.t as f64
    }
}

impl std::fmt::Display for OrbitSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.s, self.t, self.l)
    }
}

/// Largest admissible `ℓ`: `⌊(s + t)/2⌋`.
pub fn lmax(s: u32, t: u32) -> u32 {
    (s + t) / 2
}

/// Tolerance on each closure residual.
pub const CLOSURE_TOL: f64 = 1e-10;

/// Solver settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Seeds per side of the triangle scan.
    pub scan: usize,
    /// Interior margin of the triangle (relative to the cavity scale).
    pub margin: f64,
    /// Relative finite-difference step of the Jacobian.
    pub fd_step: f64,
    pub max_iter: usize,
    pub tol: f64,
    /// Distinct roots must be further apart than this (relative to scale).
    pub separation: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            scan: 64,
            margin: 1e-9,
            fd_step: 1e-7,
            max_iter: 100,
            tol: CLOSURE_TOL,
            separation: 1e-6,
        }
    }
}

/// Solves the closure system and returns the root with the smallest `α`
/// (then `β`). See [`solve_orbit_all`].
pub fn solve_orbit(cavity: &Cavity, spec: OrbitSpec) -> Result<MotionConstants> {
    solve_orbit_all(cavity, spec, &SolverOptions::default()).map(|v| v[0])
}

/// Every distinct root of the closure system for `spec`, sorted by `(α, β)`,
/// with `P = 1`.
pub fn solve_orbit_all(
    cavity: &Cavity,
    spec: OrbitSpec,
    opts: &SolverOptions,
) -> Result<Vec<MotionConstants>> {
    let spec = OrbitSpec::new(spec.s, spec.t, spec.l)?;
    let roots = if spec.l == 0 {
        solve_meridional(cavity, spec)?
    } else {
        solve_spatial(cavity, spec, opts)?
    };
    if roots.is_empty() {
        return Err(spec.no_solution("no root of the closure system in the admissible triangle"));
    }
    roots
        .into_iter()
        .map(|(a, b)| MotionConstants::new(1.0, a, b))
        .collect()
}

fn solve_meridional(cavity: &Cavity, spec: OrbitSpec) -> Result<Vec<(f64, f64)>> {
    let (s2, t2) = (cavity.sigma0().powi(2), cavity.tau0().powi(2));
    let target = spec.ratio().ln();
    let f = |a: f64| -> f64 {
        match winding_number(cavity, a, 0.0) {
            Ok(w) => w.ln() - target,
            Err(_) => f64::NAN,
        }
    };
    let mut roots = Vec::new();
    if spec.s == spec.t {
        // the axial orbit: w(0, 0) = 1 by the Δ → 0 limit
        roots.push((0.0, 0.0));
    }
    // w(α, 0) is not monotone near α = 0 (it touches 1 there), so bracket
    // on a fine sample of the open base edge
    let n = 4000;
    let span = s2 + t2;
    let xs: Vec<f64> = (1..n)
        .map(|i| -s2 + span * i as f64 / n as f64)
        .filter(|&a| a != 0.0)
        .collect();
    let fs: Vec<f64> = xs.iter().map(|&a| f(a)).collect();
    for i in 0..xs.len() - 1 {
        let (a, b, fa, fb) = (xs[i], xs[i + 1], fs[i], fs[i + 1]);
        if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
            continue;
        }
        let root = bisect(&f, a, b, fa);
        let (r1, _) = closure_residual(cavity, root, 0.0, spec.s, spec.t, 0)?;
        if r1.abs() > CLOSURE_TOL {
            continue;
        }
        // an odd number of axis crossings leaves the orbit mirrored
        let crossings = if root < 0.0 { spec.t } else { spec.s };
        if crossings % 2 == 1 {
            continue;
        }
        roots.push((root, 0.0));
    }
    roots.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(roots)
}

fn bisect(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

struct Residual<'a> {
    cavity: &'a Cavity,
    spec: OrbitSpec,
    ln_ratio: f64,
}

impl Residual<'_> {
    fn eval(&self, a: f64, b: f64) -> Option<[f64; 2]> {
        let w = winding_number(self.cavity, a, b).ok()?;
        let ts = theta_sigma(self.cavity, a, b).ok()?;
        let tt = theta_tau(self.cavity, a, b).ok()?;
        let r = [
            w.ln() - self.ln_ratio,
            self.spec.s as f64 * ts + self.spec.t as f64 * tt - self.spec.l as f64,
        ];
        (r[0].is_finite() && r[1].is_finite()).then_some(r)
    }
}

fn norm(r: [f64; 2]) -> f64 {
    r[0].hypot(r[1])
}

fn solve_spatial(
    cavity: &Cavity,
    spec: OrbitSpec,
    opts: &SolverOptions,
) -> Result<Vec<(f64, f64)>> {
    let tri = admissible_region(cavity);
    let (a_lo, a_hi) = tri.alpha_range();
    let scale = cavity.scale();
    let res = Residual {
        cavity,
        spec,
        ln_ratio: spec.ratio().ln(),
    };

    // scan the triangle in (u, v) with α = a_lo + u(a_hi − a_lo), β = v·β_max(α)
    let n = opts.scan;
    let point = |i: usize, j: usize| {
        let u = (i as f64 + 0.5) / n as f64;
        let v = (j as f64 + 0.5) / n as f64;
        let a = a_lo + u * (a_hi - a_lo);
        (a, v * tri.beta_max(a))
    };
    let mut grid = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in grid.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let (a, b) = point(i, j);
            if let Some(r) = res.eval(a, b) {
                *cell = norm(r);
            }
        }
    }
    let mut seeds = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let c = grid[i][j];
            if !c.is_finite() {
                continue;
            }
            let mut is_min = true;
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let (ii, jj) = (i as i64 + di, j as i64 + dj);
                    if (di, dj) == (0, 0) || ii < 0 || jj < 0 || ii >= n as i64 || jj >= n as i64 {
                        continue;
                    }
                    if grid[ii as usize][jj as usize] < c {
                        is_min = false;
                    }
                }
            }
            if is_min {
                seeds.push((c, point(i, j)));
            }
        }
    }
    seeds.sort_by(|x, y| x.0.total_cmp(&y.0));

    let mut roots: Vec<(f64, f64)> = Vec::new();
    let mut best = f64::INFINITY;
    for &(_, (a, b)) in &seeds {
        match newton(&res, &tri, scale, a, b, opts) {
            Ok((ra, rb)) => {
                let (r1, r2) = closure_residual(cavity, ra, rb, spec.s, spec.t, spec.l)?;
                if r1.abs() > opts.tol || r2.abs() > opts.tol {
                    best = best.min(r1.abs().max(r2.abs()));
                    continue;
                }
                let distinct = roots.iter().all(|&(xa, xb)| {
                    ((xa - ra) / scale).hypot((xb - rb) / (scale * scale)) > opts.separation
                });
                if distinct {
                    roots.push((ra, rb));
                }
            }
            Err(Error::NonConvergence { residual, .. }) => best = best.min(residual),
            Err(e) => return Err(e),
        }
    }
    if roots.is_empty() && best < 1e-6 {
        return Err(Error::NonConvergence {
            what: format!("Newton iteration for orbit {spec}"),
            residual: best,
        });
    }
    roots.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    Ok(roots)
}

fn clip(tri: &crate::dynamics::Triangle, margin: f64, a: f64, b: f64) -> (f64, f64) {
    let (lo, hi) = tri.alpha_range();
    let a = a.clamp(lo + margin, hi - margin);
    let top = tri.beta_max(a) - margin;
    let b = if top <= margin {
        0.5 * tri.beta_max(a)
    } else {
        b.clamp(margin, top)
    };
    (a, b)
}

fn newton(
    res: &Residual<'_>,
    tri: &crate::dynamics::Triangle,
    scale: f64,
    a0: f64,
    b0: f64,
    opts: &SolverOptions,
) -> Result<(f64, f64)> {
    let margin = opts.margin * scale;
    let (mut a, mut b) = clip(tri, margin, a0, b0);
    let mut r = res.eval(a, b).ok_or_else(|| Error::NonConvergence {
        what: "closure residual undefined at seed".into(),
        residual: f64::INFINITY,
    })?;
    for _ in 0..opts.max_iter {
        if r[0].abs() < 0.1 * opts.tol && r[1].abs() < 0.1 * opts.tol {
            return Ok((a, b));
        }
        // forward differences stepping toward the interior
        let ha = opts.fd_step * scale;
        let hb = opts.fd_step * scale * scale;
        let (ha, hb) = {
            let (pa, _) = clip(tri, margin, a + ha, b);
            let (_, pb) = clip(tri, margin, a, b + hb);
            (if pa > a { ha } else { -ha }, if pb > b { hb } else { -hb })
        };
        let (Some(ra), Some(rb)) = (res.eval(a + ha, b), res.eval(a, b + hb)) else {
            break;
        };
        let j = [
            [(ra[0] - r[0]) / ha, (rb[0] - r[0]) / hb],
            [(ra[1] - r[1]) / ha, (rb[1] - r[1]) / hb],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let da = -(j[1][1] * r[0] - j[0][1] * r[1]) / det;
        let db = -(-j[1][0] * r[0] + j[0][0] * r[1]) / det;
        let n0 = norm(r);
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let (na, nb) = clip(tri, margin, a + lambda * da, b + lambda * db);
            if let Some(nr) = res.eval(na, nb) {
                if norm(nr) < n0 {
                    a = na;
                    b = nb;
                    r = nr;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if r[0].abs() < opts.tol && r[1].abs() < opts.tol {
        return Ok((a, b));
    }
    Err(Error::NonConvergence {
        what: "orbit Newton iteration stalled".into(),
        residual: norm(r),
    })
}

/// Maupertuis length `L = 2π(sJ_σ + tJ_τ + ℓ|J_φ|)/P`.
pub fn orbit_length(cavity: &Cavity, spec: OrbitSpec, mc: &MotionConstants) -> Result<f64> {
    // 2πJ/P = 2·(πJ/P) keeps the axial limit exact
    let js = reduced_action(cavity.sigma0(), mc.alpha, mc.beta)?;
    let jt = reduced_action(cavity.tau0(), -mc.alpha, mc.beta)?;
    Ok(2.0 * (spec.s as f64 * js + spec.t as f64 * jt) + 2.0 * PI * spec.l as f64 * mc.beta.sqrt())
}

/// A built and verified periodic orbit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    pub spec: OrbitSpec,
    pub constants: MotionConstants,
    /// Maupertuis length.
    pub length: f64,
    /// Summed segment lengths of the simulated period.
    pub measured_length: f64,
    /// One period, `s + t` bounces.
    pub trajectory: Trajectory,
    /// Return mismatch of the position (absolute) and of the momentum
    /// (relative to `P`), whichever is larger after scaling the position
    /// mismatch by the cavity scale.
    pub closure_error: f64,
    /// Signed azimuthal angle swept per period; 0 for meridional orbits.
    pub azimuthal_advance: f64,
}

/// Thresholds applied by [`build_orbit`].
pub const CLOSURE_POSITION_TOL: f64 = 1e-6;
pub const AZIMUTH_TOL: f64 = 1e-6;

/// Simulates one period from the standard starting state and verifies the
/// closure, the bounce counts and the azimuthal advance.
pub fn build_orbit(
    cavity: &Cavity,
    spec: OrbitSpec,
    constants: &MotionConstants,
    p: f64,
) -> Result<PeriodicOrbit> {
    let mc = MotionConstants::new(p, constants.alpha, constants.beta)?;
    let start = starting_state(cavity, &mc)?;
    let trajectory = simulate(cavity, &start, (spec.s + spec.t) as usize)?;
    let end = trajectory.final_state();
    let scale = cavity.scale();
    let closure_error = (end.position.distance(start.position) / scale)
        .max(end.momentum.distance(start.momentum) / p);
    let fail = |msg: String| Err(Error::ClosureFailure(format!("orbit {spec}: {msg}")));
    if closure_error > CLOSURE_POSITION_TOL {
        return fail(format!("return mismatch {closure_error:e}"));
    }
    let (ns, nt) = trajectory.wall_counts();
    if (ns, nt) != (spec.s as usize, spec.t as usize) {
        return fail(format!("bounce counts ({ns},{nt})"));
    }
    let azimuthal_advance = if mc.beta > crate::actions::PLANAR_BETA {
        let adv = trajectory.azimuthal_advance();
        if (adv.abs() - 2.0 * PI * spec.l as f64).abs() > AZIMUTH_TOL {
            return fail(format!("azimuthal advance {adv}"));
        }
        adv
    } else {
        let off_plane = trajectory
            .vertices()
            .iter()
            .map(|v| v.y.abs())
            .fold(0.0, f64::max);
        if off_plane > CLOSURE_POSITION_TOL * scale {
            return fail(format!("meridional orbit left its plane by {off_plane:e}"));
        }
        0.0
    };
    let length = p.signum() * orbit_length(cavity, spec, &mc)?;
    Ok(PeriodicOrbit {
        spec,
        constants: mc,
        length,
        measured_length: trajectory.total_length(),
        trajectory,
        closure_error,
        azimuthal_advance,
    })
}
