//! `selftest`: quick oracle suites over the library.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use paracavity::actions::{action_sigma_closed, action_sigma_quadrature, dj_dalpha, ClosedFormAux};
use paracavity::dynamics::{
    admissible_region, caustics, planar_constant, simulate, starting_state,
};
use paracavity::quantum::radial_s_complex;
use paracavity::specfun::{kummer_m, whittaker_m};
use paracavity::{Cavity, MotionConstants, PhaseState, WallId};
use serde::Serialize;

use crate::config::Tolerances;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Serialize)]
pub struct Suite {
    pub name: &'static str,
    pub passed: bool,
    /// Worst deviation found.
    pub achieved: f64,
    pub tolerance: f64,
    pub checks: usize,
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<28} achieved {:.3e}  tolerance {:.0e}  ({} checks)",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.achieved,
            self.tolerance,
            self.checks
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub suites: Vec<Suite>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed)
    }
}

/// Tracks the worst deviation of a suite; an evaluation error counts as a failure.
struct Worst {
    value: f64,
    checks: usize,
    failed: bool,
}

impl Worst {
    fn new() -> Self {
        Self {
            value: 0.0,
            checks: 0,
            failed: false,
        }
    }

    fn add(&mut self, r: paracavity::Result<f64>) {
        self.checks += 1;
        match r {
            Ok(v) if v.is_finite() => self.value = self.value.max(v),
            _ => self.failed = true,
        }
    }

    fn finish(self, name: &'static str, tolerance: f64) -> Suite {
        let achieved = if self.failed {
            f64::INFINITY
        } else {
            self.value
        };
        Suite {
            name,
            passed: achieved < tolerance,
            achieved,
            tolerance,
            checks: self.checks,
        }
    }
}

/// `(α, β)` on an `n × n` grid over the closed admissible triangle.
fn admissible_grid(cavity: &Cavity, n: usize) -> Vec<(f64, f64)> {
    let tri = admissible_region(cavity);
    let (lo, hi) = tri.alpha_range();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        let alpha = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let bmax = tri.beta_max(alpha).max(0.0);
        for j in 0..n {
            out.push((alpha, bmax * j as f64 / (n - 1) as f64));
        }
    }
    out
}

/// The closed-form action with its `G/2` term scaled by `1 + delta`.
fn closed_form(w: f64, alpha: f64, beta: f64, delta: f64) -> paracavity::Result<f64> {
    let j = action_sigma_closed(w, alpha, beta, 1.0)?;
    if delta == 0.0 {
        return Ok(j);
    }
    Ok(j + delta * ClosedFormAux::new(w, alpha, beta).g / (2.0 * PI))
}

fn closed_vs_quadrature(tol: &Tolerances, delta: f64) -> Suite {
    let mut worst = Worst::new();
    for (s0, t0) in [(3.0, 2.0), (1.0, 1.0)] {
        let cavity = Cavity::new(s0, t0).expect("valid cavity");
        for (a, b) in admissible_grid(&cavity, 50) {
            for (w, sign) in [(s0, 1.0), (t0, -1.0)] {
                worst.add((|| {
                    let c = closed_form(w, sign * a, b, delta)?;
                    let q = action_sigma_quadrature(w, sign * a, b, 1.0)?;
                    Ok((c - q).abs())
                })());
            }
        }
    }
    worst.finish("closed-form-vs-quadrature", tol.action)
}

fn action_derivatives() -> Suite {
    let cavity = Cavity::new(3.0, 2.0).expect("valid cavity");
    let mut worst = Worst::new();
    let h = 1e-4;
    for &(a, b) in &[
        (0.0, 1.0),
        (-5.0, 2.0),
        (1.0, 0.5),
        (-2.0, 2.0),
        (-8.0, 0.3),
    ] {
        for (wall, w, sign) in [(WallId::SigmaWall, 3.0, 1.0), (WallId::TauWall, 2.0, -1.0)] {
            worst.add((|| {
                let f = |x: f64| action_sigma_closed(w, sign * x, b, 1.0);
                let fd = (f(a + h)? - f(a - h)?) / (2.0 * h);
                Ok((fd - dj_dalpha(wall, &cavity, a, b, 1.0)?).abs())
            })());
        }
    }
    worst.finish("action-alpha-derivative", 1e-6)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

fn specfun_identities(tol: &Tolerances) -> Suite {
    let params = [
        Complex64::new(-2.5, 1.3),
        Complex64::new(0.7, -3.1),
        Complex64::new(4.2, 0.5),
    ];
    let lowers = [
        Complex64::new(0.8, 0.0),
        Complex64::new(2.5, -1.5),
        Complex64::new(5.1, 3.3),
    ];
    let mut args = Vec::new();
    for r in [0.5, 7.0, 25.0, 60.0, 79.0] {
        for th in [0.3, 1.9, 3.0, -2.2] {
            args.push(Complex64::from_polar(r, th));
        }
    }
    let mut worst = Worst::new();
    for &z in &args {
        for &b in &lowers {
            for &a in &params {
                // Kummer's transformation M(a,b,z) = e^z M(b−a,b,−z)
                worst.add((|| {
                    Ok(rel(kummer_m(a, b, z)?, z.exp() * kummer_m(b - a, b, -z)?))
                })());
            }
            worst.add((|| Ok(rel(kummer_m(b, b, z)?, z.exp())))());
        }
        // M_{0,1/2}(z) = 2 sinh(z/2)
        worst.add((|| {
            Ok(rel(
                whittaker_m(Complex64::new(0.0, 0.0), Complex64::new(0.5, 0.0), z)?,
                2.0 * (z / 2.0).sinh(),
            ))
        })());
    }
    worst.finish("specfun-identities", tol.specfun)
}

fn radial_realness() -> Suite {
    let mut worst = Worst::new();
    for &(a, k) in &[(0.3, 0.8), (-1.7, 1.4), (2.2, 2.0), (-4.0, 3.0)] {
        for m in 0..4 {
            for j in 1..=12 {
                let sigma = 3.0 * j as f64 / 12.0;
                worst.add(
                    radial_s_complex(sigma, a, k, m).map(|v| v.im.abs() / v.re.abs().max(1.0)),
                );
            }
        }
    }
    worst.finish("radial-realness", 1e-9)
}

fn conservation(tol: &Tolerances) -> Suite {
    let cavity = Cavity::new(3.0, 2.0).expect("valid cavity");
    let tri = admissible_region(&cavity);
    let mut worst = Worst::new();
    for &(fa, fb) in &[(0.1, 0.5), (0.35, 0.2), (0.5, 0.8), (0.7, 0.4), (0.9, 0.6)] {
        let (lo, hi) = tri.alpha_range();
        let alpha = lo + fa * (hi - lo);
        let beta = fb * tri.beta_max(alpha);
        worst.add((|| {
            let mc = MotionConstants::new(1.0, alpha, beta)?;
            let traj = simulate(&cavity, &starting_state(&cavity, &mc)?, 2000)?;
            let cs = caustics(alpha, beta);
            let (ms, mt) = traj.min_sigma_tau();
            let violation = (cs.sigma_c - ms).max(cs.tau_c - mt).max(0.0);
            Ok(traj.max_drift().max().max(violation))
        })());
    }
    worst.finish("conservation", tol.drift.max(tol.caustic))
}

fn planar(tol: &Tolerances) -> Suite {
    let cavity = Cavity::new(3.0, 2.0).expect("valid cavity");
    let mut worst = Worst::new();
    for alpha in [-6.0, -2.5, 0.7, 3.1] {
        worst.add((|| {
            let mc = MotionConstants::new(1.0, alpha, 0.0)?;
            let start = starting_state(&cavity, &mc)?;
            let c0 = planar_constant(&start)?;
            let traj = simulate(&cavity, &start, 2000)?;
            let mut d: f64 = 0.0;
            for b in &traj.bounces {
                let c = planar_constant(&PhaseState::new(b.point, b.outgoing))?;
                d = d.max((c - c0).abs() / c0.abs().max(1.0));
            }
            Ok(d)
        })());
    }
    worst.finish("planar-constant", tol.drift)
}

/// Runs every suite. `perturbation` scales the `G/2` term of the closed-form
/// action by `1 + perturbation` to check that the comparison can fail.
pub fn run(tol: &Tolerances, perturbation: f64) -> Report {
    Report {
        suites: vec![
            closed_vs_quadrature(tol, perturbation),
            action_derivatives(),
            specfun_identities(tol),
            radial_realness(),
            conservation(tol),
            planar(tol),
        ],
    }
}

pub fn outcome(report: &Report) -> CliResult<()> {
    if report.passed() {
        Ok(())
    } else {
        let failed: Vec<&str> = report
            .suites
            .iter()
            .filter(|s| !s.passed)
            .map(|s| s.name)
            .collect();
        Err(CliError::numerical(format!(
            "selftest failed: {}",
            failed.join(", ")
        )))
    }
}
