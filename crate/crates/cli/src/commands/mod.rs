//! The subcommands. Each one fills a [`Run`] with files, achieved
//! tolerances and warnings; [`crate::execute`] adds the metadata file.

mod mode;
mod orbit;
mod poincare;
mod spectrum;
mod trajectory;

use std::collections::BTreeMap;

use paracavity::Cavity;
use serde_json::Value;

use crate::config::{CommandKind, RunConfig};
use crate::error::CliResult;
use crate::output::{Bundle, Svg};

/// State of one command run.
pub struct Run<'a> {
    pub cfg: &'a RunConfig,
    pub bundle: Bundle,
    /// Measured accuracies, reported in the metadata.
    pub achieved: BTreeMap<String, Value>,
    pub warnings: Vec<String>,
}

impl Run<'_> {
    pub fn achieve(&mut self, key: &str, value: impl Into<Value>) {
        self.achieved.insert(key.into(), value.into());
    }
}

pub fn dispatch(run: &mut Run) -> CliResult<()> {
    match run.cfg.command {
        CommandKind::Trajectory => trajectory::run(run),
        CommandKind::Poincare => poincare::run(run),
        CommandKind::Orbit => orbit::run(run),
        CommandKind::Spectrum => spectrum::run(run),
        CommandKind::Mode => mode::run(run),
        CommandKind::Selftest => unreachable!("selftest does not write a bundle"),
    }
}

const CURVE_POINTS: usize = 121;

/// Meridional trace `(x, z)` of the sheet `σ = sigma`, for `τ ∈ [−tau_max, tau_max]`.
pub(crate) fn sigma_sheet(sigma: f64, tau_max: f64) -> Vec<(f64, f64)> {
    sample(-tau_max, tau_max)
        .map(|t| (sigma * t, 0.5 * (t * t - sigma * sigma)))
        .collect()
}

/// Meridional trace of the sheet `τ = tau`, for `σ ∈ [−sigma_max, sigma_max]`.
pub(crate) fn tau_sheet(tau: f64, sigma_max: f64) -> Vec<(f64, f64)> {
    sample(-sigma_max, sigma_max)
        .map(|s| (s * tau, 0.5 * (tau * tau - s * s)))
        .collect()
}

fn sample(lo: f64, hi: f64) -> impl Iterator<Item = f64> {
    (0..CURVE_POINTS).map(move |j| lo + (hi - lo) * j as f64 / (CURVE_POINTS - 1) as f64)
}

/// Meridional section of the cavity walls with optional caustics `(σ_c, τ_c)`.
pub(crate) fn meridional_figure(title: &str, cavity: &Cavity, caustics: Option<(f64, f64)>) -> Svg {
    let mut svg = Svg::new(title);
    svg.add(
        "sigma-wall",
        "black",
        sigma_sheet(cavity.sigma0(), cavity.tau0()),
    );
    svg.add(
        "tau-wall",
        "black",
        tau_sheet(cavity.tau0(), cavity.sigma0()),
    );
    if let Some((sc, tc)) = caustics {
        if sc > 0.0 && sc < cavity.sigma0() {
            svg.add("sigma-caustic", "red", sigma_sheet(sc, cavity.tau0()));
        }
        if tc > 0.0 && tc < cavity.tau0() {
            svg.add("tau-caustic", "red", tau_sheet(tc, cavity.sigma0()));
        }
    }
    svg
}

/// Line segments of the level set `field = level` by marching squares.
/// `field[i][j]` sits at `(xs[i], ys[j])`.
pub(crate) fn contour(
    xs: &[f64],
    ys: &[f64],
    field: &[Vec<f64>],
    level: f64,
) -> Vec<[(f64, f64); 2]> {
    let mut segs = Vec::new();
    let cross = |p: (f64, f64, f64), q: (f64, f64, f64)| -> Option<(f64, f64)> {
        let (a, b) = (p.2 - level, q.2 - level);
        if !(a.is_finite() && b.is_finite()) || (a > 0.0) == (b > 0.0) || a == b {
            return None;
        }
        let t = a / (a - b);
        Some((p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1)))
    };
    for i in 0..xs.len().saturating_sub(1) {
        for j in 0..ys.len().saturating_sub(1) {
            let c = [
                (xs[i], ys[j], field[i][j]),
                (xs[i + 1], ys[j], field[i + 1][j]),
                (xs[i + 1], ys[j + 1], field[i + 1][j + 1]),
                (xs[i], ys[j + 1], field[i][j + 1]),
            ];
            let pts: Vec<(f64, f64)> = (0..4).filter_map(|e| cross(c[e], c[(e + 1) % 4])).collect();
            // a saddle cell gives four crossings; pair them in order
            for pair in pts.chunks_exact(2) {
                segs.push([pair[0], pair[1]]);
            }
        }
    }
    segs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contour_of_a_plane_is_a_line() {
        let xs: Vec<f64> = (0..5).map(|i| i as f64).collect();
        let ys = xs.clone();
        let f: Vec<Vec<f64>> = xs
            .iter()
            .map(|&x| ys.iter().map(|&y| x + y).collect())
            .collect();
        let segs = contour(&xs, &ys, &f, 3.5);
        assert!(!segs.is_empty());
        for s in segs {
            for (x, y) in s {
                assert!((x + y - 3.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sheets_meet_at_the_rim() {
        let s = sigma_sheet(3.0, 2.0);
        let t = tau_sheet(2.0, 3.0);
        let (a, b) = (s.last().unwrap(), t.last().unwrap());
        assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
    }
}
