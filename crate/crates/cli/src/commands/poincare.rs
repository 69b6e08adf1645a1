//! `poincare`: phase maps `α(q, p_q)` and `β(q, p_q)` on a grid, one grid per
//! requested `(α, β)` pair and plane.
//!
//! For the pair `(α_i, β_j)` the α map is evaluated at `β = β_j` and the β
//! map at `α = α_i`. The level sets `α = α_i` and `β = β_j` of the two maps
//! then trace the same phase curve of that trajectory family.

use paracavity::dynamics::{poincare_field, FieldKind, PhaseGrid, SectionPlane};
use serde_json::{json, Value};

use super::{contour, Run};
use crate::config::{Format, PlaneChoice};
use crate::error::{CliResult, Context};
use crate::output::{Column, Svg, Table};

const DEFAULT_ALPHAS: [f64; 3] = [-5.0, 0.0, 2.0];
const DEFAULT_BETAS: [f64; 3] = [0.0, 0.1, 0.2];
/// Inner end of the coordinate range relative to the wall; `q = 0` is singular for `β > 0`.
const Q_MIN_FRACTION: f64 = 1e-3;

pub fn run(run: &mut Run) -> CliResult<()> {
    let cfg = run.cfg;
    let cavity = cfg.cavity;
    let p = cfg.momentum();
    let alphas = cfg
        .params
        .alpha
        .clone()
        .unwrap_or_else(|| DEFAULT_ALPHAS.to_vec());
    let betas = cfg
        .params
        .beta
        .clone()
        .unwrap_or_else(|| DEFAULT_BETAS.to_vec());
    let (nq, np) = cfg.grid()?;
    let planes: &[SectionPlane] = match cfg.params.plane.unwrap_or(PlaneChoice::Sigma) {
        PlaneChoice::Sigma => &[SectionPlane::Sigma],
        PlaneChoice::Tau => &[SectionPlane::Tau],
        PlaneChoice::Both => &[SectionPlane::Sigma, SectionPlane::Tau],
    };
    // |p_q|/P ≤ √(σ₀² + τ₀²) anywhere in the admissible triangle
    let p_max = p * cavity.scale().sqrt();

    let mut index = Vec::new();
    let mut worst_parity: f64 = 0.0;
    let mut worst_planar: Option<f64> = None;
    for &plane in planes {
        let (pname, qname, wall) = match plane {
            SectionPlane::Sigma => ("sigma", "sigma", cavity.sigma0()),
            SectionPlane::Tau => ("tau", "tau", cavity.tau0()),
        };
        let grid = PhaseGrid::symmetric(Q_MIN_FRACTION * wall, wall, p_max, nq, np);
        for (i, &alpha) in alphas.iter().enumerate() {
            for (j, &beta) in betas.iter().enumerate() {
                let what = format!("{pname} plane at (alpha, beta) = ({alpha}, {beta})");
                let fa = poincare_field(plane, FieldKind::Alpha, beta, p, &grid).context(&what)?;
                let fb = poincare_field(plane, FieldKind::Beta, alpha, p, &grid).context(&what)?;
                let parity = parity_error(&fa.values).max(parity_error(&fb.values));
                worst_parity = worst_parity.max(parity);
                let mut entry = json!({
                    "plane": pname,
                    "alpha": alpha,
                    "beta": beta,
                    "p": p,
                    "q_range": [grid.q_min, grid.q_max],
                    "p_range": [grid.p_min, grid.p_max],
                    "nq": nq,
                    "np": np,
                    "parity_error": parity,
                });
                if plane == SectionPlane::Tau && beta == 0.0 {
                    // planar billiard: α = τ² − p_τ²/P²
                    let dev = planar_deviation(&fa.coordinates, &fa.momenta, &fa.values, p);
                    worst_planar = Some(worst_planar.unwrap_or(0.0).max(dev));
                    entry["planar_deviation"] = Value::from(dev);
                }
                let stem = format!("poincare_{pname}_a{i}_b{j}");
                if cfg.wants(Format::Csv) {
                    let mut t = Table::new(
                        &format!("paracavity poincare: {what}; alpha_field at beta={beta}, beta_field at alpha={alpha}"),
                        vec![
                            Column::float(qname, "sqrt(length)"),
                            Column::float(&format!("p_{qname}"), "momentum*sqrt(length)"),
                            Column::float("alpha_field", "length"),
                            Column::float("beta_field", "length^2"),
                        ],
                    );
                    for (a, &q) in fa.coordinates.iter().enumerate() {
                        for (b, &pq) in fa.momenta.iter().enumerate() {
                            t.push(vec![
                                q.into(),
                                pq.into(),
                                fa.values[a][b].into(),
                                fb.values[a][b].into(),
                            ]);
                        }
                    }
                    run.bundle.csv(&format!("{stem}.csv"), &t)?;
                    entry["file"] = Value::from(format!("{stem}.csv"));
                }
                if cfg.wants(Format::Svg) {
                    let mut svg =
                        Svg::new(&format!("{what}: alpha level (blue), beta level (red)"));
                    for seg in contour(&fa.coordinates, &fa.momenta, &fa.values, alpha) {
                        svg.add("alpha-level", "blue", seg.to_vec());
                    }
                    for seg in contour(&fb.coordinates, &fb.momenta, &fb.values, beta) {
                        svg.add("beta-level", "red", seg.to_vec());
                    }
                    let (q0, q1) = (grid.q_min, grid.q_max);
                    svg.add(
                        "frame",
                        "gray",
                        vec![
                            (q0, -p_max),
                            (q1, -p_max),
                            (q1, p_max),
                            (q0, p_max),
                            (q0, -p_max),
                        ],
                    );
                    run.bundle.svg(&format!("{stem}.svg"), &svg)?;
                }
                index.push(entry);
            }
        }
    }
    run.achieve("parity_error", worst_parity);
    if let Some(d) = worst_planar {
        run.achieve("planar_deviation", d);
    }
    if cfg.wants(Format::Json) {
        run.bundle
            .json("poincare.json", json!({ "grids": index }))?;
    }
    Ok(())
}

/// Largest `|f(q, p) − f(q, −p)|`; the momentum grid is mirror symmetric.
fn parity_error(values: &[Vec<f64>]) -> f64 {
    values
        .iter()
        .flat_map(|row| row.iter().zip(row.iter().rev()).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max)
}

fn planar_deviation(qs: &[f64], ps: &[f64], values: &[Vec<f64>], p: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for (a, &q) in qs.iter().enumerate() {
        for (b, &pq) in ps.iter().enumerate() {
            let expected = q * q - (pq / p) * (pq / p);
            worst = worst.max((values[a][b] - expected).abs());
        }
    }
    worst
}
