//! `orbit`: solve the closure conditions and build the periodic orbits.

use paracavity::actions::closure_residual;
use paracavity::orbits::{build_orbit, solve_orbit_all, SolverOptions};
use paracavity::{Error, OrbitSpec, PeriodicOrbit};
use rayon::prelude::*;
use serde_json::{json, Value};

use super::{meridional_figure, Run};
use crate::config::Format;
use crate::error::{CliError, CliResult, Context};
use crate::output::{Column, Table};

const DEFAULT_MAX_BOUNCES: u32 = 7;

struct Solved {
    root: usize,
    orbit: PeriodicOrbit,
    residual: (f64, f64),
}

enum Outcome {
    Solved(Vec<Solved>),
    /// No root in the admissible triangle.
    Unsolvable(String),
}

fn solve(
    run_cavity: &paracavity::Cavity,
    spec: OrbitSpec,
    opts: &SolverOptions,
    p: f64,
) -> CliResult<Outcome> {
    let roots = match solve_orbit_all(run_cavity, spec, opts) {
        Ok(r) => r,
        Err(Error::NoSolution { reason, .. }) => return Ok(Outcome::Unsolvable(reason)),
        Err(e) => return Err(CliError::from_core(&format!("solving orbit {spec}"), e)),
    };
    let mut out = Vec::with_capacity(roots.len());
    for (root, mc) in roots.iter().enumerate() {
        let what = format!(
            "orbit {spec} root {root} at (alpha, beta) = ({}, {})",
            mc.alpha, mc.beta
        );
        let residual = closure_residual(run_cavity, mc.alpha, mc.beta, spec.s, spec.t, spec.l)
            .context(&what)?;
        let orbit = build_orbit(run_cavity, spec, mc, p).context(&what)?;
        out.push(Solved {
            root,
            orbit,
            residual,
        });
    }
    Ok(Outcome::Solved(out))
}

pub fn run(run: &mut Run) -> CliResult<()> {
    let cfg = run.cfg;
    let cavity = cfg.cavity;
    let p = cfg.momentum();
    let explicit = cfg.orbit_specs()?;
    let specs: Vec<OrbitSpec> = match &explicit {
        Some(list) => {
            let mut v = list
                .iter()
                .map(|s| OrbitSpec::new(s[0], s[1], s[2]))
                .collect::<paracavity::Result<Vec<_>>>()
                .context("orbit list")?;
            v.sort();
            v.dedup();
            v
        }
        None => OrbitSpec::enumerate(cfg.params.max_bounces.unwrap_or(DEFAULT_MAX_BOUNCES)),
    };
    let opts = SolverOptions {
        scan: cfg.tolerances.orbit_scan,
        tol: cfg.tolerances.closure,
        ..SolverOptions::default()
    };
    let outcomes: Vec<(OrbitSpec, CliResult<Outcome>)> = specs
        .par_iter()
        .map(|&spec| (spec, solve(&cavity, spec, &opts, p)))
        .collect();

    let mut table = Table::new(
        "paracavity orbit: one row per closed orbit (root indexes distinct solutions of one spec)",
        vec![
            Column::int("s"),
            Column::int("t"),
            Column::int("l"),
            Column::int("root"),
            Column::float("alpha", "length"),
            Column::float("beta", "length^2"),
            Column::float("winding_residual", "1"),
            Column::float("azimuth_residual", "1"),
            Column::float("closure_error", "relative"),
            Column::float("azimuthal_advance", "rad"),
            Column::float("length", "length"),
            Column::float("measured_length", "length"),
            Column::float("length_rel_error", "relative"),
            Column::text("bounce_file"),
        ],
    );
    let mut docs = Vec::new();
    let mut unsolved = Vec::new();
    let mut first_failure = None;
    let (mut worst_closure, mut worst_length): (f64, f64) = (0.0, 0.0);
    for (spec, outcome) in outcomes {
        let solved = match outcome {
            Ok(Outcome::Solved(v)) => v,
            Ok(Outcome::Unsolvable(reason)) => {
                if explicit.is_some() {
                    return Err(CliError::domain(format!(
                        "orbit {spec} has no solution in this cavity: {reason}"
                    )));
                }
                unsolved.push(json!({"s": spec.s, "t": spec.t, "l": spec.l, "reason": reason}));
                continue;
            }
            Err(e) => {
                run.warnings.push(e.message.clone());
                first_failure.get_or_insert(e);
                continue;
            }
        };
        for sol in solved {
            let o = &sol.orbit;
            let rel = (o.length - o.measured_length).abs() / o.length.abs();
            worst_closure = worst_closure.max(o.closure_error);
            worst_length = worst_length.max(rel);
            let stem = format!("orbit_{}_{}_{}_{}", spec.s, spec.t, spec.l, sol.root);
            let bounce_file = if cfg.wants(Format::Csv) {
                format!("{stem}.csv")
            } else {
                String::new()
            };
            table.push(vec![
                spec.s.into(),
                spec.t.into(),
                spec.l.into(),
                sol.root.into(),
                o.constants.alpha.into(),
                o.constants.beta.into(),
                sol.residual.0.into(),
                sol.residual.1.into(),
                o.closure_error.into(),
                o.azimuthal_advance.into(),
                o.length.into(),
                o.measured_length.into(),
                rel.into(),
                bounce_file.clone().into(),
            ]);
            if cfg.wants(Format::Csv) {
                run.bundle.csv(&bounce_file, &bounce_table(o))?;
            }
            if cfg.wants(Format::Svg) {
                let mut svg = meridional_figure(
                    &format!("orbit {} projected on the (x, z) plane", spec),
                    &cavity,
                    None,
                );
                svg.add(
                    "orbit",
                    "blue",
                    o.trajectory.vertices().iter().map(|v| (v.x, v.z)).collect(),
                );
                run.bundle.svg(&format!("{stem}.svg"), &svg)?;
            }
            docs.push(json!({
                "s": spec.s, "t": spec.t, "l": spec.l, "root": sol.root,
                "constants": {"p": o.constants.p, "alpha": o.constants.alpha, "beta": o.constants.beta},
                "residuals": [sol.residual.0, sol.residual.1],
                "closure_error": o.closure_error,
                "azimuthal_advance": o.azimuthal_advance,
                "length": o.length,
                "measured_length": o.measured_length,
                "vertices": o.trajectory.vertices().iter().map(|v| [v.x, v.y, v.z]).collect::<Vec<_>>(),
                "walls": o.trajectory.bounces.iter().map(|b| b.wall.to_string()).collect::<Vec<_>>(),
            }));
        }
    }
    run.achieve("orbits", table.rows.len());
    run.achieve("max_closure_error", worst_closure);
    run.achieve("max_length_rel_error", worst_length);
    if cfg.wants(Format::Csv) {
        run.bundle.csv("orbits.csv", &table)?;
    }
    if cfg.wants(Format::Json) {
        run.bundle.json(
            "orbits.json",
            json!({"orbits": docs, "unsolved": Value::Array(unsolved)}),
        )?;
    }
    match first_failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn bounce_table(o: &PeriodicOrbit) -> Table {
    let mut t = Table::new(
        &format!(
            "paracavity orbit {}: one period, row 0 is the start",
            o.spec
        ),
        vec![
            Column::int("bounce"),
            Column::float("x", "length"),
            Column::float("y", "length"),
            Column::float("z", "length"),
            Column::text("wall"),
            Column::float("cumulative_length", "length"),
        ],
    );
    let s = o.trajectory.initial.position;
    t.push(vec![
        0usize.into(),
        s.x.into(),
        s.y.into(),
        s.z.into(),
        "start".into(),
        0.0.into(),
    ]);
    for (i, b) in o.trajectory.bounces.iter().enumerate() {
        t.push(vec![
            (i + 1).into(),
            b.point.x.into(),
            b.point.y.into(),
            b.point.z.into(),
            b.wall.to_string().into(),
            b.cumulative_length.into(),
        ]);
    }
    t
}
