//! `trajectory`: bounce table and caustics of one trajectory family.

use paracavity::dynamics::{caustics, segment_min_sigma_tau, simulate, starting_state};
use paracavity::{MotionConstants, Vector3};
use serde_json::json;

use super::{meridional_figure, Run};
use crate::config::Format;
use crate::error::{CliResult, Context};
use crate::output::{float_json, Column, Table};

const DEFAULT_BOUNCES: usize = 200;
/// Samples per straight segment in the (ρ, z) figure, where segments curve.
const SEGMENT_SAMPLES: usize = 16;

pub fn run(run: &mut Run) -> CliResult<()> {
    let cfg = run.cfg;
    let cavity = cfg.cavity;
    let (alpha, beta) = cfg.single_constants()?;
    let p = cfg.momentum();
    let bounces = cfg.params.bounces.unwrap_or(DEFAULT_BOUNCES);
    let mc = MotionConstants::new(p, alpha, beta).context("motion constants")?;
    let start = starting_state(&cavity, &mc).context("starting state")?;
    let traj = simulate(&cavity, &start, bounces).context(&format!(
        "simulating {bounces} bounces of (P, alpha, beta) = ({p}, {alpha}, {beta}) in the ({}, {}) cavity",
        cavity.sigma0(),
        cavity.tau0()
    ))?;
    let cs = caustics(alpha, beta);

    let mut table = Table::new(
        "paracavity trajectory: row 0 is the starting point, then one row per wall contact",
        vec![
            Column::int("bounce"),
            Column::float("x", "length"),
            Column::float("y", "length"),
            Column::float("z", "length"),
            Column::text("wall"),
            Column::float("cumulative_length", "length"),
            Column::float("drift_p", "relative"),
            Column::float("drift_alpha", "relative"),
            Column::float("drift_beta", "relative"),
            Column::float("segment_min_sigma", "sqrt(length)"),
            Column::float("segment_min_tau", "sqrt(length)"),
            Column::int("grazing"),
        ],
    );
    let s0 = start.position;
    table.push(vec![
        0usize.into(),
        s0.x.into(),
        s0.y.into(),
        s0.z.into(),
        "start".into(),
        0.0.into(),
        0.0.into(),
        0.0.into(),
        0.0.into(),
        f64::NAN.into(),
        f64::NAN.into(),
        0usize.into(),
    ]);
    let mut prev = s0;
    for (i, b) in traj.bounces.iter().enumerate() {
        let (ms, mt) = segment_min_sigma_tau(prev, b.point);
        prev = b.point;
        table.push(vec![
            (i + 1).into(),
            b.point.x.into(),
            b.point.y.into(),
            b.point.z.into(),
            b.wall.to_string().into(),
            b.cumulative_length.into(),
            b.drift.p.into(),
            b.drift.alpha.into(),
            b.drift.beta.into(),
            ms.into(),
            mt.into(),
            usize::from(b.grazing).into(),
        ]);
    }

    let drift = traj.max_drift();
    let (min_sigma, min_tau) = traj.min_sigma_tau();
    let violation = (cs.sigma_c - min_sigma).max(cs.tau_c - min_tau).max(0.0);
    let (n_sigma, n_tau) = traj.wall_counts();
    let tol = cfg.tolerances;
    if drift.max() > tol.drift {
        run.warnings.push(format!(
            "largest drift {:e} exceeds {:e}",
            drift.max(),
            tol.drift
        ));
    }
    if violation > tol.caustic {
        run.warnings
            .push(format!("caustic violated by {violation:e}"));
    }
    run.achieve("max_drift", drift.max());
    run.achieve("caustic_violation", violation);
    run.achieve("sigma_tangency_gap", min_sigma - cs.sigma_c);
    run.achieve("tau_tangency_gap", min_tau - cs.tau_c);

    if cfg.wants(Format::Csv) {
        run.bundle.csv("trajectory.csv", &table)?;
    }
    if cfg.wants(Format::Json) {
        let doc = json!({
            "constants": {"p": p, "alpha": alpha, "beta": beta, "c": mc.c(), "lz_abs": mc.lz_abs()},
            "caustics": {"sigma_c": cs.sigma_c, "tau_c": cs.tau_c, "delta": cs.delta},
            "initial": {"position": vec3(start.position), "momentum": vec3(start.momentum)},
            "bounces": traj.bounces.len(),
            "sigma_wall_contacts": n_sigma,
            "tau_wall_contacts": n_tau,
            "total_length": traj.total_length(),
            "azimuthal_advance": traj.azimuthal_advance(),
            "min_sigma": float_json(min_sigma),
            "min_tau": float_json(min_tau),
            "max_drift": {"p": drift.p, "alpha": drift.alpha, "beta": drift.beta},
        });
        run.bundle.json("trajectory.json", doc)?;
    }
    if cfg.wants(Format::Svg) {
        let mut svg = meridional_figure(
            "trajectory in the (rho, z) half plane",
            &cavity,
            Some((cs.sigma_c, cs.tau_c)),
        );
        let mut path = Vec::new();
        let verts = traj.vertices();
        for w in verts.windows(2) {
            for j in 0..SEGMENT_SAMPLES {
                let t = j as f64 / SEGMENT_SAMPLES as f64;
                let q = w[0] + (w[1] - w[0]) * t;
                path.push((q.rho(), q.z));
            }
        }
        if let Some(last) = verts.last() {
            path.push((last.rho(), last.z));
        }
        svg.add("trajectory", "blue", path);
        run.bundle.svg("trajectory.svg", &svg)?;
    }
    Ok(())
}

fn vec3(v: Vector3) -> [f64; 3] {
    [v.x, v.y, v.z]
}
