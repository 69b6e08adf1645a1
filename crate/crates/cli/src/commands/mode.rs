//! `mode`: one normalized eigenmode sampled on the meridional half plane
//! `φ = 0`, with its caustics and classical counterpart.

use paracavity::dynamics::caustics;
use paracavity::quantum::{
    correspond, eigenmode_eval, eigenpair_for_label, mode_constants, normalize,
};
use paracavity::ParabolicPoint;
use serde_json::{json, Value};

use super::{contour, meridional_figure, Run};
use crate::config::Format;
use crate::error::{CliResult, Context};
use crate::output::{float_json, Column, Table};

const DEFAULT_MAX_DENOMINATOR: u64 = 50;

fn meridional(sigma: f64, tau: f64) -> (f64, f64) {
    (sigma * tau, 0.5 * (tau * tau - sigma * sigma))
}

pub fn run(run: &mut Run) -> CliResult<()> {
    let cfg = run.cfg;
    let cavity = cfg.cavity;
    let f = &cfg.params;
    let (l, n, m) = (
        f.l.expect("validated"),
        f.n.expect("validated"),
        f.m.expect("validated"),
    );
    let label = format!("({l},{n},{m})");
    let pair = eigenpair_for_label(&cavity, l, n, m).context(&format!("eigenpair {label}"))?;
    let mode = normalize(&pair, &cavity).context(&format!("normalizing {label}"))?;
    let q = mode_constants(&mode).context(&format!("penetration ratio of {label}"))?;
    let pi = q.pi.expect("mode constants carry the penetration ratio");
    let cs = caustics(q.alpha_q, q.beta_q);
    let corr = correspond(
        &pair,
        &cavity,
        f.max_denominator.unwrap_or(DEFAULT_MAX_DENOMINATOR),
    )
    .context(&format!("classical counterpart of {label}"))?;

    let (ns, nt) = cfg.grid()?;
    let sigmas: Vec<f64> = (0..ns)
        .map(|i| cavity.sigma0() * i as f64 / (ns - 1) as f64)
        .collect();
    let taus: Vec<f64> = (0..nt)
        .map(|j| cavity.tau0() * j as f64 / (nt - 1) as f64)
        .collect();
    let mut re = vec![vec![0.0; nt]; ns];
    let mut density = vec![vec![0.0; nt]; ns];
    for (i, &s) in sigmas.iter().enumerate() {
        for (j, &t) in taus.iter().enumerate() {
            let psi = eigenmode_eval(&mode, ParabolicPoint::new(s, t, 0.0))
                .context(&format!("evaluating {label}"))?;
            re[i][j] = psi.re;
            density[i][j] = psi.norm_sqr();
        }
    }
    let peak_abs = density
        .iter()
        .flatten()
        .fold(0.0f64, |a, &b| a.max(b))
        .sqrt();
    let wall_abs = (0..ns)
        .map(|i| density[i][nt - 1])
        .chain((0..nt).map(|j| density[ns - 1][j]))
        .fold(0.0f64, f64::max)
        .sqrt();
    let (imax, jmax) = argmax(&density);
    let (smax, tmax) = (sigmas[imax], taus[jmax]);
    let in_allowed = smax >= cs.sigma_c && tmax >= cs.tau_c;
    run.achieve("pi", pi);
    run.achieve("wall_value_relative", wall_abs / peak_abs);
    run.achieve("normalization_change", mode.quadrature_change);
    run.achieve("wall_residual", pair.residual);

    if cfg.wants(Format::Csv) {
        let mut t = Table::new(
            &format!("paracavity mode {label}: samples on the meridional half plane phi = 0"),
            vec![
                Column::float("sigma", "sqrt(length)"),
                Column::float("tau", "sqrt(length)"),
                Column::float("rho", "length"),
                Column::float("z", "length"),
                Column::float("re_psi", "length^-3/2"),
                Column::float("abs2", "length^-3"),
            ],
        );
        for (i, &s) in sigmas.iter().enumerate() {
            for (j, &tau) in taus.iter().enumerate() {
                let (rho, z) = meridional(s, tau);
                t.push(vec![
                    s.into(),
                    tau.into(),
                    rho.into(),
                    z.into(),
                    re[i][j].into(),
                    density[i][j].into(),
                ]);
            }
        }
        run.bundle.csv("mode.csv", &t)?;
    }
    if cfg.wants(Format::Json) {
        let approx = match corr.approx {
            Some(a) => json!({
                "s": a.spec.s, "t": a.spec.t, "l": a.spec.l,
                "winding_error": a.winding_error,
                "azimuth_residual": a.azimuth_residual,
            }),
            None => Value::Null,
        };
        let doc = json!({
            "pair": {"l": pair.l, "n": pair.n, "m": pair.m, "a": pair.a, "k": pair.k, "k2": pair.energy(), "residual": pair.residual},
            "normalization": mode.normalization,
            "quadrature_panels": mode.panels,
            "constants": {"alpha": q.alpha_q, "beta": q.beta_q, "c": q.c_q, "lz": q.lz_q, "pi": pi},
            "caustics": {"sigma_c": cs.sigma_c, "tau_c": cs.tau_c, "delta": cs.delta},
            "density_peak": {"sigma": smax, "tau": tmax, "value": peak_abs * peak_abs, "in_allowed_region": in_allowed},
            "correspondence": {
                "p": corr.constants.p, "alpha": corr.constants.alpha, "beta": corr.constants.beta,
                "winding": float_json(corr.winding),
                "orbit": approx,
            },
        });
        run.bundle.json("mode.json", doc)?;
    }
    if cfg.wants(Format::Svg) {
        let mut svg = meridional_figure(
            &format!("mode {label}: |psi|^2 at 1/2 and 1/10 of its peak, caustics in red"),
            &cavity,
            Some((cs.sigma_c, cs.tau_c)),
        );
        for (frac, stroke) in [(0.5, "blue"), (0.1, "green")] {
            for seg in contour(&sigmas, &taus, &density, frac * peak_abs * peak_abs) {
                // negative σ draws the mirror image x → −x
                for sign in [1.0, -1.0] {
                    svg.add(
                        "density-level",
                        stroke,
                        seg.iter().map(|&(s, t)| meridional(sign * s, t)).collect(),
                    );
                }
            }
        }
        run.bundle.svg("mode.svg", &svg)?;
    }
    Ok(())
}

fn argmax(v: &[Vec<f64>]) -> (usize, usize) {
    let mut best = (0, 0, f64::NEG_INFINITY);
    for (i, row) in v.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            if x > best.2 {
                best = (i, j, x);
            }
        }
    }
    (best.0, best.1)
}
