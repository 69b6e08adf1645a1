//! `spectrum`: eigenpairs below `--kmax` with their constants and
//! penetration ratios, and optionally energies against the shape ratio.

use paracavity::quantum::{
    find_eigenpairs_with, normalize, penetration_ratio, quantum_constants, spectrum_vs_deformation,
    SearchOptions,
};
use paracavity::EigenPair;
use serde_json::json;

use super::Run;
use crate::config::Format;
use crate::error::{CliResult, Context};
use crate::output::{Column, Svg, Table, STROKES};

pub const DEFAULT_KMAX: f64 = 2.1;
const DEFAULT_SCAN_M_MAX: u32 = 2;
const DEFAULT_STATES_PER_M: usize = 3;

struct Row {
    pair: EigenPair,
    alpha: f64,
    beta: f64,
    pi: f64,
}

pub fn run(run: &mut Run) -> CliResult<()> {
    let cfg = run.cfg;
    let scan = cfg.params.ratio_range.is_some();
    // a deformation scan alone skips the eigenpair table unless --kmax is given
    if !scan || cfg.params.kmax.is_some() {
        eigen_table(run)?;
    }
    if scan {
        deformation(run)?;
    }
    Ok(())
}

fn eigen_table(run: &mut Run) -> CliResult<()> {
    let cfg = run.cfg;
    let cavity = cfg.cavity;
    let k_max = cfg.params.kmax.unwrap_or(DEFAULT_KMAX);
    let tol = cfg.tolerances;
    let opts = SearchOptions {
        k_samples: tol.k_samples,
        alpha_samples: tol.alpha_samples,
        newton_tol: tol.newton,
        max_refinements: tol.max_refinements,
    };
    let mut rows = Vec::new();
    let mut m = 0u32;
    loop {
        if cfg.params.m_max.is_some_and(|mm| m > mm) {
            break;
        }
        let found = find_eigenpairs_with(&cavity, m as i32, k_max, &opts)
            .context(&format!("eigenpair search, m = {m}"))?;
        run.warnings
            .extend(found.warnings.iter().map(|w| format!("m = {m}: {w}")));
        // the lowest energy grows with |m|, so the first empty m ends the search
        if found.pairs.is_empty() && cfg.params.m_max.is_none() {
            break;
        }
        for pair in found.pairs {
            let what = format!("mode ({},{},{})", pair.l, pair.n, pair.m);
            let mode = normalize(&pair, &cavity).context(&what)?;
            let pi = penetration_ratio(&mode).context(&what)?;
            let q = quantum_constants(&pair);
            rows.push(Row {
                pair,
                alpha: q.alpha_q,
                beta: q.beta_q,
                pi,
            });
        }
        m += 1;
    }
    if cfg.params.negative_m.unwrap_or(false) {
        // the radial problem depends on |m| only
        let mirrored: Vec<Row> = rows
            .iter()
            .filter(|r| r.pair.m != 0)
            .map(|r| Row {
                pair: r.pair.mirrored(),
                ..*r
            })
            .collect();
        rows.extend(mirrored);
    }
    rows.sort_by(|a, b| {
        a.pair
            .energy()
            .total_cmp(&b.pair.energy())
            .then(a.pair.m.unsigned_abs().cmp(&b.pair.m.unsigned_abs()))
            .then(a.pair.m.cmp(&b.pair.m))
            .then(a.pair.l.cmp(&b.pair.l))
            .then(a.pair.n.cmp(&b.pair.n))
    });

    let worst_residual = rows.iter().map(|r| r.pair.residual).fold(0.0, f64::max);
    run.achieve("eigenpairs", rows.len());
    run.achieve("max_wall_residual", worst_residual);
    if cfg.wants(Format::Csv) {
        let mut t = Table::new(
            &format!("paracavity spectrum: Dirichlet eigenpairs with k <= {k_max}, sorted by k^2"),
            vec![
                Column::int("l"),
                Column::int("n"),
                Column::int("m"),
                Column::float("a", "1/length"),
                Column::float("k", "1/length"),
                Column::float("k2", "energy"),
                Column::float("alpha", "length"),
                Column::float("beta", "length^2"),
                Column::float("pi", "probability"),
                Column::float("residual", "relative"),
            ],
        );
        for r in &rows {
            let p = &r.pair;
            t.push(vec![
                p.l.into(),
                p.n.into(),
                p.m.into(),
                p.a.into(),
                p.k.into(),
                p.energy().into(),
                r.alpha.into(),
                r.beta.into(),
                r.pi.into(),
                p.residual.into(),
            ]);
        }
        run.bundle.csv("spectrum.csv", &t)?;
    }
    if cfg.wants(Format::Json) {
        let pairs: Vec<_> = rows
            .iter()
            .map(|r| {
                json!({
                    "l": r.pair.l, "n": r.pair.n, "m": r.pair.m, "a": r.pair.a, "k": r.pair.k,
                    "k2": r.pair.energy(), "alpha": r.alpha, "beta": r.beta, "pi": r.pi,
                    "residual": r.pair.residual,
                })
            })
            .collect();
        run.bundle.json(
            "spectrum.json",
            json!({"k_max": k_max, "pairs": pairs, "warnings": run.warnings.clone()}),
        )?;
    }
    Ok(())
}

fn deformation(run: &mut Run) -> CliResult<()> {
    let cfg = run.cfg;
    let range = cfg
        .params
        .ratio_range
        .as_deref()
        .expect("checked by the caller");
    let samples = cfg.grid()?.0;
    let tau0 = cfg.cavity.tau0();
    let m_max = cfg.params.m_max.unwrap_or(DEFAULT_SCAN_M_MAX);
    let per_m = cfg.params.states_per_m.unwrap_or(DEFAULT_STATES_PER_M);
    let scan = spectrum_vs_deformation(tau0, (range[0], range[1]), samples, m_max, per_m).context(
        &format!(
            "deformation scan over sigma0/tau0 in [{}, {}] at tau0 = {tau0}",
            range[0], range[1]
        ),
    )?;
    run.achieve("crossings", scan.crossings.len());

    if cfg.wants(Format::Csv) {
        let mut t = Table::new(
            &format!("paracavity deformation scan at tau0 = {tau0}: energy per tracked label and ratio sigma0/tau0"),
            vec![Column::float("ratio", "1"), Column::int("l"), Column::int("n"), Column::int("m"), Column::float("k2", "energy")],
        );
        for r in &scan.rows {
            t.push(vec![
                r.ratio.into(),
                r.label.l.into(),
                r.label.n.into(),
                r.label.m.into(),
                r.k2.into(),
            ]);
        }
        run.bundle.csv("deformation.csv", &t)?;
        let mut c = Table::new(
            "paracavity level crossings of the deformation scan, sorted by ratio",
            vec![
                Column::text("first"),
                Column::text("second"),
                Column::float("ratio", "1"),
                Column::float("k2", "energy"),
            ],
        );
        for x in &scan.crossings {
            c.push(vec![
                x.first.to_string().into(),
                x.second.to_string().into(),
                x.ratio.into(),
                x.k2.into(),
            ]);
        }
        run.bundle.csv("crossings.csv", &c)?;
    }
    if cfg.wants(Format::Json) {
        run.bundle.json(
            "deformation.json",
            serde_json::to_value(&scan).expect("scan serializes"),
        )?;
    }
    if cfg.wants(Format::Svg) {
        let mut svg = Svg::new(&format!("energy k^2 against sigma0/tau0 at tau0 = {tau0}"));
        for label in &scan.labels {
            let pts: Vec<(f64, f64)> = scan
                .rows
                .iter()
                .filter(|r| r.label == *label)
                .map(|r| (r.ratio, r.k2))
                .collect();
            svg.add(
                &format!("level {label}"),
                STROKES[1 + label.m as usize % (STROKES.len() - 1)],
                pts,
            );
        }
        run.bundle.svg("deformation.svg", &svg)?;
    }
    Ok(())
}
