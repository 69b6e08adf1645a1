//! Command-line workbench for the paraboloidal cavity library.
//!
//! Each subcommand writes its tables, documents and figures into the output
//! directory, followed by `<command>.meta.json` with the tool version, the
//! resolved configuration, the wall-clock time and the achieved accuracies.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod selftest;

use std::collections::BTreeMap;
use std::time::Instant;

use serde_json::json;

pub use config::{Cli, CommandKind, Format, RunConfig, Tolerances};
pub use error::{CliError, CliResult, FailureKind};
pub use output::{read_json, read_svg, read_table, Table};

/// Runs a parsed command line.
pub fn execute(cli: &Cli) -> CliResult<()> {
    let cfg = RunConfig::resolve(cli)?;
    if cfg.command == CommandKind::Selftest {
        let report = selftest::run(
            &cfg.tolerances,
            cfg.params.perturb_closed_form.unwrap_or(0.0),
        );
        for suite in &report.suites {
            println!("{suite}");
        }
        return selftest::outcome(&report);
    }
    let started = Instant::now();
    let mut run = commands::Run {
        cfg: &cfg,
        bundle: output::Bundle::create(&cfg.out)?,
        achieved: BTreeMap::new(),
        warnings: Vec::new(),
    };
    commands::dispatch(&mut run)?;
    for w in &run.warnings {
        eprintln!("warning: {w}");
    }
    let mut files = run.bundle.files().to_vec();
    files.sort();
    let meta = json!({
        "tool": "paracavity",
        "version": env!("CARGO_PKG_VERSION"),
        "command": cfg.command.name(),
        "config": cfg.echo(),
        "wall_clock_seconds": started.elapsed().as_secs_f64(),
        "achieved": run.achieved,
        "warnings": run.warnings,
        "files": files,
    });
    let name = format!("{}.meta.json", cfg.command.name());
    run.bundle.json(&name, meta)?;
    println!(
        "wrote {} files to {}",
        run.bundle.files().len(),
        run.bundle.dir().display()
    );
    Ok(())
}
