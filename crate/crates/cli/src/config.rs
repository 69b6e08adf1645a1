//! Command-line flags, JSON configuration files and their validation.
//!
//! A configuration file is a JSON object whose keys are the long flag names
//! with `-` replaced by `_`. Flags given on the command line override the
//! file key by key.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use paracavity::dynamics::admissible_region;
use paracavity::Cavity;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

#[derive(Parser, Debug, Clone)]
#[command(
    name = "paracavity",
    version,
    about = "Classical and quantum workbench for the confocal paraboloidal cavity"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandKind,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    /// Simulate a bounce sequence from (alpha, beta).
    Trajectory,
    /// Sample the Poincare phase maps alpha(q, p) and beta(q, p).
    Poincare,
    /// Solve and build periodic orbits (s, t, l).
    Orbit,
    /// Find eigenpairs up to --kmax, optionally scanning the shape ratio.
    Spectrum,
    /// Sample one eigenmode (l, n, m) on the meridional plane.
    Mode,
    /// Run the built-in oracle suites.
    Selftest,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Trajectory => "trajectory",
            Self::Poincare => "poincare",
            Self::Orbit => "orbit",
            Self::Spectrum => "spectrum",
            Self::Mode => "mode",
            Self::Selftest => "selftest",
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlaneChoice {
    Sigma,
    Tau,
    Both,
}

/// Every option, as given on the command line or in a configuration file.
/// Unset options are `None` and fall back to per-command defaults.
#[derive(Args, Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Flags {
    /// JSON configuration file; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Parameter of the bowl wall sigma = sigma0.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub sigma0: Option<f64>,
    /// Parameter of the cap wall tau = tau0.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub tau0: Option<f64>,
    /// Separation constant(s) alpha; comma separated for poincare.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub alpha: Option<Vec<f64>>,
    /// Angular constant(s) beta = Lz^2/P^2; comma separated for poincare.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub beta: Option<Vec<f64>>,
    /// Momentum magnitude P.
    #[arg(long, global = true)]
    pub p: Option<f64>,
    /// Number of wall contacts to simulate.
    #[arg(long, global = true)]
    pub bounces: Option<usize>,
    /// Orbit sigma-wall bounce count.
    #[arg(long, global = true)]
    pub s: Option<u32>,
    /// Orbit tau-wall bounce count.
    #[arg(long, global = true)]
    pub t: Option<u32>,
    /// Orbit azimuthal index, or sigma node count of a mode.
    #[arg(long, global = true)]
    pub l: Option<u32>,
    /// Tau node count of a mode.
    #[arg(long, global = true)]
    pub n: Option<u32>,
    /// Azimuthal quantum number of a mode.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub m: Option<i32>,
    /// Orbit list (configuration files only), e.g. [[1,1,0],[2,1,0]].
    #[arg(skip)]
    pub specs: Option<Vec<[u32; 3]>>,
    /// Enumerate all orbits with s + t up to this bound.
    #[arg(long, global = true)]
    pub max_bounces: Option<u32>,
    /// Largest wavenumber of the eigenpair search.
    #[arg(long, global = true)]
    pub kmax: Option<f64>,
    /// Largest |m| of the spectrum or of the deformation scan.
    #[arg(long, global = true)]
    pub m_max: Option<u32>,
    /// Also list the -m copies of every m > 0 eigenpair.
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    pub negative_m: Option<bool>,
    /// Shape ratio range sigma0/tau0 of a deformation scan, "lo,hi".
    #[arg(long, global = true, value_delimiter = ',', num_args = 1)]
    pub ratio_range: Option<Vec<f64>>,
    /// States tracked per m in a deformation scan.
    #[arg(long, global = true)]
    pub states_per_m: Option<usize>,
    /// Grid size "N" or "NxM" (deformation scan: number of ratios).
    #[arg(long, global = true)]
    pub grid: Option<String>,
    /// Phase plane of the Poincare maps.
    #[arg(long, global = true, value_enum)]
    pub plane: Option<PlaneChoice>,
    /// Largest denominator of the winding-number approximant of a mode.
    #[arg(long, global = true)]
    pub max_denominator: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output formats, comma separated.
    #[arg(long, global = true, value_enum, value_delimiter = ',')]
    pub format: Option<Vec<Format>>,
    /// Tolerance override KEY=VAL; repeatable.
    #[arg(long, global = true, value_name = "KEY=VAL")]
    pub tol_override: Option<Vec<String>>,
    /// Relative perturbation of the closed-form action constant (selftest mutation check).
    #[arg(long, global = true, hide = true)]
    pub perturb_closed_form: Option<f64>,
}

/// Numerical settings of every command, overridable by `--tol-override`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Largest normalized drift reported as conserved.
    pub drift: f64,
    /// Caustic violation accepted by the trajectory report.
    pub caustic: f64,
    /// Residual of the orbit closure system.
    pub closure: f64,
    /// Seeds per side of the orbit solver scan.
    pub orbit_scan: usize,
    /// Wavenumber samples of the eigenpair search.
    pub k_samples: usize,
    /// Separation-constant samples per search row.
    pub alpha_samples: usize,
    /// Wall residual accepted by the eigenpair polish.
    pub newton: f64,
    /// Grid doublings before the search gives up on a row.
    pub max_refinements: u32,
    /// Closed-form against quadrature action (selftest).
    pub action: f64,
    /// Special-function identities (selftest).
    pub specfun: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            drift: 1e-9,
            caustic: 1e-9,
            closure: paracavity::orbits::CLOSURE_TOL,
            orbit_scan: 64,
            k_samples: 200,
            alpha_samples: 200,
            newton: 1e-10,
            max_refinements: 3,
            action: 1e-9,
            specfun: 1e-11,
        }
    }
}

impl Tolerances {
    fn with_overrides(overrides: &[String]) -> CliResult<Self> {
        let mut value = serde_json::to_value(Self::default()).expect("tolerances serialize");
        let map = value.as_object_mut().expect("tolerances are an object");
        let known: Vec<String> = map.keys().cloned().collect();
        for item in overrides {
            let (key, raw) = item.split_once('=').ok_or_else(|| {
                CliError::config(format!("--tol-override expects KEY=VAL, got '{item}'"))
            })?;
            let key = key.trim().replace('-', "_");
            let slot = map.get_mut(&key).ok_or_else(|| {
                CliError::config(format!(
                    "unknown tolerance '{key}'; known keys: {}",
                    known.join(", ")
                ))
            })?;
            let parsed: Value = serde_json::from_str(raw.trim()).map_err(|_| {
                CliError::config(format!("tolerance {key}: '{raw}' is not a number"))
            })?;
            *slot = parsed;
        }
        let tol: Self = serde_json::from_value(value)
            .map_err(|e| CliError::config(format!("invalid tolerance override: {e}")))?;
        tol.check()?;
        Ok(tol)
    }

    fn check(&self) -> CliResult<()> {
        let positive = [
            ("drift", self.drift),
            ("caustic", self.caustic),
            ("closure", self.closure),
            ("newton", self.newton),
            ("action", self.action),
            ("specfun", self.specfun),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::config(format!(
                    "tolerance {name} must be positive, got {v}"
                )));
            }
        }
        if self.orbit_scan < 4 || self.k_samples < 4 || self.alpha_samples < 4 {
            return Err(CliError::config(
                "orbit_scan, k_samples and alpha_samples must be at least 4",
            ));
        }
        Ok(())
    }
}

/// A validated run: cavity, resolved options and effective tolerances.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: CommandKind,
    #[serde(serialize_with = "ser_cavity")]
    pub cavity: Cavity,
    pub out: PathBuf,
    pub formats: Vec<Format>,
    pub tolerances: Tolerances,
    /// Options after merging file and flags; echoed in the metadata.
    pub params: Flags,
}

fn ser_cavity<S: serde::Serializer>(c: &Cavity, s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut m = s.serialize_map(Some(2))?;
    m.serialize_entry("sigma0", &c.sigma0())?;
    m.serialize_entry("tau0", &c.tau0())?;
    m.end()
}

pub const DEFAULT_SIGMA0: f64 = 3.0;
pub const DEFAULT_TAU0: f64 = 2.0;

impl RunConfig {
    /// Merges the configuration file (if any) under the flags and validates.
    pub fn resolve(cli: &Cli) -> CliResult<Self> {
        let flags = match &cli.flags.config {
            Some(path) => merge(read_config(path)?, &cli.flags)?,
            None => cli.flags.clone(),
        };
        let sigma0 = flags.sigma0.unwrap_or(DEFAULT_SIGMA0);
        let tau0 = flags.tau0.unwrap_or(DEFAULT_TAU0);
        let cavity = Cavity::new(sigma0, tau0).map_err(|_| {
            CliError::config(format!(
                "invalid cavity: sigma0={sigma0}, tau0={tau0} must be positive and finite"
            ))
        })?;
        let mut formats = flags
            .format
            .clone()
            .unwrap_or_else(|| vec![Format::Csv, Format::Json]);
        formats.sort();
        formats.dedup();
        let tolerances = Tolerances::with_overrides(flags.tol_override.as_deref().unwrap_or(&[]))?;
        let cfg = Self {
            command: cli.command,
            cavity,
            out: flags
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from("paracavity-out")),
            formats,
            tolerances,
            params: flags,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    /// Command-specific checks, all before any computation.
    fn validate(&self) -> CliResult<()> {
        let f = &self.params;
        let finite = |name: &str, v: f64| -> CliResult<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(CliError::config(format!("{name} must be finite, got {v}")))
            }
        };
        if let Some(p) = f.p {
            if !(p > 0.0 && p.is_finite()) {
                return Err(CliError::config(format!(
                    "momentum p must be positive, got {p}"
                )));
            }
        }
        for v in f.alpha.iter().flatten() {
            finite("alpha", *v)?;
        }
        for v in f.beta.iter().flatten() {
            finite("beta", *v)?;
            if *v < 0.0 {
                return Err(CliError::config(format!(
                    "beta must be nonnegative, got {v}"
                )));
            }
        }
        if let Some(g) = &f.grid {
            parse_grid(g)?;
        }
        match self.command {
            CommandKind::Trajectory => {
                let (alpha, beta) = self.single_constants()?;
                let tri = admissible_region(&self.cavity);
                if !tri.contains(alpha, beta) {
                    let (lo, hi) = tri.alpha_range();
                    return Err(CliError::config(format!(
                        "(alpha, beta) = ({alpha}, {beta}) lies outside the admissible triangle of the cavity: \
                         alpha in [{lo}, {hi}], beta <= {}",
                        tri.beta_max(alpha.clamp(lo, hi))
                    )));
                }
            }
            CommandKind::Orbit => {
                let given = [f.s, f.t, f.l].iter().filter(|v| v.is_some()).count();
                if given != 0 && given != 3 {
                    return Err(CliError::config("an orbit needs all of --s, --t and --l"));
                }
                for spec in self.orbit_specs()?.into_iter().flatten() {
                    paracavity::OrbitSpec::new(spec[0], spec[1], spec[2]).map_err(|e| {
                        CliError::config(format!(
                            "orbit ({},{},{}): {e}",
                            spec[0], spec[1], spec[2]
                        ))
                    })?;
                }
            }
            CommandKind::Spectrum => {
                if let Some(k) = f.kmax {
                    if !(k > 0.0 && k.is_finite()) {
                        return Err(CliError::config(format!("kmax must be positive, got {k}")));
                    }
                }
                if let Some(r) = &f.ratio_range {
                    if r.len() != 2 || !(r[0] > 0.0 && r[1] > r[0] && r[1].is_finite()) {
                        return Err(CliError::config(format!(
                            "ratio range must be 'lo,hi' with 0 < lo < hi, got {r:?}"
                        )));
                    }
                    if self.grid()?.0 < 2 {
                        return Err(CliError::config(
                            "a deformation scan needs at least 2 ratios (--grid)",
                        ));
                    }
                }
            }
            CommandKind::Mode => {
                if f.l.is_none() || f.n.is_none() || f.m.is_none() {
                    return Err(CliError::config("mode needs --l, --n and --m"));
                }
                if self.grid()?.0 < 2 || self.grid()?.1 < 2 {
                    return Err(CliError::config("mode grid must be at least 2x2"));
                }
            }
            CommandKind::Poincare => {
                let (nq, np) = self.grid()?;
                if nq < 2 || np < 2 {
                    return Err(CliError::config("Poincare grid must be at least 2x2"));
                }
            }
            CommandKind::Selftest => {
                if let Some(d) = f.perturb_closed_form {
                    finite("perturbation", d)?;
                }
            }
        }
        Ok(())
    }

    /// The single `(α, β)` of a trajectory.
    pub fn single_constants(&self) -> CliResult<(f64, f64)> {
        let one = |name: &str, v: &Option<Vec<f64>>| -> CliResult<f64> {
            match v.as_deref() {
                None => Ok(0.0),
                Some([x]) => Ok(*x),
                Some(xs) => Err(CliError::config(format!(
                    "trajectory takes one {name}, got {xs:?}"
                ))),
            }
        };
        Ok((
            one("alpha", &self.params.alpha)?,
            one("beta", &self.params.beta)?,
        ))
    }

    pub fn momentum(&self) -> f64 {
        self.params.p.unwrap_or(1.0)
    }

    /// Explicit orbit specs, or `None` to enumerate.
    pub fn orbit_specs(&self) -> CliResult<Option<Vec<[u32; 3]>>> {
        let f = &self.params;
        if let (Some(s), Some(t), Some(l)) = (f.s, f.t, f.l) {
            return Ok(Some(vec![[s, t, l]]));
        }
        Ok(f.specs.clone())
    }

    /// Grid size with per-command defaults.
    pub fn grid(&self) -> CliResult<(usize, usize)> {
        let default = match self.command {
            CommandKind::Poincare => (101, 101),
            CommandKind::Mode => (81, 81),
            CommandKind::Spectrum => (25, 1),
            _ => (0, 0),
        };
        match &self.params.grid {
            Some(g) => parse_grid(g),
            None => Ok(default),
        }
    }

    pub fn echo(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

fn parse_grid(g: &str) -> CliResult<(usize, usize)> {
    let bad = || {
        CliError::config(format!(
            "grid must be 'N' or 'NxM' with positive integers, got '{g}'"
        ))
    };
    let parse = |s: &str| {
        s.trim()
            .parse::<usize>()
            .ok()
            .filter(|&v| v > 0)
            .ok_or_else(bad)
    };
    match g.split_once(['x', 'X']) {
        Some((a, b)) => Ok((parse(a)?, parse(b)?)),
        None => {
            let n = parse(g)?;
            Ok((n, n))
        }
    }
}

fn read_config(path: &Path) -> CliResult<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| {
        CliError::config(format!("config {} is not valid JSON: {e}", path.display()))
    })?;
    if !value.is_object() {
        return Err(CliError::config(format!(
            "config {} must be a JSON object",
            path.display()
        )));
    }
    Ok(value)
}

/// Overlays the set flags on the file values and checks the result.
fn merge(file: Value, flags: &Flags) -> CliResult<Flags> {
    let mut base: BTreeMap<String, Value> = match file {
        Value::Object(m) => m.into_iter().collect(),
        _ => unreachable!("checked by read_config"),
    };
    let over = serde_json::to_value(flags).expect("flags serialize");
    for (k, v) in over.as_object().expect("flags are an object") {
        if !v.is_null() {
            base.insert(k.clone(), v.clone());
        }
    }
    let mut merged: Flags = serde_json::from_value(Value::Object(base.into_iter().collect()))
        .map_err(|e| CliError::config(format!("invalid config: {e}")))?;
    merged.config = flags.config.clone();
    Ok(merged)
}
