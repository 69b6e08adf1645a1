//! Energies as a function of the cavity shape `σ₀/τ₀` at fixed `τ₀`.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::search::{eigenpair_for_label, eigenpair_for_label_near};
use crate::error::{Error, Result};
use crate::geometry::Cavity;
use crate::roots::brent_with;

/// Quantum numbers `(l, n, m)` of a tracked state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StateLabel {
    pub l: u32,
    pub n: u32,
    pub m: i32,
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.l, self.n, self.m)
    }
}

/// One energy at one shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub ratio: f64,
    pub label: StateLabel,
    pub k2: f64,
}

/// Shape at which two tracked levels cross.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub first: StateLabel,
    pub second: StateLabel,
    pub ratio: f64,
    pub k2: f64,
}

/// Result of [`spectrum_vs_deformation`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeformationScan {
    pub tau0: f64,
    pub labels: Vec<StateLabel>,
    /// Rows sorted by ratio, then label.
    pub rows: Vec<ScanRow>,
    /// Crossings sorted by ratio.
    pub crossings: Vec<Crossing>,
}

/// The first `count` node-count pairs in order of `l + n`, then `l`.
fn lowest_labels(count: usize) -> Vec<(u32, u32)> {
    let mut out = Vec::with_capacity(count);
    let mut total = 0;
    while out.len() < count {
        for l in 0..=total {
            if out.len() == count {
                break;
            }
            out.push((l, total - l));
        }
        total += 1;
    }
    out
}

fn energy(tau0: f64, ratio: f64, label: StateLabel, k_guess: Option<f64>) -> Result<f64> {
    let cavity = Cavity::new(ratio * tau0, tau0)?;
    let pair = match k_guess {
        Some(k) => eigenpair_for_label_near(&cavity, label.l, label.n, label.m, k)?,
        None => eigenpair_for_label(&cavity, label.l, label.n, label.m)?,
    };
    Ok(pair.energy())
}

/// Tracks the energies of labeled states while `σ₀/τ₀` runs over
/// `ratio_range` in `n_samples` equal steps, with `τ₀ = tau0_fixed`.
///
/// For every `m` in `0..=m_max` the tracked labels are the first
/// `states_per_m` node-count pairs ordered by `l + n` and then `l`. Every
/// sign change of an energy difference between neighbouring samples is
/// refined to a crossing ratio by Brent's method.
pub fn spectrum_vs_deformation(
    tau0_fixed: f64,
    ratio_range: (f64, f64),
    n_samples: usize,
    m_max: u32,
    states_per_m: usize,
) -> Result<DeformationScan> {
    let (lo, hi) = ratio_range;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) || n_samples < 2 {
        return Err(Error::Domain(format!(
            "bad ratio range ({lo}, {hi}) with {n_samples} samples"
        )));
    }
    let labels: Vec<StateLabel> = (0..=m_max as i32)
        .flat_map(|m| {
            lowest_labels(states_per_m)
                .into_iter()
                .map(move |(l, n)| StateLabel { l, n, m })
        })
        .collect();
    let ratios: Vec<f64> = (0..n_samples)
        .map(|j| {
            if j + 1 == n_samples {
                hi
            } else {
                lo + (hi - lo) * j as f64 / (n_samples - 1) as f64
            }
        })
        .collect();

    // each label is followed along the ratios, warm-started from the last sample
    let tracks: Vec<Result<Vec<f64>>> = labels
        .par_iter()
        .map(|&label| {
            let mut out = Vec::with_capacity(ratios.len());
            let mut guess = None;
            for &r in &ratios {
                let e = energy(tau0_fixed, r, label, guess)?;
                guess = Some(e.sqrt());
                out.push(e);
            }
            Ok(out)
        })
        .collect();
    let tracks = tracks.into_iter().collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(labels.len() * ratios.len());
    for (j, &ratio) in ratios.iter().enumerate() {
        for (i, &label) in labels.iter().enumerate() {
            rows.push(ScanRow {
                ratio,
                label,
                k2: tracks[i][j],
            });
        }
    }

    let mut candidates = Vec::new();
    for i in 0..labels.len() {
        for q in i + 1..labels.len() {
            for j in 0..ratios.len() - 1 {
                let d0 = tracks[i][j] - tracks[q][j];
                let d1 = tracks[i][j + 1] - tracks[q][j + 1];
                if d0 == 0.0 || (d0 > 0.0) != (d1 > 0.0) && d1 != 0.0 {
                    candidates.push((i, q, j, d0, d1));
                }
            }
        }
    }
    let crossings: Vec<Result<Crossing>> = candidates
        .par_iter()
        .map(|&(i, q, j, d0, d1)| {
            let (a, b) = (labels[i], labels[q]);
            let guess = (tracks[i][j].sqrt(), tracks[q][j].sqrt());
            let mut failure = None;
            let mut diff = |r: f64| match (
                energy(tau0_fixed, r, a, Some(guess.0)),
                energy(tau0_fixed, r, b, Some(guess.1)),
            ) {
                (Ok(x), Ok(y)) => x - y,
                (Err(e), _) | (_, Err(e)) => {
                    failure = Some(e);
                    f64::NAN
                }
            };
            let ratio = brent_with(&mut diff, ratios[j], ratios[j + 1], d0, d1, 1e-10)?;
            if let Some(e) = failure {
                return Err(e);
            }
            let k2 = energy(tau0_fixed, ratio, a, Some(guess.0))?;
            Ok(Crossing {
                first: a,
                second: b,
                ratio,
                k2,
            })
        })
        .collect();
    let mut crossings = crossings.into_iter().collect::<Result<Vec<_>>>()?;
    crossings.sort_by(|x, y| {
        x.ratio
            .total_cmp(&y.ratio)
            .then(x.first.cmp(&y.first))
            .then(x.second.cmp(&y.second))
    });
    Ok(DeformationScan {
        tau0: tau0_fixed,
        labels,
        rows,
        crossings,
    })
}
