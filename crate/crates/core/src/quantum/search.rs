//! Dirichlet eigenpairs `(a, k)`.
//!
//! Write `α = 2a/k`. In this parametrization the σ equation carries the
//! potential `k²σ² + kα − m²/σ²`. So at fixed `k` the wall value `S(σ₀)`
//! can only vanish for `α > −kσ₀²`, and `T(τ₀)` only for `α < kτ₀²`. On that
//! band the roots of `S(σ₀)` form an increasing sequence
//! `α^S_0 < α^S_1 < …`, and by Sturm comparison the `l`-th root is the one
//! whose `S` has `l` interior nodes. The `T` roots run the other way:
//! `α^T_0 > α^T_1 > …`, with `n` nodes at `α^T_n`. Measured in `kα = 2a`, the
//! `S` roots fall and the `T` roots rise as `k` grows. The gap
//! `d_{l,n}(k) = α^S_l(k) − α^T_n(k)` therefore changes sign exactly once,
//! and that zero is the eigenpair `(l, n)`.
//!
//! The search scans rows of constant `k`. Each row samples both wall values
//! along the band and brackets their sign changes. Between consecutive
//! rows it watches the sign of every `d_{l,n}`. A sign flip is refined by a
//! nested Brent iteration in `k`, then polished by damped Newton on the two
//! residuals.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::radial::{profile, real_envelope, Radial};
use super::EigenPair;
use crate::error::{Error, Result};
use crate::geometry::Cavity;
use crate::roots::brent_with;
use crate::specfun::SpecFunDomain;

/// Scan resolution and tolerances of the eigenpair search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    /// Rows of constant `k` on `(0, k_max]`.
    pub k_samples: usize,
    /// Samples of `α` per row.
    pub alpha_samples: usize,
    /// Target for the wall residuals relative to the radial amplitude.
    pub newton_tol: f64,
    /// Times the `α` sampling is doubled before a count mismatch is reported.
    pub max_refinements: u32,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            k_samples: 200,
            alpha_samples: 200,
            newton_tol: 1e-10,
            max_refinements: 3,
        }
    }
}

/// Eigenpairs found by a search, plus diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSearch {
    pub pairs: Vec<EigenPair>,
    /// Missed-root guard reports and label mismatches.
    pub warnings: Vec<String>,
}

/// All eigenpairs with `0 < k ≤ k_max` at azimuthal number `m`, sorted by `k`.
pub fn find_eigenpairs(cavity: &Cavity, m: i32, k_max: f64) -> Result<Vec<EigenPair>> {
    Ok(find_eigenpairs_with(cavity, m, k_max, &SearchOptions::default())?.pairs)
}

/// Largest `k` at which the radial functions stay inside the special-function domain.
pub fn k_limit(cavity: &Cavity) -> f64 {
    let w2 = cavity.sigma0().max(cavity.tau0()).powi(2);
    SpecFunDomain::default().max_abs_z / w2
}

/// [`find_eigenpairs`] with explicit options, returning the diagnostics.
pub fn find_eigenpairs_with(
    cavity: &Cavity,
    m: i32,
    k_max: f64,
    opts: &SearchOptions,
) -> Result<EigenSearch> {
    if !(k_max > 0.0) || !k_max.is_finite() {
        return Err(Error::Domain(format!(
            "k_max must be positive, got {k_max}"
        )));
    }
    if k_max > k_limit(cavity) {
        return Err(Error::DomainExceeded {
            abs_z: k_max * cavity.sigma0().max(cavity.tau0()).powi(2),
            max_abs_z: SpecFunDomain::default().max_abs_z,
        });
    }
    if opts.k_samples < 2 || opts.alpha_samples < 4 {
        return Err(Error::Domain(
            "search grid needs at least 2 rows and 4 samples per row".into(),
        ));
    }
    let m_abs = m.unsigned_abs();
    let ks: Vec<f64> = (1..=opts.k_samples)
        .map(|j| k_max * j as f64 / opts.k_samples as f64)
        .collect();
    let rows: Vec<Result<Row>> = ks
        .par_iter()
        .map(|&k| Row::at(cavity, k, m_abs, opts.alpha_samples))
        .collect();
    let mut rows = rows.into_iter().collect::<Result<Vec<Row>>>()?;
    let mut warnings = Vec::new();

    // missed-root guard: the last row must hold as many roots as the extreme
    // profiles have nodes, and counts may not drop as k grows
    let last = rows.len() - 1;
    let (want_s, want_t) = expected_counts(cavity, k_max, m_abs)?;
    let mut samples = opts.alpha_samples;
    for _ in 0..opts.max_refinements {
        if rows[last].s.len() as u32 == want_s && rows[last].t.len() as u32 == want_t {
            break;
        }
        samples *= 2;
        rows[last] = Row::at(cavity, k_max, m_abs, samples)?;
    }
    if rows[last].s.len() as u32 != want_s || rows[last].t.len() as u32 != want_t {
        warnings.push(format!(
            "GridTooCoarse: m={m}, k={k_max}: found {}/{} wall roots, node counts predict {want_s}/{want_t}",
            rows[last].s.len(),
            rows[last].t.len()
        ));
    }
    for j in (0..last).rev() {
        let mut samples = opts.alpha_samples;
        for _ in 0..opts.max_refinements {
            if rows[j].s.len() <= rows[j + 1].s.len() && rows[j].t.len() <= rows[j + 1].t.len() {
                break;
            }
            samples *= 2;
            rows[j] = Row::at(cavity, ks[j], m_abs, samples)?;
        }
        if rows[j].s.len() > rows[j + 1].s.len() || rows[j].t.len() > rows[j + 1].t.len() {
            warnings.push(format!(
                "GridTooCoarse: m={m}: root counts drop between k={} and k={}",
                ks[j],
                ks[j + 1]
            ));
        }
    }

    let mut brackets = Vec::new();
    for l in 0..rows[last].s.len() {
        for n in 0..rows[last].t.len() {
            if rows[last].gap(l, n) > 0.0 {
                continue;
            }
            let j = rows.iter().position(|r| r.gap(l, n) <= 0.0).unwrap_or(last);
            let k_lo = if j == 0 { 0.0 } else { ks[j - 1] };
            brackets.push((l as u32, n as u32, k_lo, ks[j]));
        }
    }

    let refined: Vec<Result<(EigenPair, Option<String>)>> = brackets
        .par_iter()
        .map(|&(l, n, k_lo, k_hi)| refine(cavity, l, n, m, k_lo, k_hi, opts))
        .collect();
    let mut pairs = Vec::with_capacity(refined.len());
    for r in refined {
        let (pair, warning) = r?;
        warnings.extend(warning);
        pairs.push(pair);
    }
    pairs.sort_by(|x, y| x.k.total_cmp(&y.k));
    for w in pairs.windows(2) {
        let scale = w[1].k.abs().max(1.0);
        if (w[1].k - w[0].k).abs() < 1e-8 * scale && (w[1].a - w[0].a).abs() < 1e-8 * scale {
            warnings.push(format!("duplicate eigenpair near k={}", w[0].k));
        }
    }
    Ok(EigenSearch { pairs, warnings })
}

/// The eigenpair with the given node counts, found by marching `k` upward
/// until `d_{l,n}` turns nonpositive.
pub fn eigenpair_for_label(cavity: &Cavity, l: u32, n: u32, m: i32) -> Result<EigenPair> {
    eigenpair_for_label_near(cavity, l, n, m, 0.5 / cavity.scale())
}

/// [`eigenpair_for_label`] starting the bracket search at `k_guess`.
pub fn eigenpair_for_label_near(
    cavity: &Cavity,
    l: u32,
    n: u32,
    m: i32,
    k_guess: f64,
) -> Result<EigenPair> {
    const STEP: f64 = 1.1;
    let opts = SearchOptions::default();
    let m_abs = m.unsigned_abs();
    let k_top = k_limit(cavity);
    if !(k_guess > 0.0) {
        return Err(Error::Domain(format!(
            "k_guess must be positive, got {k_guess}"
        )));
    }
    let gap = |k: f64| gap_at(cavity, l, n, m_abs, k, opts.alpha_samples);
    let mut k = k_guess.min(k_top);
    let (k_lo, k_hi) = if gap(k)? <= 0.0 {
        let mut hi = k;
        loop {
            let lo = hi / STEP;
            if lo < 1e-6 * k_guess {
                break (0.0, hi);
            }
            if gap(lo)? > 0.0 {
                break (lo, hi);
            }
            hi = lo;
        }
    } else {
        loop {
            if k >= k_top {
                return Err(Error::NoEigenpair {
                    l,
                    n,
                    m,
                    k_limit: k_top,
                });
            }
            let next = (k * STEP).min(k_top);
            if gap(next)? <= 0.0 {
                break (k, next);
            }
            k = next;
        }
    };
    Ok(refine(cavity, l, n, m, k_lo, k_hi, &opts)?.0)
}

/// Wall roots of one row of constant `k`, in label order.
struct Row {
    s: Vec<f64>,
    t: Vec<f64>,
}

impl Row {
    fn at(cavity: &Cavity, k: f64, m_abs: u32, samples: usize) -> Result<Row> {
        let mut s = wall_roots(Radial::Sigma, cavity, k, m_abs, samples)?;
        let mut t = wall_roots(Radial::Tau, cavity, k, m_abs, samples)?;
        s.sort_by(f64::total_cmp);
        t.sort_by(|x, y| y.total_cmp(x));
        Ok(Row { s, t })
    }

    /// `d_{l,n}`, or `+∞` while either root has not yet entered the band.
    fn gap(&self, l: usize, n: usize) -> f64 {
        match (self.s.get(l), self.t.get(n)) {
            (Some(x), Some(y)) => x - y,
            _ => f64::INFINITY,
        }
    }
}

fn wall(kind: Radial, cavity: &Cavity) -> f64 {
    match kind {
        Radial::Sigma => cavity.sigma0(),
        Radial::Tau => cavity.tau0(),
    }
}

/// The wall value as a function of `α` at fixed `k` (prefactor dropped).
fn wall_value(kind: Radial, cavity: &Cavity, alpha: f64, k: f64, m_abs: u32) -> Result<f64> {
    real_envelope(kind, wall(kind, cavity), 0.5 * alpha * k, k, m_abs)
}

/// The `α` band `[−kσ₀², kτ₀²]` outside which neither wall value can vanish.
fn band(cavity: &Cavity, k: f64) -> (f64, f64) {
    (-k * cavity.sigma0().powi(2), k * cavity.tau0().powi(2))
}

/// Roots in `α` of the wall value on the band, ascending.
fn wall_roots(
    kind: Radial,
    cavity: &Cavity,
    k: f64,
    m_abs: u32,
    samples: usize,
) -> Result<Vec<f64>> {
    let (lo, hi) = band(cavity, k);
    let h = (hi - lo) / (samples - 1) as f64;
    let mut roots = Vec::new();
    let mut prev = (lo, wall_value(kind, cavity, lo, k, m_abs)?);
    for j in 1..samples {
        let x = if j == samples - 1 {
            hi
        } else {
            lo + h * j as f64
        };
        let v = wall_value(kind, cavity, x, k, m_abs)?;
        if v == 0.0 {
            roots.push(x);
        } else if prev.1 != 0.0 && (v > 0.0) != (prev.1 > 0.0) {
            let mut failure = None;
            let r = brent_with(
                |a| {
                    wall_value(kind, cavity, a, k, m_abs).unwrap_or_else(|e| {
                        failure = Some(e);
                        f64::NAN
                    })
                },
                prev.0,
                x,
                prev.1,
                v,
                1e-14,
            );
            if let Some(e) = failure {
                return Err(e);
            }
            roots.push(r?);
        }
        prev = (x, v);
    }
    Ok(roots)
}

/// Interior node counts of `S` and `T` at the opposite ends of the band,
/// which equal the number of wall roots on it.
fn expected_counts(cavity: &Cavity, k: f64, m_abs: u32) -> Result<(u32, u32)> {
    let (lo, hi) = band(cavity, k);
    let a_s = 0.5 * hi * k;
    let a_t = 0.5 * lo * k;
    let (ns, _) = profile(Radial::Sigma, cavity.sigma0(), a_s, k, m_abs)?;
    let (nt, _) = profile(Radial::Tau, cavity.tau0(), a_t, k, m_abs)?;
    Ok((ns, nt))
}

fn gap_at(cavity: &Cavity, l: u32, n: u32, m_abs: u32, k: f64, samples: usize) -> Result<f64> {
    Ok(Row::at(cavity, k, m_abs, samples)?.gap(l as usize, n as usize))
}

/// Solves `d_{l,n}(k) = 0` on `(k_lo, k_hi]` and polishes the pair.
fn refine(
    cavity: &Cavity,
    l: u32,
    n: u32,
    m: i32,
    mut k_lo: f64,
    k_hi: f64,
    opts: &SearchOptions,
) -> Result<(EigenPair, Option<String>)> {
    let m_abs = m.unsigned_abs();
    let samples = opts.alpha_samples;
    let mut g_lo = if k_lo > 0.0 {
        gap_at(cavity, l, n, m_abs, k_lo, samples)?
    } else {
        f64::INFINITY
    };
    let mut k_hi = k_hi;
    let mut g_hi = gap_at(cavity, l, n, m_abs, k_hi, samples)?;
    if g_hi > 0.0 {
        return Err(Error::NotBracketed { fa: g_lo, fb: g_hi });
    }
    // bisect until the lower end has both roots inside the band
    let mut guard = 0;
    while !g_lo.is_finite() {
        let mid = if k_lo > 0.0 {
            0.5 * (k_lo + k_hi)
        } else {
            0.5 * k_hi
        };
        let g = gap_at(cavity, l, n, m_abs, mid, samples)?;
        if g <= 0.0 {
            k_hi = mid;
            g_hi = g;
        } else {
            k_lo = mid;
            g_lo = g;
        }
        guard += 1;
        if guard > 200 {
            return Err(Error::NonConvergence {
                what: format!("bracketing eigenpair ({l},{n},{m})"),
                residual: g_hi,
            });
        }
    }
    let mut failure = None;
    let k = brent_with(
        |k| {
            gap_at(cavity, l, n, m_abs, k, samples).unwrap_or_else(|e| {
                failure = Some(e);
                f64::NAN
            })
        },
        k_lo,
        k_hi,
        g_lo,
        g_hi,
        1e-14 * k_hi,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let k = k?;
    let row = Row::at(cavity, k, m_abs, samples)?;
    let alpha = match (row.s.get(l as usize), row.t.get(n as usize)) {
        (Some(x), Some(y)) => 0.5 * (x + y),
        _ => {
            return Err(Error::NonConvergence {
                what: format!("eigenpair ({l},{n},{m}) left the band"),
                residual: f64::NAN,
            })
        }
    };
    let (a, k) = polish(cavity, m_abs, 0.5 * alpha * k, k, opts.newton_tol)?;

    let (nodes_s, amp_s) = profile(Radial::Sigma, cavity.sigma0(), a, k, m_abs)?;
    let (nodes_t, amp_t) = profile(Radial::Tau, cavity.tau0(), a, k, m_abs)?;
    let (rs, rt) = super::boundary_residuals(a, k, cavity, m)?;
    let residual = (rs.abs() / amp_s).max(rt.abs() / amp_t);
    if residual > 1e-9 {
        return Err(Error::NonConvergence {
            what: format!("eigenpair ({l},{n},{m}) wall residual"),
            residual,
        });
    }
    let warning = (nodes_s != l || nodes_t != n).then(|| {
        format!("label mismatch: root order gives ({l},{n},{m}) but node counts give ({nodes_s},{nodes_t},{m})")
    });
    Ok((
        EigenPair {
            l: nodes_s,
            n: nodes_t,
            m,
            a,
            k,
            residual,
        },
        warning,
    ))
}

/// Damped Newton on the scaled residuals `(S(σ₀), T(τ₀))` in `(a, k)`.
///
/// The residuals are the envelopes at the walls, so their size is set by
/// the curvature of the root system and not by `σ₀^{|m|}`. A step is kept
/// only if it lowers the residual norm.
fn polish(cavity: &Cavity, m_abs: u32, a: f64, k: f64, tol: f64) -> Result<(f64, f64)> {
    let f = |a: f64, k: f64| -> Result<[f64; 2]> {
        Ok([
            real_envelope(Radial::Sigma, cavity.sigma0(), a, k, m_abs)?,
            real_envelope(Radial::Tau, cavity.tau0(), a, k, m_abs)?,
        ])
    };
    let norm = |r: [f64; 2]| r[0].hypot(r[1]);
    let (mut a, mut k) = (a, k);
    let mut r = f(a, k)?;
    for _ in 0..20 {
        if norm(r) < tol * 1e-3 {
            break;
        }
        let ha = 1e-7 * a.abs().max(k);
        let hk = 1e-7 * k;
        let ra = f(a + ha, k)?;
        let rk = f(a, k + hk)?;
        let j = [
            [(ra[0] - r[0]) / ha, (rk[0] - r[0]) / hk],
            [(ra[1] - r[1]) / ha, (rk[1] - r[1]) / hk],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let da = (j[1][1] * r[0] - j[0][1] * r[1]) / det;
        let dk = (j[0][0] * r[1] - j[1][0] * r[0]) / det;
        let mut lambda = 1.0;
        let mut improved = false;
        while lambda > 1e-4 {
            let (an, kn) = (a - lambda * da, k - lambda * dk);
            if kn > 0.0 {
                let rn = f(an, kn)?;
                if norm(rn) < norm(r) {
                    a = an;
                    k = kn;
                    r = rn;
                    improved = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !improved {
            break;
        }
    }
    Ok((a, k))
}
