mod common;

use paracavity::dynamics::{
    admissible_region, caustics, constants_from_state, momentum_from_canonical, planar_constant,
    poincare_field, simulate, starting_state, FieldKind, PhaseGrid, SectionPlane,
};
use paracavity::geometry::{to_cartesian, ParabolicPoint};
use paracavity::{Cavity, MotionConstants, PhaseState};
use rand::{Rng, SeedableRng};

fn random_constants(cav: &Cavity, rng: &mut impl Rng) -> (f64, f64) {
    let tri = admissible_region(cav);
    let (lo, hi) = tri.alpha_range();
    let alpha = rng.random_range(lo + 0.05 * (hi - lo)..hi - 0.05 * (hi - lo));
    let beta = rng.random_range(0.02..0.95) * tri.beta_max(alpha);
    (alpha, beta)
}

#[test]
fn long_runs_conserve_the_constants_and_respect_the_caustics() {
    let cav = Cavity::new(3.0, 2.0).unwrap();
    let mut rng = rand::rngs::StdRng::seed_from_u64(5);
    for _ in 0..20 {
        let (alpha, beta) = random_constants(&cav, &mut rng);
        let mc = MotionConstants::new(1.3, alpha, beta).unwrap();
        let traj = simulate(&cav, &starting_state(&cav, &mc).unwrap(), 10_000).unwrap();
        let drift = traj.max_drift();
        assert!(drift.max() < 1e-9, "({alpha}, {beta}): {drift:?}");
        let cs = caustics(alpha, beta);
        let (smin, tmin) = traj.min_sigma_tau();
        assert!(
            smin >= cs.sigma_c - 1e-9 * cav.sigma0(),
            "σ {smin} < {}",
            cs.sigma_c
        );
        assert!(
            tmin >= cs.tau_c - 1e-9 * cav.tau0(),
            "τ {tmin} < {}",
            cs.tau_c
        );
        // every contact lies on its wall
        for b in &traj.bounces {
            assert!(cav.quadric_residual(b.point, b.wall).abs() < 1e-9 * cav.scale().powi(2));
        }
    }
}

#[test]
fn meridional_runs_conserve_the_planar_constant() {
    let cav = Cavity::new(3.0, 2.0).unwrap();
    for alpha in [-6.0, -2.5, 0.7, 3.1] {
        let mc = MotionConstants::new(1.0, alpha, 0.0).unwrap();
        let start = starting_state(&cav, &mc).unwrap();
        let c0 = planar_constant(&start).unwrap();
        let traj = simulate(&cav, &start, 2_000).unwrap();
        for b in &traj.bounces {
            let state = PhaseState::new(b.point, b.outgoing);
            let c = planar_constant(&state).unwrap();
            assert!(
                (c - c0).abs() < 1e-9 * c0.abs().max(1.0),
                "alpha={alpha}: {c} vs {c0}"
            );
            assert!(b.point.y.abs() < 1e-9);
        }
    }
}

#[test]
fn planar_poincare_grids_are_the_closed_formula() {
    let grid = PhaseGrid::symmetric(0.05, 2.0, 1.0, 41, 41);
    let field = poincare_field(SectionPlane::Tau, FieldKind::Alpha, 0.0, 1.0, &grid).unwrap();
    for (i, &tau) in field.coordinates.iter().enumerate() {
        for (j, &pt) in field.momenta.iter().enumerate() {
            assert!((field.values[i][j] - (tau * tau - pt * pt)).abs() < 1e-12);
        }
    }
}

#[test]
fn poincare_values_agree_with_states_built_from_them() {
    // a meridional state with given (τ, p_τ) and unit momentum: its α from
    // the Cartesian constants must equal the field value
    let grid = PhaseGrid::symmetric(0.2, 2.0, 0.9, 9, 9);
    let field = poincare_field(SectionPlane::Tau, FieldKind::Alpha, 0.0, 1.0, &grid).unwrap();
    let sigma = 1.1;
    for (i, &tau) in field.coordinates.iter().enumerate() {
        for (j, &pt) in field.momenta.iter().enumerate() {
            let h2 = sigma * sigma + tau * tau;
            // |p|² = (p_σ² + p_τ²)/h², pick p_σ so that |p| = 1
            let ps2 = h2 - pt * pt;
            if ps2 <= 0.0 {
                continue;
            }
            let q = ParabolicPoint::new(sigma, tau, 0.0);
            let state = PhaseState::new(
                to_cartesian(q),
                momentum_from_canonical(q, ps2.sqrt(), pt, 0.0),
            );
            let mc = constants_from_state(&state).unwrap();
            assert!((mc.p - 1.0).abs() < 1e-12);
            assert!(
                (mc.alpha - field.values[i][j]).abs() < 1e-10,
                "{} vs {}",
                mc.alpha,
                field.values[i][j]
            );
        }
    }
}

#[test]
fn poincare_grids_are_even_in_momentum() {
    let grid = PhaseGrid::symmetric(0.3, 3.0, 1.0, 15, 21);
    for plane in [SectionPlane::Sigma, SectionPlane::Tau] {
        for kind in [FieldKind::Alpha, FieldKind::Beta] {
            let f = poincare_field(plane, kind, 0.1, 1.0, &grid).unwrap();
            for row in &f.values {
                for j in 0..row.len() {
                    assert_eq!(row[j], row[row.len() - 1 - j]);
                }
            }
        }
    }
}
