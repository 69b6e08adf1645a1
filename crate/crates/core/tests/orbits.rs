use paracavity::orbits::{build_orbit, orbit_length, solve_orbit_all, SolverOptions};
use paracavity::{Cavity, MotionConstants, OrbitSpec};

#[test]
fn every_solvable_spec_up_to_seven_bounces_closes() {
    let cav = Cavity::new(3.0, 2.0).unwrap();
    let mut solved = 0;
    for spec in OrbitSpec::enumerate(7) {
        let Ok(roots) = solve_orbit_all(&cav, spec, &SolverOptions::default()) else {
            continue;
        };
        for mc in roots {
            let orbit = build_orbit(&cav, spec, &mc, 1.0).unwrap();
            assert!(
                orbit.closure_error < 1e-6,
                "{spec}: {}",
                orbit.closure_error
            );
            assert_eq!(
                orbit.trajectory.wall_counts(),
                (spec.s as usize, spec.t as usize)
            );
            let target = std::f64::consts::TAU * spec.l as f64;
            assert!(
                (orbit.azimuthal_advance.abs() - target).abs() < 1e-6,
                "{spec}"
            );
            let rel = (orbit.length - orbit.measured_length).abs() / orbit.measured_length;
            assert!(
                rel < 1e-8,
                "{spec}: {} vs {}",
                orbit.length,
                orbit.measured_length
            );
            solved += 1;
        }
    }
    assert!(solved >= 16, "only {solved} orbits");
}

#[test]
fn axis_orbit_length_is_exact() {
    let cav = Cavity::new(3.0, 2.0).unwrap();
    let spec = OrbitSpec::new(1, 1, 0).unwrap();
    let mc = MotionConstants::new(1.0, 0.0, 0.0).unwrap();
    assert_eq!(orbit_length(&cav, spec, &mc).unwrap(), 13.0);
    let orbit = build_orbit(&cav, spec, &mc, 1.0).unwrap();
    assert!((orbit.measured_length - 13.0).abs() < 1e-12);
}

#[test]
fn unsolvable_specs_report_no_solution() {
    let cav = Cavity::new(3.0, 2.0).unwrap();
    let spec = OrbitSpec::new(3, 3, 3).unwrap();
    assert!(solve_orbit_all(&cav, spec, &SolverOptions::default()).is_err());
}
