use num_complex::Complex64;
use paracavity::specfun::{kummer_m, whittaker_m};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

prop_compose! {
    fn param()(re in -5.0..5.0f64, im in -5.0..5.0f64) -> Complex64 { c(re, im) }
}
prop_compose! {
    fn lower()(re in 0.5..6.0f64, im in -4.0..4.0f64) -> Complex64 { c(re, im) }
}
prop_compose! {
    fn arg(rmax: f64)(r in 0.0..rmax, th in 0.0..std::f64::consts::TAU) -> Complex64 {
        Complex64::from_polar(r, th)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn kummer_transformation(a in param(), b in lower(), z in arg(80.0)) {
        let lhs = kummer_m(a, b, z).unwrap();
        let rhs = z.exp() * kummer_m(b - a, b, -z).unwrap();
        prop_assert!(rel(lhs, rhs) < 1e-11, "{lhs} vs {rhs}");
    }

    #[test]
    fn equal_parameters(a in lower(), z in arg(80.0)) {
        let v = kummer_m(a, a, z).unwrap();
        prop_assert!(rel(v, z.exp()) < 1e-11);
    }

    #[test]
    fn conjugation_symmetry(a in param(), b in lower(), z in arg(80.0)) {
        let v = kummer_m(a, b, z).unwrap().conj();
        let w = kummer_m(a.conj(), b.conj(), z.conj()).unwrap();
        prop_assert!(rel(v, w) < 1e-12);
    }

    #[test]
    fn derivative_relation(a in param(), b in lower(), z in arg(30.0)) {
        let h = 1e-5;
        let fd = (kummer_m(a, b, z + h).unwrap() - kummer_m(a, b, z - h).unwrap()) / (2.0 * h);
        let an = a / b * kummer_m(a + 1.0, b + 1.0, z).unwrap();
        let scale = an.norm().max(kummer_m(a, b, z).unwrap().norm());
        prop_assert!((fd - an).norm() < 1e-7 * scale, "{fd} vs {an}");
    }

    #[test]
    fn whittaker_equation(kappa in param(), mu_re in 0.0..2.5f64, r in 1.0..60.0f64, th in -3.0..3.0f64) {
        let mu = c(mu_re, 0.0);
        let z = Complex64::from_polar(r, th);
        let h = 1e-3 * r.max(1.0).sqrt();
        let w = |x: Complex64| whittaker_m(kappa, mu, x).unwrap();
        let (w0, wp, wm) = (w(z), w(z + h), w(z - h));
        let second = (wp - 2.0 * w0 + wm) / (h * h);
        let q = -0.25 + kappa / z + (0.25 - mu * mu) / (z * z);
        let res = second + q * w0;
        let scale = w0.norm().max(second.norm());
        prop_assert!(res.norm() < 1e-6 * scale, "residual {} at scale {scale}", res.norm());
    }
}

#[test]
fn whittaker_small_argument() {
    let (kappa, mu) = (c(0.4, -0.7), c(1.5, 0.0));
    for z in [c(1e-6, 0.0), c(0.0, 1e-7)] {
        let ratio = whittaker_m(kappa, mu, z).unwrap() / z.powc(mu + 0.5);
        assert!((ratio - 1.0).norm() < 1e-5);
    }
}
