use hrg::func::{
    gauss_smooth, project_couplings, symmetric_pair_integral, wick_monomial, CouplingVector,
    GridSpec, SampledEvenFunction,
};
use proptest::prelude::*;

fn grid() -> GridSpec {
    GridSpec::new(12.0, 513, 64).unwrap()
}

/// Adaptive Simpson quadrature, used as an independent oracle.
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[test]
fn quartic_pair_integral_matches_adaptive_quadrature() {
    let g = GridSpec::default();
    let f = SampledEvenFunction::from_fn(g, |x| x.powi(4)).unwrap();
    let h = symmetric_pair_integral(&f, 1.0).unwrap();
    let integrand = |t: f64| (-0.5 * t * t - 2.0 * t.powi(4)).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let want = -simpson(&integrand, -8.0, 8.0, 1e-14).ln();
    assert!((h.logvals()[0] - want).abs() < 1e-8, "{} vs {want}", h.logvals()[0]);
}

#[test]
fn smoothing_spot_values() {
    let g = GridSpec::default();
    let f = SampledEvenFunction::from_fn(g, |x| x * x).unwrap();
    assert!((gauss_smooth(&f, 1.0).unwrap().logvals()[0] - 0.5 * 3f64.ln()).abs() < 1e-12);
    let f = SampledEvenFunction::from_fn(g, |x| 0.1 * x * x).unwrap();
    let s = gauss_smooth(&f, 0.5).unwrap();
    let want = 0.1 / 1.1 + 0.5 * 1.1f64.ln();
    assert!((s.evaluate(1.0) - want).abs() < 1e-10);
    assert!((s.evaluate(1.0) - 0.138561).abs() < 1e-5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn evaluation_is_even(a in -1.0f64..1.0, b in 0.0f64..0.5, c in -0.01f64..0.01, x in -20.0f64..20.0) {
        let f = SampledEvenFunction::from_fn(grid(), |x| a * x * x + b * x.powi(4) + c * x.powi(6)).unwrap();
        prop_assert_eq!(f.evaluate(x), f.evaluate(-x));
    }

    #[test]
    fn normalization_pins_the_origin(a in -1.0f64..1.0, k in -5.0f64..5.0) {
        let f = SampledEvenFunction::from_fn(grid(), |x| k + a * x * x).unwrap().normalized();
        prop_assert!(f.is_normalized());
        prop_assert_eq!(f.logvals()[0], 0.0);
    }

    // The outer smoothing reads the inner result beyond the grid, where it is
    // extrapolated, so the comparison stops at half the grid.
    #[test]
    fn smoothing_is_a_semigroup(a in -0.2f64..0.5, b in 0.002f64..0.05, v1 in 0.1f64..1.0, v2 in 0.1f64..1.0) {
        let g = GridSpec::default();
        let f = SampledEvenFunction::from_fn(g, |x| a * x * x + b * x.powi(4)).unwrap();
        let twice = gauss_smooth(&gauss_smooth(&f, v1).unwrap(), v2).unwrap();
        let once = gauss_smooth(&f, v1 + v2).unwrap();
        let inner = g.points().iter().take_while(|c| **c <= 0.5 * g.phi_max).count();
        let d = twice.logvals()[..inner]
            .iter()
            .zip(&once.logvals()[..inner])
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        prop_assert!(d < 1e-7, "sup difference {:e}", d);
    }

    #[test]
    fn smoothing_quadratics_in_closed_form(mu in 0.01f64..1.0, v in 0.1f64..2.0) {
        let f = SampledEvenFunction::from_fn(grid(), |x| mu * x * x).unwrap();
        let s = gauss_smooth(&f, v).unwrap();
        for (c, got) in grid().points().into_iter().zip(s.logvals()) {
            let want = mu * c * c / (1.0 + 2.0 * mu * v) + 0.5 * (1.0 + 2.0 * mu * v).ln();
            prop_assert!((got - want).abs() < 1e-8 * (1.0 + want.abs()), "c = {}", c);
        }
    }

    #[test]
    fn pair_integral_of_quadratics_in_closed_form(mu in 0.01f64..1.0, sigma in 0.1f64..1.5) {
        let f = SampledEvenFunction::from_fn(grid(), |x| mu * x * x).unwrap();
        let h = symmetric_pair_integral(&f, sigma).unwrap();
        for (a, got) in grid().points().into_iter().zip(h.logvals()) {
            let want = 2.0 * mu * a * a + 0.5 * (1.0 + 4.0 * mu * sigma * sigma).ln();
            prop_assert!((got - want).abs() < 1e-8 * (1.0 + want.abs()), "a = {}", a);
        }
    }

    #[test]
    fn projection_recovers_wick_coefficients(c in prop::collection::vec(-1.0f64..1.0, 4)) {
        let k = 3;
        let f = SampledEvenFunction::from_fn(GridSpec::default(), |x| {
            (0..=k).map(|j| c[j] * wick_monomial(2 * j, x)).sum()
        }).unwrap();
        let p = project_couplings(&f, k).unwrap();
        for j in 0..=k {
            prop_assert!((p.get(2 * j) - c[j]).abs() < 1e-8, "c{} = {} vs {}", 2 * j, p.get(2 * j), c[j]);
        }
        let again = project_couplings(&p.reconstruct(GridSpec::default()).unwrap(), k).unwrap();
        for (x, y) in again.coefficients.iter().zip(&p.coefficients) {
            prop_assert!((x - y).abs() < 1e-8);
        }
        let direct = CouplingVector { coefficients: c.clone() };
        prop_assert!((direct.eval(1.7) - f.evaluate(1.7)).abs() < 1e-9);
    }
}
