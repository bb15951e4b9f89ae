use hrg::func::{GridSpec, Profile, SampledEvenFunction};
use hrg::map::{
    haar_covariance, haar_covariance_error, rg_step, rg_step_composite, zero_sum_block_integral,
    Backend, RGParams, ZeroSumDraws,
};
use proptest::prelude::*;

fn grid() -> GridSpec {
    GridSpec::new(12.0, 257, 64).unwrap()
}

#[test]
fn haar_scales_give_the_zero_sum_covariance() {
    for levels in 1..=6 {
        let n = 1usize << levels;
        let cov = haar_covariance(levels);
        for (i, row) in cov.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 } - 1.0 / n as f64;
                assert!((c - want).abs() < 1e-14);
            }
            assert!(row.iter().sum::<f64>().abs() < 1e-13);
        }
        assert!(haar_covariance_error(levels) < 1e-14);
    }
}

#[test]
fn monte_carlo_is_independent_of_thread_count() {
    let params = RGParams::bms(0.1).unwrap();
    let f = SampledEvenFunction::from_fn(grid(), |x| 0.1 * x * x + 0.02 * x.powi(4)).unwrap();
    let mc = Backend::MonteCarlo {
        n_samples: 20_000,
        seed: 5,
    };
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| zero_sum_block_integral(&f, &params, mc).unwrap())
    };
    let (a, b) = (run(1), run(3));
    assert_eq!(a.g_log.logvals(), b.g_log.logvals());
    assert_eq!(a.stderr, b.stderr);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn quadratic_potentials_flow_in_closed_form(mu in 0.01f64..0.5, eps in 0.0f64..0.5) {
        let params = RGParams::bms(eps).unwrap();
        let n = params.n() as f64;
        let v = SampledEvenFunction::from_fn(grid(), |x| mu * x * x).unwrap();
        let s = rg_step(&v, &params, Backend::Nested).unwrap();
        let mu_next = 2f64.powf(3.0 - 2.0 * params.phi_dim) * mu;
        let db = -0.5 * (n - 1.0) * (1.0 + 2.0 * mu).ln();
        prop_assert!((s.delta_b - db).abs() < 1e-8);
        for x in [0.5, 1.0, 2.0] {
            prop_assert!((s.v.evaluate(x) - mu_next * x * x).abs() < 1e-8 * (1.0 + mu_next * x * x));
        }
    }

    #[test]
    fn two_layers_multiply_the_quadratic_twice(mu in 0.001f64..0.05) {
        let params = RGParams::bms(0.1).unwrap().with_layers(2).unwrap();
        let v = SampledEvenFunction::from_fn(grid(), |x| mu * x * x).unwrap();
        let s = rg_step_composite(&v, &params, Backend::Nested).unwrap();
        let want = 2f64.powf(2.0 * (3.0 - 2.0 * params.phi_dim)) * mu;
        prop_assert!((s.v.evaluate(1.0) - want).abs() < 1e-8 * want);
    }

    #[test]
    fn steps_preserve_normalization_and_evenness(g in 0.0f64..0.5, mu in -0.5f64..0.5, x in 0.0f64..15.0) {
        let params = RGParams::bms(0.1).unwrap();
        let v = hrg::dynamics::bare_potential(grid(), g.max(0.01), mu).unwrap();
        let s = rg_step(&v, &params, Backend::Nested).unwrap();
        prop_assert!(s.v.is_normalized());
        prop_assert_eq!(s.v.evaluate(x), s.v.evaluate(-x));
        prop_assert!(s.v.logvals().iter().all(|w| w.is_finite()));
    }

    #[test]
    fn zero_is_a_fixed_point(eps in 0.0f64..0.9) {
        let params = RGParams::bms(eps).unwrap();
        let s = rg_step(&SampledEvenFunction::zero(grid()), &params, Backend::Nested).unwrap();
        // zero up to the rounding of the quadrature weights
        prop_assert!(s.delta_b.abs() < 1e-13);
        prop_assert!(s.v.logvals().iter().all(|w| w.abs() < 1e-13));
    }

    #[test]
    fn draws_sum_to_zero(seed in any::<u64>(), n_sites in prop::sample::select(vec![4usize, 8, 9, 27])) {
        let draws = ZeroSumDraws::generate(n_sites, 1000, seed).unwrap();
        let sites: Vec<Vec<f64>> = (0..n_sites).map(|i| draws.site_positions(i, 0.0, 1.0).collect()).collect();
        for k in 0..1000 {
            let s: f64 = sites.iter().map(|col| col[k]).sum();
            prop_assert!(s.abs() < 1e-12);
        }
    }
}

#[test]
fn quartic_step_matches_the_other_backend_on_one_point() {
    // cheap smoke version of the backend comparison; the full one is an
    // acceptance criterion
    let params = RGParams::bms(0.1).unwrap();
    let f = SampledEvenFunction::from_fn(grid(), |x| 0.02 * x.powi(4)).unwrap();
    let exact = zero_sum_block_integral(&f, &params, Backend::Nested).unwrap();
    let mc = zero_sum_block_integral(
        &f,
        &params,
        Backend::MonteCarlo {
            n_samples: 50_000,
            seed: 2,
        },
    )
    .unwrap();
    let se = mc.stderr.unwrap();
    assert!((exact.g_log.eval(0.0) - mc.g_log.eval(0.0)).abs() < 4.0 * se[0]);
}
