use hrg::dynamics::{
    bare_potential, classify, continue_in_epsilon, critical_mu, find_fixed_point, flow,
    kappa_from_spectrum, scaling_field_z, wave_amplitude, FixedPointKind, FixedPointRecord,
    LimitOptions, Phase, ReducedMap, ShootingOptions,
};
use hrg::error::HrgError;
use hrg::func::{project_couplings, wick_monomial, GridSpec, Profile, SampledEvenFunction};
use hrg::map::{Backend, RGParams};

fn reduced(eps: f64) -> ReducedMap {
    ReducedMap::new(RGParams::bms(eps).unwrap(), Backend::Nested, GridSpec::default())
}

fn wick(grid: GridSpec, f: impl Fn(f64) -> f64) -> SampledEvenFunction {
    SampledEvenFunction::from_fn(grid, f).unwrap().normalized()
}

fn nontrivial(eps: f64) -> (ReducedMap, FixedPointRecord) {
    let map = reduced(eps);
    let fp = continue_in_epsilon(&[eps], &map, 1e-10).unwrap().remove(0);
    assert_eq!(fp.kind, FixedPointKind::Nontrivial);
    (map, fp)
}

#[test]
fn gaussian_spectrum() {
    for eps in [0.0, 0.1] {
        let map = reduced(eps);
        let params = map.params;
        let fp = find_fixed_point(&SampledEvenFunction::zero(map.grid), &map, 1e-10).unwrap();
        assert_eq!(fp.kind, FixedPointKind::Gaussian);
        assert!(fp.residual < 1e-14);
        assert!(fp.potential.logvals().iter().all(|v| *v == 0.0));
        for k in [2.0, 4.0, 6.0] {
            let want = 2f64.powf(3.0 - k * params.phi_dim);
            let best = fp
                .eigenvalues
                .iter()
                .map(|l| (l - want).abs() / want)
                .fold(f64::INFINITY, f64::min);
            assert!(best < 1e-4, "eps = {eps}, k = {k}: closest relative miss {best:e}");
        }
    }
}

#[test]
fn continuation_from_zero_width_is_gaussian() {
    let fp = continue_in_epsilon(&[0.0], &reduced(0.1), 1e-10).unwrap().remove(0);
    assert_eq!(fp.kind, FixedPointKind::Gaussian);
    assert!(fp.potential.logvals().iter().all(|v| v.abs() < 1e-8));
}

#[test]
fn nontrivial_branch_properties() {
    let eps = [0.05, 0.1, 0.2];
    let fps = continue_in_epsilon(&eps, &reduced(0.1), 1e-10).unwrap();
    let mut prev_c4 = 0.0;
    let mut prev_kappa = 0.0;
    for fp in &fps {
        let params = RGParams::bms(fp.epsilon).unwrap();
        assert_eq!(fp.kind, FixedPointKind::Nontrivial);
        assert!(fp.residual <= 1e-10);
        let c4 = fp.couplings.get(4);
        assert!(c4 > prev_c4, "c4 {c4} at eps {}", fp.epsilon);
        // one expanding direction, and it is weaker than at the Gaussian point
        assert_eq!(fp.expanding().len(), 1, "{:?}", fp.eigenvalues);
        let gauss = 2f64.powf(3.0 - 2.0 * params.phi_dim);
        assert!(1.0 < fp.leading_eigenvalue() && fp.leading_eigenvalue() < gauss);
        let kappa = kappa_from_spectrum(fp, &params).unwrap();
        assert!(kappa > prev_kappa);
        prev_c4 = c4;
        prev_kappa = kappa;
    }
    let ratio = fps[1].couplings.get(4) / fps[0].couplings.get(4);
    assert!((1.5..=2.7).contains(&ratio), "ratio {ratio}");
}

#[test]
fn bad_guess_reports_newton_failure() {
    let map = reduced(0.1);
    let bad = wick(map.grid, |x| -3.0 * x * x + 1e-4 * x.powi(4));
    match find_fixed_point(&bad, &map, 1e-10) {
        Err(HrgError::NewtonFailure { residuals, .. }) => assert!(!residuals.is_empty()),
        other => panic!("expected a Newton failure, got {other:?}"),
    }
    assert!(find_fixed_point(&bad, &map, 0.0).is_err());
}

#[test]
fn flows_are_bitwise_reproducible() {
    let params = RGParams::bms(0.1).unwrap();
    let v = bare_potential(GridSpec::default(), 0.2, 0.25).unwrap();
    let a = flow(&v, &params, Backend::Nested, 5, 3).unwrap();
    let b = flow(&v, &params, Backend::Nested, 5, 3).unwrap();
    assert_eq!(a.records, b.records);
    let mc = Backend::MonteCarlo {
        n_samples: 2000,
        seed: 9,
    };
    let grid = GridSpec::default().with_points(129);
    let v = bare_potential(grid, 0.2, 0.25).unwrap();
    let a = flow(&v, &params, mc, 2, 3).unwrap();
    let b = flow(&v, &params, mc, 2, 3).unwrap();
    assert_eq!(a.records, b.records);
}

#[test]
fn critical_mass_brackets_the_phases() {
    let params = RGParams::bms(0.1).unwrap();
    let grid = GridSpec::default();
    let opts = ShootingOptions::default();
    let crit = critical_mu(0.2, &params, Backend::Nested, grid, 1e-8, &opts).unwrap();
    assert!(crit.hi - crit.lo <= 1e-8);
    assert_ne!(crit.lo_phase, crit.hi_phase);

    let above = classify(0.2, crit.mu_c + 0.01, &params, Backend::Nested, grid, &opts).unwrap();
    let below = classify(0.2, crit.mu_c - 0.01, &params, Backend::Nested, grid, &opts).unwrap();
    assert_eq!(above.phase, Phase::HighTemperature);
    assert_eq!(below.phase, Phase::LowTemperature);

    let v = bare_potential(grid, 0.2, crit.mu_c).unwrap();
    let traj = flow(&v, &params, Backend::Nested, 15, 2).unwrap();
    assert_eq!(traj.records.len(), 15);
    assert!(!traj.diverged);
    for r in &traj.records {
        assert!(r.couplings.get(2).abs() < opts.theta, "step {}", r.step);
    }
}

#[test]
fn critical_mass_vanishes_without_coupling() {
    let params = RGParams::bms(0.1).unwrap();
    let c = critical_mu(
        0.0,
        &params,
        Backend::Nested,
        GridSpec::default(),
        1e-6,
        &ShootingOptions::default(),
    )
    .unwrap();
    assert_eq!(c.mu_c, 0.0);
}

#[test]
fn wave_amplitude_is_linear_and_nonzero() {
    let (map, fp) = nontrivial(0.1);
    let opts = LimitOptions::default();
    let grid = map.grid;
    let v = &fp.potential;
    let zero = SampledEvenFunction::zero(grid);
    assert_eq!(wave_amplitude(v, &zero, &map, &fp, &opts).unwrap().value, 0.0);

    let w = wick(grid, |x| wick_monomial(2, x));
    let w2 = wick(grid, |x| 2.0 * wick_monomial(2, x));
    let a = wave_amplitude(v, &w, &map, &fp, &opts).unwrap().value;
    let b = wave_amplitude(v, &w2, &map, &fp, &opts).unwrap().value;
    assert!(a.is_finite() && a.abs() > 1e-6, "amplitude {a}");
    assert!((b - 2.0 * a).abs() < 1e-3 * (2.0 * a).abs(), "{b} vs 2·{a}");
}

#[test]
fn unstable_coordinate_linearizes_the_map() {
    let (map, fp) = nontrivial(0.1);
    let opts = LimitOptions::default();
    let grid = map.grid;
    let lambda = fp.leading_eigenvalue();
    // close enough that the orbit stays linear while the stable part decays
    let v = SampledEvenFunction::from_fn(grid, |x| {
        fp.potential.evaluate(x) + 1e-9 * wick_monomial(4, x)
    })
    .unwrap()
    .normalized();
    let z = scaling_field_z(&v, &map, &fp, &opts).unwrap().value;
    let stepped = map.reconstruct(&map.apply(&map.coords(&v)).unwrap()).unwrap();
    let z1 = scaling_field_z(&stepped, &map, &fp, &opts).unwrap().value;
    assert!(z.abs() > 0.0);
    assert!((z1 - lambda * z).abs() < 1e-3 * (lambda * z).abs(), "{z1} vs {}", lambda * z);

    // Ψ(V, W) is the derivative of z along W
    let w = wick(grid, |x| 0.01 * wick_monomial(4, x) + 0.02 * wick_monomial(2, x));
    let h = 1e-10;
    let shifted = |s: f64| SampledEvenFunction::from_fn(grid, |x| v.evaluate(x) + s * w.evaluate(x)).unwrap();
    let dz = (scaling_field_z(&shifted(h), &map, &fp, &opts).unwrap().value
        - scaling_field_z(&shifted(-h), &map, &fp, &opts).unwrap().value)
        / (2.0 * h);
    let psi = wave_amplitude(&v, &w, &map, &fp, &opts).unwrap().value;
    assert!((psi - dz).abs() < 1e-2 * psi.abs(), "psi {psi} vs dz {dz}");
}

#[test]
fn quadratic_flow_saturates() {
    // μ grows by 2^{1.5} per step at ε = 0 until the grid can no longer hold it
    let params = RGParams::bms(0.0).unwrap();
    let grid = GridSpec::default();
    let v = SampledEvenFunction::from_fn(grid, |x| 0.1 * x * x).unwrap();
    let f = flow(&v, &params, Backend::Nested, 5, 2).unwrap();
    let mut c2 = project_couplings(&v, 2).unwrap().get(2);
    for r in &f.records {
        let next = r.couplings.get(2);
        assert!((next / c2 - 2f64.powf(1.5)).abs() < 1e-6, "step {}", r.step);
        c2 = next;
    }
}
