//! The built-in invariant suite behind `hrg selftest`.

use serde::Serialize;

use crate::cli::config::RunConfig;
use crate::dynamics::{find_fixed_point, ReducedMap};
use crate::error::Result;
use crate::func::{gauss_smooth, wick_monomial, GridSpec, SampledEvenFunction};
use crate::map::{rg_step, zero_sum_block_integral, Backend, RGParams};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check {
        name: name.into(),
        passed,
        detail,
    }
}

fn gaussian_spectrum(grid: GridSpec) -> Result<Check> {
    let params = RGParams::bms(0.1)?;
    let map = ReducedMap::new(params, Backend::Nested, grid);
    let fp = find_fixed_point(&SampledEvenFunction::zero(grid), &map, 1e-12)?;
    let mut worst = 0.0f64;
    for k in [2u32, 4, 6] {
        let want = params.gaussian_eigenvalue(k);
        let got = fp
            .eigenvalues
            .iter()
            .map(|e| (e - want).abs() / want)
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(got);
    }
    Ok(check(
        "gaussian spectrum",
        worst <= 1e-4,
        format!("max relative error {worst:.2e} for k = 2, 4, 6"),
    ))
}

fn quadratic_closed_form(grid: GridSpec) -> Result<Check> {
    let params = RGParams::bms(0.0)?;
    let mu = 0.1;
    let v = SampledEvenFunction::from_fn(grid, |x| mu * x * x)?;
    let s = rg_step(&v, &params, Backend::Nested)?;
    let x = 1.0;
    let got_mu = s.v.evaluate(x) / (x * x);
    let want_mu = 2f64.powf(1.5) * mu;
    let want_b = -3.5 * 1.2f64.ln();
    let err = (got_mu - want_mu).abs().max((s.delta_b - want_b).abs());
    Ok(check(
        "quadratic closed form",
        err <= 1e-8,
        format!("mu' = {got_mu:.12}, delta_b = {:.12}, error {err:.2e}", s.delta_b),
    ))
}

fn deconvolution(grid: GridSpec) -> Result<Check> {
    let params = RGParams::bms(0.1)?;
    let n = params.n() as f64;
    let mut worst = 0.0f64;
    let tests: [&dyn Fn(f64) -> f64; 3] = [
        &|x| 0.1 * x * x,
        &|x| 0.02 * x.powi(4),
        &|x| 0.05 * wick_monomial(4, x) - 0.1 * wick_monomial(2, x),
    ];
    for f in tests {
        let f = SampledEvenFunction::from_fn(grid, f)?.normalized();
        let g = zero_sum_block_integral(&f, &params, Backend::Nested)?.g_log;
        let lhs = gauss_smooth(&g, 1.0 / n)?;
        let rhs = gauss_smooth(&f, 1.0)?;
        for (i, c) in grid.points().into_iter().enumerate() {
            if c <= 6.0 {
                worst = worst.max((lhs.logvals()[i] - n * rhs.logvals()[i]).abs());
            }
        }
    }
    Ok(check(
        "deconvolution identity",
        worst <= 1e-6,
        format!("sup error {worst:.2e} on |c| <= 6"),
    ))
}

fn backend_equivalence(cfg: &RunConfig) -> Result<Check> {
    let params = RGParams::bms(0.1)?;
    let grid = cfg.grid.with_points(cfg.selftest.mc_points);
    let mc = Backend::MonteCarlo {
        n_samples: cfg.selftest.mc_samples,
        seed: cfg.seed,
    };
    let mut worst = 0.0f64;
    let tests: [&dyn Fn(f64) -> f64; 3] = [
        &|x| 0.1 * x * x,
        &|x| 0.02 * x.powi(4),
        &|x| 0.05 * wick_monomial(4, x) - 0.1 * wick_monomial(2, x),
    ];
    for f in tests {
        let f = SampledEvenFunction::from_fn(grid, f)?.normalized();
        let a = zero_sum_block_integral(&f, &params, Backend::Nested)?.g_log;
        let b = zero_sum_block_integral(&f, &params, mc)?;
        let se = b.stderr.unwrap_or_default();
        for ((x, y), s) in a.logvals().iter().zip(b.g_log.logvals()).zip(&se) {
            // the sampling error can vanish exactly, rounding cannot
            let err = s.hypot(1e-12 * x.abs().max(1.0));
            worst = worst.max((x - y).abs() / err);
        }
    }
    Ok(check(
        "backend equivalence",
        worst <= 3.0,
        format!("max |z| = {worst:.2} ({} samples)", cfg.selftest.mc_samples),
    ))
}

pub fn run_selftest(cfg: &RunConfig) -> Result<Vec<Check>> {
    let grid = cfg.grid;
    let mut out = vec![
        gaussian_spectrum(grid)?,
        quadratic_closed_form(grid)?,
        deconvolution(grid)?,
        backend_equivalence(cfg)?,
    ];
    if cfg.selftest.force_failure {
        out.push(check("forced failure", false, "requested by configuration".into()));
    }
    Ok(out)
}
