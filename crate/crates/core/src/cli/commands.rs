//! The subcommands. Each one writes its outputs into `config.out` and
//! returns the file names it produced.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use serde::Serialize;

use crate::cli::config::{BulkChoice, RunConfig, SampleMode};
use crate::cli::provenance::write_json;
use crate::cli::selftest::{run_selftest, Check};
use crate::dynamics::{
    bare_potential, continue_in_epsilon, critical_mu, find_fixed_point, flow, FixedPointKind,
    FixedPointSummary, ReducedMap,
};
use crate::error::{HrgError, Result};
use crate::func::SampledEvenFunction;
use crate::observables::{calibrate_y, cumulant_generating, cumulants, TestFunctionSpec, YCalibrationOptions};
use crate::tree::{
    exact_covariance, gaussian_covariance, mcmc_perturbed_field, CovarianceTable, ExponentFit,
    GaussianEstimatorOptions, McmcOptions,
};

pub type Outputs = Vec<String>;

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn load_potential(path: &str, cfg: &RunConfig) -> Result<SampledEvenFunction> {
    let f = File::open(path).map_err(|e| HrgError::invalid(format!("cannot open {path}: {e}")))?;
    SampledEvenFunction::read_csv(f, cfg.grid.quad_nodes)
}

pub fn cmd_flow(cfg: &RunConfig, dir: &Path) -> Result<Outputs> {
    let params = cfg.params()?;
    let fc = &cfg.flow;
    let v0 = match fc.v0.as_str() {
        "bare" => bare_potential(cfg.grid, fc.g, fc.mu)?,
        "zero" => SampledEvenFunction::zero(cfg.grid),
        path => load_potential(path, cfg)?.normalized(),
    };
    let f = flow(&v0, &params, cfg.backend(), fc.steps, fc.truncation)?;
    f.write_csv(create(dir, "flow.csv")?, fc.truncation)?;
    write_json(dir, "summary.json", &f.summary(fc.steps))?;
    Ok(vec!["flow.csv".into(), "summary.json".into()])
}

#[derive(Serialize)]
struct FixpointOutput {
    fixed_points: Vec<FixedPointSummary>,
}

pub fn cmd_fixpoint(cfg: &RunConfig, dir: &Path) -> Result<Outputs> {
    let params = cfg.params()?;
    let map = ReducedMap::new(params, cfg.backend(), cfg.grid);
    let fc = &cfg.fixpoint;
    let records = match fc.guess.as_str() {
        "seed" => {
            let eps = if fc.epsilons.is_empty() {
                vec![params.epsilon()]
            } else {
                fc.epsilons.clone()
            };
            continue_in_epsilon(&eps, &map, fc.tol)?
        }
        "zero" => vec![find_fixed_point(&SampledEvenFunction::zero(cfg.grid), &map, fc.tol)?],
        path => vec![find_fixed_point(&load_potential(path, cfg)?.normalized(), &map, fc.tol)?],
    };
    let mut outputs = vec!["fixedpoint.json".to_string()];
    for rec in &records {
        let name = format!("potential_eps{}.csv", rec.epsilon);
        rec.potential.write_csv(create(dir, &name)?)?;
        outputs.push(name);
    }
    write_json(
        dir,
        "fixedpoint.json",
        &FixpointOutput {
            fixed_points: records.iter().map(|r| r.summary()).collect(),
        },
    )?;
    Ok(outputs)
}

pub fn cmd_critical_mu(cfg: &RunConfig, dir: &Path) -> Result<Outputs> {
    let params = cfg.params()?;
    let c = &cfg.critical_mu;
    let res = critical_mu(c.g, &params, cfg.backend(), cfg.grid, c.tol, &c.shooting)?;
    write_json(dir, "mu_c.json", &res)?;
    Ok(vec!["mu_c.json".into()])
}

#[derive(Serialize)]
struct SampleFit {
    mode: SampleMode,
    depth: usize,
    mu: Option<f64>,
    phi: Option<ExponentFit>,
    phi2: Option<ExponentFit>,
    exact_cov_phi: Vec<f64>,
    acceptance: Option<Vec<f64>>,
    fit_errors: Vec<String>,
}

fn fit_or_note(r: Result<ExponentFit>, what: &str, notes: &mut Vec<String>) -> Option<ExponentFit> {
    r.map_err(|e| notes.push(format!("{what}: {e}"))).ok()
}

pub fn cmd_sample(cfg: &RunConfig, dir: &Path) -> Result<Outputs> {
    let params = cfg.params()?;
    let sc = &cfg.sample;
    let (table, mu, acceptance): (CovarianceTable, Option<f64>, Option<Vec<f64>>) = match sc.mode {
        SampleMode::Gaussian => {
            let opts = GaussianEstimatorOptions {
                n_replicas: sc.replicas,
                nodes_per_level: sc.nodes_per_level,
                pairs_per_level: sc.pairs_per_level,
                seed: cfg.seed,
            };
            (gaussian_covariance(&params, sc.depth, &opts)?, None, None)
        }
        SampleMode::Mcmc => {
            let mu = if sc.critical {
                let c = &cfg.critical_mu;
                critical_mu(sc.g, &params, cfg.backend(), cfg.grid, c.tol, &c.shooting)?.mu_c
            } else {
                sc.mu
            };
            let v = bare_potential(cfg.grid, sc.g, mu)?;
            let opts = McmcOptions {
                depth: sc.depth,
                sweeps: sc.sweeps,
                burn_in: sc.burn_in,
                chains: sc.chains,
                batches: sc.batches,
                seed: cfg.seed,
            };
            let r = mcmc_perturbed_field(&params, &v, &opts)?;
            (r.table, Some(mu), Some(r.acceptance))
        }
    };
    table.write_csv(create(dir, "correlations.csv")?)?;
    let mut notes = Vec::new();
    let fit = SampleFit {
        mode: sc.mode,
        depth: sc.depth,
        mu,
        phi: fit_or_note(table.fit_phi(), "phi", &mut notes),
        phi2: fit_or_note(table.fit_phi2(), "phi2", &mut notes),
        exact_cov_phi: (0..=sc.depth)
            .map(|r| exact_covariance(&params, sc.depth, r))
            .collect(),
        acceptance,
        fit_errors: notes,
    };
    write_json(dir, "fit.json", &fit)?;
    Ok(vec!["correlations.csv".into(), "fit.json".into()])
}

#[derive(Serialize)]
struct ObservableSummary {
    spec: TestFunctionSpec,
    n_uv: usize,
    depth: usize,
    value: f64,
    source_constant: f64,
    tail_bound: f64,
    truncated: bool,
    kappa: Option<f64>,
    y_calibration: Option<crate::observables::YCalibration>,
}

pub fn cmd_observable(cfg: &RunConfig, dir: &Path) -> Result<Outputs> {
    let params = cfg.params()?.with_layers(1)?;
    let oc = &cfg.observable;
    let backend = cfg.backend();
    let (v, kappa) = match oc.bulk {
        BulkChoice::Zero => (SampledEvenFunction::zero(cfg.grid), 0.0),
        BulkChoice::FixedPoint => {
            let map = ReducedMap::new(params, backend, cfg.grid);
            let fp = continue_in_epsilon(&[params.epsilon()], &map, cfg.fixpoint.tol)?
                .pop()
                .expect("one epsilon");
            if fp.kind != FixedPointKind::Nontrivial {
                return Err(HrgError::invalid(format!(
                    "fixed point at epsilon {} is {:?}",
                    params.epsilon(),
                    fp.kind
                )));
            }
            (fp.potential.normalized(), fp.kappa.unwrap_or(0.0))
        }
    };
    let mut y_calibration = None;
    let spec = match oc.power {
        1 => TestFunctionSpec::field(oc.amplitude, oc.support_level),
        2 => {
            let y = match oc.y {
                Some(y) => y,
                None => {
                    let opts = YCalibrationOptions {
                        support_level: oc.support_level,
                        ..Default::default()
                    };
                    let bulk = vec![v.clone(); opts.n_max + oc.depth];
                    let cal = calibrate_y(&bulk, &params, kappa, backend, &opts)?;
                    let y = cal.y;
                    y_calibration = Some(cal);
                    y
                }
            };
            TestFunctionSpec::square(oc.amplitude, oc.support_level, kappa, y)
        }
        k => return Err(HrgError::invalid(format!("power must be 1 or 2, got {k}"))),
    };
    let bulk = vec![v; oc.n_uv + oc.depth];
    let series = cumulant_generating(&spec, &bulk, &params, oc.n_uv, backend)?;
    series.write_csv(create(dir, "series.csv")?)?;
    let cum = cumulants(
        &spec,
        &bulk,
        &params,
        oc.n_uv,
        backend,
        oc.stencil.unwrap_or(oc.amplitude.abs()),
    )?;
    write_json(dir, "cumulants.json", &cum.orders)?;
    write_json(
        dir,
        "summary.json",
        &ObservableSummary {
            spec,
            n_uv: oc.n_uv,
            depth: oc.depth,
            value: series.value,
            source_constant: series.source_constant,
            tail_bound: series.tail_bound,
            truncated: series.truncated,
            kappa: (oc.power == 2).then_some(kappa),
            y_calibration,
        },
    )?;
    Ok(vec!["series.csv".into(), "cumulants.json".into(), "summary.json".into()])
}

pub fn cmd_selftest(cfg: &RunConfig, dir: &Path) -> Result<(Outputs, Vec<Check>)> {
    let checks = run_selftest(cfg)?;
    write_json(dir, "selftest.json", &checks)?;
    Ok((vec!["selftest.json".into()], checks))
}
