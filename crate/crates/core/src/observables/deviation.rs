//! One layer of the marked-branch recursion for a single-site deviation.

use rayon::prelude::*;

use crate::error::{HrgError, Result};
use crate::func::{
    hermite::GaussHermite, pair_log_at, symmetric_pair_integral, LineFunction, Profile,
    SampledEvenFunction, SumProfile,
};
use crate::map::{haar_scales, Backend, RGParams, ZeroSumDraws};

/// Output of [`deviation_step`].
#[derive(Debug, Clone)]
pub struct DeviationStep {
    /// Normalized deviation at the coarser marked site.
    pub w_dev: LineFunction,
    /// `δb(V[f]) − δb(V[0])` for this layer.
    pub delta_b_diff: f64,
    /// Largest Monte Carlo standard error of the log ratio, if any.
    pub max_stderr: Option<f64>,
}

/// `D(c) = −ln[G_mixed(c)/G_bulk(c)]` on the full-line grid, where the
/// marked site carries `V_bulk + W_dev` and the other `N − 1` sites carry
/// `V_bulk`.
pub fn log_ratio(
    v_bulk: &SampledEvenFunction,
    w_dev: &LineFunction,
    params: &RGParams,
    backend: Backend,
) -> Result<(LineFunction, Option<f64>)> {
    let grid = *v_bulk.grid();
    if w_dev.grid() != &grid {
        return Err(HrgError::invalid("bulk and deviation grids differ"));
    }
    match backend {
        Backend::Nested => {
            let levels = params.haar_levels().ok_or_else(|| {
                HrgError::UnsupportedBackend(format!(
                    "nested backend needs p = 2, got p = {}",
                    params.p
                ))
            })?;
            let rule = GaussHermite::cached(grid.quad_nodes);
            let line_pts = grid.line_points();
            let n = grid.n_points;
            // the marked leaf sits in the first half of every Haar pair
            let mut bulk = v_bulk.clone();
            let mut dev = w_dev.clone();
            for s in haar_scales(levels) {
                let marked = SumProfile(&bulk, &dev);
                let mixed: Vec<f64> = line_pts
                    .par_iter()
                    .map(|&x| pair_log_at(&rule, &marked, &bulk, s, x))
                    .collect();
                let next_bulk = symmetric_pair_integral(&bulk, s)?;
                let nb = next_bulk.logvals();
                let vals: Vec<f64> = mixed
                    .iter()
                    .enumerate()
                    .map(|(k, m)| m - nb[k.abs_diff(n - 1)])
                    .collect();
                if let Some(k) = vals.iter().position(|v| !v.is_finite()) {
                    return Err(HrgError::numerical(
                        "deviation_step",
                        format!("non-finite mixed integral at phi = {}", line_pts[k]),
                    ));
                }
                dev = LineFunction::from_values(grid, vals)?;
                bulk = next_bulk;
            }
            Ok((dev, None))
        }
        Backend::MonteCarlo { n_samples, seed } => {
            let draws = ZeroSumDraws::generate(params.n(), n_samples, seed)?;
            let pts = grid.line_points();
            let out: Vec<(f64, f64)> = pts
                .par_iter()
                .map(|&c| {
                    let s = draws.scale_for(v_bulk, c);
                    paired_log_ratio(&draws, c, s, v_bulk, w_dev)
                })
                .collect();
            let (vals, se): (Vec<f64>, Vec<f64>) = out.into_iter().unzip();
            if let Some(k) = vals.iter().position(|v| !v.is_finite()) {
                return Err(HrgError::numerical(
                    "deviation_step",
                    format!("non-finite Monte Carlo ratio at phi = {}", pts[k]),
                ));
            }
            let max_se = se.iter().cloned().fold(0.0, f64::max);
            Ok((LineFunction::from_values(grid, vals)?, Some(max_se)))
        }
    }
}

/// `(−ln(Ḡ_mixed/Ḡ_bulk), standard error)` from the same draws; the marked
/// site is site 0.
fn paired_log_ratio(
    draws: &ZeroSumDraws,
    c: f64,
    s: f64,
    v: &SampledEvenFunction,
    w: &LineFunction,
) -> (f64, f64) {
    let bulk = draws.log_terms(c, s, |_, x| v.eval(x));
    let dev: Vec<f64> = bulk
        .iter()
        .zip(draws.site_positions(0, c, s))
        .map(|(t, x)| t - w.eval(x))
        .collect();
    let shifted = |terms: &[f64]| -> (f64, Vec<f64>) {
        let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (m, terms.iter().map(|t| (t - m).exp()).collect())
    };
    let (mb, b) = shifted(&bulk);
    let (md, a) = shifted(&dev);
    let nf = b.len() as f64;
    let abar = a.iter().sum::<f64>() / nf;
    let bbar = b.iter().sum::<f64>() / nf;
    let log_ratio = (md + abar.ln()) - (mb + bbar.ln());
    let var = a
        .iter()
        .zip(&b)
        .map(|(x, y)| (x / abar - y / bbar).powi(2))
        .sum::<f64>()
        / (nf - 1.0);
    (-log_ratio, (var / nf).sqrt())
}

/// One layer for a deviation at the marked site:
/// `W′(ψ) = D(ψ/β) − D(0)` and `δb difference = −D(0)`.
pub fn deviation_step(
    v_bulk: &SampledEvenFunction,
    w_dev: &LineFunction,
    params: &RGParams,
    backend: Backend,
) -> Result<DeviationStep> {
    if !v_bulk.is_normalized() {
        return Err(HrgError::invalid("bulk potential must satisfy V(0) = 0"));
    }
    let grid = *v_bulk.grid();
    if w_dev.is_zero() {
        return Ok(DeviationStep {
            w_dev: LineFunction::zero(grid),
            delta_b_diff: 0.0,
            max_stderr: None,
        });
    }
    let (d, max_stderr) = log_ratio(v_bulk, w_dev, params, backend)?;
    let d0 = d.value_at_zero();
    let beta = params.beta();
    let vals: Vec<f64> = grid
        .line_points()
        .into_iter()
        .map(|psi| d.eval(psi / beta) - d0)
        .collect();
    let mut w = LineFunction::from_values(grid, vals)?;
    if w.value_at_zero() != 0.0 {
        w = w.normalized();
    }
    Ok(DeviationStep {
        w_dev: w,
        delta_b_diff: -d0,
        max_stderr,
    })
}
