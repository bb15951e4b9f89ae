//! Calibration of the subtraction constant `Y` for the squared field.
//!
//! The part of `S(t)` linear in `t` depends on the UV depth through the
//! source constant alone, with slope `−Y·g_n` where
//! `g_n = Z^n p^{−(d−2[φ])n} N^{n+s}`. `Y` is fixed by requiring the linear
//! part to be independent of `n`, which is a linear regression of the
//! unsubtracted linear part on `g_n`.

use serde::Serialize;

use crate::error::{HrgError, Result};
use crate::func::SampledEvenFunction;
use crate::map::{Backend, RGParams};
use crate::observables::cumulant::{cumulant_generating, fine_source, TestFunctionSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YCalibrationOptions {
    /// Amplitude of the central differences.
    pub t: f64,
    pub support_level: usize,
    pub n_min: usize,
    pub n_max: usize,
    /// Largest accepted RMS fit residual relative to the spread of the
    /// linear parts.
    pub max_rel_residual: f64,
}

impl Default for YCalibrationOptions {
    fn default() -> Self {
        YCalibrationOptions {
            t: 0.05,
            support_level: 0,
            n_min: 2,
            n_max: 7,
            max_rel_residual: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct YCalibration {
    pub y: f64,
    /// `n`-independent linear part after subtraction.
    pub intercept: f64,
    pub rms_residual: f64,
    pub n_values: Vec<usize>,
    /// Unsubtracted linear parts `L_n(0)`.
    pub linear_parts: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Richardson-extrapolated `dS/dt` at `t = 0` with `Y = 0`.
fn linear_part(
    spec: &TestFunctionSpec,
    bulk: &[SampledEvenFunction],
    params: &RGParams,
    n_uv: usize,
    backend: Backend,
    t: f64,
) -> Result<f64> {
    let s = |a: f64| -> Result<f64> {
        Ok(cumulant_generating(&spec.with_amplitude(a), bulk, params, n_uv, backend)?.value)
    };
    let d1 = (s(t)? - s(-t)?) / (2.0 * t);
    let d2 = (s(0.5 * t)? - s(-0.5 * t)?) / t;
    Ok((4.0 * d2 - d1) / 3.0)
}

/// `bulk[j]` is the bulk potential `n_max − j` layers below the unit scale
/// for `j ≤ n_max`, and above it beyond; runs with fewer UV layers use the
/// tail of the trajectory.
pub fn calibrate_y(
    bulk: &[SampledEvenFunction],
    params: &RGParams,
    kappa: f64,
    backend: Backend,
    opts: &YCalibrationOptions,
) -> Result<YCalibration> {
    if opts.n_max < opts.n_min + 2 {
        return Err(HrgError::invalid("calibration needs at least three UV depths"));
    }
    if bulk.len() <= opts.n_max + opts.support_level {
        return Err(HrgError::invalid(format!(
            "bulk trajectory has {} layers, need more than {}",
            bulk.len(),
            opts.n_max + opts.support_level
        )));
    }
    if !(opts.t > 0.0) {
        return Err(HrgError::invalid("calibration amplitude must be positive"));
    }
    let spec = TestFunctionSpec::square(1.0, opts.support_level, kappa, 0.0);
    let n_values: Vec<usize> = (opts.n_min..=opts.n_max).collect();
    let n_sites = params.n() as f64;
    let mut linear_parts = Vec::with_capacity(n_values.len());
    let mut weights = Vec::with_capacity(n_values.len());
    for &n in &n_values {
        let traj = &bulk[opts.n_max - n..];
        linear_parts.push(linear_part(&spec, traj, params, n, backend, opts.t)?);
        weights.push(fine_source(&spec, params, n) * n_sites.powi((n + opts.support_level) as i32));
    }
    let k = n_values.len() as f64;
    let mg = weights.iter().sum::<f64>() / k;
    let ml = linear_parts.iter().sum::<f64>() / k;
    let sgg: f64 = weights.iter().map(|g| (g - mg).powi(2)).sum();
    let sgl: f64 = weights
        .iter()
        .zip(&linear_parts)
        .map(|(g, l)| (g - mg) * (l - ml))
        .sum();
    if sgg <= 1e-30 * mg * mg {
        return Err(HrgError::Degenerate(
            "source weights do not vary with the UV depth".into(),
        ));
    }
    let y = sgl / sgg;
    let intercept = ml - y * mg;
    let rms = (weights
        .iter()
        .zip(&linear_parts)
        .map(|(g, l)| (l - intercept - y * g).powi(2))
        .sum::<f64>()
        / k)
        .sqrt();
    let spread = linear_parts
        .iter()
        .map(|l| (l - ml).abs())
        .fold(0.0, f64::max)
        .max(intercept.abs());
    if !(rms <= opts.max_rel_residual * spread) {
        return Err(HrgError::NoConvergence {
            op: "calibrate_y",
            iterations: n_values.len(),
            residual: rms,
        });
    }
    Ok(YCalibration {
        y,
        intercept,
        rms_residual: rms,
        n_values,
        linear_parts,
        weights,
    })
}
