//! The φ² exponent read off from the growth of a `:φ²:` perturbation.

use serde::Serialize;

use crate::dynamics::ReducedMap;
use crate::error::{HrgError, Result};
use crate::func::{project_couplings, wick_monomial, FnProfile, Profile};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phi2FlowOptions {
    pub t: f64,
    /// Steps used in the log-linear fit, inclusive.
    pub fit_from: usize,
    pub fit_to: usize,
    /// Largest accepted RMS deviation of `ln|Δ_n|` from the fitted line.
    pub max_log_residual: f64,
}

impl Default for Phi2FlowOptions {
    fn default() -> Self {
        Phi2FlowOptions {
            t: 1e-7,
            fit_from: 4,
            fit_to: 10,
            max_log_residual: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Phi2Flow {
    pub kappa_hat: f64,
    /// Fitted growth factor per map step.
    pub rate: f64,
    /// `Δ_n`, the `:φ²:` coupling difference per unit amplitude.
    pub amplitudes: Vec<f64>,
    /// `Δ_n / rateⁿ`; settles to a nonzero constant.
    pub compensated: Vec<f64>,
    pub rms_log_residual: f64,
}

/// Runs `V ± t:φ²:` through the reduced map and fits the growth of the
/// difference of their `:φ²:` couplings.
pub fn kappa_from_phi2_flow<P: Profile>(
    v: &P,
    map: &ReducedMap,
    opts: &Phi2FlowOptions,
) -> Result<Phi2Flow> {
    if opts.fit_to < opts.fit_from + 2 {
        return Err(HrgError::invalid("fit window needs at least three steps"));
    }
    let xv = map.coords(v);
    let xw = map.coords(&FnProfile(
        |x: f64| wick_monomial(2, x),
        |x: f64| (x * x - 1.0, 2.0 * x, 2.0),
    ));
    let shift = |s: f64| -> Vec<f64> { xv.iter().zip(&xw).map(|(a, b)| a + s * b).collect() };
    let (mut xp, mut xm) = (shift(opts.t), shift(-opts.t));
    let mut amplitudes = Vec::with_capacity(opts.fit_to + 1);
    for n in 0..=opts.fit_to {
        if n > 0 {
            xp = map.apply(&xp)?;
            xm = map.apply(&xm)?;
        }
        let diff: Vec<f64> = xp.iter().zip(&xm).map(|(a, b)| a - b).collect();
        let c2 = project_couplings(&map.reconstruct(&diff)?, 2)?.get(2);
        amplitudes.push(c2 / (2.0 * opts.t));
    }
    let window: Vec<(f64, f64)> = (opts.fit_from..=opts.fit_to)
        .map(|n| (n as f64, amplitudes[n].abs().ln()))
        .collect();
    if window.iter().any(|(_, y)| !y.is_finite()) {
        return Err(HrgError::numerical(
            "kappa_from_phi2_flow",
            "vanishing or non-finite coupling difference",
        ));
    }
    let k = window.len() as f64;
    let mx = window.iter().map(|w| w.0).sum::<f64>() / k;
    let my = window.iter().map(|w| w.1).sum::<f64>() / k;
    let sxx: f64 = window.iter().map(|w| (w.0 - mx).powi(2)).sum();
    let sxy: f64 = window.iter().map(|w| (w.0 - mx) * (w.1 - my)).sum();
    let slope = sxy / sxx;
    let rms = (window
        .iter()
        .map(|w| (w.1 - my - slope * (w.0 - mx)).powi(2))
        .sum::<f64>()
        / k)
        .sqrt();
    if !(rms <= opts.max_log_residual) {
        return Err(HrgError::numerical(
            "kappa_from_phi2_flow",
            format!("growth is not exponential (log residual {rms:e})"),
        ));
    }
    let rate = slope.exp();
    let params = &map.params;
    let log_l = params.l as f64 * (params.p as f64).ln();
    let kappa_hat = 2.0 * (params.d as f64 - 2.0 * params.phi_dim) - 2.0 * slope / log_l;
    let compensated = amplitudes
        .iter()
        .enumerate()
        .map(|(n, a)| a / rate.powi(n as i32))
        .collect();
    Ok(Phi2Flow {
        kappa_hat,
        rate,
        amplitudes,
        compensated,
        rms_log_residual: rms,
    })
}
