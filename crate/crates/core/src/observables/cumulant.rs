//! The δb-difference series for the cumulant generating function of a
//! smeared field or smeared squared field.
//!
//! The test function is `t` times the indicator of an ultrametric ball of
//! radius `α^s` around the marked site. The lattice starts `n_uv` layers
//! below the unit scale, so the ball holds `N^{n_uv+s}` fine sites. While
//! the ball is larger than one site every site in it carries the same
//! deviation and each block contributes identically ("ball phase"); after
//! that a single marked site carries it ("marked phase").

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{HrgError, Result};
use crate::func::{fmt17, LineFunction, SampledEvenFunction};
use crate::map::{rescale, zero_sum_block_integral, Backend, RGParams};
use crate::observables::deviation::deviation_step;

/// Terms smaller than this end the series.
pub const TERM_CUTOFF: f64 = 1e-10;
/// Marked-phase layers after which a non-decaying series is rejected.
pub const SUMMABILITY_WINDOW: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestFunctionSpec {
    /// 1 for the field, 2 for the squared field.
    pub power: u32,
    pub amplitude: f64,
    pub support_level: usize,
    /// `κ/2`, so that `Z = p^{κ/2}` per layer; used for `power = 2`.
    #[serde(default)]
    pub z_exponent: f64,
    /// Subtraction constant added to `C₀(0)`; used for `power = 2`.
    #[serde(default)]
    pub y: f64,
}

impl TestFunctionSpec {
    pub fn field(amplitude: f64, support_level: usize) -> Self {
        TestFunctionSpec {
            power: 1,
            amplitude,
            support_level,
            z_exponent: 0.0,
            y: 0.0,
        }
    }

    pub fn square(amplitude: f64, support_level: usize, kappa: f64, y: f64) -> Self {
        TestFunctionSpec {
            power: 2,
            amplitude,
            support_level,
            z_exponent: 0.5 * kappa,
            y,
        }
    }

    pub fn with_amplitude(self, amplitude: f64) -> Self {
        TestFunctionSpec { amplitude, ..self }
    }

    fn validate(&self) -> Result<()> {
        if !matches!(self.power, 1 | 2) {
            return Err(HrgError::invalid(format!(
                "power must be 1 or 2, got {}",
                self.power
            )));
        }
        if !self.amplitude.is_finite() || !self.z_exponent.is_finite() || !self.y.is_finite() {
            return Err(HrgError::invalid("test function parameters must be finite"));
        }
        Ok(())
    }
}

/// Single-site variance `C₀(0) = (1 − 1/N)/(1 − β^{−2})` of the
/// infinite-depth Gaussian field.
pub fn gaussian_site_variance(params: &RGParams) -> f64 {
    let n = params.n() as f64;
    (1.0 - 1.0 / n) / (1.0 - params.beta().powi(-2))
}

/// Source strength per fine site.
pub fn fine_source(spec: &TestFunctionSpec, params: &RGParams, n_uv: usize) -> f64 {
    let p = params.p as f64;
    let n = n_uv as f64;
    let d = params.d as f64;
    match spec.power {
        1 => spec.amplitude * p.powf(-(d - params.phi_dim) * n),
        _ => spec.amplitude * p.powf((spec.z_exponent - (d - 2.0 * params.phi_dim)) * n),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SeriesTerm {
    /// Layer index relative to the unit scale (negative in the UV).
    pub q: i64,
    pub delta_b_diff: f64,
    pub partial_sum: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CumulantSeries {
    pub value: f64,
    /// `−Σ_sites W(0)` from the constant part of the source.
    pub source_constant: f64,
    pub terms: Vec<SeriesTerm>,
    /// Geometric estimate of the omitted tail (zero when the tree ended).
    pub tail_bound: f64,
    /// The series stopped because the terms fell below the cutoff.
    pub truncated: bool,
}

impl CumulantSeries {
    /// `q,delta_b_diff,partial_sum`; partial sums include the source constant.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["q", "delta_b_diff", "partial_sum"])?;
        for t in &self.terms {
            w.write_record([t.q.to_string(), fmt17(t.delta_b_diff), fmt17(t.partial_sum)])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `S^T(f) = Σ_q [δb(V[f]) − δb(V[0])]` along `bulk`, where `bulk[m]` is the
/// bulk potential on layer `m` (layer 0 is the finest, `n_uv` layers below
/// the unit scale). Every layer of `bulk` is integrated, so its length fixes
/// the depth of the tree.
pub fn cumulant_generating(
    spec: &TestFunctionSpec,
    bulk: &[SampledEvenFunction],
    params: &RGParams,
    n_uv: usize,
    backend: Backend,
) -> Result<CumulantSeries> {
    spec.validate()?;
    let ball_levels = n_uv + spec.support_level;
    if bulk.len() <= ball_levels {
        return Err(HrgError::invalid(format!(
            "bulk trajectory has {} layers, need more than {ball_levels}",
            bulk.len()
        )));
    }
    let grid = *bulk[0].grid();
    let n = params.n() as f64;
    let beta = params.beta();
    let tau = fine_source(spec, params, n_uv);
    let mut series = CumulantSeries {
        value: 0.0,
        source_constant: 0.0,
        terms: Vec::with_capacity(bulk.len()),
        tail_bound: 0.0,
        truncated: false,
    };
    if spec.amplitude == 0.0 {
        return Ok(series);
    }
    let push = |series: &mut CumulantSeries, m: usize, term: f64| {
        series.value += term;
        series.terms.push(SeriesTerm {
            q: m as i64 - n_uv as i64,
            delta_b_diff: term,
            partial_sum: series.value,
        });
    };

    // ball phase
    let mut w_marked = match spec.power {
        1 => {
            // Σζ = 0 in every block, so a linear source passes through the
            // ball unchanged up to the factor N/β and adds no constant.
            let mut tau_m = tau;
            for m in 0..ball_levels {
                tau_m *= n / beta;
                push(&mut series, m, 0.0);
            }
            LineFunction::from_fn(grid, |x| -tau_m * x)?
        }
        _ => {
            let shift = gaussian_site_variance(params) + spec.y;
            series.source_constant = -tau * shift * n.powi(ball_levels as i32);
            series.value = series.source_constant;
            let mut w = SampledEvenFunction::from_fn(grid, |x| -tau * x * x)?;
            for (m, v) in bulk.iter().enumerate().take(ball_levels) {
                let dev = SampledEvenFunction::from_values(
                    grid,
                    v.logvals().iter().zip(w.logvals()).map(|(a, b)| a + b).collect(),
                )?;
                let g_dev = zero_sum_block_integral(&dev, params, backend)?;
                let g_bulk = zero_sum_block_integral(v, params, backend)?;
                let diff = SampledEvenFunction::from_values(
                    grid,
                    g_dev
                        .g_log
                        .logvals()
                        .iter()
                        .zip(g_bulk.g_log.logvals())
                        .map(|(a, b)| a - b)
                        .collect(),
                )?;
                let (w_next, minus_d0) = rescale(&diff, beta)?;
                let blocks = n.powi((ball_levels - m - 1) as i32);
                push(&mut series, m, blocks * minus_d0);
                w = w_next;
            }
            LineFunction::from_even(&w)
        }
    };

    // marked phase
    let mut recent: Vec<f64> = Vec::new();
    for (m, v) in bulk.iter().enumerate().skip(ball_levels) {
        let step = deviation_step(v, &w_marked, params, backend)?;
        push(&mut series, m, step.delta_b_diff);
        w_marked = step.w_dev;
        let a = step.delta_b_diff.abs();
        recent.push(a);
        if a < TERM_CUTOFF && m + 1 < bulk.len() {
            series.truncated = true;
            let k = recent.len();
            if k >= 2 && recent[k - 2] > 0.0 {
                let r = a / recent[k - 2];
                series.tail_bound = if r < 1.0 { a * r / (1.0 - r) } else { f64::INFINITY };
            }
            break;
        }
        if recent.len() > SUMMABILITY_WINDOW {
            let k = recent.len();
            let decaying = recent[k - 5..].windows(2).all(|w| w[1] < w[0]);
            if !decaying {
                return Err(HrgError::NonSummable(format!(
                    "terms not decaying after {} marked layers: {:?}",
                    k,
                    &recent[k - 5..]
                )));
            }
        }
    }
    Ok(series)
}

/// Exact second cumulant `⟨f, C f⟩ / t²` of the smeared field on a tree
/// of `depth` layers above the unit scale (finite-depth Gaussian field).
pub fn gaussian_field_variance(params: &RGParams, support_level: usize, depth: usize) -> f64 {
    let n = params.n() as f64;
    let b2 = params.beta().powi(-2);
    let s = support_level as i32;
    let layers: f64 = (support_level..depth).map(|q| b2.powi(q as i32)).sum();
    n.powi(2 * s) * (1.0 - 1.0 / n) * layers
}

#[derive(Debug, Clone, Serialize)]
pub struct Cumulants {
    /// Stencil spacing in `t`.
    pub step: f64,
    pub amplitudes: Vec<f64>,
    pub values: Vec<f64>,
    /// `dʲS/dtʲ` at `t = 0`, keyed by order `j = 1..4`.
    pub orders: std::collections::BTreeMap<String, f64>,
}

/// The first four `t`-cumulants of `S(t)` from a five-point stencil of
/// spacing `step`; the amplitudes are evaluated concurrently.
pub fn cumulants(
    spec: &TestFunctionSpec,
    bulk: &[SampledEvenFunction],
    params: &RGParams,
    n_uv: usize,
    backend: Backend,
    step: f64,
) -> Result<Cumulants> {
    use rayon::prelude::*;
    if !(step > 0.0 && step.is_finite()) {
        return Err(HrgError::invalid("stencil step must be positive"));
    }
    let amplitudes: Vec<f64> = (-2..=2).map(|k| k as f64 * step).collect();
    let values: Vec<f64> = amplitudes
        .par_iter()
        .map(|&t| {
            cumulant_generating(&spec.with_amplitude(t), bulk, params, n_uv, backend).map(|s| s.value)
        })
        .collect::<Result<_>>()?;
    let [sm2, sm1, s0, s1, s2] = [values[0], values[1], values[2], values[3], values[4]];
    let h = step;
    let k = [
        (sm2 - 8.0 * sm1 + 8.0 * s1 - s2) / (12.0 * h),
        (-sm2 + 16.0 * sm1 - 30.0 * s0 + 16.0 * s1 - s2) / (12.0 * h * h),
        (-sm2 + 2.0 * sm1 - 2.0 * s1 + s2) / (2.0 * h.powi(3)),
        (sm2 - 4.0 * sm1 + 6.0 * s0 - 4.0 * s1 + s2) / h.powi(4),
    ];
    let orders = k
        .iter()
        .enumerate()
        .map(|(j, v)| ((j + 1).to_string(), *v))
        .collect();
    Ok(Cumulants {
        step,
        amplitudes,
        values,
        orders,
    })
}
