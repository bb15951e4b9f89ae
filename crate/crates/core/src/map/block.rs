//! The zero-sum block expectation `E_ζ[Π_i e^{−W(ζ_i + c)}]`.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HrgError, Result};
use crate::func::{symmetric_pair_integral, Profile, SampledEvenFunction};
use crate::map::params::RGParams;
use crate::rng;

/// Minimum sample count accepted by the Monte Carlo backend.
pub const MIN_MC_SAMPLES: usize = 1000;

const MC_CHUNK: usize = 4096;
const MC_STREAM_LABEL: u64 = 0xB10C;

/// How the block expectation is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// Exact Haar recursion of pair integrals; needs `p = 2`.
    Nested,
    /// Shared zero-sum Gaussian draws with importance rescaling.
    MonteCarlo { n_samples: usize, seed: u64 },
}

impl Backend {
    pub fn name(&self) -> &'static str {
        match self {
            Backend::Nested => "nested",
            Backend::MonteCarlo { .. } => "mc",
        }
    }
}

/// Result of a block integral. `stderr` is present for Monte Carlo.
#[derive(Debug, Clone)]
pub struct BlockIntegral {
    pub g_log: SampledEvenFunction,
    pub stderr: Option<Vec<f64>>,
}

/// Haar scales `σ_m = 2^{−(m+1)/2}`, finest level first.
pub fn haar_scales(levels: usize) -> Vec<f64> {
    (0..levels).map(|m| 2f64.powf(-((m + 1) as f64) / 2.0)).collect()
}

/// Covariance matrix of the leaf fluctuations generated by the Haar scales:
/// at level `m` each block of `2^{m+1}` leaves gets `+σ_m t` on its first
/// half and `−σ_m t` on its second half.
pub fn haar_covariance(levels: usize) -> Vec<Vec<f64>> {
    let n = 1usize << levels;
    let scales = haar_scales(levels);
    let sign = |m: usize, i: usize| if (i >> m) & 1 == 0 { 1.0 } else { -1.0 };
    let mut cov = vec![vec![0.0; n]; n];
    for (i, row) in cov.iter_mut().enumerate() {
        for (j, c) in row.iter_mut().enumerate() {
            *c = scales
                .iter()
                .enumerate()
                .filter(|(m, _)| (i >> (m + 1)) == (j >> (m + 1)))
                .map(|(m, s)| s * s * sign(m, i) * sign(m, j))
                .sum();
        }
    }
    cov
}

/// Largest deviation of the Haar covariance from `I − J/N`.
pub fn haar_covariance_error(levels: usize) -> f64 {
    let n = 1usize << levels;
    let cov = haar_covariance(levels);
    let mut err = 0.0f64;
    for (i, row) in cov.iter().enumerate() {
        for (j, c) in row.iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 } - 1.0 / n as f64;
            err = err.max((c - want).abs());
        }
    }
    err
}

pub fn zero_sum_block_integral(
    f: &SampledEvenFunction,
    params: &RGParams,
    backend: Backend,
) -> Result<BlockIntegral> {
    match backend {
        Backend::Nested => {
            let levels = params.haar_levels().ok_or_else(|| {
                HrgError::UnsupportedBackend(format!(
                    "nested backend needs N to be a power of two (p = 2), got p = {}",
                    params.p
                ))
            })?;
            debug_assert!(haar_covariance_error(levels) < 1e-14);
            let mut h = f.clone();
            for s in haar_scales(levels) {
                h = symmetric_pair_integral(&h, s)?;
            }
            Ok(BlockIntegral {
                g_log: h,
                stderr: None,
            })
        }
        Backend::MonteCarlo { n_samples, seed } => {
            let draws = ZeroSumDraws::generate(params.n(), n_samples, seed)?;
            let pts = f.grid().points();
            let out: Vec<(f64, f64)> = pts
                .par_iter()
                .map(|&c| {
                    let s = draws.scale_for(f, c);
                    draws.log_mean(c, s, |_, x| f.eval(x))
                })
                .collect();
            let (vals, se): (Vec<f64>, Vec<f64>) = out.into_iter().map(|(m, e)| (-m, e)).unzip();
            if let Some(i) = vals.iter().position(|v| !v.is_finite()) {
                return Err(HrgError::numerical(
                    "zero_sum_block_integral",
                    format!("non-finite Monte Carlo estimate at phi = {}", pts[i]),
                ));
            }
            Ok(BlockIntegral {
                g_log: SampledEvenFunction::from_values(*f.grid(), vals)?,
                stderr: Some(se),
            })
        }
    }
}

/// A reusable set of zero-sum Gaussian vectors `ζ = ξ − mean(ξ)`.
#[derive(Debug, Clone)]
pub struct ZeroSumDraws {
    n_sites: usize,
    zeta: Vec<f64>,
    norms: Vec<f64>,
}

impl ZeroSumDraws {
    /// Chunks of samples come from separate streams, so the draws do not
    /// depend on the number of threads.
    pub fn generate(n_sites: usize, n_samples: usize, seed: u64) -> Result<Self> {
        if n_samples < MIN_MC_SAMPLES {
            return Err(HrgError::invalid(format!(
                "Monte Carlo backend needs at least {MIN_MC_SAMPLES} samples, got {n_samples}"
            )));
        }
        let chunks: Vec<Vec<f64>> = (0..n_samples.div_ceil(MC_CHUNK))
            .into_par_iter()
            .map(|k| {
                let mut r = rng::substream(seed, MC_STREAM_LABEL, k as u64);
                let len = MC_CHUNK.min(n_samples - k * MC_CHUNK);
                let mut out = Vec::with_capacity(len * n_sites);
                let mut xi = vec![0.0; n_sites];
                for _ in 0..len {
                    for x in xi.iter_mut() {
                        *x = StandardNormal.sample(&mut r);
                    }
                    let mean = xi.iter().sum::<f64>() / n_sites as f64;
                    out.extend(xi.iter().map(|x| x - mean));
                }
                out
            })
            .collect();
        let zeta: Vec<f64> = chunks.concat();
        let norms = zeta
            .chunks_exact(n_sites)
            .map(|z| z.iter().map(|x| x * x).sum())
            .collect();
        Ok(ZeroSumDraws {
            n_sites,
            zeta,
            norms,
        })
    }

    pub fn len(&self) -> usize {
        self.norms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.norms.is_empty()
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// Importance scale `1/√(1 + max(W''(c), 0))`: exact for quadratic `W`.
    pub fn scale_for<P: Profile>(&self, w: &P, c: f64) -> f64 {
        let (_, _, d2) = w.eval_d2(c);
        1.0 / (1.0 + d2.max(0.0)).sqrt()
    }

    /// Log integrand of every draw for `Π_i e^{−W_i(sζ_i + c)}`, including
    /// the likelihood ratio of the rescaled draws.
    pub fn log_terms(&self, c: f64, s: f64, w: impl Fn(usize, f64) -> f64) -> Vec<f64> {
        let base = (self.n_sites - 1) as f64 * s.ln();
        let lr = 0.5 * (1.0 - s * s);
        self.zeta
            .chunks_exact(self.n_sites)
            .zip(&self.norms)
            .map(|(z, nrm)| {
                let mut e = base + lr * nrm;
                for (i, zi) in z.iter().enumerate() {
                    e -= w(i, c + s * zi);
                }
                e
            })
            .collect()
    }

    /// Positions `c + sζ_site` of one site across all draws.
    pub fn site_positions(&self, site: usize, c: f64, s: f64) -> impl Iterator<Item = f64> + '_ {
        self.zeta
            .chunks_exact(self.n_sites)
            .map(move |z| c + s * z[site])
    }

    /// `(ln E[Π_i e^{−W_i(ζ_i + c)}], standard error of that log)` using the
    /// rescaled draws `s·ζ` and their likelihood ratio.
    pub fn log_mean(&self, c: f64, s: f64, w: impl Fn(usize, f64) -> f64) -> (f64, f64) {
        log_mean_with_se(&self.log_terms(c, s, w))
    }
}

/// Log of the sample mean of `exp(terms)` and its delta-method standard error.
pub fn log_mean_with_se(terms: &[f64]) -> (f64, f64) {
    let n = terms.len() as f64;
    let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return (max, f64::NAN);
    }
    let (mut s1, mut s2) = (0.0, 0.0);
    for t in terms {
        let e = (t - max).exp();
        s1 += e;
        s2 += e * e;
    }
    let mean = s1 / n;
    let var = (s2 / n - mean * mean).max(0.0) * n / (n - 1.0);
    (max + mean.ln(), (var / n).sqrt() / mean)
}
