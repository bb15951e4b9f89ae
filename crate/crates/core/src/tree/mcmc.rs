//! Metropolis sampling of the tree field perturbed by a single-site potential.
//!
//! The state is the set of layer variables. A move picks two nodes of one
//! block and shifts them by `±δ`, which keeps the block sum at zero, and
//! moves every leaf below them by `±δβ^{−q}`.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HrgError, Result};
use crate::func::{Profile, SampledEvenFunction};
use crate::map::RGParams;
use crate::rng;
use crate::tree::estimate::{combine, full_tree_sample, pair_count, CovarianceTable, LevelSample};
use crate::tree::sampler::{block_draws, leaf_count, MAX_LEAVES};

pub const MAX_MCMC_DEPTH: usize = 8;
const MCMC_LABEL: u64 = 0x3C3C;
const TUNE_WINDOW: usize = 10;
const TARGET_ACCEPTANCE: (f64, f64) = (0.23, 0.5);
const ALLOWED_ACCEPTANCE: (f64, f64) = (0.05, 0.9);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McmcOptions {
    pub depth: usize,
    pub sweeps: usize,
    pub burn_in: usize,
    pub chains: usize,
    /// Batches per chain for the batch-means errors.
    pub batches: usize,
    pub seed: u64,
}

impl Default for McmcOptions {
    fn default() -> Self {
        McmcOptions {
            depth: 5,
            sweeps: 2000,
            burn_in: 200,
            chains: 4,
            batches: 20,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct McmcResult {
    pub table: CovarianceTable,
    /// Acceptance rate per layer after burn-in, averaged over chains.
    pub acceptance: Vec<f64>,
    /// Tuned proposal widths per layer of chain 0.
    pub widths: Vec<f64>,
}

struct Chain<'a> {
    n: usize,
    depth: usize,
    scales: Vec<f64>,
    zeta: Vec<Vec<f64>>,
    phi: Vec<f64>,
    vleaf: Vec<f64>,
    v: Option<&'a SampledEvenFunction>,
    scratch: Vec<f64>,
}

impl<'a> Chain<'a> {
    fn new(params: &RGParams, v: Option<&'a SampledEvenFunction>, depth: usize, seed: u64, chain: u64) -> Result<Self> {
        let n = params.n();
        let inv_beta = 1.0 / params.beta();
        let zeta: Vec<Vec<f64>> = (0..depth)
            .map(|q| {
                let blocks = (n as u64).pow((depth - q - 1) as u32);
                (0..blocks)
                    .flat_map(|b| block_draws(n, depth, seed, chain, q, b))
                    .collect()
            })
            .collect();
        let mut c = Chain {
            n,
            depth,
            scales: (0..depth).map(|q| inv_beta.powi(q as i32)).collect(),
            zeta,
            phi: Vec::new(),
            vleaf: Vec::new(),
            v,
            scratch: Vec::new(),
        };
        c.rebuild()?;
        Ok(c)
    }

    /// Recomputes the leaves from the layer variables, removing drift.
    fn rebuild(&mut self) -> Result<()> {
        let mut partial = vec![0.0];
        for q in (0..self.depth).rev() {
            let s = self.scales[q];
            partial = partial
                .iter()
                .zip(self.zeta[q].chunks_exact(self.n))
                .flat_map(|(p, z)| z.iter().map(move |x| p + s * x))
                .collect();
        }
        self.phi = partial;
        self.vleaf = match self.v {
            Some(v) => self.phi.iter().map(|x| v.eval(*x)).collect(),
            None => vec![0.0; self.phi.len()],
        };
        if self.vleaf.iter().any(|e| !e.is_finite()) {
            return Err(HrgError::numerical("mcmc_perturbed_field", "non-finite energy"));
        }
        Ok(())
    }

    /// Potential energy change of shifting the leaves of `node` (layer `q`)
    /// by `shift`; the new values go to `scratch[offset..]`.
    fn leaf_delta(&mut self, q: usize, node: usize, shift: f64, offset: usize) -> f64 {
        let Some(v) = self.v else { return 0.0 };
        let span = self.n.pow(q as u32);
        let lo = node * span;
        let mut d = 0.0;
        for k in 0..span {
            let e = v.eval(self.phi[lo + k] + shift);
            self.scratch[offset + k] = e;
            d += e - self.vleaf[lo + k];
        }
        d
    }

    fn apply(&mut self, q: usize, node: usize, shift: f64, offset: usize) {
        let span = self.n.pow(q as u32);
        let lo = node * span;
        for k in 0..span {
            self.phi[lo + k] += shift;
            if self.v.is_some() {
                self.vleaf[lo + k] = self.scratch[offset + k];
            }
        }
    }

    /// One sweep; returns accepted and proposed counts per layer.
    fn sweep(&mut self, widths: &[f64], r: &mut impl Rng) -> Result<Vec<(u64, u64)>> {
        let n = self.n;
        let mut counts = vec![(0u64, 0u64); self.depth];
        for q in 0..self.depth {
            let span = n.pow(q as u32);
            self.scratch.resize(2 * span, 0.0);
            let step = Normal::new(0.0, widths[q]).map_err(|e| HrgError::invalid(e.to_string()))?;
            let blocks = self.zeta[q].len() / n;
            for b in 0..blocks {
                for _ in 0..(n / 2).max(1) {
                    let i = r.random_range(0..n);
                    let j = (i + r.random_range(1..n)) % n;
                    let (ni, nj) = (b * n + i, b * n + j);
                    let delta: f64 = step.sample(r);
                    let (zi, zj) = (self.zeta[q][ni], self.zeta[q][nj]);
                    let prior = delta * (zi - zj) + delta * delta;
                    let s = delta * self.scales[q];
                    let de = prior + self.leaf_delta(q, ni, s, 0) + self.leaf_delta(q, nj, -s, span);
                    if !de.is_finite() {
                        return Err(HrgError::numerical("mcmc_perturbed_field", "non-finite energy"));
                    }
                    counts[q].1 += 1;
                    if de <= 0.0 || r.random::<f64>() < (-de).exp() {
                        counts[q].0 += 1;
                        self.zeta[q][ni] += delta;
                        self.zeta[q][nj] -= delta;
                        self.apply(q, ni, s, 0);
                        self.apply(q, nj, -s, span);
                    }
                }
            }
        }
        Ok(counts)
    }
}

struct ChainOutput {
    batches: Vec<Vec<LevelSample>>,
    acceptance: Vec<f64>,
    widths: Vec<f64>,
}

fn run_chain(
    params: &RGParams,
    v: Option<&SampledEvenFunction>,
    opts: &McmcOptions,
    chain: u64,
) -> Result<ChainOutput> {
    let mut c = Chain::new(params, v, opts.depth, opts.seed, chain)?;
    let mut r = rng::substream(opts.seed, MCMC_LABEL, chain);
    let mut widths = vec![1.0; opts.depth];
    let mut window = vec![(0u64, 0u64); opts.depth];
    for s in 0..opts.burn_in {
        for (w, k) in window.iter_mut().zip(c.sweep(&widths, &mut r)?) {
            w.0 += k.0;
            w.1 += k.1;
        }
        if (s + 1) % TUNE_WINDOW == 0 {
            for (w, k) in widths.iter_mut().zip(window.iter_mut()) {
                let rate = k.0 as f64 / k.1.max(1) as f64;
                if rate > TARGET_ACCEPTANCE.1 {
                    *w *= 1.25;
                } else if rate < TARGET_ACCEPTANCE.0 {
                    *w *= 0.8;
                }
                *k = (0, 0);
            }
        }
    }
    c.rebuild()?;
    let per_batch = opts.sweeps / opts.batches;
    let mut totals = vec![(0u64, 0u64); opts.depth];
    let mut batches = Vec::with_capacity(opts.batches);
    for _ in 0..opts.batches {
        let mut acc = vec![LevelSample::default(); opts.depth + 1];
        for _ in 0..per_batch {
            for (t, k) in totals.iter_mut().zip(c.sweep(&widths, &mut r)?) {
                t.0 += k.0;
                t.1 += k.1;
            }
            for (a, m) in acc.iter_mut().zip(full_tree_sample(&c.phi, c.n, opts.depth)) {
                a.phi += m.phi;
                a.phi2 += m.phi2;
                a.sq += m.sq;
            }
        }
        let k = per_batch as f64;
        batches.push(
            acc.into_iter()
                .map(|a| LevelSample {
                    phi: a.phi / k,
                    phi2: a.phi2 / k,
                    sq: a.sq / k,
                })
                .collect(),
        );
        c.rebuild()?;
    }
    let acceptance: Vec<f64> = totals
        .iter()
        .map(|t| t.0 as f64 / t.1.max(1) as f64)
        .collect();
    if let Some((q, a)) = acceptance
        .iter()
        .enumerate()
        .find(|(_, a)| !(**a >= ALLOWED_ACCEPTANCE.0 && **a <= ALLOWED_ACCEPTANCE.1))
    {
        return Err(HrgError::numerical(
            "mcmc_perturbed_field",
            format!("tuning failure: acceptance {a:.3} on layer {q} of chain {chain}"),
        ));
    }
    Ok(ChainOutput {
        batches,
        acceptance,
        widths,
    })
}

/// Two-point functions of `φ` and `φ²` under the tree Gaussian measure times
/// `Π_x e^{−V(φ_x)}`. Chains run in parallel on independent streams.
pub fn mcmc_perturbed_field(
    params: &RGParams,
    v: &SampledEvenFunction,
    opts: &McmcOptions,
) -> Result<McmcResult> {
    if opts.depth < 2 || opts.depth > MAX_MCMC_DEPTH {
        return Err(HrgError::invalid(format!(
            "depth must be in 2..={MAX_MCMC_DEPTH}, got {}",
            opts.depth
        )));
    }
    match leaf_count(params.n(), opts.depth) {
        Some(c) if c <= MAX_LEAVES => {}
        _ => return Err(HrgError::MemoryGuard("tree too large for MCMC".into())),
    }
    if !v.is_normalized() {
        return Err(HrgError::invalid("potential must satisfy V(0) = 0"));
    }
    if opts.chains == 0 || opts.batches < 2 || opts.sweeps < opts.batches {
        return Err(HrgError::invalid(
            "need at least one chain, two batches and one sweep per batch",
        ));
    }
    let pot = (v.sup_norm() > 0.0).then_some(v);
    let outs: Vec<ChainOutput> = (0..opts.chains as u64)
        .into_par_iter()
        .map(|k| run_chain(params, pot, opts, k))
        .collect::<Result<_>>()?;
    let samples: Vec<Vec<LevelSample>> = outs.iter().flat_map(|o| o.batches.clone()).collect();
    let n_pairs: Vec<f64> = (0..=opts.depth)
        .map(|r| pair_count(params.n(), opts.depth, r))
        .collect();
    let acceptance = (0..opts.depth)
        .map(|q| outs.iter().map(|o| o.acceptance[q]).sum::<f64>() / outs.len() as f64)
        .collect();
    Ok(McmcResult {
        table: CovarianceTable {
            depth: opts.depth,
            replicates: samples.len(),
            levels: combine(&samples, params.alpha(), &n_pairs),
        },
        acceptance,
        widths: outs[0].widths.clone(),
    })
}
