//! Two-point functions of `φ` and `φ²` by ultrametric distance, and the
//! power-law fit of their decay.
//!
//! The ordered leaf pairs at separation level `r` below a node `v` of layer
//! `r` are the pairs in different children of `v`, so their sum of
//! `φ_x φ_y` is `S_v² − Σ_c S_c²` with `S` the subtree sum. For the Gaussian
//! field every layer below `r` sums to zero over the subtree, so `S_v` and
//! the child sums need only the ancestors of `v` and its child block.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{HrgError, Result};
use crate::func::fmt17;
use crate::map::RGParams;
use crate::rng;
use crate::tree::sampler::LazyTree;

const PICK_LABEL: u64 = 0x91C4;

#[derive(Debug, Clone, Serialize)]
pub struct LevelCovariance {
    pub level: usize,
    /// `α^level`, or 0 for the same site.
    pub distance: f64,
    /// Ordered leaf pairs entering the `φ` estimate per replicate.
    pub n_pairs: f64,
    pub cov_phi: f64,
    pub cov_phi_stderr: f64,
    pub cov_phi2: f64,
    pub cov_phi2_stderr: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CovarianceTable {
    pub depth: usize,
    pub replicates: usize,
    pub levels: Vec<LevelCovariance>,
}

impl CovarianceTable {
    /// `distance,cov_phi,cov_phi_stderr,cov_phi2,cov_phi2_stderr`
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["distance", "cov_phi", "cov_phi_stderr", "cov_phi2", "cov_phi2_stderr"])?;
        for l in &self.levels {
            w.write_record([
                fmt17(l.distance),
                fmt17(l.cov_phi),
                fmt17(l.cov_phi_stderr),
                fmt17(l.cov_phi2),
                fmt17(l.cov_phi2_stderr),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Default estimator levels `1..=D−2`.
    pub fn default_levels(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.depth.saturating_sub(2)
    }

    fn points(&self, levels: std::ops::RangeInclusive<usize>, phi2: bool) -> Vec<(f64, f64, f64)> {
        self.levels
            .iter()
            .filter(|l| levels.contains(&l.level))
            .map(|l| {
                if phi2 {
                    (l.distance, l.cov_phi2, l.cov_phi2_stderr)
                } else {
                    (l.distance, l.cov_phi, l.cov_phi_stderr)
                }
            })
            .collect()
    }

    pub fn fit_phi(&self) -> Result<ExponentFit> {
        fit_covariance_exponent(&self.points(self.default_levels(), false))
    }

    pub fn fit_phi2(&self) -> Result<ExponentFit> {
        fit_covariance_exponent(&self.points(self.default_levels(), true))
    }
}

/// Per-replicate statistics for one level: the pair mean of `φφ`, the pair
/// mean of `φ²φ²` and the mean of `φ²` over the same leaves.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct LevelSample {
    pub phi: f64,
    pub phi2: f64,
    pub sq: f64,
}

/// Combines i.i.d. replicates (or batch means) into covariance estimates with
/// delta-method errors; `Cov(φ², φ²) = E[φ²φ²] − E[φ²]²`.
pub(crate) fn combine(
    samples: &[Vec<LevelSample>],
    alpha: f64,
    n_pairs: &[f64],
) -> Vec<LevelCovariance> {
    let k = samples.len() as f64;
    let levels = samples.first().map_or(0, |s| s.len());
    (0..levels)
        .map(|r| {
            let col: Vec<LevelSample> = samples.iter().map(|s| s[r]).collect();
            let mean = |f: &dyn Fn(&LevelSample) -> f64| col.iter().map(f).sum::<f64>() / k;
            let (mb, ma, mu) = (mean(&|s| s.phi), mean(&|s| s.phi2), mean(&|s| s.sq));
            let cov = |f: &dyn Fn(&LevelSample) -> f64, mf: f64, g: &dyn Fn(&LevelSample) -> f64, mg: f64| {
                col.iter().map(|s| (f(s) - mf) * (g(s) - mg)).sum::<f64>() / (k - 1.0)
            };
            let sbb = cov(&|s| s.phi, mb, &|s| s.phi, mb);
            let saa = cov(&|s| s.phi2, ma, &|s| s.phi2, ma);
            let sau = cov(&|s| s.phi2, ma, &|s| s.sq, mu);
            let suu = cov(&|s| s.sq, mu, &|s| s.sq, mu);
            let var2 = (saa - 4.0 * mu * sau + 4.0 * mu * mu * suu).max(0.0);
            LevelCovariance {
                level: r,
                distance: if r == 0 { 0.0 } else { alpha.powi(r as i32) },
                n_pairs: n_pairs[r],
                cov_phi: mb,
                cov_phi_stderr: (sbb / k).sqrt(),
                cov_phi2: ma - mu * mu,
                cov_phi2_stderr: (var2 / k).sqrt(),
            }
        })
        .collect()
}

/// Exact pair means on a fully known tree, levels `0..=depth`.
pub(crate) fn full_tree_sample(leaves: &[f64], n: usize, depth: usize) -> Vec<LevelSample> {
    let nf = n as f64;
    let total = leaves.len() as f64;
    let mut s1: Vec<f64> = leaves.to_vec();
    let mut s2: Vec<f64> = leaves.iter().map(|x| x * x).collect();
    let sq = s2.iter().sum::<f64>() / total;
    let mut out = Vec::with_capacity(depth + 1);
    out.push(LevelSample {
        phi: sq,
        phi2: leaves.iter().map(|x| x.powi(4)).sum::<f64>() / total,
        sq,
    });
    for r in 1..=depth {
        let pairs = total * nf.powi(r as i32 - 1) * (nf - 1.0);
        let (mut a1, mut a2) = (0.0, 0.0);
        let up1: Vec<f64> = s1
            .chunks_exact(n)
            .map(|c| {
                let s: f64 = c.iter().sum();
                a1 += s * s - c.iter().map(|x| x * x).sum::<f64>();
                s
            })
            .collect();
        let up2: Vec<f64> = s2
            .chunks_exact(n)
            .map(|c| {
                let s: f64 = c.iter().sum();
                a2 += s * s - c.iter().map(|x| x * x).sum::<f64>();
                s
            })
            .collect();
        out.push(LevelSample {
            phi: a1 / pairs,
            phi2: a2 / pairs,
            sq,
        });
        s1 = up1;
        s2 = up2;
    }
    out
}

/// Ordered pairs at separation `r` in a tree of `depth` layers.
pub(crate) fn pair_count(n: usize, depth: usize, r: usize) -> f64 {
    let nf = n as f64;
    if r == 0 {
        nf.powi(depth as i32)
    } else {
        nf.powi(depth as i32) * nf.powi(r as i32 - 1) * (nf - 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianEstimatorOptions {
    pub n_replicas: usize,
    /// Layer-`r` nodes whose subtree pairs are averaged, per replicate.
    pub nodes_per_level: usize,
    /// Random leaf pairs per level for the `φ²` estimate.
    pub pairs_per_level: usize,
    pub seed: u64,
}

/// Two-point functions of the direct Gaussian sampler at any depth, from
/// lazily evaluated replicas.
pub fn gaussian_covariance(
    params: &RGParams,
    depth: usize,
    opts: &GaussianEstimatorOptions,
) -> Result<CovarianceTable> {
    if opts.n_replicas < 2 || opts.nodes_per_level == 0 || opts.pairs_per_level == 0 {
        return Err(HrgError::invalid(
            "need at least two replicas and one node and pair per level",
        ));
    }
    let n = params.n();
    let n64 = n as u64;
    LazyTree::new(params, depth, opts.seed, 0)?;
    let samples: Vec<Vec<LevelSample>> = (0..opts.n_replicas as u64)
        .into_par_iter()
        .map(|k| {
            let mut tree = LazyTree::new(params, depth, opts.seed, k).expect("validated");
            let mut pick = rng::substream(opts.seed, PICK_LABEL.wrapping_add(k), 0);
            let mut out = Vec::with_capacity(depth + 1);
            // same site
            let mut s = LevelSample::default();
            let leaves = n64.pow(depth as u32);
            for _ in 0..opts.pairs_per_level {
                let v = tree.leaf(pick.random_range(0..leaves));
                s.phi += v * v;
                s.phi2 += v.powi(4);
            }
            s.phi /= opts.pairs_per_level as f64;
            s.phi2 /= opts.pairs_per_level as f64;
            s.sq = s.phi;
            out.push(s);
            for r in 1..=depth {
                let nodes = n64.pow((depth - r) as u32);
                let per_node = (n as f64).powi(2 * r as i32) * (1.0 - 1.0 / n as f64);
                let mut phi = 0.0;
                let count = opts.nodes_per_level.min(nodes as usize);
                for j in 0..count {
                    let v = if (count as u64) == nodes {
                        j as u64
                    } else {
                        pick.random_range(0..nodes)
                    };
                    let up = tree.partial(r, v);
                    let scale = params.beta().powi(1 - r as i32);
                    let kids = tree.block(r - 1, v).to_vec();
                    let nr = (n64.pow(r as u32)) as f64;
                    let child = nr / n as f64;
                    let total = nr * up;
                    let sum_kids: f64 = kids
                        .iter()
                        .map(|z| (child * (up + scale * z)).powi(2))
                        .sum();
                    phi += (total * total - sum_kids) / per_node;
                }
                let mut a = 0.0;
                let mut u = 0.0;
                let span = n64.pow(r as u32);
                let sub = span / n64;
                for _ in 0..opts.pairs_per_level {
                    let v = pick.random_range(0..nodes);
                    let cx = pick.random_range(0..n64);
                    let cy = (cx + pick.random_range(1..n64)) % n64;
                    let x = v * span + cx * sub + pick.random_range(0..sub);
                    let y = v * span + cy * sub + pick.random_range(0..sub);
                    let (fx, fy) = (tree.leaf(x), tree.leaf(y));
                    a += fx * fx * fy * fy;
                    u += 0.5 * (fx * fx + fy * fy);
                }
                let m = opts.pairs_per_level as f64;
                out.push(LevelSample {
                    phi: phi / count as f64,
                    phi2: a / m,
                    sq: u / m,
                });
            }
            out
        })
        .collect();
    let n_pairs: Vec<f64> = (0..=depth)
        .map(|r| {
            let nodes = n64.pow((depth - r) as u32);
            let count = (opts.nodes_per_level as u64).min(nodes) as f64;
            if r == 0 {
                opts.pairs_per_level as f64
            } else {
                count * pair_count(n, r, r)
            }
        })
        .collect();
    Ok(CovarianceTable {
        depth,
        replicates: opts.n_replicas,
        levels: combine(&samples, params.alpha(), &n_pairs),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ExponentFit {
    /// Decay exponent, minus the fitted log-log slope.
    pub exponent: f64,
    pub stderr: f64,
    pub distances: Vec<f64>,
}

/// Ordinary least squares of `ln cov` on `ln distance`. With four or more
/// distances the smallest and largest are left out. The error propagates
/// the per-point standard errors.
pub fn fit_covariance_exponent(points: &[(f64, f64, f64)]) -> Result<ExponentFit> {
    let mut pts: Vec<(f64, f64, f64)> = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.dedup_by(|a, b| a.0 == b.0);
    if pts.len() < 3 {
        return Err(HrgError::invalid(format!(
            "exponent fit needs at least 3 distinct distances, got {}",
            pts.len()
        )));
    }
    if pts.len() >= 4 {
        pts = pts[1..pts.len() - 1].to_vec();
    }
    if let Some(p) = pts.iter().find(|p| !(p.1 > 0.0) || !(p.0 > 0.0)) {
        return Err(HrgError::numerical(
            "fit_covariance_exponent",
            format!("non-positive covariance {} at distance {}; increase replicas", p.1, p.0),
        ));
    }
    let k = pts.len() as f64;
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / sxx;
    let var: f64 = xs
        .iter()
        .zip(&pts)
        .map(|(x, p)| ((x - mx) / sxx).powi(2) * (p.2 / p.1).powi(2))
        .sum();
    Ok(ExponentFit {
        exponent: -slope,
        stderr: var.sqrt(),
        distances: pts.iter().map(|p| p.0).collect(),
    })
}
