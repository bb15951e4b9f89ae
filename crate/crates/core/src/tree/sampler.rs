//! Direct sampling of the hierarchical Gaussian field on a finite tree.
//!
//! `φ_x = Σ_{q<D} β^{−q} ζ^{(q)}_{a_q(x)}`, where the layer-`q` variables of
//! the `N` children of one node are i.i.d. standard normals minus their mean.
//! Every block of `N` layer variables is drawn from its own stream keyed by
//! `(seed, replica, layer, block)`, so a full tree and a lazily evaluated
//! sparse tree built from the same seed agree leaf by leaf.

use std::collections::HashMap;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{HrgError, Result};
use crate::map::RGParams;
use crate::rng;

/// Largest number of leaves a materialized tree may have.
pub const MAX_LEAVES: u64 = 1 << 24;
/// Largest per-block sum of layer variables tolerated.
pub const ZERO_SUM_TOL: f64 = 1e-12;

const TREE_LABEL: u64 = 0x7EE5;

#[derive(Debug, Clone, Serialize)]
pub struct TreeFieldSample {
    pub depth: usize,
    pub params: RGParams,
    pub leaf_values: Vec<f64>,
    pub seed: u64,
    pub replica: u64,
}

/// Number of leaves `N^D`, or `None` on overflow.
pub fn leaf_count(n: usize, depth: usize) -> Option<u64> {
    (n as u64).checked_pow(depth as u32)
}

fn check_depth(depth: usize) -> Result<()> {
    if depth < 2 {
        return Err(HrgError::invalid(format!("tree depth must be at least 2, got {depth}")));
    }
    Ok(())
}

/// Number of blocks on the layers below `q`.
fn block_offset(n: u64, depth: usize, q: usize) -> u64 {
    (0..q).map(|k| n.pow((depth - k - 1) as u32)).sum()
}

/// The `N` zero-sum layer variables of block `b` on layer `q`.
pub fn block_draws(
    n: usize,
    depth: usize,
    seed: u64,
    replica: u64,
    q: usize,
    b: u64,
) -> Vec<f64> {
    let id = block_offset(n as u64, depth, q) + b;
    let mut r = rng::substream(seed, TREE_LABEL.wrapping_add(replica), id);
    let mut z: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut r)).collect();
    let mean = z.iter().sum::<f64>() / n as f64;
    z.iter_mut().for_each(|x| *x -= mean);
    z
}

/// Materializes one replica: leaves in address order.
pub fn sample_tree(params: &RGParams, depth: usize, seed: u64, replica: u64) -> Result<TreeFieldSample> {
    check_depth(depth)?;
    let n = params.n();
    match leaf_count(n, depth) {
        Some(c) if c <= MAX_LEAVES => {}
        _ => {
            return Err(HrgError::MemoryGuard(format!(
                "N^D = {n}^{depth} exceeds {MAX_LEAVES} leaves"
            )))
        }
    }
    let inv_beta = 1.0 / params.beta();
    // partial sums Σ_{q' ≥ q} β^{−q'} ζ^{(q')} on the nodes of layer q
    let mut partial = vec![0.0];
    for q in (0..depth).rev() {
        let scale = inv_beta.powi(q as i32);
        let mut next = Vec::with_capacity(partial.len() * n);
        for (b, parent) in partial.iter().enumerate() {
            let z = block_draws(n, depth, seed, replica, q, b as u64);
            if q == 0 {
                let s: f64 = z.iter().sum();
                if s.abs() > ZERO_SUM_TOL {
                    return Err(HrgError::numerical(
                        "sample_gaussian_field",
                        format!("layer-0 block {b} sums to {s:e}"),
                    ));
                }
            }
            next.extend(z.iter().map(|x| parent + scale * x));
        }
        partial = next;
    }
    Ok(TreeFieldSample {
        depth,
        params: *params,
        leaf_values: partial,
        seed,
        replica,
    })
}

/// `n_replicas` independent materialized trees.
pub fn sample_gaussian_field(
    params: &RGParams,
    depth: usize,
    n_replicas: usize,
    seed: u64,
) -> Result<Vec<TreeFieldSample>> {
    (0..n_replicas as u64)
        .into_par_iter()
        .map(|k| sample_tree(params, depth, seed, k))
        .collect()
}

/// One replica evaluated on demand: only the blocks on the paths to the
/// requested nodes are drawn.
#[derive(Debug)]
pub struct LazyTree {
    n: usize,
    depth: usize,
    seed: u64,
    replica: u64,
    scales: Vec<f64>,
    blocks: HashMap<(usize, u64), Vec<f64>>,
}

impl LazyTree {
    pub fn new(params: &RGParams, depth: usize, seed: u64, replica: u64) -> Result<Self> {
        check_depth(depth)?;
        if leaf_count(params.n(), depth).is_none() {
            return Err(HrgError::MemoryGuard(format!(
                "N^D overflows for N = {}, D = {depth}",
                params.n()
            )));
        }
        let inv_beta = 1.0 / params.beta();
        Ok(LazyTree {
            n: params.n(),
            depth,
            seed,
            replica,
            scales: (0..depth).map(|q| inv_beta.powi(q as i32)).collect(),
            blocks: HashMap::new(),
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Zero-sum variables of the children of node `parent` on layer `q + 1`.
    pub fn block(&mut self, q: usize, parent: u64) -> &[f64] {
        let (n, depth, seed, replica) = (self.n, self.depth, self.seed, self.replica);
        self.blocks
            .entry((q, parent))
            .or_insert_with(|| block_draws(n, depth, seed, replica, q, parent))
    }

    /// `ζ^{(q)}` at node `node` of layer `q`.
    pub fn zeta(&mut self, q: usize, node: u64) -> f64 {
        let n = self.n as u64;
        self.block(q, node / n)[(node % n) as usize]
    }

    /// `Σ_{q' ≥ q} β^{−q'} ζ^{(q')}` along the ancestors of `node` on layer `q`.
    pub fn partial(&mut self, q: usize, mut node: u64) -> f64 {
        let n = self.n as u64;
        let mut s = 0.0;
        for k in q..self.depth {
            s += self.scales[k] * self.zeta(k, node);
            node /= n;
        }
        s
    }

    pub fn leaf(&mut self, x: u64) -> f64 {
        self.partial(0, x)
    }
}
