//! Exact leaf covariance of the finite-depth Gaussian tree field.

use crate::map::RGParams;

/// `Cov(φ_x, φ_y)` for leaves whose separation level is `level` in a tree of
/// `depth` layers.
///
/// Layer `q` contributes `β^{−2q}` times the block covariance of its two
/// ancestors: `1 − 1/N` for a common ancestor, `−1/N` for siblings and 0
/// otherwise.
pub fn exact_covariance(params: &RGParams, depth: usize, level: usize) -> f64 {
    let n = params.n() as f64;
    let b2 = params.beta().powi(-2);
    let shared: f64 = (level..depth).map(|q| b2.powi(q as i32)).sum::<f64>() * (1.0 - 1.0 / n);
    let siblings = if level >= 1 && level <= depth {
        -b2.powi(level as i32 - 1) / n
    } else {
        0.0
    };
    shared + siblings
}

/// Exact covariances for levels `0..=depth`.
pub fn exact_covariance_table(params: &RGParams, depth: usize) -> Vec<f64> {
    (0..=depth).map(|r| exact_covariance(params, depth, r)).collect()
}
