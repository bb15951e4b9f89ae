//! Gauss–Hermite rules and the mode-centred integrator built on them.
//!
//! Every Gaussian integral in the crate goes through
//! [`log_integral_centred`]: the nodes are shifted to the maximum of the
//! log-integrand and scaled by its curvature, and the sum is done in log
//! space with a max shift so that products of many Boltzmann factors never
//! underflow.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

/// Nodes and weights of the physicists' rule `∫ e^{-x²} g(x) dx ≈ Σ w_k g(x_k)`.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `ln w_k + x_k²`, the log weight of the rule for `∫ g(x) dx`.
    pub log_unweighted: Vec<f64>,
}

impl GaussHermite {
    /// Newton iteration on the orthonormal Hermite recurrence; weights keep
    /// full relative precision even in the far tails.
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "Gauss-Hermite order must be at least 2");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let pim4 = PI.powf(-0.25);
        let m = n.div_ceil(2);
        let nf = n as f64;
        let mut z = 0.0f64;
        for i in 0..m {
            z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * nodes[0],
                3 => 1.91 * z - 0.91 * nodes[1],
                _ => 2.0 * z - nodes[i - 2],
            };
            let mut pp = 0.0;
            for _ in 0..100 {
                let mut p1 = pim4;
                let mut p2 = 0.0;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
                }
                pp = (2.0 * nf).sqrt() * p2;
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            nodes[i] = z;
            nodes[n - 1 - i] = -z;
            weights[i] = 2.0 / (pp * pp);
            weights[n - 1 - i] = weights[i];
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        let log_unweighted = nodes
            .iter()
            .zip(&weights)
            .map(|(x, w)| w.ln() + x * x)
            .collect();
        GaussHermite {
            nodes,
            weights,
            log_unweighted,
        }
    }

    /// Shared rule of order `n`.
    pub fn cached(n: usize) -> Arc<GaussHermite> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussHermite>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("gauss-hermite cache poisoned");
        guard
            .entry(n)
            .or_insert_with(|| Arc::new(GaussHermite::new(n)))
            .clone()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Log-integrand with its first two derivatives.
pub trait LogIntegrand {
    fn value(&self, u: f64) -> f64;
    /// `(ℓ, ℓ', ℓ'')` at `u`.
    fn value_d2(&self, u: f64) -> (f64, f64, f64);
}

impl<F, G> LogIntegrand for (F, G)
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> (f64, f64, f64),
{
    fn value(&self, u: f64) -> f64 {
        (self.0)(u)
    }
    fn value_d2(&self, u: f64) -> (f64, f64, f64) {
        (self.1)(u)
    }
}

/// `ln ∫ exp(ℓ(u)) du` for a log-integrand dominated by a Gaussian factor of
/// variance `prior_var`.
///
/// The mode is located with a few safeguarded Newton steps starting from
/// `start`; nodes are placed at `mode + √2·s·x_k` with `s` the Laplace width,
/// clamped to `[1e-3, 2]·√prior_var`, or the width implied by a fixed drop of the log-integrand when the
/// integrand is far from Gaussian near its mode.
pub fn log_integral_centred<L: LogIntegrand>(
    rule: &GaussHermite,
    f: &L,
    start: f64,
    prior_var: f64,
) -> f64 {
    let prior_prec = 1.0 / prior_var;
    let floor = 0.25 * prior_prec;
    let mut u = start;
    let (mut l0, mut d1, mut d2) = f.value_d2(u);
    let mut curv = (-d2).max(floor);
    for _ in 0..8 {
        let step = d1 / curv;
        if !step.is_finite() {
            break;
        }
        // cap the move at a few prior widths
        let cap = 4.0 * prior_var.sqrt();
        let step = step.clamp(-cap, cap);
        let cand = u + step;
        let (lc, c1, c2) = f.value_d2(cand);
        if lc.is_finite() && lc >= l0 - 1e-12 * l0.abs().max(1.0) {
            u = cand;
            l0 = lc;
            d1 = c1;
            d2 = c2;
            curv = (-d2).max(floor);
            if step.abs() < 1e-10 * (1.0 + u.abs()) {
                break;
            }
        } else {
            break;
        }
    }
    let sd = prior_var.sqrt();
    let s = (1.0 / curv.max(floor)).sqrt().clamp(1e-3 * sd, 2.0 * sd);
    let s = drop_width(f, u, l0, s, (1e-3 * sd, 4.0 * sd));
    let scale = std::f64::consts::SQRT_2 * s;

    let mut terms = [0.0f64; 256];
    let n = rule.len();
    let buf: &mut [f64] = if n <= 256 {
        &mut terms[..n]
    } else {
        return log_integral_alloc(rule, f, u, scale);
    };
    let mut max = f64::NEG_INFINITY;
    for k in 0..n {
        let t = rule.log_unweighted[k] + f.value(u + scale * rule.nodes[k]);
        buf[k] = t;
        if t > max {
            max = t;
        }
    }
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = buf.iter().map(|t| (t - max).exp()).sum();
    max + sum.ln() + scale.ln()
}

/// Drop of the log-integrand below its maximum that defines the node scale.
const WIDTH_DROP: f64 = 4.0;

/// Gaussian-equivalent width from the distances at which `ℓ` has fallen by
/// [`WIDTH_DROP`], averaged over both sides. Equal to the Laplace width `s`
/// for a Gaussian, which is recognised after two evaluations; flat-topped
/// (quartic) integrands get a narrower, better matched width.
fn drop_width<L: LogIntegrand>(f: &L, u: f64, l0: f64, s: f64, bounds: (f64, f64)) -> f64 {
    let stretch = (2.0 * WIDTH_DROP).sqrt();
    let drop = |d: f64| l0 - f.value(u + d);
    let side_width = |side: f64| -> f64 {
        let d0 = stretch * s;
        let first = drop(side * d0);
        if (first - WIDTH_DROP).abs() <= 0.03 * WIDTH_DROP {
            return d0;
        }
        let (mut lo, mut hi) = if first >= WIDTH_DROP {
            (stretch * bounds.0, d0)
        } else {
            (d0, stretch * bounds.1)
        };
        if drop(side * lo) >= WIDTH_DROP {
            return lo;
        }
        if drop(side * hi) < WIDTH_DROP {
            return hi;
        }
        for _ in 0..12 {
            let mid = (lo * hi).sqrt();
            if drop(side * mid) < WIDTH_DROP {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo * hi).sqrt()
    };
    0.5 * (side_width(1.0) + side_width(-1.0)) / stretch
}

fn log_integral_alloc<L: LogIntegrand>(rule: &GaussHermite, f: &L, u: f64, scale: f64) -> f64 {
    let terms: Vec<f64> = rule
        .nodes
        .iter()
        .zip(&rule.log_unweighted)
        .map(|(x, lw)| lw + f.value(u + scale * x))
        .collect();
    log_sum_exp(&terms) + scale.ln()
}

/// Max-shifted `ln Σ exp(t_i)`.
pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}
