//! The unstable scaling field `z` and the wave amplitude `Ψ(V, W)`.
//!
//! Both are evaluated with the reduced map, for which the recorded fixed
//! point is exact to the Newton tolerance, and both compare a trajectory
//! against a reference trajectory so that residual drift of the fixed point
//! cancels.

use serde::Serialize;

use crate::dynamics::fixed_point::FixedPointRecord;
use crate::dynamics::reduced::ReducedMap;
use crate::error::{HrgError, Result};
use crate::func::Profile;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitOptions {
    /// Finite-difference amplitude.
    pub t: f64,
    pub max_n: usize,
    pub rtol: f64,
}

impl Default for LimitOptions {
    fn default() -> Self {
        LimitOptions {
            t: 1e-7,
            max_n: 30,
            rtol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitEstimate {
    pub value: f64,
    /// Index at which the sequence settled.
    pub n: usize,
    pub sequence: Vec<f64>,
}

fn leading(fp: &FixedPointRecord) -> Result<(f64, &[f64])> {
    let lambda = fp.leading_eigenvalue();
    match (&fp.left, lambda > 1.0) {
        (Some(left), true) => Ok((lambda, left)),
        _ => Err(HrgError::invalid(
            "fixed point has no real expanding eigenvalue with a left eigenvector",
        )),
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Iterates two trajectories and returns the limit of
/// `⟨e₁*, x_n − y_n⟩ / (scale·λ₁ⁿ)`, stopping once two consecutive
/// increments are within `rtol`.
fn projected_limit(
    map: &ReducedMap,
    lambda: f64,
    left: &[f64],
    mut x: Vec<f64>,
    mut y: Vec<f64>,
    scale: f64,
    opts: &LimitOptions,
    op: &'static str,
) -> Result<LimitEstimate> {
    let diff = |x: &[f64], y: &[f64]| -> Vec<f64> { x.iter().zip(y).map(|(a, b)| a - b).collect() };
    let mut seq = vec![dot(left, &diff(&x, &y)) / scale];
    let mut settled = 0;
    for n in 1..=opts.max_n {
        x = map.apply(&x)?;
        y = map.apply(&y)?;
        let a = dot(left, &diff(&x, &y)) / (scale * lambda.powi(n as i32));
        let prev = seq[n - 1];
        seq.push(a);
        if !a.is_finite() {
            break;
        }
        if (a - prev).abs() <= opts.rtol * a.abs() || (a == 0.0 && prev == 0.0) {
            settled += 1;
            if settled == 2 {
                return Ok(LimitEstimate {
                    value: a,
                    n,
                    sequence: seq,
                });
            }
        } else {
            settled = 0;
        }
    }
    Err(HrgError::NoConvergence {
        op,
        iterations: opts.max_n,
        residual: {
            let k = seq.len();
            if k >= 2 {
                (seq[k - 1] - seq[k - 2]).abs()
            } else {
                f64::NAN
            }
        },
    })
}

/// `Ψ(V, W) = lim_n ⟨e₁*, RGⁿ(V + tW) − RGⁿ(V − tW)⟩ / (2t λ₁ⁿ)`.
pub fn wave_amplitude<P: Profile, Q: Profile>(
    v: &P,
    w: &Q,
    map: &ReducedMap,
    fp: &FixedPointRecord,
    opts: &LimitOptions,
) -> Result<LimitEstimate> {
    let (lambda, left) = leading(fp)?;
    let xv = map.coords(v);
    let xw = map.coords(w);
    if xw.iter().all(|c| *c == 0.0) {
        return Ok(LimitEstimate {
            value: 0.0,
            n: 0,
            sequence: vec![0.0],
        });
    }
    let shift = |s: f64| -> Vec<f64> { xv.iter().zip(&xw).map(|(a, b)| a + s * b).collect() };
    projected_limit(
        map,
        lambda,
        left,
        shift(opts.t),
        shift(-opts.t),
        2.0 * opts.t,
        opts,
        "wave_amplitude",
    )
}

/// `z(V) = lim_n ⟨e₁*, RGⁿ(V) − RGⁿ(V*)⟩ / λ₁ⁿ`.
pub fn scaling_field_z<P: Profile>(
    v: &P,
    map: &ReducedMap,
    fp: &FixedPointRecord,
    opts: &LimitOptions,
) -> Result<LimitEstimate> {
    let (lambda, left) = leading(fp)?;
    projected_limit(
        map,
        lambda,
        left,
        map.coords(v),
        fp.coords.clone(),
        1.0,
        opts,
        "scaling_field_z",
    )
}
