//! One-dimensional Gaussian integrals of Boltzmann factors.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{HrgError, Result};
use crate::func::hermite::{log_integral_centred, GaussHermite};
use crate::func::line::LineFunction;
use crate::func::profile::Profile;
use crate::func::sampled::SampledEvenFunction;

/// `−ln E_{z∼N(0,v)}[exp(−W(c + z))]`.
pub fn smooth_log_at<P: Profile>(rule: &GaussHermite, w: &P, v: f64, c: f64) -> f64 {
    let f = (
        |z: f64| -z * z / (2.0 * v) - w.eval(c + z),
        |z: f64| {
            let (w0, w1, w2) = w.eval_d2(c + z);
            (-z * z / (2.0 * v) - w0, -z / v - w1, -1.0 / v - w2)
        },
    );
    -(log_integral_centred(rule, &f, 0.0, v) - 0.5 * (2.0 * PI * v).ln())
}

/// `−ln E_{t∼N(0,1)}[exp(−A(x + σt) − B(x − σt))]`.
pub fn pair_log_at<A: Profile, B: Profile>(
    rule: &GaussHermite,
    a: &A,
    b: &B,
    sigma: f64,
    x: f64,
) -> f64 {
    let f = (
        |t: f64| -0.5 * t * t - a.eval(x + sigma * t) - b.eval(x - sigma * t),
        |t: f64| {
            let (a0, a1, a2) = a.eval_d2(x + sigma * t);
            let (b0, b1, b2) = b.eval_d2(x - sigma * t);
            (
                -0.5 * t * t - a0 - b0,
                -t - sigma * (a1 - b1),
                -1.0 - sigma * sigma * (a2 + b2),
            )
        },
    );
    -(log_integral_centred(rule, &f, 0.0, 1.0) - 0.5 * (2.0 * PI).ln())
}

fn check_finite(op: &'static str, vals: &[f64], points: &[f64]) -> Result<()> {
    match vals.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(HrgError::numerical(
            op,
            format!("non-finite value {} at phi = {}", vals[i], points[i]),
        )),
        None => Ok(()),
    }
}

/// Gaussian smoothing `e^{−G(c)} = E_{z∼N(0,v)}[e^{−W(c+z)}]` on the grid.
/// The result is not normalized.
pub fn gauss_smooth(f: &SampledEvenFunction, v: f64) -> Result<SampledEvenFunction> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(HrgError::invalid(format!("variance must be positive, got {v}")));
    }
    let grid = *f.grid();
    let rule = GaussHermite::cached(grid.quad_nodes);
    let pts = grid.points();
    let vals: Vec<f64> = pts.par_iter().map(|&c| smooth_log_at(&rule, f, v, c)).collect();
    check_finite("gauss_smooth", &vals, &pts)?;
    debug_assert_even(|c| smooth_log_at(&rule, f, v, c), &pts, &vals);
    SampledEvenFunction::from_values(grid, vals)
}

/// `e^{−H(a)} = E_{t∼N(0,1)}[e^{−W(a+σt) − W(a−σt)}]` on the grid.
pub fn symmetric_pair_integral(f: &SampledEvenFunction, sigma: f64) -> Result<SampledEvenFunction> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(HrgError::invalid(format!("sigma must be positive, got {sigma}")));
    }
    let grid = *f.grid();
    let rule = GaussHermite::cached(grid.quad_nodes);
    let pts = grid.points();
    let vals: Vec<f64> = pts
        .par_iter()
        .map(|&a| pair_log_at(&rule, f, f, sigma, a))
        .collect();
    check_finite("symmetric_pair_integral", &vals, &pts)?;
    debug_assert_even(|a| pair_log_at(&rule, f, f, sigma, a), &pts, &vals);
    SampledEvenFunction::from_values(grid, vals)
}

/// Gaussian smoothing of a full-line profile, sampled on the full-line grid.
pub fn gauss_smooth_line<P: Profile>(
    w: &P,
    grid: &crate::func::GridSpec,
    v: f64,
) -> Result<LineFunction> {
    let rule = GaussHermite::cached(grid.quad_nodes);
    let pts = grid.line_points();
    let vals: Vec<f64> = pts.par_iter().map(|&c| smooth_log_at(&rule, w, v, c)).collect();
    check_finite("gauss_smooth_line", &vals, &pts)?;
    LineFunction::from_values(*grid, vals)
}

/// Pair integral with different profiles on the two legs, full-line grid.
pub fn pair_integral_line<A: Profile, B: Profile>(
    a: &A,
    b: &B,
    grid: &crate::func::GridSpec,
    sigma: f64,
) -> Result<LineFunction> {
    let rule = GaussHermite::cached(grid.quad_nodes);
    let pts = grid.line_points();
    let vals: Vec<f64> = pts
        .par_iter()
        .map(|&x| pair_log_at(&rule, a, b, sigma, x))
        .collect();
    check_finite("pair_integral_line", &vals, &pts)?;
    LineFunction::from_values(*grid, vals)
}

#[cfg(debug_assertions)]
fn debug_assert_even(f: impl Fn(f64) -> f64, pts: &[f64], vals: &[f64]) {
    for i in [1, pts.len() / 3, pts.len() / 2] {
        let mirrored = f(-pts[i]);
        debug_assert!(
            (mirrored - vals[i]).abs() <= 1e-9 * (1.0 + vals[i].abs()),
            "evenness violated at {}: {} vs {}",
            pts[i],
            mirrored,
            vals[i]
        );
    }
}

#[cfg(not(debug_assertions))]
fn debug_assert_even(_f: impl Fn(f64) -> f64, _pts: &[f64], _vals: &[f64]) {}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::GridSpec;

    fn quad(mu: f64) -> SampledEvenFunction {
        SampledEvenFunction::from_fn(GridSpec::default(), |x| mu * x * x).unwrap()
    }

    #[test]
    fn smoothing_zero_is_zero() {
        let g = gauss_smooth(&SampledEvenFunction::zero(GridSpec::default()), 0.7).unwrap();
        assert!(g.sup_norm() < 1e-13);
    }

    #[test]
    fn smoothing_quadratic_closed_form_every_grid_point() {
        for (mu, v) in [(1.0, 1.0), (0.1, 0.5), (0.1, 1.0 / 8.0)] {
            let g = gauss_smooth(&quad(mu), v).unwrap();
            for (i, c) in GridSpec::default().points().into_iter().enumerate() {
                let want = mu * c * c / (1.0 + 2.0 * mu * v) + 0.5 * (1.0 + 2.0 * mu * v).ln();
                assert!(
                    (g.logvals()[i] - want).abs() < 1e-8,
                    "mu={mu} v={v} c={c}: {} vs {want}",
                    g.logvals()[i]
                );
            }
        }
        let g = gauss_smooth(&quad(1.0), 1.0).unwrap();
        assert!((g.logvals()[0] - 0.5 * 3f64.ln()).abs() < 1e-12);
        let g = gauss_smooth(&quad(0.1), 0.5).unwrap();
        let want = 0.1 / 1.1 + 0.5 * 1.1f64.ln();
        assert!((g.evaluate(1.0) - want).abs() < 1e-9);
        // quoted to five digits as 0.138561
        assert!((g.evaluate(1.0) - 0.138561).abs() < 5e-6);
    }

    #[test]
    fn pair_integral_quadratic_closed_form() {
        for (mu, s) in [(0.1, 0.5f64.sqrt()), (0.7, 0.5), (0.05, 1.3)] {
            let h = symmetric_pair_integral(&quad(mu), s).unwrap();
            for (i, a) in GridSpec::default().points().into_iter().enumerate() {
                let want = 2.0 * mu * a * a + 0.5 * (1.0 + 4.0 * mu * s * s).ln();
                assert!((h.logvals()[i] - want).abs() < 1e-8, "a={a}");
            }
        }
    }

    #[test]
    fn pair_integral_of_zero() {
        let h = symmetric_pair_integral(&SampledEvenFunction::zero(GridSpec::default()), 0.3)
            .unwrap();
        assert!(h.sup_norm() < 1e-13);
    }

    #[test]
    fn rejects_bad_scales() {
        let f = quad(0.1);
        assert!(gauss_smooth(&f, 0.0).is_err());
        assert!(symmetric_pair_integral(&f, -1.0).is_err());
    }
}
