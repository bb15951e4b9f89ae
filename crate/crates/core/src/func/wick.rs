//! Wick-ordered coordinates for even potentials.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{HrgError, Result};
use crate::func::grid::GridSpec;
use crate::func::sampled::SampledEvenFunction;

/// Highest Wick power accepted by [`project_couplings`].
pub const MAX_DEGREE: usize = 12;

const MAX_CONDITION: f64 = 1e12;

/// Coefficients of `W = Σ c_{2j} :φ^{2j}:` at unit variance, `j = 0..=K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingVector {
    pub coefficients: Vec<f64>,
}

impl CouplingVector {
    pub fn truncation(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// Coefficient of `:φ^k:`; zero for odd or out-of-range `k`.
    pub fn get(&self, k: usize) -> f64 {
        if k % 2 == 1 {
            return 0.0;
        }
        self.coefficients.get(k / 2).copied().unwrap_or(0.0)
    }

    /// `Σ c_k :x^k:`.
    pub fn eval(&self, x: f64) -> f64 {
        let he = hermite_even(x, self.truncation());
        self.coefficients.iter().zip(&he).map(|(c, h)| c * h).sum()
    }

    pub fn reconstruct(&self, grid: GridSpec) -> Result<SampledEvenFunction> {
        SampledEvenFunction::from_fn(grid, |x| self.eval(x))
    }
}

/// Wick monomial `:x^k:` at unit variance (probabilists' Hermite `He_k`).
pub fn wick_monomial(k: usize, x: f64) -> f64 {
    let (mut h0, mut h1) = (1.0, x);
    if k == 0 {
        return h0;
    }
    for j in 1..k {
        let h2 = x * h1 - j as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// `[He_0, He_2, …, He_{2K}](x)`.
fn hermite_even(x: f64, k_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(k_max + 1);
    let (mut h0, mut h1) = (1.0, x);
    out.push(h0);
    for j in 1..=2 * k_max {
        let h2 = x * h1 - j as f64 * h0;
        h0 = h1;
        h1 = h2;
        if (j + 1) % 2 == 0 {
            out.push(h1);
        }
    }
    out
}

/// Weighted least-squares fit of `W` on `{:φ^{2j}:}` with weight `e^{−φ²/2}`.
pub fn project_couplings(f: &SampledEvenFunction, k: usize) -> Result<CouplingVector> {
    if 2 * k > MAX_DEGREE {
        return Err(HrgError::invalid(format!(
            "degree 2K = {} exceeds the cap {MAX_DEGREE}",
            2 * k
        )));
    }
    let grid = f.grid();
    let m = k + 1;
    let mut a = DMatrix::<f64>::zeros(m, m);
    let mut b = DVector::<f64>::zeros(m);
    for (i, (x, w)) in grid.points().into_iter().zip(f.logvals()).enumerate() {
        // trapezoid weight on the half line; the origin counts once
        let trap = if i == 0 || i + 1 == grid.n_points { 0.5 } else { 1.0 };
        let wt = trap * (-0.5 * x * x).exp();
        if wt == 0.0 {
            continue;
        }
        let he = hermite_even(x, k);
        for r in 0..m {
            b[r] += wt * he[r] * w;
            for c in r..m {
                a[(r, c)] += wt * he[r] * he[c];
            }
        }
    }
    for r in 0..m {
        for c in 0..r {
            a[(r, c)] = a[(c, r)];
        }
    }
    let sv = a.singular_values();
    let smax = sv.max();
    let smin = sv.min();
    if !(smin > 0.0) || smax / smin > MAX_CONDITION {
        return Err(HrgError::Degenerate(format!(
            "normal equations ill-conditioned (condition number {:e})",
            smax / smin
        )));
    }
    let sol = a
        .cholesky()
        .ok_or_else(|| HrgError::Degenerate("normal matrix not positive definite".into()))?
        .solve(&b);
    Ok(CouplingVector {
        coefficients: sol.iter().copied().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> GridSpec {
        GridSpec::default()
    }

    #[test]
    fn hermite_values() {
        let x = 1.3f64;
        assert!((wick_monomial(2, x) - (x * x - 1.0)).abs() < 1e-14);
        assert!((wick_monomial(4, x) - (x.powi(4) - 6.0 * x * x + 3.0)).abs() < 1e-13);
        let he = hermite_even(x, 3);
        assert!((he[3] - wick_monomial(6, x)).abs() < 1e-12);
    }

    #[test]
    fn quadratic_and_quartic_identities() {
        let c = project_couplings(&SampledEvenFunction::from_fn(grid(), |x| x * x).unwrap(), 3)
            .unwrap();
        for (k, want) in [(0, 1.0), (2, 1.0), (4, 0.0), (6, 0.0)] {
            assert!((c.get(k) - want).abs() < 1e-8, "k={k}: {}", c.get(k));
        }
        let c = project_couplings(
            &SampledEvenFunction::from_fn(grid(), |x| x.powi(4)).unwrap(),
            3,
        )
        .unwrap();
        for (k, want) in [(0, 3.0), (2, 6.0), (4, 1.0), (6, 0.0)] {
            assert!((c.get(k) - want).abs() < 1e-6, "k={k}: {}", c.get(k));
        }
    }

    #[test]
    fn zero_projects_to_zero() {
        let c = project_couplings(&SampledEvenFunction::zero(grid()), 4).unwrap();
        assert!(c.coefficients.iter().all(|v| *v == 0.0));
        assert_eq!(c.truncation(), 4);
    }

    #[test]
    fn degree_cap() {
        assert!(project_couplings(&SampledEvenFunction::zero(grid()), 7).is_err());
        assert!(project_couplings(&SampledEvenFunction::zero(grid()), 6).is_ok());
    }

    #[test]
    fn round_trip_is_idempotent() {
        let c = CouplingVector {
            coefficients: vec![0.4, -0.3, 0.05, 0.002],
        };
        let w = c.reconstruct(grid()).unwrap();
        let back = project_couplings(&w, 3).unwrap();
        for (a, b) in c.coefficients.iter().zip(&back.coefficients) {
            assert!((a - b).abs() < 1e-8);
        }
    }
}
