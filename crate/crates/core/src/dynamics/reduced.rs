//! The RG map in collocation coordinates.
//!
//! A potential is represented by its values at `n_coll` equally spaced points
//! on `(0, phi_coll]` (the value at 0 is pinned to zero by normalization).
//! Reconstruction on the fine grid uses six-point Lagrange interpolation with
//! even ghost values, and an even sextic tail least-squares fitted to the
//! outer third of the collocation points. Both steps are linear in the
//! coordinates, so the reduced map is as smooth as the RG map itself.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use rayon::prelude::*;

use crate::error::{HrgError, Result};
use crate::func::{GridSpec, Profile, SampledEvenFunction};
use crate::map::{rg_step_composite, Backend, RGParams};

pub const DEFAULT_COLLOCATION_POINTS: usize = 33;
pub const DEFAULT_COLLOCATION_MAX: f64 = 6.0;

#[derive(Debug, Clone, Copy)]
pub struct ReducedMap {
    pub params: RGParams,
    pub backend: Backend,
    pub grid: GridSpec,
    /// Collocation points including the pinned origin.
    pub n_coll: usize,
    pub phi_coll: f64,
}

impl ReducedMap {
    pub fn new(params: RGParams, backend: Backend, grid: GridSpec) -> Self {
        ReducedMap {
            params,
            backend,
            grid,
            n_coll: DEFAULT_COLLOCATION_POINTS,
            phi_coll: DEFAULT_COLLOCATION_MAX,
        }
    }

    /// Number of free coordinates.
    pub fn dim(&self) -> usize {
        self.n_coll - 1
    }

    fn h(&self) -> f64 {
        self.phi_coll / (self.n_coll - 1) as f64
    }

    /// Collocation points `φ_1..φ_{n−1}` carrying the coordinates.
    pub fn points(&self) -> Vec<f64> {
        (1..self.n_coll).map(|j| j as f64 * self.h()).collect()
    }

    /// Coordinates of a fine-grid potential.
    pub fn coords<P: Profile>(&self, v: &P) -> Vec<f64> {
        let v0 = v.eval(0.0);
        self.points().into_iter().map(|x| v.eval(x) - v0).collect()
    }

    fn tail(&self, full: &[f64]) -> Vector3<f64> {
        // W(φ) = W(pc) + Σ a_k (u^{2k} − 1), u = φ/pc, k = 1..3
        let n = full.len();
        let start = ((2 * (n - 1)) as f64 / 3.0).floor() as usize;
        let mut ata = Matrix3::zeros();
        let mut atb = Vector3::zeros();
        for (j, &val) in full.iter().enumerate().take(n - 1).skip(start) {
            let u2 = (j as f64 / (n - 1) as f64).powi(2);
            let b = Vector3::new(u2 - 1.0, u2 * u2 - 1.0, u2 * u2 * u2 - 1.0);
            ata += b * b.transpose();
            atb += b * (val - full[n - 1]);
        }
        ata.lu().solve(&atb).unwrap_or_else(Vector3::zeros)
    }

    fn eval_with(&self, full: &[f64], a: &Vector3<f64>, x: f64) -> f64 {
        let y = x.abs();
        let n = full.len() as isize;
        let pc = self.phi_coll;
        let tail = |y: f64| {
            let u2 = (y / pc).powi(2);
            full[(n - 1) as usize]
                + a[0] * (u2 - 1.0)
                + a[1] * (u2 * u2 - 1.0)
                + a[2] * (u2 * u2 * u2 - 1.0)
        };
        if y >= pc {
            return tail(y);
        }
        let h = self.h();
        let s = y / h;
        let i = (s.floor() as isize).min(n - 2);
        let u = s - i as f64;
        let node = |j: isize| -> f64 {
            if j < 0 {
                full[(-j) as usize]
            } else if j < n {
                full[j as usize]
            } else {
                tail(j as f64 * h)
            }
        };
        // six-point Lagrange on offsets −2..3
        let mut acc = 0.0;
        for k in -2isize..=3 {
            let mut l = 1.0;
            for m in -2isize..=3 {
                if m != k {
                    l *= (u - m as f64) / (k - m) as f64;
                }
            }
            acc += l * node(i + k);
        }
        acc
    }

    /// Fine-grid potential with the given coordinates.
    pub fn reconstruct(&self, x: &[f64]) -> Result<SampledEvenFunction> {
        if x.len() != self.dim() {
            return Err(HrgError::invalid(format!(
                "expected {} coordinates, got {}",
                self.dim(),
                x.len()
            )));
        }
        let mut full = Vec::with_capacity(self.n_coll);
        full.push(0.0);
        full.extend_from_slice(x);
        let a = self.tail(&full);
        let vals: Vec<f64> = self
            .grid
            .points()
            .into_iter()
            .map(|p| self.eval_with(&full, &a, p))
            .collect();
        SampledEvenFunction::from_values(self.grid, vals)
    }

    /// One application of the (composite) RG map in coordinates.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let v = self.reconstruct(x)?;
        let s = rg_step_composite(&v, &self.params, self.backend)?;
        Ok(self.coords(&s.v))
    }

    /// `n` applications.
    pub fn iterate(&self, x: &[f64], n: usize) -> Result<Vec<f64>> {
        let mut y = x.to_vec();
        for _ in 0..n {
            y = self.apply(&y)?;
        }
        Ok(y)
    }

    /// Forward-difference Jacobian of `apply` at `x`, given `fx = apply(x)`.
    pub fn jacobian_forward(&self, x: &[f64], fx: &[f64], h: f64) -> Result<DMatrix<f64>> {
        let n = self.dim();
        let cols: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|j| {
                let mut xp = x.to_vec();
                xp[j] += h;
                let fp = self.apply(&xp)?;
                Ok(fp.iter().zip(fx).map(|(a, b)| (a - b) / h).collect())
            })
            .collect::<Result<_>>()?;
        Ok(DMatrix::from_fn(n, n, |i, j| cols[j][i]))
    }

    /// Central-difference Jacobian, used for spectra.
    pub fn jacobian_central(&self, x: &[f64], h: f64) -> Result<DMatrix<f64>> {
        let n = self.dim();
        let cols: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|j| {
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[j] += h;
                xm[j] -= h;
                let fp = self.apply(&xp)?;
                let fm = self.apply(&xm)?;
                Ok(fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * h)).collect())
            })
            .collect::<Result<_>>()?;
        Ok(DMatrix::from_fn(n, n, |i, j| cols[j][i]))
    }
}

pub(crate) fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub(crate) fn to_dvec(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map() -> ReducedMap {
        ReducedMap::new(RGParams::bms(0.1).unwrap(), Backend::Nested, GridSpec::default())
    }

    #[test]
    fn polynomials_up_to_degree_six_are_reconstructed() {
        let m = map();
        let w = |x: f64| 0.3 * x * x - 0.01 * x.powi(4) + 1e-4 * x.powi(6);
        let x: Vec<f64> = m.points().into_iter().map(w).collect();
        let v = m.reconstruct(&x).unwrap();
        for y in [0.05, 1.1, 3.33, 5.9, 7.5, 11.0] {
            assert!((v.evaluate(y) - w(y)).abs() < 1e-6 * (1.0 + w(y).abs()), "y = {y}");
        }
        let back = m.coords(&v);
        // the round trip goes through fine-grid interpolation
        let e = sup(&back.iter().zip(&x).map(|(a, b)| a - b).collect::<Vec<_>>());
        assert!(e < 1e-8, "{e:e}");
    }

    #[test]
    fn zero_maps_to_zero() {
        let m = map();
        let y = m.apply(&vec![0.0; m.dim()]).unwrap();
        assert!(sup(&y) < 1e-13);
    }
}
