use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dynamics::reduced::{sup, to_dvec, ReducedMap};
use crate::error::{HrgError, Result};
use crate::func::{project_couplings, wick_monomial, CouplingVector, SampledEvenFunction};
use crate::map::{rg_step_composite, RGParams};

pub const NEWTON_MAX_ITER: usize = 50;
pub const JACOBIAN_STEP: f64 = 1e-5;
/// Couplings reported with fixed points: `c0, c2, c4, c6`.
pub const REPORT_TRUNCATION: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedPointKind {
    Gaussian,
    HighTemperature,
    Nontrivial,
}

/// A fixed point of the reduced map with its linearization.
#[derive(Debug, Clone)]
pub struct FixedPointRecord {
    pub potential: SampledEvenFunction,
    pub coords: Vec<f64>,
    /// Sup-norm of `RG(x) − x` in collocation coordinates.
    pub residual: f64,
    /// Real parts, ordered by descending modulus.
    pub eigenvalues: Vec<f64>,
    pub eigenvalues_imag: Vec<f64>,
    /// Number of layers in the map the spectrum belongs to.
    pub layers: u32,
    pub kind: FixedPointKind,
    pub epsilon: f64,
    pub kappa: Option<f64>,
    pub couplings: CouplingVector,
    /// Right and left eigenvectors of the leading eigenvalue,
    /// normalized so that `⟨left, right⟩ = 1`.
    pub right: Option<Vec<f64>>,
    pub left: Option<Vec<f64>>,
    pub residual_trace: Vec<f64>,
}

impl FixedPointRecord {
    pub fn leading_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Eigenvalues with modulus above one.
    pub fn expanding(&self) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .zip(&self.eigenvalues_imag)
            .filter(|(re, im)| re.hypot(**im) > 1.0)
            .map(|(re, _)| *re)
            .collect()
    }

    pub fn summary(&self) -> FixedPointSummary {
        FixedPointSummary {
            kind: self.kind,
            epsilon: self.epsilon,
            residual: self.residual,
            eigenvalues: self.eigenvalues.clone(),
            eigenvalues_imag: self.eigenvalues_imag.clone(),
            spectrum_layers: self.layers,
            kappa: self.kappa,
            couplings: self.couplings.coefficients.clone(),
            newton_residuals: self.residual_trace.clone(),
        }
    }
}

/// JSON view of a fixed point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixedPointSummary {
    pub kind: FixedPointKind,
    pub epsilon: f64,
    pub residual: f64,
    pub eigenvalues: Vec<f64>,
    pub eigenvalues_imag: Vec<f64>,
    pub spectrum_layers: u32,
    pub kappa: Option<f64>,
    pub couplings: Vec<f64>,
    pub newton_residuals: Vec<f64>,
}

/// Newton iteration on `RG(x) − x` in collocation coordinates.
pub fn find_fixed_point(
    guess: &SampledEvenFunction,
    map: &ReducedMap,
    tol: f64,
) -> Result<FixedPointRecord> {
    if !(tol > 0.0) {
        return Err(HrgError::invalid("tolerance must be positive"));
    }
    let n = map.dim();
    let mut trace = Vec::new();
    let fail = |detail: String, trace: &[f64]| HrgError::NewtonFailure {
        detail,
        residuals: trace.to_vec(),
    };
    let mut x = map.coords(guess);
    let mut fx = map.apply(&x).map_err(|e| fail(e.to_string(), &trace))?;
    let mut r: Vec<f64> = fx.iter().zip(&x).map(|(a, b)| a - b).collect();
    let mut res = sup(&r);
    trace.push(res);
    if !res.is_finite() {
        return Err(fail("non-finite initial residual".into(), &trace));
    }
    let mut iter = 0;
    while res > tol {
        if iter == NEWTON_MAX_ITER {
            return Err(fail(format!("no convergence after {iter} iterations"), &trace));
        }
        iter += 1;
        let jac = map
            .jacobian_forward(&x, &fx, JACOBIAN_STEP)
            .map_err(|e| fail(e.to_string(), &trace))?
            - DMatrix::identity(n, n);
        let delta = jac
            .lu()
            .solve(&(-to_dvec(&r)))
            .ok_or_else(|| fail("singular Jacobian".into(), &trace))?;
        let mut lambda = 1.0;
        loop {
            let xn: Vec<f64> = x.iter().zip(delta.iter()).map(|(a, d)| a + lambda * d).collect();
            let attempt = map.apply(&xn).map(|f| {
                let rn: Vec<f64> = f.iter().zip(&xn).map(|(a, b)| a - b).collect();
                (f, rn)
            });
            match attempt {
                Ok((f, rn)) if sup(&rn) < res || lambda < 1.0 / 64.0 => {
                    x = xn;
                    fx = f;
                    r = rn;
                    res = sup(&r);
                    break;
                }
                Err(e) if lambda < 1.0 / 64.0 => return Err(fail(e.to_string(), &trace)),
                _ => lambda *= 0.5,
            }
        }
        trace.push(res);
        if !res.is_finite() {
            return Err(fail("non-finite residual".into(), &trace));
        }
    }
    finish_record(map, x, res, trace)
}

fn finish_record(
    map: &ReducedMap,
    x: Vec<f64>,
    residual: f64,
    residual_trace: Vec<f64>,
) -> Result<FixedPointRecord> {
    let potential = map.reconstruct(&x)?;
    let jac = map.jacobian_central(&x, JACOBIAN_STEP)?;
    let (eigenvalues, eigenvalues_imag) = sorted_spectrum(&jac);
    let couplings = project_couplings(&potential, REPORT_TRUNCATION)?;
    let kind = if sup(&x) < 1e-8 {
        FixedPointKind::Gaussian
    } else if couplings.get(2) > HIGH_TEMPERATURE_MASS {
        FixedPointKind::HighTemperature
    } else {
        FixedPointKind::Nontrivial
    };
    let (mut right, mut left) = (None, None);
    if eigenvalues_imag[0] == 0.0 {
        if let Some((rv, lv)) = eigenvector_pair(&jac, eigenvalues[0]) {
            right = Some(rv);
            left = Some(lv);
        }
    }
    let mut rec = FixedPointRecord {
        potential,
        coords: x,
        residual,
        eigenvalues,
        eigenvalues_imag,
        layers: map.params.l,
        kind,
        epsilon: map.params.epsilon(),
        kappa: None,
        couplings,
        right,
        left,
        residual_trace,
    };
    if rec.kind == FixedPointKind::Nontrivial {
        rec.kappa = kappa_from_spectrum(&rec, &map.params).ok();
    }
    Ok(rec)
}

/// Quadratic coupling above which a fixed point is read as the
/// high-temperature (white noise) one.
pub const HIGH_TEMPERATURE_MASS: f64 = 1e3;

fn sorted_spectrum(m: &DMatrix<f64>) -> (Vec<f64>, Vec<f64>) {
    let mut ev: Vec<(f64, f64)> = m
        .complex_eigenvalues()
        .iter()
        .map(|c| (c.re, c.im))
        .collect();
    ev.sort_by(|a, b| {
        b.0.hypot(b.1)
            .total_cmp(&a.0.hypot(a.1))
            .then(b.0.total_cmp(&a.0))
            .then(b.1.total_cmp(&a.1))
    });
    ev.into_iter().unzip()
}

/// Inverse iteration for the right and left eigenvectors of `lambda`.
fn eigenvector_pair(m: &DMatrix<f64>, lambda: f64) -> Option<(Vec<f64>, Vec<f64>)> {
    let n = m.nrows();
    let shift = lambda * (1.0 + 1e-10) + 1e-12;
    let inverse_iter = |a: DMatrix<f64>| -> Option<DVector<f64>> {
        let lu = (a - DMatrix::identity(n, n) * shift).lu();
        let mut v = DVector::from_element(n, 1.0);
        for _ in 0..20 {
            let w = lu.solve(&v)?;
            let norm = w.norm();
            if !(norm.is_finite() && norm > 0.0) {
                return None;
            }
            v = w / norm;
        }
        Some(v)
    };
    let r = inverse_iter(m.clone())?;
    let l = inverse_iter(m.transpose())?;
    let dot = l.dot(&r);
    if dot.abs() < 1e-14 {
        return None;
    }
    Some((r.iter().copied().collect(), (l / dot).iter().copied().collect()))
}

/// `κ = 2(d − 2[φ]) − 2 log_L λ₁` for an expanding eigenvalue of the map at
/// scale `L = p^layers`.
pub fn kappa_from_eigenvalue(lambda1: f64, params: &RGParams, layers: u32) -> Result<f64> {
    if !(lambda1 > 1.0) {
        return Err(HrgError::invalid(format!(
            "invalid fixed point: leading eigenvalue {lambda1} is not expanding"
        )));
    }
    let log_l = layers as f64 * (params.p as f64).ln();
    Ok(2.0 * (params.d as f64 - 2.0 * params.phi_dim) - 2.0 * lambda1.ln() / log_l)
}

pub fn kappa_from_spectrum(fp: &FixedPointRecord, params: &RGParams) -> Result<f64> {
    if fp.kind != FixedPointKind::Nontrivial {
        return Err(HrgError::invalid(format!(
            "invalid fixed point: kind {:?} has no anomalous dimension",
            fp.kind
        )));
    }
    kappa_from_eigenvalue(fp.leading_eigenvalue(), params, fp.layers)
}

/// Fixed point of the map restricted to `c2 :φ²: + c4 :φ⁴:`, used to seed
/// the full Newton solve near the bifurcation.
pub fn truncated_seed(map: &ReducedMap) -> Result<SampledEvenFunction> {
    let grid = map.grid;
    let build = |c: [f64; 2]| {
        SampledEvenFunction::from_fn(grid, |x| {
            c[0] * wick_monomial(2, x) + c[1] * wick_monomial(4, x)
        })
        .map(|v| v.normalized())
    };
    let image = |c: [f64; 2]| -> Result<[f64; 2]> {
        let s = rg_step_composite(&build(c)?, &map.params, map.backend)?;
        let k = project_couplings(&s.v, 2)?;
        Ok([k.get(2) - c[0], k.get(4) - c[1]])
    };
    let lam4 = map.params.gaussian_eigenvalue(4).powi(map.params.l as i32);
    let mut c = [0.0, ((lam4 - 1.0) / 30.0).max(1e-4)];
    let h = 1e-6;
    for _ in 0..40 {
        let r = image(c)?;
        if r[0].abs().max(r[1].abs()) < 1e-12 {
            break;
        }
        let r0 = image([c[0] + h, c[1]])?;
        let r1 = image([c[0], c[1] + h])?;
        let j = [
            [(r0[0] - r[0]) / h, (r1[0] - r[0]) / h],
            [(r0[1] - r[1]) / h, (r1[1] - r[1]) / h],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-300 {
            return Err(HrgError::numerical("truncated_seed", "singular Jacobian"));
        }
        let d0 = (-r[0] * j[1][1] + r[1] * j[0][1]) / det;
        let d1 = (-r[1] * j[0][0] + r[0] * j[1][0]) / det;
        c = [c[0] + d0, c[1] + d1];
    }
    build(c)
}

/// Follows the nontrivial branch through ascending `ε`, each solve seeded
/// by the previous one.
pub fn continue_in_epsilon(
    eps_values: &[f64],
    base: &ReducedMap,
    tol: f64,
) -> Result<Vec<FixedPointRecord>> {
    if eps_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(HrgError::invalid("epsilon values must be strictly ascending"));
    }
    let mut out: Vec<FixedPointRecord> = Vec::with_capacity(eps_values.len());
    for &eps in eps_values {
        if !(0.0..=0.5).contains(&eps) {
            return Err(HrgError::invalid(format!("epsilon {eps} outside [0, 0.5]")));
        }
        let d = base.params.d as f64;
        let params = RGParams::new(base.params.p, base.params.d, base.params.l, (d - eps) / 4.0)?;
        let map = ReducedMap { params, ..*base };
        let at = |e: HrgError| HrgError::AtEpsilon {
            epsilon: eps,
            source: Box::new(e),
        };
        // the branch leaves the origin linearly in ε, so scale the previous point
        let guess = match out.last() {
            Some(prev) if prev.kind == FixedPointKind::Nontrivial => {
                let scale = eps / prev.epsilon;
                let x: Vec<f64> = prev.coords.iter().map(|c| c * scale).collect();
                map.reconstruct(&x).map_err(at)?
            }
            _ if eps == 0.0 => SampledEvenFunction::zero(map.grid),
            _ => truncated_seed(&map).map_err(at)?,
        };
        let mut rec = find_fixed_point(&guess, &map, tol).map_err(at)?;
        if eps > 0.0 && rec.kind == FixedPointKind::Gaussian {
            rec = find_fixed_point(&truncated_seed(&map).map_err(at)?, &map, tol).map_err(at)?;
        }
        rec.epsilon = eps;
        out.push(rec);
    }
    Ok(out)
}
