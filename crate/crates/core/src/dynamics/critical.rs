//! Bisection for the critical mass `μ_c(g)`.

use serde::{Deserialize, Serialize};

use crate::error::{HrgError, Result};
use crate::func::{project_couplings, wick_monomial, GridSpec, SampledEvenFunction};
use crate::map::{rg_step_composite, Backend, RGParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    HighTemperature,
    LowTemperature,
    Unclassified,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShootingOptions {
    /// Escape threshold on the quadratic Wick coupling.
    pub theta: f64,
    pub max_steps: usize,
    pub max_widenings: usize,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        ShootingOptions {
            theta: 0.5,
            max_steps: 40,
            max_widenings: 10,
        }
    }
}

/// `g :φ⁴: + μ :φ²:` at unit Wick variance, normalized.
pub fn bare_potential(grid: GridSpec, g: f64, mu: f64) -> Result<SampledEvenFunction> {
    Ok(
        SampledEvenFunction::from_fn(grid, |x| g * wick_monomial(4, x) + mu * wick_monomial(2, x))?
            .normalized(),
    )
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Classification {
    pub mu: f64,
    pub phase: Phase,
    /// Step at which `|c2|` first exceeded the threshold.
    pub escape_step: Option<usize>,
    pub c2_trace: Vec<f64>,
}

/// Flows the bare potential and reports which way `c2` escapes.
pub fn classify(
    g: f64,
    mu: f64,
    params: &RGParams,
    backend: Backend,
    grid: GridSpec,
    opts: &ShootingOptions,
) -> Result<Classification> {
    let mut v = bare_potential(grid, g, mu)?;
    let mut trace = Vec::new();
    for step in 1..=opts.max_steps {
        let s = rg_step_composite(&v, params, backend)?;
        let c2 = project_couplings(&s.v, 2)?.get(2);
        trace.push(c2);
        let phase = if c2 > opts.theta {
            Phase::HighTemperature
        } else if c2 < -opts.theta {
            Phase::LowTemperature
        } else {
            v = s.v;
            continue;
        };
        return Ok(Classification {
            mu,
            phase,
            escape_step: Some(step),
            c2_trace: trace,
        });
    }
    Ok(Classification {
        mu,
        phase: Phase::Unclassified,
        escape_step: None,
        c2_trace: trace,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BracketStep {
    pub lo: f64,
    pub hi: f64,
    pub mid: f64,
    pub phase: Phase,
    pub escape_step: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriticalResult {
    pub g: f64,
    pub mu_c: f64,
    pub lo: f64,
    pub hi: f64,
    pub lo_phase: Phase,
    pub hi_phase: Phase,
    pub history: Vec<BracketStep>,
}

/// Bisection on `μ` between a low- and a high-temperature escape.
pub fn critical_mu(
    g: f64,
    params: &RGParams,
    backend: Backend,
    grid: GridSpec,
    tol: f64,
    opts: &ShootingOptions,
) -> Result<CriticalResult> {
    if !(tol > 0.0) {
        return Err(HrgError::invalid("tolerance must be positive"));
    }
    if !(0.0..=1.0).contains(&g) {
        return Err(HrgError::invalid(format!("g must lie in [0, 1], got {g}")));
    }
    if g == 0.0 {
        // the Gaussian fixed point itself
        return Ok(CriticalResult {
            g,
            mu_c: 0.0,
            lo: 0.0,
            hi: 0.0,
            lo_phase: Phase::Unclassified,
            hi_phase: Phase::Unclassified,
            history: Vec::new(),
        });
    }
    let run = |mu: f64| classify(g, mu, params, backend, grid, opts);
    let (mut lo, mut hi) = (-6.0 * g, 0.0);
    let mut c_lo = run(lo)?;
    let mut c_hi = run(hi)?;
    let mut widenings = 0;
    while !(c_lo.phase == Phase::LowTemperature && c_hi.phase == Phase::HighTemperature) {
        if widenings == opts.max_widenings {
            return Err(HrgError::NoBracket(format!(
                "mu in [{lo}, {hi}] classifies as {:?} / {:?} after {widenings} widenings",
                c_lo.phase, c_hi.phase
            )));
        }
        widenings += 1;
        let w = hi - lo;
        if c_lo.phase != Phase::LowTemperature {
            lo -= w;
            c_lo = run(lo)?;
        }
        if c_hi.phase != Phase::HighTemperature {
            hi += w;
            c_hi = run(hi)?;
        }
    }
    let mut history = Vec::new();
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let c = run(mid)?;
        history.push(BracketStep {
            lo,
            hi,
            mid,
            phase: c.phase,
            escape_step: c.escape_step,
        });
        match c.phase {
            Phase::HighTemperature => hi = mid,
            Phase::LowTemperature => lo = mid,
            Phase::Unclassified => {
                return Err(HrgError::Inconclusive(format!(
                    "mu = {mid} did not escape within {} steps (bracket [{lo}, {hi}]); c2 trace: {:?}",
                    opts.max_steps, c.c2_trace
                )))
            }
        }
    }
    Ok(CriticalResult {
        g,
        mu_c: 0.5 * (lo + hi),
        lo,
        hi,
        lo_phase: Phase::LowTemperature,
        hi_phase: Phase::HighTemperature,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_coupling_is_gaussian() {
        let params = RGParams::bms(0.1).unwrap();
        let r = critical_mu(
            0.0,
            &params,
            Backend::Nested,
            GridSpec::default(),
            1e-8,
            &ShootingOptions::default(),
        )
        .unwrap();
        assert_eq!(r.mu_c, 0.0);
    }

    #[test]
    fn bare_potential_is_normalized() {
        let v = bare_potential(GridSpec::default(), 0.2, -0.3).unwrap();
        assert!(v.is_normalized());
        let c = project_couplings(&v, 2).unwrap();
        assert!((c.get(4) - 0.2).abs() < 1e-8 && (c.get(2) + 0.3).abs() < 1e-8);
    }
}
