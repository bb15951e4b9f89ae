use crate::error::{HrgError, Result};
use crate::func::{Profile, SampledEvenFunction};
use crate::map::block::{zero_sum_block_integral, Backend};
use crate::map::params::RGParams;

/// Output of one application of the RG map.
#[derive(Debug, Clone)]
pub struct StepResult {
    pub v: SampledEvenFunction,
    pub delta_b: f64,
    /// Largest Monte Carlo standard error of the block integral, if any.
    pub max_stderr: Option<f64>,
}

/// `Ṽ(ψ) = G_log(ψ/β)` on the grid of `g_log`, split into the normalized
/// potential and `δb = −Ṽ(0)`.
pub(crate) fn rescale(g_log: &SampledEvenFunction, beta: f64) -> Result<(SampledEvenFunction, f64)> {
    let grid = *g_log.grid();
    let v0 = g_log.logvals()[0];
    let vals = grid
        .points()
        .into_iter()
        .map(|psi| g_log.eval(psi / beta) - v0)
        .collect::<Vec<_>>();
    let mut v = SampledEvenFunction::from_values(grid, vals)?;
    if v.logvals()[0] != 0.0 {
        v = v.normalized();
    }
    Ok((v, -v0))
}

fn require_normalized(v: &SampledEvenFunction) -> Result<()> {
    if v.is_normalized() {
        Ok(())
    } else {
        Err(HrgError::invalid(format!(
            "potential must satisfy V(0) = 0, got {}",
            v.logvals()[0]
        )))
    }
}

/// One tree layer: integrate out a zero-sum block and rescale by `β`.
pub fn rg_step(v: &SampledEvenFunction, params: &RGParams, backend: Backend) -> Result<StepResult> {
    require_normalized(v)?;
    let block = zero_sum_block_integral(v, params, backend)?;
    let (v_new, delta_b) = rescale(&block.g_log, params.beta())?;
    Ok(StepResult {
        v: v_new,
        delta_b,
        max_stderr: block
            .stderr
            .map(|se| se.iter().cloned().fold(0.0, f64::max)),
    })
}

/// `l` layers composed; `delta_b` is the sum of the per-layer shifts.
pub fn rg_step_composite(
    v: &SampledEvenFunction,
    params: &RGParams,
    backend: Backend,
) -> Result<StepResult> {
    let mut out = StepResult {
        v: v.clone(),
        delta_b: 0.0,
        max_stderr: None,
    };
    for layer in 0..params.l {
        let backend = match backend {
            Backend::MonteCarlo { n_samples, seed } => Backend::MonteCarlo {
                n_samples,
                seed: seed.wrapping_add(layer as u64),
            },
            b => b,
        };
        let s = rg_step(&out.v, params, backend)?;
        out.v = s.v;
        out.delta_b += s.delta_b;
        out.max_stderr = match (out.max_stderr, s.max_stderr) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
    }
    Ok(out)
}
