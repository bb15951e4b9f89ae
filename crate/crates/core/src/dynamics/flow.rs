use std::io::Write;

use serde::Serialize;

use crate::error::{HrgError, Result};
use crate::func::{fmt17, project_couplings, CouplingVector, SampledEvenFunction};
use crate::map::{rg_step_composite, Backend, RGParams};

/// Sup-norm beyond which a flow is declared divergent.
pub const DIVERGENCE_NORM: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub struct FlowRecord {
    pub step: usize,
    pub couplings: CouplingVector,
    pub delta_b: f64,
    pub norm: f64,
}

#[derive(Debug, Clone)]
pub struct Flow {
    pub records: Vec<FlowRecord>,
    /// Potentials after each step, aligned with `records`.
    pub potentials: Vec<SampledEvenFunction>,
    pub diverged: bool,
    /// Why the flow stopped early, if it did.
    pub stop_reason: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowSummary {
    pub steps_requested: usize,
    pub steps_completed: usize,
    pub diverged: bool,
    pub stop_reason: Option<String>,
    pub final_couplings: Option<Vec<f64>>,
    pub total_delta_b: f64,
}

/// Iterates the composite map `n_steps` times, recording Wick couplings up to
/// `:φ^{2K}:`. Stops early, flagging divergence, if the potential leaves the
/// representable range.
pub fn flow(
    v0: &SampledEvenFunction,
    params: &RGParams,
    backend: Backend,
    n_steps: usize,
    truncation: usize,
) -> Result<Flow> {
    let mut out = Flow {
        records: Vec::with_capacity(n_steps),
        potentials: Vec::with_capacity(n_steps),
        diverged: false,
        stop_reason: None,
    };
    let mut v = v0.clone();
    for step in 1..=n_steps {
        let s = match rg_step_composite(&v, params, backend) {
            Ok(s) => s,
            Err(HrgError::Numerical { op, detail }) => {
                out.diverged = true;
                out.stop_reason = Some(format!("{op}: {detail}"));
                break;
            }
            Err(e) => return Err(e),
        };
        let norm = s.v.sup_norm();
        let couplings = project_couplings(&s.v, truncation)?;
        let finite = norm.is_finite()
            && s.delta_b.is_finite()
            && couplings.coefficients.iter().all(|c| c.is_finite());
        if !finite {
            out.diverged = true;
            out.stop_reason = Some(format!("non-finite values at step {step}"));
            break;
        }
        out.records.push(FlowRecord {
            step,
            couplings,
            delta_b: s.delta_b,
            norm,
        });
        v = s.v;
        out.potentials.push(v.clone());
        if norm > DIVERGENCE_NORM {
            out.diverged = true;
            out.stop_reason = Some(format!("sup-norm {norm:e} exceeds {DIVERGENCE_NORM:e}"));
            break;
        }
    }
    Ok(out)
}

impl Flow {
    pub fn summary(&self, steps_requested: usize) -> FlowSummary {
        FlowSummary {
            steps_requested,
            steps_completed: self.records.len(),
            diverged: self.diverged,
            stop_reason: self.stop_reason.clone(),
            final_couplings: self.records.last().map(|r| r.couplings.coefficients.clone()),
            total_delta_b: self.records.iter().map(|r| r.delta_b).sum(),
        }
    }

    /// `step,c0,c2,...,delta_b,norm`.
    pub fn write_csv<W: Write>(&self, out: W, truncation: usize) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["step".to_string()];
        header.extend((0..=truncation).map(|k| format!("c{}", 2 * k)));
        header.push("delta_b".into());
        header.push("norm".into());
        w.write_record(&header)?;
        for r in &self.records {
            let mut row = vec![r.step.to_string()];
            row.extend((0..=truncation).map(|k| fmt17(r.couplings.get(2 * k))));
            row.push(fmt17(r.delta_b));
            row.push(fmt17(r.norm));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}
