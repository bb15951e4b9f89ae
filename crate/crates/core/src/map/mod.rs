//! The single-layer hierarchical RG map.

mod block;
mod params;
mod step;

pub use block::{
    haar_covariance, haar_covariance_error, haar_scales, log_mean_with_se,
    zero_sum_block_integral, Backend, BlockIntegral, ZeroSumDraws, MIN_MC_SAMPLES,
};
pub use params::RGParams;
pub(crate) use step::rescale;
pub use step::{rg_step, rg_step_composite, StepResult};
