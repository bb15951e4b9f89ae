//! Even single-spin functions and the Gaussian integrals acting on them.

mod grid;
pub mod hermite;
mod integrals;
mod line;
mod profile;
mod sampled;
mod wick;

pub use grid::GridSpec;
pub use integrals::{
    gauss_smooth, gauss_smooth_line, pair_integral_line, pair_log_at, smooth_log_at,
    symmetric_pair_integral,
};
pub use line::LineFunction;
pub use profile::{FnProfile, Profile, SumProfile};
pub use sampled::SampledEvenFunction;
pub(crate) use sampled::fmt17;
pub use wick::{project_couplings, wick_monomial, CouplingVector, MAX_DEGREE};
