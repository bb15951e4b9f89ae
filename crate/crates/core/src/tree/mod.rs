//! The hierarchical Gaussian field on finite trees and its perturbations.

pub mod address;
pub mod covariance;
pub mod estimate;
pub mod mcmc;
pub mod sampler;

pub use address::{separation_level, ultrametric_distance, TreeAddress};
pub use covariance::{exact_covariance, exact_covariance_table};
pub use estimate::{
    fit_covariance_exponent, gaussian_covariance, CovarianceTable, ExponentFit,
    GaussianEstimatorOptions, LevelCovariance,
};
pub use mcmc::{mcmc_perturbed_field, McmcOptions, McmcResult, MAX_MCMC_DEPTH};
pub use sampler::{
    block_draws, sample_gaussian_field, sample_tree, LazyTree, TreeFieldSample, MAX_LEAVES,
};
