//! Cumulant generating functions of smeared fields and the φ² exponent.

pub mod calibrate;
pub mod cumulant;
pub mod deviation;
pub mod kappa_flow;

pub use calibrate::{calibrate_y, YCalibration, YCalibrationOptions};
pub use cumulant::{
    cumulant_generating, cumulants, fine_source, Cumulants, gaussian_field_variance, gaussian_site_variance,
    CumulantSeries, SeriesTerm, TestFunctionSpec, SUMMABILITY_WINDOW, TERM_CUTOFF,
};
pub use deviation::{deviation_step, log_ratio, DeviationStep};
pub use kappa_flow::{kappa_from_phi2_flow, Phi2Flow, Phi2FlowOptions};
