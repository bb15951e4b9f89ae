//! Renormalization-group engine for hierarchical scalar field models.

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod func;
pub mod map;
pub mod observables;
pub mod rng;
pub mod tree;

pub use error::{HrgError, Result};
