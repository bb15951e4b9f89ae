//! Run configuration: one JSON document, overridden by command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::ShootingOptions;
use crate::error::{HrgError, Result};
use crate::func::GridSpec;
use crate::map::{Backend, RGParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Bms,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum BackendChoice {
    Nested,
    Mc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub preset: Preset,
    /// Used when `phi_dim` is absent: `[φ] = (d − ε)/4`.
    pub epsilon: f64,
    pub p: u32,
    pub d: u32,
    pub l: u32,
    pub phi_dim: Option<f64>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            preset: Preset::Bms,
            epsilon: 0.1,
            p: 2,
            d: 3,
            l: 1,
            phi_dim: None,
        }
    }
}

impl ModelConfig {
    pub fn params(&self) -> Result<RGParams> {
        match self.preset {
            Preset::Bms => {
                if self.p != 2 || self.d != 3 || self.phi_dim.is_some() {
                    return Err(HrgError::invalid(
                        "the bms preset fixes p = 2, d = 3 and [phi] = (3 - epsilon)/4",
                    ));
                }
                RGParams::bms(self.epsilon)?.with_layers(self.l)
            }
            Preset::Custom => {
                let phi = self
                    .phi_dim
                    .unwrap_or((self.d as f64 - self.epsilon) / 4.0);
                RGParams::new(self.p, self.d, self.l, phi)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowConfig {
    /// `bare` (g:φ⁴: + μ:φ²:), `zero`, or a path to a `phi,W` CSV.
    pub v0: String,
    pub g: f64,
    pub mu: f64,
    pub steps: usize,
    /// Couplings reported up to `:φ^{2K}:`.
    pub truncation: usize,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            v0: "bare".into(),
            g: 0.2,
            mu: 0.0,
            steps: 20,
            truncation: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FixpointConfig {
    /// Continuation values; empty means the model's `ε` only.
    pub epsilons: Vec<f64>,
    /// `seed` (continuation seeding), `zero`, or a path to a `phi,W` CSV.
    pub guess: String,
    pub tol: f64,
}

impl Default for FixpointConfig {
    fn default() -> Self {
        FixpointConfig {
            epsilons: Vec::new(),
            guess: "seed".into(),
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CriticalConfig {
    pub g: f64,
    pub tol: f64,
    pub shooting: ShootingOptions,
}

impl Default for CriticalConfig {
    fn default() -> Self {
        CriticalConfig {
            g: 0.2,
            tol: 1e-8,
            shooting: ShootingOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SampleMode {
    Gaussian,
    Mcmc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SampleConfig {
    pub mode: SampleMode,
    pub depth: usize,
    pub replicas: usize,
    pub nodes_per_level: usize,
    pub pairs_per_level: usize,
    pub sweeps: usize,
    pub burn_in: usize,
    pub chains: usize,
    pub batches: usize,
    /// Single-site potential g:φ⁴: + μ:φ²: for MCMC.
    pub g: f64,
    pub mu: f64,
    /// Replace `mu` by the critical value for `g`.
    pub critical: bool,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            mode: SampleMode::Gaussian,
            depth: 10,
            replicas: 10_000,
            nodes_per_level: 64,
            pairs_per_level: 64,
            sweeps: 2000,
            burn_in: 200,
            chains: 4,
            batches: 20,
            g: 0.0,
            mu: 0.0,
            critical: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum BulkChoice {
    Zero,
    FixedPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObservableConfig {
    pub power: u32,
    pub amplitude: f64,
    pub support_level: usize,
    /// Layers below the unit scale.
    pub n_uv: usize,
    /// Layers from the unit scale to the top of the tree.
    pub depth: usize,
    pub bulk: BulkChoice,
    /// Subtraction constant for `power = 2`; calibrated when absent.
    pub y: Option<f64>,
    /// Stencil spacing for the cumulants; defaults to `amplitude`.
    pub stencil: Option<f64>,
}

impl Default for ObservableConfig {
    fn default() -> Self {
        ObservableConfig {
            power: 1,
            amplitude: 0.1,
            support_level: 0,
            n_uv: 0,
            depth: 8,
            bulk: BulkChoice::Zero,
            y: None,
            stencil: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SelftestConfig {
    /// Makes one check fail on purpose.
    pub force_failure: bool,
    pub mc_samples: usize,
    /// Grid points used by the backend comparison.
    pub mc_points: usize,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        SelftestConfig {
            force_failure: false,
            mc_samples: 100_000,
            mc_points: 129,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub grid: GridSpec,
    pub backend: BackendChoice,
    pub mc_samples: usize,
    pub seed: u64,
    pub out: PathBuf,
    /// Worker threads; absent means available parallelism.
    pub threads: Option<usize>,
    pub flow: FlowConfig,
    pub fixpoint: FixpointConfig,
    pub critical_mu: CriticalConfig,
    pub sample: SampleConfig,
    pub observable: ObservableConfig,
    pub selftest: SelftestConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: ModelConfig::default(),
            grid: GridSpec::default(),
            backend: BackendChoice::Nested,
            mc_samples: 1_000_000,
            seed: 0,
            out: PathBuf::from("out"),
            threads: None,
            flow: FlowConfig::default(),
            fixpoint: FixpointConfig::default(),
            critical_mu: CriticalConfig::default(),
            sample: SampleConfig::default(),
            observable: ObservableConfig::default(),
            selftest: SelftestConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn params(&self) -> Result<RGParams> {
        self.model.params()
    }

    pub fn backend(&self) -> Backend {
        match self.backend {
            BackendChoice::Nested => Backend::Nested,
            BackendChoice::Mc => Backend::MonteCarlo {
                n_samples: self.mc_samples,
                seed: self.seed,
            },
        }
    }

    /// Checks everything that does not need a computation.
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        let params = self.params()?;
        if self.backend == BackendChoice::Nested && params.haar_levels().is_none() {
            return Err(HrgError::UnsupportedBackend(format!(
                "nested backend needs p = 2, got p = {}",
                params.p
            )));
        }
        if self.threads == Some(0) {
            return Err(HrgError::invalid("threads must be positive"));
        }
        Ok(())
    }
}
