use serde::{Deserialize, Serialize};

use crate::error::{HrgError, Result};

/// Model parameters of the p-adic hierarchical model.
///
/// `N = p^d` sites per block, `β = p^{[φ]}` field rescaling per layer,
/// `L = p^l` the scale of the composite map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RGParams {
    pub p: u32,
    pub d: u32,
    pub l: u32,
    pub phi_dim: f64,
}

impl RGParams {
    pub fn new(p: u32, d: u32, l: u32, phi_dim: f64) -> Result<Self> {
        let params = RGParams { p, d, l, phi_dim };
        params.validate()?;
        Ok(params)
    }

    /// `d = 3`, `p = 2`, `[φ] = (3 − ε)/4`.
    pub fn bms(epsilon: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&epsilon) {
            return Err(HrgError::invalid(format!(
                "epsilon must lie in [0, 1), got {epsilon}"
            )));
        }
        Self::new(2, 3, 1, (3.0 - epsilon) / 4.0)
    }

    pub fn with_layers(self, l: u32) -> Result<Self> {
        Self::new(self.p, self.d, l, self.phi_dim)
    }

    pub fn validate(&self) -> Result<()> {
        if !is_prime(self.p) {
            return Err(HrgError::invalid(format!("p must be prime, got {}", self.p)));
        }
        if self.d < 1 || self.l < 1 {
            return Err(HrgError::invalid("d and l must be at least 1"));
        }
        let half = self.d as f64 / 2.0;
        if !(self.phi_dim > 0.0 && self.phi_dim < half) {
            return Err(HrgError::invalid(format!(
                "phi_dim must lie in (0, {half}), got {}",
                self.phi_dim
            )));
        }
        if (self.p as f64).powi(self.d as i32) > 1e9 {
            return Err(HrgError::invalid("block size p^d is too large"));
        }
        Ok(())
    }

    /// Block size `N = p^d`.
    pub fn n(&self) -> usize {
        (self.p as usize).pow(self.d)
    }

    pub fn alpha(&self) -> f64 {
        self.p as f64
    }

    pub fn beta(&self) -> f64 {
        (self.p as f64).powf(self.phi_dim)
    }

    /// Composite scale `L = p^l`.
    pub fn big_l(&self) -> f64 {
        (self.p as f64).powi(self.l as i32)
    }

    /// `ε` such that `[φ] = (d − ε)/4`; meaningful for the BMS family.
    pub fn epsilon(&self) -> f64 {
        // rounded so that presets report the ε they were built from
        let e = self.d as f64 - 4.0 * self.phi_dim;
        (e * 1e12).round() / 1e12
    }

    /// Per-layer eigenvalue `p^{d − k[φ]}` of `:φ^k:` at the Gaussian fixed point.
    pub fn gaussian_eigenvalue(&self, k: u32) -> f64 {
        (self.p as f64).powf(self.d as f64 - k as f64 * self.phi_dim)
    }

    /// Number of Haar levels when `N` is a power of two.
    pub fn haar_levels(&self) -> Option<usize> {
        (self.p == 2).then_some(self.d as usize)
    }
}

fn is_prime(p: u32) -> bool {
    p >= 2 && (2..).take_while(|k| k * k <= p).all(|k| p % k != 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bms_preset() {
        let p = RGParams::bms(0.1).unwrap();
        assert_eq!(p.n(), 8);
        assert!((p.phi_dim - 0.725).abs() < 1e-15);
        assert!((p.beta() - 2f64.powf(0.725)).abs() < 1e-15);
        assert_eq!(p.epsilon(), 0.1);
        assert!((p.gaussian_eigenvalue(4) - 2f64.powf(0.1)).abs() < 1e-14);
    }

    #[test]
    fn validation() {
        assert!(RGParams::new(4, 3, 1, 0.75).is_err());
        assert!(RGParams::new(2, 3, 1, 1.5).is_err());
        assert!(RGParams::new(2, 3, 0, 0.75).is_err());
        assert!(RGParams::new(3, 2, 1, 0.5).is_ok());
        assert!(RGParams::bms(1.0).is_err());
    }
}
