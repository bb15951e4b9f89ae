use serde::{Deserialize, Serialize};

use crate::error::{HrgError, Result};

/// Discretization of the field variable on `[0, phi_max]`.
///
/// Functions sampled on this grid are even; only the non-negative half is
/// stored. `quad_nodes` is the Gauss–Hermite order used by every one
/// dimensional Gaussian integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub phi_max: f64,
    pub n_points: usize,
    pub quad_nodes: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            phi_max: 12.0,
            n_points: 2048,
            quad_nodes: 64,
        }
    }
}

impl GridSpec {
    pub fn new(phi_max: f64, n_points: usize, quad_nodes: usize) -> Result<Self> {
        let g = GridSpec {
            phi_max,
            n_points,
            quad_nodes,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.phi_max.is_finite() && self.phi_max > 0.0) {
            return Err(HrgError::invalid(format!(
                "phi_max must be positive, got {}",
                self.phi_max
            )));
        }
        if self.n_points < 16 {
            return Err(HrgError::invalid(format!(
                "n_points must be >= 16, got {}",
                self.n_points
            )));
        }
        if self.quad_nodes < 8 {
            return Err(HrgError::invalid(format!(
                "quad_nodes must be >= 8, got {}",
                self.quad_nodes
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        self.phi_max / (self.n_points - 1) as f64
    }

    #[inline]
    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            self.phi_max
        } else {
            i as f64 * self.spacing()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.point(i)).collect()
    }

    /// Points of the symmetric full-line grid `[-phi_max, phi_max]`.
    pub fn line_points(&self) -> Vec<f64> {
        let n = self.n_points;
        (0..2 * n - 1)
            .map(|k| {
                if k < n - 1 {
                    -self.point(n - 1 - k)
                } else {
                    self.point(k - (n - 1))
                }
            })
            .collect()
    }

    /// Same discretization with a different point count.
    pub fn with_points(&self, n_points: usize) -> Self {
        GridSpec { n_points, ..*self }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_are_exact() {
        let g = GridSpec::new(12.0, 2048, 64).unwrap();
        let pts = g.points();
        assert_eq!(pts[0], 0.0);
        assert_eq!(*pts.last().unwrap(), 12.0);
        let line = g.line_points();
        assert_eq!(line.len(), 4095);
        assert_eq!(line[0], -12.0);
        assert_eq!(line[2047], 0.0);
        assert_eq!(line[4094], 12.0);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(GridSpec::new(0.0, 2048, 64).is_err());
        assert!(GridSpec::new(12.0, 15, 64).is_err());
        assert!(GridSpec::new(12.0, 64, 7).is_err());
        assert!(GridSpec::new(f64::NAN, 64, 8).is_err());
    }
}
