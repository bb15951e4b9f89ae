//! Leaf addresses and the ultrametric distance.

use serde::{Deserialize, Serialize};

use crate::error::{HrgError, Result};

/// Leaf address; `digits[0]` is the coarsest layer.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TreeAddress {
    digits: Vec<u32>,
}

impl TreeAddress {
    pub fn new(digits: Vec<u32>, n: usize) -> Result<Self> {
        if let Some(d) = digits.iter().find(|d| **d as usize >= n) {
            return Err(HrgError::invalid(format!("digit {d} out of range for N = {n}")));
        }
        Ok(TreeAddress { digits })
    }

    /// Address of leaf `index` in a tree of `depth` layers with branching `n`.
    pub fn from_index(mut index: u64, n: usize, depth: usize) -> Result<Self> {
        let n64 = n as u64;
        let mut digits = vec![0u32; depth];
        for d in digits.iter_mut().rev() {
            *d = (index % n64) as u32;
            index /= n64;
        }
        if index != 0 {
            return Err(HrgError::invalid("leaf index exceeds the tree size"));
        }
        Ok(TreeAddress { digits })
    }

    pub fn index(&self, n: usize) -> u64 {
        self.digits.iter().fold(0u64, |acc, d| acc * n as u64 + *d as u64)
    }

    pub fn depth(&self) -> usize {
        self.digits.len()
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    /// Smallest `q` with a common ancestor on layer `q`; 0 iff equal.
    pub fn separation(&self, other: &TreeAddress) -> Result<usize> {
        if self.depth() != other.depth() {
            return Err(HrgError::invalid(format!(
                "addresses of depth {} and {} are not comparable",
                self.depth(),
                other.depth()
            )));
        }
        let common = self
            .digits
            .iter()
            .zip(&other.digits)
            .take_while(|(a, b)| a == b)
            .count();
        Ok(self.depth() - common)
    }
}

/// `|x − y| = α^q` where `q` is the separation level; `0` iff `x = y`.
pub fn ultrametric_distance(x: &TreeAddress, y: &TreeAddress, alpha: f64) -> Result<f64> {
    let q = x.separation(y)?;
    Ok(if q == 0 { 0.0 } else { alpha.powi(q as i32) })
}

/// Separation level of two leaf indices.
pub fn separation_level(x: u64, y: u64, n: usize) -> usize {
    let (mut x, mut y, mut q) = (x, y, 0);
    while x != y {
        x /= n as u64;
        y /= n as u64;
        q += 1;
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distances() {
        let a = TreeAddress::new(vec![1, 0, 1], 2).unwrap();
        let b = TreeAddress::new(vec![1, 0, 0], 2).unwrap();
        let c = TreeAddress::new(vec![0, 0, 1], 2).unwrap();
        assert_eq!(ultrametric_distance(&a, &a, 2.0).unwrap(), 0.0);
        assert_eq!(ultrametric_distance(&a, &b, 2.0).unwrap(), 2.0);
        assert_eq!(ultrametric_distance(&a, &c, 2.0).unwrap(), 8.0);
        let short = TreeAddress::new(vec![1, 0], 2).unwrap();
        assert!(ultrametric_distance(&a, &short, 2.0).is_err());
        assert!(TreeAddress::new(vec![2], 2).is_err());
    }

    #[test]
    fn index_round_trip() {
        for i in 0..512u64 {
            let a = TreeAddress::from_index(i, 8, 3).unwrap();
            assert_eq!(a.index(8), i);
        }
        assert!(TreeAddress::from_index(512, 8, 3).is_err());
        let a = TreeAddress::from_index(0o123, 8, 3).unwrap();
        let b = TreeAddress::from_index(0o127, 8, 3).unwrap();
        assert_eq!(a.separation(&b).unwrap(), separation_level(0o123, 0o127, 8));
    }
}
