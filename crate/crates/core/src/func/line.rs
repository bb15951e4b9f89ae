use crate::error::{HrgError, Result};
use crate::func::grid::GridSpec;
use crate::func::profile::{lagrange4, Profile};

#[derive(Debug, Clone, Copy, PartialEq)]
struct SideTail {
    w_end: f64,
    b1: f64,
    b2: f64,
}

impl SideTail {
    /// Quadratic in the outward distance `s` fitted through the end sample.
    fn fit(s: &[f64], y: &[f64], w_end: f64) -> Self {
        let (mut s11, mut s12, mut s22, mut y1, mut y2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&si, &yi) in s.iter().zip(y) {
            let d = yi - w_end;
            s11 += si * si;
            s12 += si * si * si;
            s22 += si.powi(4);
            y1 += si * d;
            y2 += si * si * d;
        }
        let det = s11 * s22 - s12 * s12;
        let (b1, b2) = if det.abs() > 0.0 {
            ((y1 * s22 - y2 * s12) / det, (s11 * y2 - s12 * y1) / det)
        } else {
            (0.0, 0.0)
        };
        SideTail { w_end, b1, b2 }
    }

    #[inline]
    fn eval_d2(&self, s: f64) -> (f64, f64, f64) {
        (
            self.w_end + s * (self.b1 + s * self.b2),
            self.b1 + 2.0 * self.b2 * s,
            2.0 * self.b2,
        )
    }
}

/// A function on the symmetric grid `[-phi_max, phi_max]` with no parity
/// assumed. Used for deviations driven by odd sources.
#[derive(Debug, Clone, PartialEq)]
pub struct LineFunction {
    grid: GridSpec,
    vals: Vec<f64>,
    left: SideTail,
    right: SideTail,
    inv_h: f64,
}

impl LineFunction {
    pub fn from_values(grid: GridSpec, vals: Vec<f64>) -> Result<Self> {
        grid.validate()?;
        let len = 2 * grid.n_points - 1;
        if vals.len() != len {
            return Err(HrgError::invalid(format!(
                "expected {len} samples, got {}",
                vals.len()
            )));
        }
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(HrgError::numerical("LineFunction", "non-finite sample"));
        }
        let h = grid.spacing();
        let m = ((grid.n_points as f64) * 0.05).ceil().max(4.0) as usize;
        let s: Vec<f64> = (1..m).map(|k| -(k as f64) * h).collect();
        let yr: Vec<f64> = (1..m).map(|k| vals[len - 1 - k]).collect();
        let yl: Vec<f64> = (1..m).map(|k| vals[k]).collect();
        let right = SideTail::fit(&s, &yr, vals[len - 1]);
        let left = SideTail::fit(&s, &yl, vals[0]);
        Ok(LineFunction {
            grid,
            vals,
            left,
            right,
            inv_h: 1.0 / h,
        })
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> f64) -> Result<Self> {
        let vals = grid.line_points().into_iter().map(f).collect();
        Self::from_values(grid, vals)
    }

    pub fn zero(grid: GridSpec) -> Self {
        Self::from_values(grid, vec![0.0; 2 * grid.n_points - 1]).expect("zero is valid")
    }

    /// Even extension of a half-grid function.
    pub fn from_even(f: &crate::func::SampledEvenFunction) -> Self {
        let grid = *f.grid();
        let n = grid.n_points;
        let v = f.logvals();
        let vals = (0..2 * n - 1)
            .map(|k| if k < n - 1 { v[n - 1 - k] } else { v[k - (n - 1)] })
            .collect();
        Self::from_values(grid, vals).expect("finite input")
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.vals
    }

    pub fn value_at_zero(&self) -> f64 {
        self.vals[self.grid.n_points - 1]
    }

    pub fn normalized(&self) -> Self {
        let w0 = self.value_at_zero();
        Self::from_values(self.grid, self.vals.iter().map(|v| v - w0).collect())
            .expect("shift keeps values finite")
    }

    pub fn is_zero(&self) -> bool {
        self.vals.iter().all(|v| *v == 0.0)
    }

    pub fn sup_norm(&self) -> f64 {
        self.vals.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    #[inline]
    fn sample(&self, j: isize) -> f64 {
        let len = self.vals.len() as isize;
        let h = self.grid.spacing();
        if j < 0 {
            self.left.eval_d2(-j as f64 * h).0
        } else if j >= len {
            self.right.eval_d2((j - len + 1) as f64 * h).0
        } else {
            self.vals[j as usize]
        }
    }
}

impl Profile for LineFunction {
    #[inline]
    fn eval(&self, x: f64) -> f64 {
        self.eval_d2(x).0
    }

    fn eval_d2(&self, x: f64) -> (f64, f64, f64) {
        let pm = self.grid.phi_max;
        if x >= pm {
            return self.right.eval_d2(x - pm);
        }
        if x <= -pm {
            let (w, d1, d2) = self.left.eval_d2(-pm - x);
            return (w, -d1, d2);
        }
        let len = self.vals.len() as isize;
        let s = (x + pm) * self.inv_h;
        let i = (s.floor() as isize).clamp(0, len - 2);
        let u = s - i as f64;
        let (a, b, c, d) = lagrange4(
            self.sample(i - 1),
            self.sample(i),
            self.sample(i + 1),
            self.sample(i + 2),
        );
        (
            a + u * (b + u * (c + u * d)),
            (b + u * (2.0 * c + 3.0 * d * u)) * self.inv_h,
            (2.0 * c + 6.0 * d * u) * self.inv_h * self.inv_h,
        )
    }
}
