use std::io::{Read, Write};

use crate::error::{HrgError, Result};
use crate::func::grid::GridSpec;
use crate::func::profile::{lagrange4, Profile};

/// Even quartic continuation `W(pm) + a2 (u² − 1) + a4 (u⁴ − 1)`, `u = x/pm`,
/// with `a4 ≥ 0` and a tail that is non-decreasing at the grid edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct EvenTail {
    pm: f64,
    w_end: f64,
    a2: f64,
    a4: f64,
}

impl EvenTail {
    fn fit(grid: &GridSpec, vals: &[f64]) -> Self {
        let n = vals.len();
        let pm = grid.phi_max;
        let w_end = vals[n - 1];
        let m = ((n as f64) * 0.05).ceil().max(4.0) as usize;
        let (mut s22, mut s24, mut s44, mut y2, mut y4) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for i in (n - m)..(n - 1) {
            let u = grid.point(i) / pm;
            let b2 = u * u - 1.0;
            let b4 = u.powi(4) - 1.0;
            let y = vals[i] - w_end;
            s22 += b2 * b2;
            s24 += b2 * b4;
            s44 += b4 * b4;
            y2 += b2 * y;
            y4 += b4 * y;
        }
        let det = s22 * s44 - s24 * s24;
        let (mut a2, mut a4) = if det.abs() > 1e-300 {
            ((y2 * s44 - y4 * s24) / det, (s22 * y4 - s24 * y2) / det)
        } else {
            (0.0, 0.0)
        };
        if !(a4 >= 0.0) {
            a4 = 0.0;
            a2 = if s22 > 0.0 { y2 / s22 } else { 0.0 };
            if !(a2 >= 0.0) {
                a2 = 0.0;
            }
        }
        // a tail that starts out decreasing falls back to a pure quartic
        if 2.0 * a2 + 4.0 * a4 < 0.0 {
            a2 = 0.0;
            a4 = if s44 > 0.0 { (y4 / s44).max(0.0) } else { 0.0 };
        }
        EvenTail { pm, w_end, a2, a4 }
    }

    #[inline]
    fn eval_d2(&self, y: f64) -> (f64, f64, f64) {
        let u = y / self.pm;
        let u2 = u * u;
        let w = self.w_end + self.a2 * (u2 - 1.0) + self.a4 * (u2 * u2 - 1.0);
        let d1 = (2.0 * self.a2 * u + 4.0 * self.a4 * u2 * u) / self.pm;
        let d2 = (2.0 * self.a2 + 12.0 * self.a4 * u2) / (self.pm * self.pm);
        (w, d1, d2)
    }

    #[inline]
    fn eval(&self, y: f64) -> f64 {
        let u2 = (y / self.pm).powi(2);
        self.w_end + self.a2 * (u2 - 1.0) + self.a4 * (u2 * u2 - 1.0)
    }

    /// Leading quartic coefficient in the field variable.
    pub(crate) fn quartic_coefficient(&self) -> f64 {
        self.a4 / self.pm.powi(4)
    }
}

/// An even function of the field stored as `W = −ln f` on `[0, phi_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledEvenFunction {
    grid: GridSpec,
    logvals: Vec<f64>,
    tail: EvenTail,
    inv_h: f64,
}

impl SampledEvenFunction {
    pub fn from_values(grid: GridSpec, logvals: Vec<f64>) -> Result<Self> {
        grid.validate()?;
        if logvals.len() != grid.n_points {
            return Err(HrgError::invalid(format!(
                "expected {} samples, got {}",
                grid.n_points,
                logvals.len()
            )));
        }
        if let Some(i) = logvals.iter().position(|v| !v.is_finite()) {
            return Err(HrgError::numerical(
                "SampledEvenFunction",
                format!("non-finite sample {} at phi = {}", logvals[i], grid.point(i)),
            ));
        }
        let tail = EvenTail::fit(&grid, &logvals);
        Ok(SampledEvenFunction {
            grid,
            logvals,
            tail,
            inv_h: 1.0 / grid.spacing(),
        })
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> f64) -> Result<Self> {
        let vals = grid.points().into_iter().map(f).collect();
        Self::from_values(grid, vals)
    }

    pub fn zero(grid: GridSpec) -> Self {
        Self::from_values(grid, vec![0.0; grid.n_points]).expect("zero function is valid")
    }

    /// Copy with `W(0)` subtracted.
    pub fn normalized(&self) -> Self {
        let w0 = self.logvals[0];
        let vals = self.logvals.iter().map(|v| v - w0).collect();
        Self::from_values(self.grid, vals).expect("shift keeps values finite")
    }

    pub fn is_normalized(&self) -> bool {
        self.logvals[0] == 0.0
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn logvals(&self) -> &[f64] {
        &self.logvals
    }

    pub fn sup_norm(&self) -> f64 {
        self.logvals.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn tail_quartic_coefficient(&self) -> f64 {
        self.tail.quartic_coefficient()
    }

    /// Sup-norm distance on the grid.
    pub fn distance(&self, other: &Self) -> f64 {
        self.logvals
            .iter()
            .zip(&other.logvals)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// `W(|x|)`, interpolated inside the grid and extrapolated beyond it.
    pub fn evaluate(&self, x: f64) -> f64 {
        self.eval(x)
    }

    #[inline]
    fn sample(&self, j: isize) -> f64 {
        let n = self.logvals.len() as isize;
        if j < 0 {
            self.logvals[(-j) as usize]
        } else if j < n {
            self.logvals[j as usize]
        } else {
            self.tail.eval(j as f64 * self.grid.spacing())
        }
    }

    #[inline]
    fn cell(&self, y: f64) -> (isize, f64) {
        let n = self.logvals.len();
        let s = y * self.inv_h;
        let i = (s.floor() as isize).min(n as isize - 2);
        (i, s - i as f64)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["phi", "W"])?;
        for (i, v) in self.logvals.iter().enumerate() {
            w.write_record([fmt17(self.grid.point(i)), fmt17(*v)])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a `phi,W` table; the grid must be uniform starting at zero.
    pub fn read_csv<R: Read>(input: R, quad_nodes: usize) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let headers = r.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "phi" || &headers[1] != "W" {
            return Err(HrgError::invalid("expected header phi,W"));
        }
        let mut phis = Vec::new();
        let mut vals = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| HrgError::invalid(format!("bad number {s:?}: {e}")))
            };
            phis.push(parse(&rec[0])?);
            vals.push(parse(&rec[1])?);
        }
        if phis.len() < 16 || phis[0] != 0.0 {
            return Err(HrgError::invalid("grid must start at 0 with >= 16 points"));
        }
        let grid = GridSpec::new(*phis.last().unwrap(), phis.len(), quad_nodes)?;
        for (i, p) in phis.iter().enumerate() {
            if (p - grid.point(i)).abs() > 1e-12 * grid.phi_max {
                return Err(HrgError::invalid("grid is not uniform"));
            }
        }
        Self::from_values(grid, vals)
    }
}

impl Profile for SampledEvenFunction {
    #[inline]
    fn eval(&self, x: f64) -> f64 {
        let y = x.abs();
        if y >= self.grid.phi_max {
            return self.tail.eval(y);
        }
        let (i, u) = self.cell(y);
        let (a, b, c, d) = lagrange4(
            self.sample(i - 1),
            self.sample(i),
            self.sample(i + 1),
            self.sample(i + 2),
        );
        a + u * (b + u * (c + u * d))
    }

    #[inline]
    fn eval_d2(&self, x: f64) -> (f64, f64, f64) {
        let y = x.abs();
        let sign = if x < 0.0 { -1.0 } else { 1.0 };
        let (w, d1, d2) = if y >= self.grid.phi_max {
            self.tail.eval_d2(y)
        } else {
            let (i, u) = self.cell(y);
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
        };
        (w, sign * d1, d2)
    }
}

/// 17 significant digits.
pub(crate) fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}
