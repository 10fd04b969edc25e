//! Uniform 1-D grids and sampled fields.
//!
//! Nodes sit at `x0 + i * dx` for `i in 0..n`. Finite-volume code treats each
//! node as the centre of a cell of width `dx`. On a [`Boundary::TruncatedLine`]
//! everything outside the window is the constant pad value on that side.

use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Boundary {
    Periodic,
    TruncatedLine { left_pad: f64, right_pad: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x0: f64,
    pub dx: f64,
    pub n: usize,
    pub boundary: Boundary,
}

pub const MIN_GRID_POINTS: usize = 4;

impl GridSpec {
    pub fn new(x0: f64, dx: f64, n: usize, boundary: Boundary) -> Result<Self> {
        let grid = GridSpec {
            x0,
            dx,
            n,
            boundary,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// `n` nodes covering one period `[x0, x0 + length)`.
    pub fn periodic(x0: f64, length: f64, n: usize) -> Result<Self> {
        Self::new(x0, length / n as f64, n, Boundary::Periodic)
    }

    /// `n` nodes from `x0` to `x1` inclusive, padded by constants outside.
    pub fn truncated(x0: f64, x1: f64, n: usize, left_pad: f64, right_pad: f64) -> Result<Self> {
        if n < 2 {
            return Err(FracError::param("n", n as f64, "need at least 2 nodes"));
        }
        Self::new(
            x0,
            (x1 - x0) / (n - 1) as f64,
            n,
            Boundary::TruncatedLine {
                left_pad,
                right_pad,
            },
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dx > 0.0) || !self.dx.is_finite() {
            return Err(FracError::param("dx", self.dx, "grid spacing must be positive"));
        }
        if !self.x0.is_finite() {
            return Err(FracError::param("x0", self.x0, "left endpoint must be finite"));
        }
        if self.n < MIN_GRID_POINTS {
            return Err(FracError::param(
                "n",
                self.n as f64,
                format!("grid needs at least {MIN_GRID_POINTS} nodes"),
            ));
        }
        if let Boundary::TruncatedLine {
            left_pad,
            right_pad,
        } = self.boundary
        {
            if !left_pad.is_finite() || !right_pad.is_finite() {
                return Err(FracError::param("pad", f64::NAN, "pad values must be finite"));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    pub fn x_last(&self) -> f64 {
        self.x(self.n - 1)
    }

    /// Period for periodic grids, window width otherwise.
    pub fn length(&self) -> f64 {
        match self.boundary {
            Boundary::Periodic => self.n as f64 * self.dx,
            Boundary::TruncatedLine { .. } => (self.n - 1) as f64 * self.dx,
        }
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.boundary, Boundary::Periodic)
    }

    pub fn pads(&self) -> Option<(f64, f64)> {
        match self.boundary {
            Boundary::Periodic => None,
            Boundary::TruncatedLine {
                left_pad,
                right_pad,
            } => Some((left_pad, right_pad)),
        }
    }

    /// Same window refined `factor` times, cell-centred so that every coarse
    /// cell is the union of `factor` fine cells.
    pub fn refined(&self, factor: usize) -> Result<GridSpec> {
        if factor == 0 {
            return Err(FracError::param("factor", 0.0, "refinement factor must be >= 1"));
        }
        let fine_dx = self.dx / factor as f64;
        let x0 = self.x0 - 0.5 * self.dx + 0.5 * fine_dx;
        GridSpec::new(x0, fine_dx, self.n * factor, self.boundary)
    }

    /// Index of the node nearest to `x` (clamped into the window).
    pub fn nearest_index(&self, x: f64) -> usize {
        let i = ((x - self.x0) / self.dx).round();
        i.clamp(0.0, (self.n - 1) as f64) as usize
    }
}

/// Samples `u(t, x_i)` of a scalar field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    pub t: f64,
    pub values: Vec<f64>,
    pub grid: GridSpec,
}

impl Field {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        Self::at_time(grid, values, 0.0)
    }

    pub fn at_time(grid: GridSpec, values: Vec<f64>, t: f64) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.n {
            return Err(FracError::GridMismatch {
                expected: grid.n,
                found: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(FracError::NonFinite { index });
        }
        Ok(Field { t, values, grid })
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..grid.n).map(|i| f(grid.x(i))).collect();
        Self::new(grid, values)
    }

    pub fn constant(grid: GridSpec, c: f64) -> Result<Self> {
        Self::new(grid, vec![c; grid.n])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub(crate) fn check_grid(&self, grid: &GridSpec) -> Result<()> {
        if self.values.len() != grid.n {
            return Err(FracError::GridMismatch {
                expected: grid.n,
                found: self.values.len(),
            });
        }
        Ok(())
    }

    /// Sup norm over the whole line, pads included.
    pub fn sup_norm(&self) -> f64 {
        let interior = self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        match self.grid.pads() {
            Some((l, r)) => interior.max(l.abs()).max(r.abs()),
            None => interior,
        }
    }

    pub fn max_value(&self) -> f64 {
        let interior = self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        match self.grid.pads() {
            Some((l, r)) => interior.max(l).max(r),
            None => interior,
        }
    }

    pub fn min_value(&self) -> f64 {
        let interior = self.values.iter().copied().fold(f64::INFINITY, f64::min);
        match self.grid.pads() {
            Some((l, r)) => interior.min(l).min(r),
            None => interior,
        }
    }

    /// Discrete L1 norm `dx * sum |u_i|` over the window.
    pub fn l1_norm(&self) -> f64 {
        self.grid.dx * self.values.iter().map(|v| v.abs()).sum::<f64>()
    }

    pub fn mass(&self) -> f64 {
        self.grid.dx * self.values.iter().sum::<f64>()
    }

    /// Discrete total variation, including the jumps to the pads on a
    /// truncated line and the wrap-around jump on a periodic grid.
    pub fn total_variation(&self) -> f64 {
        let v = &self.values;
        let mut tv: f64 = v.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
        match self.grid.pads() {
            Some((l, r)) => {
                tv += (v[0] - l).abs() + (r - v[v.len() - 1]).abs();
            }
            None => tv += (v[0] - v[v.len() - 1]).abs(),
        }
        tv
    }

    /// `dx * sum |u - v|`.
    pub fn l1_distance(&self, other: &Field) -> Result<f64> {
        other.check_grid(&self.grid)?;
        Ok(self.grid.dx
            * self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>())
    }

    pub fn sup_distance(&self, other: &Field) -> Result<f64> {
        other.check_grid(&self.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Conservative restriction onto a grid `factor` times coarser
    /// (the inverse of [`GridSpec::refined`]).
    pub fn restrict(&self, factor: usize, coarse: &GridSpec) -> Result<Field> {
        if coarse.n * factor != self.grid.n {
            return Err(FracError::GridMismatch {
                expected: coarse.n * factor,
                found: self.grid.n,
            });
        }
        let values = self
            .values
            .chunks(factor)
            .map(|c| c.iter().sum::<f64>() / factor as f64)
            .collect();
        Field::at_time(*coarse, values, self.t)
    }

    /// Value at a node index that may lie outside the window.
    pub fn extended(&self, i: isize) -> f64 {
        let n = self.values.len() as isize;
        match self.grid.boundary {
            Boundary::Periodic => self.values[i.rem_euclid(n) as usize],
            Boundary::TruncatedLine {
                left_pad,
                right_pad,
            } => {
                if i < 0 {
                    left_pad
                } else if i >= n {
                    right_pad
                } else {
                    self.values[i as usize]
                }
            }
        }
    }
}
