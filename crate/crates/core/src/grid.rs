//! Uniform grids on a square window `[-L, L]²`.
//!
//! Cell `(i, j)` is centered at `(-L + (i+1/2)h, -L + (j+1/2)h)` with
//! `h = 2L/n`; `i` indexes the first coordinate, `j` the second, and values
//! are stored row-major in `j`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geometry of a grid: window half-length and per-axis resolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub l: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn new(l: f64, n: usize) -> Result<Self> {
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "window half-length must be positive, got {l}"
            )));
        }
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid resolution must be at least 2, got {n}"
            )));
        }
        Ok(GridSpec { l, n })
    }

    /// Cell spacing `h = 2L/n`.
    #[inline]
    pub fn h(&self) -> f64 {
        2.0 * self.l / self.n as f64
    }

    /// Center of cell `(i, j)`.
    #[inline]
    pub fn cell_center(&self, i: usize, j: usize) -> [f64; 2] {
        let h = self.h();
        [
            -self.l + (i as f64 + 0.5) * h,
            -self.l + (j as f64 + 0.5) * h,
        ]
    }

    /// First-axis coordinate of column `i` (same for every row).
    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        -self.l + (i as f64 + 0.5) * self.h()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    pub fn cell_count(&self) -> usize {
        self.n * self.n
    }
}

/// A sampled function on a [`GridSpec`]; `T` is `f64` or `Complex64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    pub spec: GridSpec,
    pub values: Vec<T>,
}

impl<T: Copy + Default> Grid<T> {
    pub fn zeros(spec: GridSpec) -> Self {
        Grid {
            spec,
            values: vec![T::default(); spec.cell_count()],
        }
    }

    pub fn from_fn(spec: GridSpec, mut f: impl FnMut(f64, f64) -> T) -> Self {
        let n = spec.n;
        let mut values = Vec::with_capacity(spec.cell_count());
        for j in 0..n {
            for i in 0..n {
                let [x1, x2] = spec.cell_center(i, j);
                values.push(f(x1, x2));
            }
        }
        Grid { spec, values }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[self.spec.index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        let idx = self.spec.index(i, j);
        self.values[idx] = v;
    }
}

impl Grid<f64> {
    /// `h² Σ values` — the window integral under cell-center quadrature.
    pub fn integral(&self) -> f64 {
        let h = self.spec.h();
        h * h * self.values.iter().sum::<f64>()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Checks the weight contract: every value finite and in `[0, 1]`.
    pub fn validate_weight(&self) -> Result<()> {
        for (k, v) in self.values.iter().enumerate() {
            if !v.is_finite() || *v < 0.0 || *v > 1.0 {
                return Err(Error::InvalidArgument(format!(
                    "weight value {v} at flat index {k} is outside [0, 1]"
                )));
            }
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Grid<f64> {
        Grid {
            spec: self.spec,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

impl Grid<Complex64> {
    pub fn norms(&self) -> Grid<f64> {
        Grid {
            spec: self.spec,
            values: self.values.iter().map(|z| z.norm()).collect(),
        }
    }
}
