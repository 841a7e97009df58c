//! Symmetric Cartesian lattices in the phase plane.
//!
//! A [`GridSpec`] describes the square `[-range, range]²` sampled with a
//! fixed step. Node coordinates are generated as `(i - half) * step`, so the
//! mirror node `n - 1 - i` always carries the exactly negated coordinate.
//! Hermitian symmetry of characteristic-function grids relies on this.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub range: f64,
    pub step: f64,
}

impl GridSpec {
    /// Default characteristic-function lattice, `[-8, 8]²` with step 0.04.
    pub const BETA_DEFAULT: GridSpec = GridSpec {
        range: 8.0,
        step: 0.04,
    };

    /// Default quasiprobability lattice, `[-3, 3]²` with step 0.05.
    pub const ALPHA_DEFAULT: GridSpec = GridSpec {
        range: 3.0,
        step: 0.05,
    };

    pub fn new(range: f64, step: f64) -> Result<Self> {
        if !(range.is_finite() && range > 0.0) {
            return Err(Error::domain(format!("grid range must be > 0, got {range}")));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::domain(format!("grid step must be > 0, got {step}")));
        }
        if step > range {
            return Err(Error::domain(format!(
                "grid step {step} exceeds range {range}"
            )));
        }
        let half = (range / step).round();
        if half > 20_000.0 {
            return Err(Error::domain(format!("grid with {half} nodes per half-axis is too large")));
        }
        Ok(GridSpec { range, step })
    }

    /// Number of nodes on the positive half-axis (the centre excluded).
    pub fn half(&self) -> usize {
        (self.range / self.step).round() as usize
    }

    /// Number of nodes per axis.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        2 * self.half() + 1
    }

    /// Total node count.
    pub fn node_count(&self) -> usize {
        self.len() * self.len()
    }

    /// Largest coordinate actually on the lattice.
    pub fn extent(&self) -> f64 {
        self.half() as f64 * self.step
    }

    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        (i as f64 - self.half() as f64) * self.step
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.coord(i)).collect()
    }

    /// Point at node `(i_re, i_im)`.
    #[inline]
    pub fn point(&self, i_re: usize, i_im: usize) -> Complex64 {
        Complex64::new(self.coord(i_re), self.coord(i_im))
    }

    /// Flat row-major index (real index major).
    #[inline]
    pub fn index(&self, i_re: usize, i_im: usize) -> usize {
        i_re * self.len() + i_im
    }

    /// Nearest node index along one axis, or `None` when `x` lies outside
    /// the lattice by more than half a step.
    pub fn nearest(&self, x: f64) -> Option<usize> {
        let k = (x / self.step).round() + self.half() as f64;
        if k < 0.0 || k > (self.len() - 1) as f64 || !k.is_finite() {
            None
        } else {
            Some(k as usize)
        }
    }

    /// Nearest node to `beta`, if inside the lattice.
    pub fn nearest_node(&self, beta: Complex64) -> Option<(usize, usize)> {
        Some((self.nearest(beta.re)?, self.nearest(beta.im)?))
    }

    /// Whether node `(i_re, i_im)` lies on the outer boundary of the square.
    pub fn is_boundary(&self, i_re: usize, i_im: usize) -> bool {
        let last = self.len() - 1;
        i_re == 0 || i_im == 0 || i_re == last || i_im == last
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::BETA_DEFAULT
    }
}
