use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Uniform `n x n` grid on the periodic square `[0, length)^2`.
///
/// The torus used throughout is the unit square; free-space computations reuse
/// the same type for the periodic box that carries the vorticity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
    length: f64,
}

impl Grid {
    /// The flat torus identified with `[0, 1)^2`.
    pub fn torus(n: usize) -> Result<Self> {
        Self::periodic_box(n, 1.0)
    }

    pub fn periodic_box(n: usize, length: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::BadGrid(format!(
                "n = {n}: need a power of two >= 8"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::BadGrid(format!("period {length} must be positive")));
        }
        Ok(Self { n, length })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn length(&self) -> f64 {
        self.length
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Area of one grid cell, the quadrature weight.
    #[inline]
    pub fn cell_area(&self) -> f64 {
        let h = self.spacing();
        h * h
    }

    /// Coordinates of grid node `(i, j)`; `i` runs along `x1`, `j` along `x2`.
    #[inline]
    pub fn point(&self, i: usize, j: usize) -> [f64; 2] {
        let h = self.spacing();
        [i as f64 * h, j as f64 * h]
    }

    /// Coordinates of node `(i, j)` relative to the box centre, i.e. on
    /// `[-L/2, L/2)^2`.
    #[inline]
    pub fn centered_point(&self, i: usize, j: usize) -> [f64; 2] {
        let h = self.spacing();
        let c = 0.5 * self.length;
        [i as f64 * h - c, j as f64 * h - c]
    }

    /// Flat row-major index of node `(i, j)`.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n + j
    }

    /// Signed integer wavenumber stored at FFT index `i` (Nyquist maps to `-n/2`).
    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Angular wavenumber `2 pi k / length` for FFT index `i`.
    #[inline]
    pub fn angular(&self, i: usize) -> f64 {
        2.0 * PI * self.wavenumber(i) as f64 / self.length
    }

    /// Angular wavenumber used by odd-order derivatives: zero on the Nyquist
    /// index so that derivatives of real fields stay real.
    #[inline]
    pub fn angular_odd(&self, i: usize) -> f64 {
        if i == self.n / 2 {
            0.0
        } else {
            self.angular(i)
        }
    }

    /// `true` when the mode `(i, j)` survives 2/3-rule truncation.
    #[inline]
    pub fn keeps_mode(&self, i: usize, j: usize) -> bool {
        let k1 = self.wavenumber(i).unsigned_abs() as usize;
        let k2 = self.wavenumber(j).unsigned_abs() as usize;
        3 * k1.max(k2) <= self.n
    }
}
