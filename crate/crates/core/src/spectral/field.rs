use super::fft::Fft2;
use super::grid::Grid;
use super::interp::{sample_values, spectral_eval, Interpolation};
use super::MEAN_ZERO_TOL;
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::sync::OnceLock;

/// Real scalar field on a periodic grid, together with its Fourier
/// coefficients.
///
/// Values are the source of truth; coefficients are computed on first use
/// (or supplied by the constructor) and cached. Fields are immutable.
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: Grid,
    values: Vec<f64>,
    coeffs: OnceLock<Vec<Complex64>>,
}

/// Fourier multipliers available through [`SpectralField::derivative`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeOp {
    Grad1,
    Grad2,
    Laplacian,
    /// `(-Delta)^{-1}` on mean-zero fields.
    InverseNegLaplacian,
}

impl SpectralField {
    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a {}x{} grid",
                values.len(),
                grid.n(),
                grid.n()
            )));
        }
        Ok(Self {
            grid,
            values,
            coeffs: OnceLock::new(),
        })
    }

    /// Builds a field from (Hermitian) Fourier coefficients; the physical
    /// values are the real part of the inverse transform.
    pub fn from_coeffs(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} coefficients for a {}x{} grid",
                coeffs.len(),
                grid.n(),
                grid.n()
            )));
        }
        let values = Fft2::new(grid.n()).inverse_real(&coeffs);
        let cell = OnceLock::new();
        let _ = cell.set(coeffs);
        Ok(Self {
            grid,
            values,
            coeffs: cell,
        })
    }

    /// Values together with their precomputed transform, e.g. when
    /// reloading a stored field without re-transforming.
    pub fn from_parts(grid: Grid, values: Vec<f64>, coeffs: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() || coeffs.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} values and {} coefficients for a {}x{} grid",
                values.len(),
                coeffs.len(),
                grid.n(),
                grid.n()
            )));
        }
        let cell = OnceLock::new();
        let _ = cell.set(coeffs);
        Ok(Self {
            grid,
            values,
            coeffs: cell,
        })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..n {
            for j in 0..n {
                let [x1, x2] = grid.point(i, j);
                values.push(f(x1, x2));
            }
        }
        Self {
            grid,
            values,
            coeffs: OnceLock::new(),
        }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
            coeffs: OnceLock::new(),
        }
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn coeffs(&self) -> &[Complex64] {
        self.coeffs
            .get_or_init(|| Fft2::new(self.grid.n()).forward_real(&self.values))
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    /// Average over the periodic cell.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn require_mean_zero(&self) -> Result<()> {
        let mean = self.mean();
        if mean.abs() > MEAN_ZERO_TOL {
            Err(Error::NonZeroMean { mean })
        } else {
            Ok(())
        }
    }

    /// `(\int |f|^p dx)^{1/p}` by grid quadrature over the periodic cell; on
    /// the unit torus this is the mean of `|f|^p`. `p = f64::INFINITY` gives
    /// the maximum modulus.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        lp_norm_of(&self.values, self.grid.cell_area(), p)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Integral over the periodic cell.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_area()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
            coeffs: OnceLock::new(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        let out = self.map(|v| v * s);
        if let Some(c) = self.coeffs.get() {
            let _ = out.coeffs.set(c.iter().map(|z| z * s).collect());
        }
        out
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            coeffs: OnceLock::new(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Subtracts the mean.
    pub fn mean_zero(&self) -> Self {
        let m = self.mean();
        self.map(|v| v - m)
    }

    /// 2/3-rule truncation: modes with `max(|k1|, |k2|) > n/3` are removed.
    pub fn dealias(&self) -> Self {
        let g = self.grid;
        let n = g.n();
        let mut c = self.coeffs().to_vec();
        for i in 0..n {
            for j in 0..n {
                if !g.keeps_mode(i, j) {
                    c[i * n + j] = Complex64::new(0.0, 0.0);
                }
            }
        }
        Self::from_coeffs(g, c).expect("same grid")
    }

    /// Applies a Fourier multiplier.
    pub fn derivative(&self, op: DerivativeOp) -> Result<Self> {
        if op == DerivativeOp::InverseNegLaplacian {
            self.require_mean_zero()?;
        }
        let g = self.grid;
        let n = g.n();
        let src = self.coeffs();
        let mut c = vec![Complex64::new(0.0, 0.0); g.len()];
        for i in 0..n {
            for j in 0..n {
                let idx = i * n + j;
                let m = match op {
                    DerivativeOp::Grad1 => Complex64::new(0.0, g.angular_odd(i)),
                    DerivativeOp::Grad2 => Complex64::new(0.0, g.angular_odd(j)),
                    DerivativeOp::Laplacian => {
                        let (a, b) = (g.angular(i), g.angular(j));
                        Complex64::new(-(a * a + b * b), 0.0)
                    }
                    DerivativeOp::InverseNegLaplacian => {
                        let (a, b) = (g.angular(i), g.angular(j));
                        let k2 = a * a + b * b;
                        if k2 == 0.0 {
                            Complex64::new(0.0, 0.0)
                        } else {
                            Complex64::new(1.0 / k2, 0.0)
                        }
                    }
                };
                c[idx] = src[idx] * m;
            }
        }
        Self::from_coeffs(g, c)
    }

    /// Value at an arbitrary point, wrapped periodically.
    pub fn sample_at(&self, x: [f64; 2], interp: Interpolation) -> f64 {
        match interp {
            Interpolation::Spectral => self.sample_spectral(x),
            _ => sample_values(&self.values, self.grid, x, interp),
        }
    }

    fn sample_spectral(&self, x: [f64; 2]) -> f64 {
        spectral_eval(self.coeffs(), self.grid, x)
    }

    /// Sum of squared coefficient moduli times the cell measure (Parseval).
    pub fn parseval_l2_squared(&self) -> f64 {
        let area = self.grid.length() * self.grid.length();
        self.coeffs().iter().map(|z| z.norm_sqr()).sum::<f64>() * area
    }
}

pub(crate) fn lp_norm_of(values: &[f64], cell_area: f64, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::BadExponent(p));
    }
    if p.is_infinite() {
        return Ok(values.iter().fold(0.0, |m, v| m.max(v.abs())));
    }
    let sum: f64 = if p == 1.0 {
        values.iter().map(|v| v.abs()).sum()
    } else if p == 2.0 {
        values.iter().map(|v| v * v).sum()
    } else {
        values.iter().map(|v| v.abs().powf(p)).sum()
    };
    Ok((sum * cell_area).powf(1.0 / p))
}
