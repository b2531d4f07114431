use super::fft::Fft2;
use super::field::SpectralField;
use super::grid::Grid;
use super::interp::{sample_values, Interpolation};
use crate::error::{Error, Result};
use num_complex::Complex64;

/// Planar vector field stored as two scalar components on a shared grid.
#[derive(Debug, Clone)]
pub struct VelocityField {
    pub u1: SpectralField,
    pub u2: SpectralField,
}

impl VelocityField {
    pub fn new(u1: SpectralField, u2: SpectralField) -> Result<Self> {
        if u1.grid() != u2.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { u1, u2 })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            u1: SpectralField::zeros(grid),
            u2: SpectralField::zeros(grid),
        }
    }

    /// Uniform field `(c1, c2)`.
    pub fn uniform(grid: Grid, c: [f64; 2]) -> Self {
        Self {
            u1: SpectralField::constant(grid, c[0]),
            u2: SpectralField::constant(grid, c[1]),
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> [f64; 2]) -> Self {
        Self {
            u1: SpectralField::from_fn(grid, |x, y| f(x, y)[0]),
            u2: SpectralField::from_fn(grid, |x, y| f(x, y)[1]),
        }
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.u1.grid()
    }

    #[inline]
    pub fn sample(&self, x: [f64; 2], interp: Interpolation) -> [f64; 2] {
        [
            sample_values(self.u1.values(), self.grid(), x, interp),
            sample_values(self.u2.values(), self.grid(), x, interp),
        ]
    }

    /// `||u||_2` with the Euclidean pointwise norm.
    pub fn l2_norm(&self) -> f64 {
        self.energy().sqrt()
    }

    /// `||u||_2^2`.
    pub fn energy(&self) -> f64 {
        let s: f64 = self
            .u1
            .values()
            .iter()
            .zip(self.u2.values())
            .map(|(a, b)| a * a + b * b)
            .sum();
        s * self.grid().cell_area()
    }

    /// `||u||_1` with the Euclidean pointwise norm.
    pub fn l1_norm(&self) -> f64 {
        let s: f64 = self
            .u1
            .values()
            .iter()
            .zip(self.u2.values())
            .map(|(a, b)| a.hypot(*b))
            .sum();
        s * self.grid().cell_area()
    }

    pub fn max_speed(&self) -> f64 {
        self.u1
            .values()
            .iter()
            .zip(self.u2.values())
            .fold(0.0, |m, (a, b)| m.max(a.hypot(*b)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            u1: self.u1.sub(&other.u1)?,
            u2: self.u2.sub(&other.u2)?,
        })
    }

    /// Spectral divergence `d1 u1 + d2 u2`.
    pub fn divergence(&self) -> SpectralField {
        let g = self.grid();
        let n = g.n();
        let (c1, c2) = (self.u1.coeffs(), self.u2.coeffs());
        let mut c = vec![Complex64::new(0.0, 0.0); g.len()];
        for i in 0..n {
            for j in 0..n {
                let idx = i * n + j;
                c[idx] = Complex64::new(0.0, g.angular_odd(i)) * c1[idx]
                    + Complex64::new(0.0, g.angular_odd(j)) * c2[idx];
            }
        }
        SpectralField::from_coeffs(g, c).expect("same grid")
    }
}

/// Periodic Biot–Savart law `u = grad_perp (-Delta)^{-1} omega` with
/// `grad_perp = (d2, -d1)`, the orientation for which `curl u = omega`.
pub fn biot_savart(omega: &SpectralField) -> Result<VelocityField> {
    omega.require_mean_zero()?;
    let g = omega.grid();
    let (c1, c2) = biot_savart_coeffs(g, omega.coeffs());
    let mut fft = Fft2::new(g.n());
    let (mut v1, mut v2) = (vec![0.0; g.len()], vec![0.0; g.len()]);
    let mut buf = Vec::with_capacity(g.len());
    fft.inverse_pair(&c1, &c2, &mut buf, &mut v1, &mut v2);
    Ok(VelocityField {
        u1: SpectralField::from_values(g, v1)?,
        u2: SpectralField::from_values(g, v2)?,
    })
}

/// Coefficients of the Biot–Savart velocity; the zero mode is dropped.
pub(crate) fn biot_savart_coeffs(
    g: Grid,
    omega_hat: &[Complex64],
) -> (Vec<Complex64>, Vec<Complex64>) {
    let n = g.n();
    let zero = Complex64::new(0.0, 0.0);
    let mut c1 = vec![zero; g.len()];
    let mut c2 = vec![zero; g.len()];
    for i in 0..n {
        let a = g.angular(i);
        let ao = g.angular_odd(i);
        for j in 0..n {
            let b = g.angular(j);
            let k2 = a * a + b * b;
            if k2 == 0.0 {
                continue;
            }
            let idx = i * n + j;
            let psi = omega_hat[idx] / k2;
            c1[idx] = Complex64::new(0.0, g.angular_odd(j)) * psi;
            c2[idx] = Complex64::new(0.0, -ao) * psi;
        }
    }
    (c1, c2)
}

/// Scalar curl `d1 u2 - d2 u1`, computed spectrally (mean-zero by construction).
pub fn curl(u: &VelocityField) -> Result<SpectralField> {
    if u.u1.grid() != u.u2.grid() {
        return Err(Error::GridMismatch);
    }
    let g = u.grid();
    let n = g.n();
    let (c1, c2) = (u.u1.coeffs(), u.u2.coeffs());
    let mut c = vec![Complex64::new(0.0, 0.0); g.len()];
    for i in 0..n {
        for j in 0..n {
            let idx = i * n + j;
            c[idx] = Complex64::new(0.0, g.angular_odd(i)) * c2[idx]
                - Complex64::new(0.0, g.angular_odd(j)) * c1[idx];
        }
    }
    c[0] = Complex64::new(0.0, 0.0);
    SpectralField::from_coeffs(g, c)
}
