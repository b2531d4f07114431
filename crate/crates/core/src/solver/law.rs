use crate::error::Result;
use crate::spectral::{biot_savart, Fft2, Grid, SpectralField, VelocityField};
use crate::spectral::velocity_coeffs;
use num_complex::Complex64;
use std::fmt::Debug;

/// Recovers the velocity from the vorticity on a given grid.
///
/// The stepper only needs physical velocity values; implementations decide how
/// to compute them (periodic multipliers on the torus, padded convolution in
/// free space).
pub trait VelocityLaw: Send + Sync + Debug {
    fn grid(&self) -> Grid;

    /// Physical velocity components from vorticity coefficients.
    fn velocity_values(&self, omega_hat: &[Complex64], fft: &mut Fft2) -> (Vec<f64>, Vec<f64>);

    fn velocity(&self, omega: &SpectralField) -> Result<VelocityField>;

    /// Kinetic energy of the velocity induced by `omega`.
    fn energy(&self, omega: &SpectralField) -> Result<f64> {
        Ok(self.velocity(omega)?.energy())
    }
}

/// Periodic Biot–Savart law on the unit torus.
#[derive(Debug, Clone, Copy)]
pub struct TorusLaw {
    pub grid: Grid,
}

impl VelocityLaw for TorusLaw {
    fn grid(&self) -> Grid {
        self.grid
    }

    fn velocity_values(&self, omega_hat: &[Complex64], fft: &mut Fft2) -> (Vec<f64>, Vec<f64>) {
        let (c1, c2) = velocity_coeffs(self.grid, omega_hat);
        let (mut u1, mut u2) = (vec![0.0; self.grid.len()], vec![0.0; self.grid.len()]);
        let mut buf = Vec::with_capacity(self.grid.len());
        fft.inverse_pair(&c1, &c2, &mut buf, &mut u1, &mut u2);
        (u1, u2)
    }

    fn velocity(&self, omega: &SpectralField) -> Result<VelocityField> {
        biot_savart(omega)
    }
}
