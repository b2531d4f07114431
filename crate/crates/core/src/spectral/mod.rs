//! Periodic grids, Fourier transforms and the spectral operators built on them.

mod container;
mod fft;
mod field;
mod grid;
mod interp;
mod velocity;

pub use container::{read_container, read_containers, write_container, PayloadKind, MAGIC};
pub use fft::Fft2;
pub use field::{DerivativeOp, SpectralField};
pub use grid::Grid;
pub use interp::{sample_values, Interpolation};
pub use velocity::{biot_savart, curl, VelocityField};
pub(crate) use velocity::biot_savart_coeffs as velocity_coeffs;

/// Absolute tolerance on the mean of a field that must be mean-zero.
pub const MEAN_ZERO_TOL: f64 = 1e-10;
