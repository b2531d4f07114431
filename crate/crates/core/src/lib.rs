//! Numerical machinery for two-dimensional incompressible vorticity dynamics.
//!
//! The crate is organised by subsystem:
//!
//! * [`spectral`]: periodic grids, Fourier transforms, differential operators,
//!   the periodic Biot–Savart inversion, norms and point sampling.
//! * [`solver`]: pseudo-spectral time integration of the vorticity equation
//!   (Euler for `nu = 0`, Navier–Stokes otherwise) and of linear
//!   advection–diffusion with a frozen carrier.
//! * [`flows`]: deterministic and stochastic backward characteristics, the
//!   Lagrangian and Feynman–Kac vorticity reconstructions, and
//!   measure-preservation diagnostics.
//! * [`metrics`]: stability functionals, the Osgood bound, rate fitting,
//!   renormalization defects and the enstrophy/energy inequality checks.
//! * [`freespace`]: whole-plane Biot–Savart via zero-padded convolution, the
//!   near/far kernel split and the Serfati velocity identity.

pub mod error;
pub mod flows;
pub mod freespace;
pub mod metrics;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use spectral::{
    biot_savart, curl, DerivativeOp, Grid, Interpolation, SpectralField, VelocityField,
};
