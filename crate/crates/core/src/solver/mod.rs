//! Pseudo-spectral time integration of the vorticity equation and of linear
//! advection–diffusion with a frozen carrier velocity.
//!
//! The nonlinear term is evaluated pseudo-spectrally with 2/3-rule
//! dealiasing; diffusion is integrated exactly by an integrating factor and
//! the remaining ODE is advanced with classical RK4.

mod law;
mod stepper;
mod trajectory;

pub use law::{TorusLaw, VelocityLaw};
pub use stepper::{
    solve_linear_advection_diffusion, solve_nse, solve_with_law, step_vorticity, SolverSettings,
};
pub use trajectory::{FrameKind, Trajectory};

use crate::spectral::{SpectralField, VelocityField};

/// Kinetic energy `||u||_2^2`.
pub fn energy(u: &VelocityField) -> f64 {
    u.energy()
}

/// Enstrophy `||omega||_2^2`.
pub fn enstrophy(omega: &SpectralField) -> f64 {
    let g = omega.grid();
    omega.values().iter().map(|v| v * v).sum::<f64>() * g.cell_area()
}
