//! Quantitative functionals and inequality checks for the inviscid limit:
//! the `q_eps` stability functional, the Osgood bound, rate fits,
//! renormalization defects, cutoffs and tails, and the enstrophy/energy
//! chain.

mod bounds;
mod fit;
mod osgood;
mod renorm;
mod stability;

pub use bounds::{
    energy_drop_check, energy_margins, enstrophy_bound_check, enstrophy_margins,
    EnergyMargin, EnstrophyMargin,
};
pub use fit::{fit_rate, FitMode, RateFit};
pub use osgood::{osgood_bound, osgood_inverse, osgood_modulus};
pub use renorm::{
    beta_integral, make_cutoff, renormalization_defect, tail_mass, translation_modulus, Beta,
    Cutoff,
};
pub use stability::{choose_eps, l1l1_velocity_distance, q_eps, stability_report, StabilityReport};
