#![allow(dead_code)]

use inviscid_lab::{Checks, DatumSpec, Exponent, LadderConfig};

/// Small torus ladder that runs in well under a second.
pub fn small_config() -> LadderConfig {
    let mut c = LadderConfig::torus(
        DatumSpec::new("random-smooth").with("seed", 5.0),
        vec![1e-2, 3e-3, 1e-3],
        0.1,
        16,
        0.01,
    );
    c.checkpoints = 5;
    c.p_list = vec![Exponent(1.0), Exponent(2.0), Exponent(f64::INFINITY)];
    c
}

pub fn all_checks() -> Checks {
    Checks {
        errors: true,
        energy: true,
        enstrophy: true,
        flows: true,
        renormalization: true,
        enstrophy_bound: true,
        energy_bound: true,
        resolution_doubling: true,
    }
}
