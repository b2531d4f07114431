//! Backward Lagrangian flows (deterministic and stochastic), vorticity
//! reconstruction along them, and measure-preservation diagnostics.

mod ensemble;
mod integrate;
mod reconstruct;

pub use ensemble::{FlowEnsemble, SeedGrid};
pub use integrate::{
    integrate_backward_flow, integrate_backward_flow_with, integrate_stochastic_flow,
    integrate_stochastic_flow_with, FlowOptions,
};
pub use reconstruct::{
    feynman_kac_vorticity, lagrangian_vorticity, measure_preservation_defect,
    point_cloud_defect, FeynmanKac,
};

/// Shortest periodic representative of `a - b` in each coordinate.
#[inline]
pub fn torus_difference(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    let w = |d: f64| d - d.round();
    [w(a[0] - b[0]), w(a[1] - b[1])]
}

/// Geodesic distance on the unit torus.
#[inline]
pub fn geodesic_distance(x: [f64; 2], y: [f64; 2]) -> f64 {
    let d = torus_difference(x, y);
    d[0].hypot(d[1])
}

/// Wraps a point into `[0, 1)^2`.
#[inline]
pub fn wrap_point(x: [f64; 2]) -> [f64; 2] {
    let w = |v: f64| {
        let r = v.rem_euclid(1.0);
        if r >= 1.0 {
            0.0
        } else {
            r
        }
    };
    [w(x[0]), w(x[1])]
}
