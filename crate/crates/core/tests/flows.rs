mod common;

use common::smooth_field;
use inviscid_core::flows::{
    feynman_kac_vorticity, geodesic_distance, integrate_backward_flow,
    integrate_backward_flow_with, integrate_stochastic_flow, lagrangian_vorticity,
    measure_preservation_defect, point_cloud_defect, torus_difference, FlowOptions, SeedGrid,
};
use inviscid_core::solver::{solve_nse, SolverSettings, Trajectory};
use inviscid_core::{Error, Grid, Interpolation, SpectralField, VelocityField};
use proptest::prelude::*;
use std::f64::consts::PI;

fn literal_distance(x: [f64; 2], y: [f64; 2]) -> f64 {
    let mut best = f64::INFINITY;
    for k1 in -2i32..=2 {
        for k2 in -2i32..=2 {
            if k1 * k1 + k2 * k2 > 4 {
                continue;
            }
            let d = (x[0] - y[0] - k1 as f64).hypot(x[1] - y[1] - k2 as f64);
            best = best.min(d);
        }
    }
    best
}

fn zero_carrier(n: usize, t_end: f64, dt: f64) -> Trajectory {
    let g = Grid::torus(n).unwrap();
    let steps = (t_end / dt).round() as usize;
    let times = (0..=steps).map(|k| k as f64 * dt).collect();
    Trajectory::steady(VelocityField::zeros(g), times).unwrap()
}

fn shear_carrier(n: usize, t_end: f64, dt: f64) -> Trajectory {
    let g = Grid::torus(n).unwrap();
    let w = SpectralField::from_fn(g, |x, _| (2.0 * PI * x).sin());
    solve_nse(&w, 0.0, t_end, SolverSettings::new(dt)).unwrap()
}

#[test]
fn geodesic_examples() {
    assert_eq!(geodesic_distance([0.3, 0.7], [0.3, 0.7]), 0.0);
    assert!((geodesic_distance([0.05, 0.0], [0.95, 0.0]) - 0.1).abs() < 1e-15);
    assert!((geodesic_distance([0.0, 0.0], [0.5, 0.5]) - 0.5f64.sqrt()).abs() < 1e-15);
}

proptest! {
    #[test]
    fn geodesic_matches_shift_minimum(a in prop::array::uniform4(0.0f64..1.0)) {
        let (x, y) = ([a[0], a[1]], [a[2], a[3]]);
        let d = geodesic_distance(x, y);
        prop_assert!((d - literal_distance(x, y)).abs() < 1e-14);
        prop_assert!((d - geodesic_distance(y, x)).abs() < 1e-15);
        prop_assert!(d <= 0.5f64.sqrt() + 1e-15);
        let v = torus_difference(x, y);
        prop_assert!(v[0].abs() <= 0.5 && v[1].abs() <= 0.5);
    }
}

#[test]
fn zero_carrier_flow_is_identity() {
    let carrier = zero_carrier(16, 0.5, 0.05);
    let seeds = SeedGrid::new(8).unwrap();
    let flow = integrate_backward_flow(&carrier, 0.4, seeds).unwrap();
    assert_eq!(flow.s_values(), &[0.4, 0.0]);
    for (k, p) in flow.endpoints().iter().enumerate() {
        assert_eq!(*p, seeds.point(k));
    }
}

#[test]
fn release_at_zero_keeps_seeds() {
    let carrier = shear_carrier(16, 0.2, 0.01);
    let seeds = SeedGrid::new(8).unwrap();
    let det = integrate_backward_flow(&carrier, 0.0, seeds).unwrap();
    let sto = integrate_stochastic_flow(&carrier, 0.0, 0.5, seeds, 3, 9).unwrap();
    for k in 0..seeds.len() {
        assert_eq!(det.endpoints()[k], seeds.point(k));
        for r in 0..3 {
            assert_eq!(sto.endpoints()[k * 3 + r], seeds.point(k));
        }
    }
}

#[test]
fn flows_reject_times_past_the_carrier() {
    let carrier = zero_carrier(16, 0.5, 0.05);
    let seeds = SeedGrid::new(8).unwrap();
    assert!(matches!(
        integrate_backward_flow(&carrier, 0.7, seeds),
        Err(Error::TimeRangeExceeded { .. })
    ));
    assert!(matches!(
        integrate_stochastic_flow(&carrier, 0.2, 0.0, seeds, 1, 0),
        Err(Error::BadParams(_))
    ));
}

#[test]
fn shear_flow_has_closed_form() {
    let (t, s) = (0.6, 0.25);
    let carrier = shear_carrier(64, t, 0.01);
    let seeds = SeedGrid::new(16).unwrap();
    let opts = FlowOptions {
        store_s: vec![s],
        interp: Interpolation::Cubic,
    };
    let flow = integrate_backward_flow_with(&carrier, t, seeds, &opts).unwrap();
    for (time, pts) in [(s, flow.positions_at(s).unwrap()), (0.0, flow.endpoints())] {
        for (k, p) in pts.iter().enumerate() {
            let x = seeds.point(k);
            let c = (2.0 * PI * x[0]).cos() / (2.0 * PI);
            let exact = [x[0], x[1] + (t - time) * c];
            assert!(geodesic_distance(*p, exact) < 1e-7, "s = {time}");
        }
    }
}

#[test]
fn lagrangian_reconstruction_examples() {
    let seeds = SeedGrid::new(16).unwrap();
    let g = Grid::torus(16).unwrap();
    let w0 = smooth_field(g, 1, 3, 1.0);
    let flow = integrate_backward_flow(&zero_carrier(16, 0.3, 0.05), 0.3, seeds).unwrap();
    let w = lagrangian_vorticity(&w0, &flow, Interpolation::Bilinear).unwrap();
    assert_eq!(w.values(), w0.values());

    let shear0 = SpectralField::from_fn(Grid::torus(64).unwrap(), |x, _| (2.0 * PI * x).sin());
    let carrier = shear_carrier(64, 0.5, 0.01);
    let flow = integrate_backward_flow(&carrier, 0.5, seeds).unwrap();
    let w = lagrangian_vorticity(&shear0, &flow, Interpolation::Cubic).unwrap();
    let exact = SpectralField::from_fn(g, |x, _| (2.0 * PI * x).sin());
    assert!(w.sub(&exact).unwrap().max_abs() < 1e-6);

    let sto = integrate_stochastic_flow(&carrier, 0.1, 0.01, seeds, 2, 1).unwrap();
    assert!(matches!(
        lagrangian_vorticity(&shear0, &sto, Interpolation::Bilinear),
        Err(Error::StochasticFlowNotAllowed)
    ));
    assert!(matches!(
        feynman_kac_vorticity(&shear0, &flow, Interpolation::Bilinear),
        Err(Error::DeterministicFlowNotAllowed)
    ));
}

#[test]
fn lagrangian_matches_spectral_euler() {
    let g = Grid::torus(64).unwrap();
    let w0 = smooth_field(g, 2, 3, 3.0);
    let carrier = solve_nse(&w0, 0.0, 0.5, SolverSettings::new(5e-3)).unwrap();
    let seeds = SeedGrid::new(16).unwrap();
    let opts = FlowOptions {
        interp: Interpolation::Cubic,
        ..Default::default()
    };
    let flow = integrate_backward_flow_with(&carrier, 0.5, seeds, &opts).unwrap();
    let lag = lagrangian_vorticity(&w0, &flow, Interpolation::Cubic).unwrap();
    let spec = SpectralField::from_fn(seeds.grid(), |x, y| {
        carrier.last().sample_at([x, y], Interpolation::Cubic)
    });
    let rel = lag.sub(&spec).unwrap().lp_norm(2.0).unwrap() / spec.lp_norm(2.0).unwrap();
    assert!(rel < 1e-4, "relative L2 gap {rel}");
}

fn pooled_displacements(flow: &inviscid_core::flows::FlowEnsemble) -> Vec<f64> {
    flow.unwrapped_endpoints()
        .iter()
        .enumerate()
        .flat_map(|(k, p)| {
            let x = flow.seed_of(k);
            [p[0] - x[0], p[1] - x[1]]
        })
        .collect()
}

fn sample_variance(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64
}

#[test]
fn brownian_displacement_variance_and_scaling() {
    let t = 0.5;
    let carrier = zero_carrier(16, t, 0.05);
    let seeds = SeedGrid::new(8).unwrap();
    let m = 800;
    let mut variances = Vec::new();
    for nu in [0.01, 0.02] {
        let flow = integrate_stochastic_flow(&carrier, t, nu, seeds, m, 42).unwrap();
        let d = pooled_displacements(&flow);
        let var = sample_variance(&d);
        let exact = 2.0 * nu * t;
        let se = exact * (2.0 / (d.len() - 1) as f64).sqrt();
        assert!((var - exact).abs() < 5.0 * se, "nu = {nu}: {var} vs {exact}");
        variances.push(var);
    }
    let ratio = variances[1] / variances[0];
    assert!((ratio - 2.0).abs() < 0.05, "ratio {ratio}");
}

#[test]
fn stochastic_flow_is_deterministic_across_threads() {
    let carrier = shear_carrier(32, 0.2, 0.01);
    let seeds = SeedGrid::new(16).unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| integrate_stochastic_flow(&carrier, 0.2, 0.01, seeds, 5, 1234).unwrap())
    };
    let a = run(1);
    let b = run(3);
    assert_eq!(a, b);
    let c = integrate_stochastic_flow(&carrier, 0.2, 0.01, seeds, 1, 77).unwrap();
    let d = integrate_stochastic_flow(&carrier, 0.2, 0.01, seeds, 1, 77).unwrap();
    let bits = |f: &inviscid_core::flows::FlowEnsemble| {
        f.unwrapped_endpoints()
            .iter()
            .flat_map(|p| [p[0].to_bits(), p[1].to_bits()])
            .collect::<Vec<_>>()
    };
    assert_eq!(bits(&c), bits(&d));
    let e = integrate_stochastic_flow(&carrier, 0.2, 0.01, seeds, 1, 78).unwrap();
    assert_ne!(bits(&c), bits(&e));
}

#[test]
fn feynman_kac_reproduces_heat_decay() {
    let (nu, t) = (1e-2, 0.2);
    let carrier = zero_carrier(16, t, 0.01);
    let seeds = SeedGrid::new(8).unwrap();
    let g = Grid::torus(64).unwrap();
    let w0 = SpectralField::from_fn(g, |x, _| (2.0 * PI * x).sin());
    let flow = integrate_stochastic_flow(&carrier, t, nu, seeds, 10_000, 5).unwrap();
    let fk = feynman_kac_vorticity(&w0, &flow, Interpolation::Cubic).unwrap();
    let decay = (-4.0 * PI * PI * nu * t).exp();
    let exact = SpectralField::from_fn(seeds.grid(), |x, _| decay * (2.0 * PI * x).sin());
    let err = fk.mean.sub(&exact).unwrap().lp_norm(2.0).unwrap();
    assert!(err <= 5.0 * fk.mean_std_error() + 1e-3, "{err}");
}

#[test]
fn measure_preservation_examples() {
    let seeds = SeedGrid::new(32).unwrap();
    let id = integrate_backward_flow(&zero_carrier(16, 0.1, 0.05), 0.1, seeds).unwrap();
    assert_eq!(measure_preservation_defect(&id, 16), 0.0);

    let g = Grid::torus(16).unwrap();
    let times = (0..=10).map(|k| k as f64 * 0.01).collect();
    let carrier = Trajectory::steady(VelocityField::uniform(g, [0.37, -0.21]), times).unwrap();
    let moved = integrate_backward_flow(&carrier, 0.1, seeds).unwrap();
    assert!(measure_preservation_defect(&moved, 16) < 1e-12);

    let n = 1000;
    let squashed = (0..n * n).map(|k| {
        let x = ((k / n) as f64 + 0.5) / n as f64;
        let y = ((k % n) as f64 + 0.5) / n as f64;
        [x * x, y]
    });
    // pushforward density 1/(2 sqrt(y)) puts mass 1/4 in the first column of cells
    assert!(point_cloud_defect(squashed, 16) > 0.5);
}
