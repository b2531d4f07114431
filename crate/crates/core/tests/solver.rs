mod common;

use common::{rel_l2, smooth_field};
use inviscid_core::solver::{
    enstrophy, solve_linear_advection_diffusion, solve_nse, step_vorticity, SolverSettings,
    Trajectory,
};
use inviscid_core::{biot_savart, Error, Grid, SpectralField, VelocityField};
use std::f64::consts::PI;

fn taylor_green(g: Grid, a: f64) -> SpectralField {
    SpectralField::from_fn(g, |x, y| a * (2.0 * PI * x).sin() * (2.0 * PI * y).sin())
}

#[test]
fn taylor_green_single_step_is_exact() {
    let g = Grid::torus(32).unwrap();
    let (a, nu, dt) = (3.0, 0.05, 1e-3);
    let w = taylor_green(g, a);
    let next = step_vorticity(&w, nu, dt).unwrap();
    let exact = taylor_green(g, a * (-8.0 * PI * PI * nu * dt).exp());
    assert!(rel_l2(&next, &exact) < 1e-12);
}

#[test]
fn shear_mode_is_steady_for_euler() {
    let g = Grid::torus(32).unwrap();
    let w = SpectralField::from_fn(g, |x, _| (2.0 * PI * x).sin());
    let next = step_vorticity(&w, 0.0, 1e-2).unwrap();
    assert!(rel_l2(&next, &w) < 1e-12);
}

#[test]
fn zero_step_is_identity() {
    let g = Grid::torus(16).unwrap();
    let w = smooth_field(g, 1, 3, 1.0);
    assert_eq!(step_vorticity(&w, 0.1, 0.0).unwrap().values(), w.values());
}

#[test]
fn step_rejects_nonzero_mean_and_cfl_violation() {
    let g = Grid::torus(16).unwrap();
    let c = SpectralField::constant(g, 1.0);
    assert!(matches!(step_vorticity(&c, 0.0, 1e-3), Err(Error::NonZeroMean { .. })));
    let w = smooth_field(g, 2, 2, 50.0);
    assert!(matches!(step_vorticity(&w, 0.0, 1.0), Err(Error::CflViolation { .. })));
}

#[test]
fn taylor_green_decay_over_time() {
    let g = Grid::torus(64).unwrap();
    let nu = 1e-2;
    let traj = solve_nse(&taylor_green(g, 1.0), nu, 0.5, SolverSettings::new(1e-3).with_checkpoint_every(100)).unwrap();
    assert_eq!(traj.times().len(), 6);
    for (t, f) in traj.times().iter().zip(traj.frames()) {
        let exact = taylor_green(g, (-8.0 * PI * PI * nu * t).exp());
        assert!(rel_l2(f, &exact) <= 1e-8, "t = {t}");
    }
}

#[test]
fn zero_horizon_keeps_initial_frame() {
    let g = Grid::torus(16).unwrap();
    let w = smooth_field(g, 3, 3, 1.0);
    let traj = solve_nse(&w, 0.0, 0.0, SolverSettings::new(0.01)).unwrap();
    assert_eq!(traj.times(), &[0.0]);
    assert_eq!(traj.frame(0).values(), w.values());
}

#[test]
fn euler_conserves_enstrophy_and_lp_norms() {
    let g = Grid::torus(128).unwrap();
    let w = smooth_field(g, 4, 4, 2.0);
    let traj = solve_nse(&w, 0.0, 1.0, SolverSettings::new(5e-3).with_checkpoint_every(20)).unwrap();
    let z0 = w.lp_norm(2.0).unwrap();
    for f in traj.frames() {
        assert!((f.lp_norm(2.0).unwrap() - z0).abs() / z0 <= 1e-6);
        for p in [1.0, 4.0, f64::INFINITY] {
            let n0 = w.lp_norm(p).unwrap();
            assert!((f.lp_norm(p).unwrap() - n0).abs() / n0 <= 2e-2, "p = {p}");
        }
        assert!(f.mean().abs() < 1e-12);
    }
}

#[test]
fn viscous_norms_and_energy_are_nonincreasing() {
    let g = Grid::torus(64).unwrap();
    let nu = 5e-3;
    let w = smooth_field(g, 5, 4, 2.0);
    let traj = solve_nse(&w, nu, 0.5, SolverSettings::new(5e-3).with_checkpoint_every(5)).unwrap();
    for i in 1..traj.len() {
        let (a, b) = (traj.frame(i - 1), traj.frame(i));
        for p in [1.0, 2.0, 4.0, f64::INFINITY] {
            assert!(b.lp_norm(p).unwrap() <= a.lp_norm(p).unwrap() * (1.0 + 1e-9), "p = {p}");
        }
        assert!(traj.energy(i).unwrap() <= traj.energy(i - 1).unwrap());
    }
}

#[test]
fn discrete_energy_balance() {
    let g = Grid::torus(64).unwrap();
    let nu = 1e-2;
    let w = smooth_field(g, 6, 3, 2.0);
    let traj = solve_nse(&w, nu, 0.2, SolverSettings::new(2e-3)).unwrap();
    let mut worst: f64 = 0.0;
    for i in 1..traj.len() - 1 {
        let dedt = (traj.energy(i + 1).unwrap() - traj.energy(i - 1).unwrap())
            / (traj.times()[i + 1] - traj.times()[i - 1]);
        let dissipation = 2.0 * nu * enstrophy(traj.frame(i));
        worst = worst.max((dedt + dissipation).abs() / dissipation);
    }
    assert!(worst < 1e-4, "relative balance defect {worst}");
}

#[test]
fn time_integrator_is_fourth_order() {
    let g = Grid::torus(32).unwrap();
    let w = smooth_field(g, 7, 3, 4.0);
    let run = |dt: f64| solve_nse(&w, 1e-3, 0.4, SolverSettings::new(dt).with_checkpoint_every(100_000)).unwrap().last().clone();
    let reference = run(0.0025);
    let e1 = rel_l2(&run(0.04), &reference);
    let e2 = rel_l2(&run(0.02), &reference);
    let ratio = e1 / e2;
    assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn taylor_green_enstrophy_and_zero_energy() {
    let g = Grid::torus(32).unwrap();
    let a = 1.7;
    assert!((enstrophy(&taylor_green(g, a)) - a * a / 4.0).abs() < 1e-12);
    assert_eq!(VelocityField::zeros(g).energy(), 0.0);
    let u = biot_savart(&taylor_green(g, a)).unwrap();
    assert!((u.energy() - a * a / 4.0 / (8.0 * PI * PI)).abs() < 1e-12);
}

#[test]
fn heat_eigenmode_with_zero_carrier() {
    let g = Grid::torus(32).unwrap();
    let nu = 0.02;
    let carrier = Trajectory::steady(VelocityField::zeros(g), vec![0.0, 1.0]).unwrap();
    let rho0 = SpectralField::from_fn(g, |x, _| (2.0 * PI * x).sin());
    let out = solve_linear_advection_diffusion(&rho0, &carrier, nu, 1.0, SolverSettings::new(0.01).with_checkpoint_every(25)).unwrap();
    for (t, f) in out.times().iter().zip(out.frames()) {
        let exact = rho0.scale((-4.0 * PI * PI * nu * t).exp());
        assert!(rel_l2(f, &exact) < 1e-12);
    }
}

#[test]
fn uniform_translation_transports_exactly() {
    let g = Grid::torus(64).unwrap();
    let carrier = Trajectory::steady(VelocityField::uniform(g, [1.0, 0.0]), vec![0.0, 0.5]).unwrap();
    let rho0 = smooth_field(g, 8, 5, 1.0).map(|v| v + 0.3);
    let out = solve_linear_advection_diffusion(&rho0, &carrier, 0.0, 0.5, SolverSettings::new(5e-4)).unwrap();
    let t = 0.5;
    let exact = SpectralField::from_fn(g, |x, y| {
        rho0.sample_at([x - t, y], inviscid_core::Interpolation::Spectral)
    });
    assert!(rel_l2(out.last(), &exact) < 1e-8);
    assert!((out.last().mean() - rho0.mean()).abs() < 1e-12);
}

#[test]
fn constants_are_invariant_under_transport() {
    let g = Grid::torus(32).unwrap();
    let carrier = solve_nse(&smooth_field(g, 9, 3, 2.0), 0.0, 0.3, SolverSettings::new(0.01)).unwrap();
    let c = SpectralField::constant(g, 2.5);
    let out = solve_linear_advection_diffusion(&c, &carrier, 0.01, 0.3, SolverSettings::new(0.01)).unwrap();
    for f in out.frames() {
        assert!(f.values().iter().all(|v| (v - 2.5).abs() < 1e-12));
    }
}

#[test]
fn linear_solver_rejects_horizon_past_carrier() {
    let g = Grid::torus(16).unwrap();
    let carrier = Trajectory::steady(VelocityField::zeros(g), vec![0.0, 0.5]).unwrap();
    let rho0 = SpectralField::constant(g, 1.0);
    assert!(matches!(
        solve_linear_advection_diffusion(&rho0, &carrier, 0.0, 1.0, SolverSettings::new(0.01)),
        Err(Error::TimeRangeExceeded { .. })
    ));
}

#[test]
fn passive_transport_conserves_lp_norms_without_diffusion() {
    let g = Grid::torus(64).unwrap();
    let carrier = solve_nse(&smooth_field(g, 10, 2, 1.0), 0.0, 0.5, SolverSettings::new(0.01)).unwrap();
    let rho0 = smooth_field(g, 11, 3, 1.0);
    let out = solve_linear_advection_diffusion(&rho0, &carrier, 0.0, 0.5, SolverSettings::new(0.005)).unwrap();
    let n0 = rho0.lp_norm(2.0).unwrap();
    assert!((out.last().lp_norm(2.0).unwrap() - n0).abs() / n0 < 1e-6);
}
