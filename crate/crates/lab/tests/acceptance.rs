//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so that every line is printed. The
//! process exits nonzero if any criterion fails.

use anyhow::{ensure, Context, Result};
use inviscid_core::flows::{
    feynman_kac_vorticity, integrate_backward_flow_with, integrate_stochastic_flow,
    integrate_stochastic_flow_with, measure_preservation_defect, FlowOptions, SeedGrid,
};
use inviscid_core::metrics::{beta_integral, osgood_bound, renormalization_defect, Beta};
use inviscid_core::solver::{solve_nse, SolverSettings, Trajectory};
use inviscid_core::{Grid, Interpolation, SpectralField, VelocityField};
use inviscid_lab::report::csv_string;
use inviscid_lab::{
    initial_datum, run_ladder_with_threads, run_serfati, Checks, ConvergenceReport, DatumSpec, Domain,
    Exponent, LadderConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

/// Relative L2 vorticity error of the Taylor-Green run.
const TG_REL_TOL: f64 = 1e-8;
/// Multiple of the mean standard error allowed in Monte Carlo comparisons.
const SE_FACTOR: f64 = 5.0;
/// Absolute floor of the heat/Feynman-Kac comparison.
const HEAT_FLOOR: f64 = 1e-3;
/// Multiple of the resolution-doubling discrepancy allowed in the
/// two-route and renormalization comparisons.
const DOUBLING_FACTOR: f64 = 3.0;
/// Largest relative cell-count deviation of the Euler flow endpoints.
const CELL_TOL: f64 = 0.05;
/// Smallest allowed `bound - oracle` in the Osgood comparison.
const OSGOOD_SLACK: f64 = -1e-9;
/// Smallest log-log slope of the velocity error for bounded vorticity.
const MIN_SLOPE: f64 = 0.3;
/// Largest increase of the convex renormalized integral under viscosity.
const DRIFT_TOL: f64 = 1e-8;
/// Smallest relative margin of the enstrophy and energy inequalities.
const MARGIN_TOL: f64 = -1e-6;
/// Required reduction of the Serfati residual from `n = 256` to `n = 512`.
const SERFATI_RATIO: f64 = 2.0;

const LADDER: [f64; 4] = [1e-2, 3e-3, 1e-3, 3e-4];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Option<Duration>,
    run: fn() -> Result<Outcome>,
}

fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

fn smooth_datum(seed: f64) -> DatumSpec {
    DatumSpec::new("random-smooth").with("seed", seed).with("amplitude", 2.0)
}

/// Values at the nodes of `coarse` of a field on the grid with twice as many
/// points per side.
fn restrict(fine: &SpectralField, coarse: Grid) -> SpectralField {
    let n = coarse.n();
    let f = fine.values();
    let v = (0..n)
        .flat_map(|i| (0..n).map(move |j| f[(2 * i) * (2 * n) + 2 * j]))
        .collect();
    SpectralField::from_values(coarse, v).expect("grid-sized")
}

fn c1_taylor_green() -> Result<Outcome> {
    let (nu, t) = (1e-2, 0.5);
    let g = Grid::torus(64)?;
    let w0 = SpectralField::from_fn(g, |x, y| (2.0 * PI * x).sin() * (2.0 * PI * y).sin());
    let traj = solve_nse(&w0, nu, t, SolverSettings::new(1e-3).with_checkpoint_every(500))?;
    let exact = w0.scale((-8.0 * PI * PI * nu * t).exp());
    let rel = traj.last().sub(&exact)?.lp_norm(2.0)? / exact.lp_norm(2.0)?;
    Ok(outcome(rel <= TG_REL_TOL, format!("relative L2 error {rel:.3e} <= {TG_REL_TOL:e}")))
}

fn c2_heat_feynman_kac() -> Result<Outcome> {
    let (nu, t) = (1e-2, 0.2);
    let zero = Grid::torus(16)?;
    let times = (0..=20).map(|k| k as f64 * 0.01).collect();
    let carrier = Trajectory::steady(VelocityField::zeros(zero), times)?;
    let seeds = SeedGrid::new(16)?;
    let g = Grid::torus(64)?;
    let w0 = SpectralField::from_fn(g, |x, _| (2.0 * PI * x).sin());
    let flow = integrate_stochastic_flow(&carrier, t, nu, seeds, 10_000, 11)?;
    let fk = feynman_kac_vorticity(&w0, &flow, Interpolation::Cubic)?;
    let decay = (-4.0 * PI * PI * nu * t).exp();
    let exact = SpectralField::from_fn(seeds.grid(), |x, _| decay * (2.0 * PI * x).sin());
    let err = fk.mean.sub(&exact)?.lp_norm(2.0)?;
    let tol = SE_FACTOR * fk.mean_std_error() + HEAT_FLOOR;
    Ok(outcome(err <= tol, format!("L2 distance {err:.3e} <= {tol:.3e}")))
}

fn c3_two_routes() -> Result<Outcome> {
    let (nu, t, dt) = (1e-3, 0.5, 2e-3);
    let spec = smooth_datum(7.0);
    let g = Grid::torus(128)?;
    let w0 = initial_datum(&spec, g, Domain::Torus)?.field;
    let nse = solve_nse(&w0, nu, t, SolverSettings::new(dt))?;
    let fine = initial_datum(&spec, Grid::torus(256)?, Domain::Torus)?.field;
    let nse_fine = solve_nse(&fine, nu, t, SolverSettings::new(0.5 * dt).with_checkpoint_every(1_000))?;
    let discrepancy = restrict(nse_fine.last(), g).sub(nse.last())?.lp_norm(2.0)?;

    let seeds = SeedGrid::new(16)?;
    let opts = FlowOptions {
        interp: Interpolation::Cubic,
        ..FlowOptions::default()
    };
    let flow = integrate_stochastic_flow_with(&nse, t, nu, seeds, 10_000, 23, &opts)?;
    let fk = feynman_kac_vorticity(&w0, &flow, Interpolation::Cubic)?;
    let stride = g.n() / seeds.n();
    let at_seeds = SpectralField::from_values(
        seeds.grid(),
        (0..seeds.len())
            .map(|k| nse.last().values()[(k / seeds.n()) * stride * g.n() + (k % seeds.n()) * stride])
            .collect(),
    )?;
    let dist = fk.mean.sub(&at_seeds)?.lp_norm(2.0)?;
    let sigma = fk.mean_std_error();
    let tol = SE_FACTOR * sigma + DOUBLING_FACTOR * discrepancy;
    Ok(outcome(
        dist <= tol,
        format!("L2 distance {dist:.3e} <= 5 sigma + 3 doubling = {tol:.3e} (sigma {sigma:.2e}, doubling {discrepancy:.2e})"),
    ))
}

fn c4_measure_preservation() -> Result<Outcome> {
    let t = 0.5;
    let g = Grid::torus(64)?;
    let w0 = initial_datum(&smooth_datum(3.0), g, Domain::Torus)?.field;
    let euler = solve_nse(&w0, 0.0, t, SolverSettings::new(5e-3))?;
    let seeds = SeedGrid::new(1024)?;
    let flow = integrate_backward_flow_with(&euler, t, seeds, &FlowOptions::default())?;
    let defect = measure_preservation_defect(&flow, 16);
    Ok(outcome(
        defect <= CELL_TOL,
        format!("{} endpoints, max relative cell deviation {defect:.3e} <= {CELL_TOL}", seeds.len()),
    ))
}

fn flow_checks() -> Checks {
    Checks {
        flows: true,
        ..Checks::default()
    }
}

/// Rows with a stability report must satisfy the Chebyshev step against the
/// threshold recomputed from the reported `eps`.
fn chebyshev_violations(rep: &ConvergenceReport) -> Result<(usize, usize)> {
    let (mut checked, mut bad) = (0, 0);
    for sup in &rep.summary.sup_errors {
        let eps = sup.flow_eps.context("flow eps missing")?;
        ensure!(eps >= sup.nu.sqrt(), "eps {eps} below sqrt(nu) for nu = {}", sup.nu);
        for row in rep.rows_for(sup.nu) {
            if let (Some(q), Some(m)) = (row.q_int, row.superlevel) {
                checked += 1;
                if m * (1.0 / eps).ln_1p() > q * (1.0 + 1e-12) {
                    bad += 1;
                }
            }
        }
    }
    Ok((checked, bad))
}

fn singular_torus_ladder() -> LadderConfig {
    let mut c = LadderConfig::torus(
        DatumSpec::new("lp-singular").with("alpha", 1.2).with("p", 1.3),
        LADDER.to_vec(),
        0.5,
        256,
        5e-4,
    );
    c.p_list = vec![Exponent(1.3)];
    c.checkpoints = 25;
    c.checks = Checks {
        errors: true,
        ..flow_checks()
    };
    c.replicas = 64;
    c.master_seed = 71;
    c.flow_times = vec![0.25, 0.5];
    c
}

fn smooth_torus_ladder() -> LadderConfig {
    let mut c = LadderConfig::torus(smooth_datum(3.0), LADDER.to_vec(), 1.0, 128, 2e-3);
    c.p_list = vec![Exponent(2.0)];
    c.checkpoints = 25;
    c.checks = Checks {
        errors: true,
        ..flow_checks()
    };
    c.replicas = 64;
    c.master_seed = 72;
    c.flow_times = vec![0.5, 1.0];
    c
}

type LadderRun = (std::result::Result<ConvergenceReport, String>, Duration);

/// Runs a ladder once; criteria 5, 7 and 8 share the runs.
fn shared_ladder(cell: &'static OnceLock<LadderRun>, config: fn() -> LadderConfig) -> Result<(&'static ConvergenceReport, Duration)> {
    let (rep, time) = cell.get_or_init(|| {
        let start = Instant::now();
        let rep = run_ladder_with_threads(&config(), 1).map_err(|e| e.to_string());
        (rep, start.elapsed())
    });
    let rep = rep.as_ref().map_err(|e| anyhow::anyhow!("ladder failed: {e}"))?;
    ensure!(rep.summary.complete, "ladder incomplete: {:?}", rep.summary.failure);
    Ok((rep, *time))
}

fn singular_ladder() -> Result<(&'static ConvergenceReport, Duration)> {
    static CELL: OnceLock<LadderRun> = OnceLock::new();
    shared_ladder(&CELL, singular_torus_ladder)
}

fn smooth_ladder() -> Result<(&'static ConvergenceReport, Duration)> {
    static CELL: OnceLock<LadderRun> = OnceLock::new();
    shared_ladder(&CELL, smooth_torus_ladder)
}

fn within(time: Duration, budget: u64) -> (bool, String) {
    let t = time.as_secs_f64();
    (t <= budget as f64, format!("ladder ran in {t:.1} s (budget {budget} s)"))
}

fn c5_chebyshev() -> Result<Outcome> {
    let mut parts = Vec::new();
    let mut passed = true;
    for (name, run) in [("singular", singular_ladder()), ("smooth", smooth_ladder())] {
        let rep = run?.0;
        let (checked, bad) = chebyshev_violations(&rep)?;
        passed &= checked > 0 && bad == 0;
        parts.push(format!("{name}: {bad} of {checked} reports violate"));
    }
    Ok(outcome(passed, parts.join(", ")))
}

fn c6_osgood() -> Result<Outcome> {
    let oracle = |alpha: f64, c: f64, tau: f64| {
        let f = |y: f64| c * y * (2.0 - y.ln());
        let steps = 20_000;
        let h = tau / steps as f64;
        let mut y = alpha;
        for _ in 0..steps {
            let k1 = f(y);
            let k2 = f(y + 0.5 * h * k1);
            let k3 = f(y + 0.5 * h * k2);
            let k4 = f(y + h * k3);
            y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        y
    };
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = f64::INFINITY;
    for _ in 0..100 {
        let alpha = rng.random_range(1e-6..0.9);
        let c = rng.random_range(0.1..5.0);
        let tau = rng.random_range(0.0..3.0);
        worst = worst.min(osgood_bound(alpha, c, tau)? - oracle(alpha, c, tau));
    }
    Ok(outcome(worst >= OSGOOD_SLACK, format!("smallest slack {worst:.3e} >= {OSGOOD_SLACK:e}")))
}

fn c7_singular_envelope() -> Result<Outcome> {
    let (rep, time) = singular_ladder()?;
    let (fast, timing) = within(time, 1800);
    let errs: Vec<f64> = rep.summary.sup_errors.iter().filter_map(|s| s.err_vort[0]).collect();
    let decreasing = errs.len() == LADDER.len() && errs.windows(2).all(|w| w[1] < w[0]);
    let env = rep.summary.fits[0].log_envelope.as_ref().context("no envelope fit")?;
    let low = env.residuals.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(outcome(
        decreasing && low >= 0.0 && fast,
        format!(
            "sup L^1.3 errors {:?}, envelope delta {:.3e} C {:.3e}, smallest residual {low:.3e}, {timing}",
            errs.iter().map(|e| format!("{e:.4e}")).collect::<Vec<_>>(),
            env.offset.unwrap_or(f64::NAN),
            env.prefactor
        ),
    ))
}

fn c8_bounded_rate() -> Result<Outcome> {
    let (rep, time) = smooth_ladder()?;
    let (fast, timing) = within(time, 1200);
    let fit = rep
        .summary
        .fits
        .iter()
        .find(|f| f.quantity == "err_vel_l2")
        .and_then(|f| f.power.as_ref())
        .context("no velocity power fit")?;
    let slope = fit.exponent.context("no exponent")?;
    Ok(outcome(
        slope >= MIN_SLOPE && fast,
        format!("slope {slope:.3} >= {MIN_SLOPE} (prefactor {:.3e}), {timing}", fit.prefactor),
    ))
}

fn c9_renormalization() -> Result<Outcome> {
    let (t, dt) = (1.0, 2e-3);
    let spec = smooth_datum(9.0);
    let g = Grid::torus(128)?;
    let w0 = initial_datum(&spec, g, Domain::Torus)?.field;
    let fine0 = initial_datum(&spec, Grid::torus(256)?, Domain::Torus)?.field;
    let coarse = solve_nse(&w0, 0.0, t, SolverSettings::new(dt).with_checkpoint_every(10))?;
    let fine = solve_nse(&fine0, 0.0, t, SolverSettings::new(0.5 * dt).with_checkpoint_every(20))?;
    let eta = Beta::default_eta(&w0);
    let betas = [
        ("power", Beta::TruncatedPower { q: 2.0, eta }),
        ("convex", Beta::Convex { eta }),
        ("bounded", Beta::Bounded { eta, scale: 0.5 * w0.max_abs() }),
    ];
    let mut passed = true;
    let mut parts = Vec::new();
    for (name, beta) in betas {
        let defect = renormalization_defect(&coarse, beta)?.into_iter().fold(0.0, f64::max);
        let disc = coarse
            .frames()
            .iter()
            .zip(fine.frames())
            .map(|(a, b)| (beta_integral(a, beta) - beta_integral(b, beta)).abs())
            .fold(0.0, f64::max);
        let ok = defect <= DOUBLING_FACTOR * disc;
        passed &= ok;
        parts.push(format!("{name} defect {defect:.2e} vs doubling {disc:.2e}"));
    }
    let nse = solve_nse(&w0, 1e-2, t, SolverSettings::new(dt).with_checkpoint_every(10))?;
    let convex = Beta::Convex { eta };
    let scale = beta_integral(&w0, convex).abs().max(1.0);
    let drift = match renormalization_defect(&nse, convex) {
        Ok(d) => d.into_iter().fold(f64::NEG_INFINITY, f64::max),
        Err(e) => {
            passed = false;
            parts.push(format!("viscous drift check failed: {e}"));
            f64::NAN
        }
    };
    passed &= drift <= DRIFT_TOL * scale;
    parts.push(format!("viscous convex drift {drift:.2e} <= {DRIFT_TOL:e}"));
    Ok(outcome(passed, parts.join("; ")))
}

fn c10_free_space_bounds() -> Result<Outcome> {
    let mut c = LadderConfig::torus(
        DatumSpec::new("lp-singular").with("alpha", 1.5).with("p", 1.2),
        LADDER.to_vec(),
        0.5,
        256,
        2e-3,
    );
    c.domain = Domain::Freespace;
    c.box_length = 8.0;
    c.bound_p = 1.2;
    c.checkpoints = 25;
    c.p_list = vec![Exponent(1.2)];
    c.checks = Checks {
        errors: false,
        energy: true,
        enstrophy: true,
        enstrophy_bound: true,
        energy_bound: true,
        ..Checks::default()
    };
    let rep = run_ladder_with_threads(&c, 1)?;
    ensure!(rep.summary.complete, "ladder incomplete: {:?}", rep.summary.failure);
    let worst = |f: fn(&inviscid_lab::Row) -> Option<f64>| rep.rows.iter().filter_map(f).fold(f64::INFINITY, f64::min);
    let ens = worst(|r| r.enstrophy_margin);
    let en = worst(|r| r.energy_margin);
    let drops: Vec<f64> = rep.summary.sup_errors.iter().filter_map(|s| s.energy_drop).collect();
    let shrinking = drops.len() == LADDER.len() && drops.windows(2).all(|w| w[1] < w[0]);
    Ok(outcome(
        ens >= MARGIN_TOL && en >= MARGIN_TOL && shrinking,
        format!(
            "smallest enstrophy margin {ens:.2e}, energy margin {en:.2e}, energy drops {:?}",
            drops.iter().map(|d| format!("{d:.3e}")).collect::<Vec<_>>()
        ),
    ))
}

fn serfati_config(n: usize, dt: f64) -> LadderConfig {
    let mut c = LadderConfig::torus(DatumSpec::new("dipole"), vec![1e-2], 0.2, n, dt);
    c.domain = Domain::Freespace;
    c.box_length = 8.0;
    c.checkpoints = 2;
    c.checks = Checks::default();
    c
}

fn c11_serfati() -> Result<Outcome> {
    let coarse = run_serfati(&serfati_config(256, 0.01))?.max_residual();
    let fine = run_serfati(&serfati_config(512, 0.005))?.max_residual();
    let ratio = coarse / fine;
    Ok(outcome(
        ratio >= SERFATI_RATIO,
        format!("residual {coarse:.3e} at n = 256, {fine:.3e} at n = 512, ratio {ratio:.2} >= {SERFATI_RATIO}"),
    ))
}

fn c12_determinism() -> Result<Outcome> {
    let mut c = LadderConfig::torus(smooth_datum(5.0), vec![1e-2, 3e-3, 1e-3], 0.2, 32, 5e-3);
    c.p_list = vec![Exponent(1.0), Exponent(2.0), Exponent(f64::INFINITY)];
    c.checkpoints = 4;
    c.checks = Checks {
        flows: true,
        enstrophy_bound: true,
        energy_bound: true,
        ..Checks::default()
    };
    c.replicas = 32;
    c.master_seed = 12;
    let outputs: Vec<String> = [1, 4, 8]
        .into_iter()
        .map(|threads| Ok(csv_string(&run_ladder_with_threads(&c, threads)?)?))
        .collect::<Result<_>>()?;
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    Ok(outcome(
        same,
        format!("threads 1/4/8 give {} CSV bytes, identical: {same}", outputs[0].len()),
    ))
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "taylor-green exactness", budget: secs(10), run: c1_taylor_green },
        Criterion { id: 2, name: "heat / feynman-kac agreement", budget: secs(30), run: c2_heat_feynman_kac },
        Criterion { id: 3, name: "two-route consistency", budget: secs(300), run: c3_two_routes },
        Criterion { id: 4, name: "measure preservation", budget: secs(120), run: c4_measure_preservation },
        Criterion { id: 5, name: "chebyshev step on every ladder run", budget: None, run: c5_chebyshev },
        Criterion { id: 6, name: "osgood dominance", budget: secs(5), run: c6_osgood },
        Criterion { id: 7, name: "monotone envelope, singular datum", budget: None, run: c7_singular_envelope },
        Criterion { id: 8, name: "rate for bounded vorticity", budget: None, run: c8_bounded_rate },
        Criterion { id: 9, name: "renormalization", budget: None, run: c9_renormalization },
        Criterion { id: 10, name: "enstrophy bound and energy sandwich", budget: None, run: c10_free_space_bounds },
        Criterion { id: 11, name: "serfati identity under refinement", budget: secs(900), run: c11_serfati },
        Criterion { id: 12, name: "determinism across thread counts", budget: None, run: c12_determinism },
    ];
    let only: Vec<u32> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect())
        .unwrap_or_default();
    let mut failed = 0;
    for c in criteria.iter().filter(|c| only.is_empty() || only.contains(&c.id)) {
        let start = Instant::now();
        let result = (c.run)();
        let elapsed = start.elapsed();
        let (mut passed, mut detail) = match result {
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e:#}")),
        };
        if let Some(b) = c.budget {
            if elapsed > b {
                passed = false;
                detail.push_str(&format!("; over the {} s budget", b.as_secs()));
            }
        }
        println!(
            "{} C{} {}: {detail} [{:.1} s]",
            if passed { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            elapsed.as_secs_f64()
        );
        if !passed {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
