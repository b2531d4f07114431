//! Viscosity-ladder orchestration.

use crate::config::{BetaSpec, Domain, LadderConfig};
use crate::datum::{initial_datum, Datum};
use crate::error::{LabError, Result};
use crate::report::{CheckOutcome, ConvergenceReport, DoublingCheck, FitSummary, Row, SupErrors, Summary};
use crate::store::{cached_trajectory, law_for};
use inviscid_core::flows::{integrate_backward_flow, integrate_stochastic_flow, FlowEnsemble, SeedGrid};
use inviscid_core::metrics::{
    choose_eps, energy_margins, enstrophy_margins, l1l1_velocity_distance, renormalization_defect,
    stability_report, Beta,
};
use inviscid_core::solver::{enstrophy, solve_with_law, SolverSettings, Trajectory, VelocityLaw};
use inviscid_core::{Grid, SpectralField, VelocityField};
use rayon::prelude::*;
use std::sync::Arc;

/// Relative slack of the inequality checks.
pub const MARGIN_SLACK: f64 = 1e-6;

/// Everything shared by the runs of one ladder.
pub struct Setup {
    pub config: LadderConfig,
    pub grid: Grid,
    pub datum: Datum,
    pub law: Arc<dyn VelocityLaw>,
    pub steps: usize,
    pub every: usize,
    pub dt: f64,
    pub beta: Beta,
}

impl Setup {
    pub fn new(config: &LadderConfig) -> Result<Self> {
        config.validate()?;
        let grid = grid_for(config, config.n)?;
        let datum = initial_datum(&config.initial_datum, grid, config.domain)?;
        let (steps, every, dt) = config.schedule();
        let beta = beta_for(config.beta, &datum.field);
        beta.validate()?;
        Ok(Self {
            config: config.clone(),
            grid,
            law: law_for(config.domain, grid),
            datum,
            steps,
            every,
            dt,
            beta,
        })
    }

    pub fn run(&self, nu: f64) -> Result<Trajectory> {
        let settings = SolverSettings::new(self.dt).with_checkpoint_every(self.every);
        Ok(solve_with_law(
            self.law.clone(),
            &self.datum.field,
            nu,
            self.config.t_end,
            settings,
            None,
        )?)
    }

    /// Viscosity of the reference run: 0 on the torus, the smallest ladder
    /// value in free space.
    pub fn reference_nu(&self) -> Option<f64> {
        match self.config.domain {
            Domain::Torus => Some(0.0),
            Domain::Freespace => self.config.nus.last().copied(),
        }
    }

    pub fn reference(&self) -> Result<Option<Trajectory>> {
        let Some(nu) = self.reference_nu() else {
            return Ok(None);
        };
        let c = &self.config;
        let key = format!(
            "{}|{}|{}|{}|{:e}|{}|{}|{:e}",
            serde_json::to_string(&c.domain)?,
            serde_json::to_string(&c.initial_datum)?,
            c.n,
            c.box_length,
            self.dt,
            self.steps,
            self.every,
            nu
        );
        cached_trajectory(&key, c.domain, || self.run(nu)).map(Some)
    }

    pub fn checkpoint_times(&self) -> Vec<f64> {
        let k = self.config.checkpoints;
        (0..=k)
            .map(|c| {
                if c == k {
                    self.config.t_end
                } else {
                    (c * self.every) as f64 * self.dt
                }
            })
            .collect()
    }

    /// Checkpoint indices at which flows are released.
    pub fn flow_checkpoints(&self) -> Vec<usize> {
        let k = self.config.checkpoints;
        if self.config.flow_times.is_empty() {
            return vec![k];
        }
        let spacing = self.config.t_end / k as f64;
        let mut idx: Vec<usize> = self
            .config
            .flow_times
            .iter()
            .map(|t| ((t / spacing).round() as usize).clamp(1, k))
            .collect();
        idx.sort_unstable();
        idx.dedup();
        idx
    }

    /// Master seed of the stochastic ensembles of ladder entry `idx`.
    pub fn entry_seed(&self, idx: usize) -> u64 {
        self.config
            .master_seed
            .wrapping_add((idx as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
    }
}

fn grid_for(config: &LadderConfig, n: usize) -> Result<Grid> {
    Ok(match config.domain {
        Domain::Torus => Grid::torus(n)?,
        Domain::Freespace => Grid::periodic_box(n, config.box_length)?,
    })
}

pub fn beta_for(spec: BetaSpec, omega0: &SpectralField) -> Beta {
    let default = Beta::default_eta(omega0);
    match spec {
        BetaSpec::TruncatedPower { q, eta } => Beta::TruncatedPower {
            q,
            eta: eta.unwrap_or(default),
        },
        BetaSpec::Convex { eta } => Beta::Convex {
            eta: eta.unwrap_or(default),
        },
        BetaSpec::Bounded { scale, eta } => Beta::Bounded {
            eta: eta.unwrap_or(default),
            scale,
        },
    }
}

struct Entry {
    rows: Vec<Row>,
    sup: SupErrors,
}

fn sup(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    values.fold(None, |m, v| match (m, v) {
        (Some(a), Some(b)) => Some(f64::max(a, b)),
        (None, v) | (v, None) => v,
    })
}

fn entry(
    setup: &Setup,
    idx: usize,
    nu: f64,
    reference: &Trajectory,
    det: &[(usize, FlowEnsemble)],
) -> Result<Entry> {
    let c = &setup.config;
    let own;
    let traj: &Trajectory = if c.domain == Domain::Freespace && nu == reference.nu() {
        reference
    } else {
        own = setup.run(nu)?;
        &own
    };
    let ps: Vec<f64> = c.p_list.iter().map(|p| p.0).collect();
    let mut rows: Vec<Row> = traj
        .times()
        .iter()
        .map(|&t| Row {
            nu,
            t,
            err_vort: vec![None; ps.len()],
            ..Row::default()
        })
        .collect();
    for (i, row) in rows.iter_mut().enumerate() {
        if c.checks.errors {
            let d = traj.frame(i).sub(reference.frame(i))?;
            for (k, &p) in ps.iter().enumerate() {
                row.err_vort[k] = Some(d.lp_norm(p)?);
            }
            row.err_vel_l2 = Some(traj.velocity(i)?.sub(reference.velocity(i)?)?.l2_norm());
        }
        if c.checks.energy {
            row.energy = Some(traj.energy(i)?);
        }
        if c.checks.enstrophy {
            row.enstrophy = Some(enstrophy(traj.frame(i)));
        }
    }
    if c.checks.renormalization {
        for (row, d) in rows.iter_mut().zip(renormalization_defect(traj, setup.beta)?) {
            row.renorm_defect = Some(d);
        }
    }
    if c.checks.enstrophy_bound {
        for (row, m) in rows.iter_mut().zip(enstrophy_margins(traj, c.bound_p)?) {
            row.enstrophy_margin = Some(m.margin / m.bound);
        }
    }
    if c.checks.energy_bound {
        let m = energy_margins(traj, c.bound_p)?;
        let e0 = m[0].energy;
        for (row, m) in rows.iter_mut().zip(&m) {
            let upper = m.upper_margin / e0;
            let lower = m.lower_margin / e0.max(m.allowed_drop);
            row.energy_margin = Some(upper.min(lower));
        }
    }
    let mut flow_eps = None;
    if c.checks.flows {
        let eps = choose_eps(nu, l1l1_velocity_distance(traj, reference)?);
        flow_eps = Some(eps);
        let seeds = SeedGrid::new(c.seed_grid)?;
        for (i, det) in det {
            let t = traj.times()[*i];
            let stoch = integrate_stochastic_flow(traj, t, nu, seeds, c.replicas, setup.entry_seed(idx))?;
            let rep = stability_report(det, &stoch, 0.0, eps)?;
            let row = &mut rows[*i];
            row.flow_dist = Some(rep.flow_distance);
            row.q_int = Some(rep.q_integral);
            row.superlevel = Some(rep.superlevel_measure);
            row.y_val = Some(rep.y_value);
        }
    }
    let last = traj.len() - 1;
    let energy_drop = if c.checks.energy || c.checks.energy_bound {
        Some(traj.energy(0)? - traj.energy(last)?)
    } else {
        None
    };
    let sup = SupErrors {
        nu,
        err_vort: (0..ps.len())
            .map(|k| sup(rows.iter().map(|r| r.err_vort[k])))
            .collect(),
        err_vel_l2: sup(rows.iter().map(|r| r.err_vel_l2)),
        energy_drop,
        flow_eps,
    };
    Ok(Entry { rows, sup })
}

/// Values of a fine-grid field at the nodes of the grid with half as many
/// points per side.
fn restrict(f: &[f64], coarse: Grid) -> Result<SpectralField> {
    let n = coarse.n();
    let nf = 2 * n;
    let v = (0..n)
        .flat_map(|i| (0..n).map(move |j| f[(2 * i) * nf + 2 * j]))
        .collect();
    Ok(SpectralField::from_values(coarse, v)?)
}

/// Reruns the reference at `2N` with half the step and compares at the
/// coarse nodes.
pub fn resolution_doubling(setup: &Setup, reference: &Trajectory) -> Result<DoublingCheck> {
    let c = &setup.config;
    let fine = grid_for(c, 2 * c.n)?;
    let mut spec = c.initial_datum.clone();
    if let Some(cap) = setup.datum.truncation {
        spec.params.insert("cap".into(), cap);
    }
    let datum = initial_datum(&spec, fine, c.domain)?;
    let settings = SolverSettings::new(0.5 * setup.dt).with_checkpoint_every(2 * setup.every);
    let traj = solve_with_law(law_for(c.domain, fine), &datum.field, reference.nu(), c.t_end, settings, None)?;
    let mut vort = vec![0.0f64; c.p_list.len()];
    let mut vel = 0.0f64;
    for i in 0..reference.len() {
        let d = restrict(traj.frame(i).values(), setup.grid)?.sub(reference.frame(i))?;
        for (k, p) in c.p_list.iter().enumerate() {
            vort[k] = vort[k].max(d.lp_norm(p.0)?);
        }
        let uf = traj.velocity(i)?;
        let u = VelocityField::new(
            restrict(uf.u1.values(), setup.grid)?,
            restrict(uf.u2.values(), setup.grid)?,
        )?;
        vel = vel.max(u.sub(reference.velocity(i)?)?.l2_norm());
    }
    Ok(DoublingCheck {
        n_fine: 2 * c.n,
        vorticity: vort,
        velocity_l2: vel,
    })
}

pub fn run_ladder(config: &LadderConfig) -> Result<ConvergenceReport> {
    run_ladder_with_threads(config, 1)
}

/// Runs the ladder in a pool of `threads` workers. Entries are merged in
/// ladder order, so the output does not depend on the thread count.
pub fn run_ladder_with_threads(config: &LadderConfig, threads: usize) -> Result<ConvergenceReport> {
    let setup = Setup::new(config)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| LabError::Config(format!("thread pool: {e}")))?;
    pool.install(|| run_setup(&setup))
}

fn run_setup(setup: &Setup) -> Result<ConvergenceReport> {
    let c = &setup.config;
    let mut summary = Summary {
        complete: true,
        failure: None,
        domain: serde_json::to_value(c.domain)?.as_str().unwrap_or_default().to_string(),
        datum: c.initial_datum.name.clone(),
        reference: match c.domain {
            Domain::Torus => format!("Euler run (nu = 0) at N = {}", c.n),
            Domain::Freespace => match c.nus.last() {
                Some(nu) => format!("smallest-viscosity run (nu = {nu}) at N = {}", c.n),
                None => "none (empty ladder)".into(),
            },
        },
        n: c.n,
        dt: setup.dt,
        steps: setup.steps,
        checkpoint_times: setup.checkpoint_times(),
        p_list: c.p_list.clone(),
        truncation_level: setup.datum.truncation,
        sup_errors: Vec::new(),
        fits: Vec::new(),
        resolution_doubling: None,
        checks: Vec::new(),
        notes: vec![
            "weak-* convergence of the velocities in L^inf(L^2) is a hypothesis on the continuum family and is assumed, not checked".into(),
            "sup over time is the maximum over checkpoints".into(),
        ],
    };
    let mut report = ConvergenceReport {
        p_list: c.p_list.clone(),
        rows: Vec::new(),
        summary: summary.clone(),
    };
    if c.nus.is_empty() {
        return Ok(report);
    }
    let reference = match setup.reference() {
        Ok(r) => r.expect("nonempty ladder has a reference"),
        Err(e) => {
            summary.complete = false;
            summary.failure = Some(format!("reference run: {e}"));
            report.summary = summary;
            return Ok(report);
        }
    };
    if c.checks.resolution_doubling {
        match resolution_doubling(setup, &reference) {
            Ok(d) => summary.resolution_doubling = Some(d),
            Err(e) => summary.notes.push(format!("resolution doubling failed: {e}")),
        }
    }
    let det: Vec<(usize, FlowEnsemble)> = if c.checks.flows {
        let seeds = SeedGrid::new(c.seed_grid)?;
        let made: Result<Vec<_>> = setup
            .flow_checkpoints()
            .into_par_iter()
            .map(|i| Ok((i, integrate_backward_flow(&reference, reference.times()[i], seeds)?)))
            .collect();
        match made {
            Ok(v) => v,
            Err(e) => {
                summary.complete = false;
                summary.failure = Some(format!("reference flows: {e}"));
                report.summary = summary;
                return Ok(report);
            }
        }
    } else {
        Vec::new()
    };
    let entries: Vec<Result<Entry>> = c
        .nus
        .par_iter()
        .enumerate()
        .map(|(idx, &nu)| entry(setup, idx, nu, &reference, &det))
        .collect();
    let mut done = Vec::new();
    for (nu, e) in c.nus.iter().zip(entries) {
        match e {
            Ok(e) => {
                report.rows.extend(e.rows);
                done.push(e.sup);
            }
            Err(err) => {
                summary.complete = false;
                summary.failure.get_or_insert_with(|| format!("nu = {nu}: {err}"));
            }
        }
    }
    summarize(setup, &mut summary, &report.rows, &done);
    summary.sup_errors = done;
    report.summary = summary;
    Ok(report)
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn outcome(name: &str, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome {
        name: name.to_string(),
        passed,
        detail,
    }
}

fn summarize(setup: &Setup, s: &mut Summary, rows: &[Row], done: &[SupErrors]) {
    let c = &setup.config;
    s.checks.push(outcome(
        "complete",
        s.complete,
        s.failure.clone().unwrap_or_else(|| "all ladder entries finished".into()),
    ));
    let fitted: Vec<&SupErrors> = done
        .iter()
        .filter(|e| Some(e.nu) != setup.reference_nu() || c.domain == Domain::Torus)
        .collect();
    let nus: Vec<f64> = fitted.iter().map(|e| e.nu).collect();
    if c.checks.errors {
        for (k, p) in c.p_list.iter().enumerate() {
            let errs: Vec<f64> = fitted.iter().filter_map(|e| e.err_vort[k]).collect();
            let name = format!("err_vort_p{}", p.label());
            s.fits.push(FitSummary::compute(&name, &nus, &errs));
            s.checks.push(outcome(
                &format!("{name}_decreasing"),
                strictly_decreasing(&errs),
                format!("sup errors {errs:?}"),
            ));
        }
        let errs: Vec<f64> = fitted.iter().filter_map(|e| e.err_vel_l2).collect();
        s.fits.push(FitSummary::compute("err_vel_l2", &nus, &errs));
        s.checks.push(outcome(
            "err_vel_l2_decreasing",
            strictly_decreasing(&errs),
            format!("sup errors {errs:?}"),
        ));
        if let Some(env) = s.fits.first().and_then(|f| f.log_envelope.as_ref()) {
            let worst = env.residuals.iter().copied().fold(f64::INFINITY, f64::min);
            s.checks.push(outcome(
                "log_envelope_nonnegative",
                worst >= 0.0,
                format!("smallest residual {worst:e}"),
            ));
        }
    }
    if c.checks.flows {
        let count = rows.iter().filter(|r| r.q_int.is_some()).count();
        s.checks.push(outcome(
            "chebyshev",
            s.complete,
            format!("{count} stability reports satisfy superlevel * ln(1 + 1/eps) <= q_int"),
        ));
    }
    let worst = |f: fn(&Row) -> Option<f64>| rows.iter().filter_map(f).fold(f64::INFINITY, f64::min);
    if c.checks.enstrophy_bound {
        let w = worst(|r| r.enstrophy_margin);
        s.checks.push(outcome(
            "enstrophy_bound",
            w >= -MARGIN_SLACK,
            format!("smallest relative margin {w:e}"),
        ));
    }
    if c.checks.energy_bound {
        let w = worst(|r| r.energy_margin);
        s.checks.push(outcome(
            "energy_sandwich",
            w >= -MARGIN_SLACK,
            format!("smallest relative margin {w:e}"),
        ));
    }
    if c.checks.energy || c.checks.energy_bound {
        let drops: Vec<f64> = done.iter().filter_map(|e| e.energy_drop).collect();
        s.checks.push(outcome(
            "energy_drop_decreasing",
            strictly_decreasing(&drops),
            format!("E(0) - E(T) along the ladder: {drops:?}"),
        ));
    }
    if c.checks.renormalization {
        s.checks.push(outcome(
            "renormalization",
            s.complete,
            format!("beta = {:?}", setup.beta),
        ));
    }
}
