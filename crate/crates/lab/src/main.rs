use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use inviscid_core::flows::{
    feynman_kac_vorticity, integrate_backward_flow, integrate_stochastic_flow, lagrangian_vorticity,
    measure_preservation_defect, SeedGrid,
};
use inviscid_core::solver::enstrophy;
use inviscid_core::{Interpolation, SpectralField};
use inviscid_lab::ladder::Setup;
use inviscid_lab::{plot, report, store, Domain, LadderConfig};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "inviscid-lab", version, about = "Inviscid-limit experiments for 2D vorticity dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the reference and every ladder viscosity and store the trajectories.
    Simulate(Common),
    /// Integrate deterministic and stochastic flows and store the ensembles.
    Flows(Common),
    /// Run the full ladder and write the CSV table, JSON summary and plots.
    Ladder(Common),
    /// Check the Serfati identity along free-space runs.
    Serfati(Common),
    /// Regenerate plots and print the checks of an existing ladder output.
    Report(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment description (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> anyhow::Result<LadderConfig> {
        let path = self.config.as_ref().context("--config is required")?;
        let mut c = LadderConfig::load(path).with_context(|| format!("reading {}", path.display()))?;
        if let Some(s) = self.seed {
            c.master_seed = s;
        }
        if let Some(o) = &self.out {
            c.output_dir = o.clone();
        }
        Ok(c)
    }

    fn pool(&self) -> anyhow::Result<rayon::ThreadPool> {
        Ok(rayon::ThreadPoolBuilder::new().num_threads(self.threads.max(1)).build()?)
    }
}

fn simulate(args: &Common) -> anyhow::Result<()> {
    let c = args.load()?;
    let setup = Setup::new(&c)?;
    let dir = c.output_dir.join("trajectories");
    args.pool()?.install(|| -> anyhow::Result<()> {
        if c.domain == Domain::Torus {
            let r = setup.reference()?.expect("torus always has a reference");
            store::save_trajectory(&r, c.domain, &dir.join("reference"))?;
            println!("reference nu=0 energy(0)={:e} energy(T)={:e}", r.energy(0)?, r.energy(r.len() - 1)?);
        }
        for (k, &nu) in c.nus.iter().enumerate() {
            let t = setup.run(nu)?;
            store::save_trajectory(&t, c.domain, &dir.join(format!("nu_{k:02}")))?;
            let last = t.len() - 1;
            println!(
                "nu={nu:e} energy(0)={:e} energy(T)={:e} enstrophy(T)={:e}",
                t.energy(0)?,
                t.energy(last)?,
                enstrophy(t.last())
            );
        }
        Ok(())
    })?;
    println!("trajectories written to {}", dir.display());
    Ok(())
}

fn flows(args: &Common) -> anyhow::Result<()> {
    let c = args.load()?;
    if c.domain != Domain::Torus {
        bail!("flows are only defined on the torus");
    }
    if c.replicas == 0 {
        bail!("set M >= 1 for stochastic flows");
    }
    let setup = Setup::new(&c)?;
    let seeds = SeedGrid::new(c.seed_grid)?;
    let dir = c.output_dir.join("ensembles");
    args.pool()?.install(|| -> anyhow::Result<()> {
        let reference = setup.reference()?.expect("torus always has a reference");
        let w0 = &setup.datum.field;
        for i in setup.flow_checkpoints() {
            let t = reference.times()[i];
            let det = integrate_backward_flow(&reference, t, seeds)?;
            store::save_ensemble(&det, &dir.join(format!("euler_t{i:03}")))?;
            let lag = lagrangian_vorticity(w0, &det, Interpolation::Cubic)?;
            println!(
                "t={t:e} euler: cell defect={:e} |lagrangian - spectral|_2={:e}",
                measure_preservation_defect(&det, 16),
                seed_l2_gap(lag.values(), reference.frame(i), seeds)
            );
            for (k, &nu) in c.nus.iter().enumerate() {
                let traj = setup.run(nu)?;
                let st = integrate_stochastic_flow(&traj, t, nu, seeds, c.replicas, setup.entry_seed(k))?;
                store::save_ensemble(&st, &dir.join(format!("nu_{k:02}_t{i:03}")))?;
                let fk = feynman_kac_vorticity(w0, &st, Interpolation::Cubic)?;
                println!(
                    "t={t:e} nu={nu:e}: cell defect={:e} |feynman-kac - spectral|_2={:e} mean standard error={:e}",
                    measure_preservation_defect(&st, 16),
                    seed_l2_gap(fk.mean.values(), traj.frame(i), seeds),
                    fk.mean_std_error()
                );
            }
        }
        Ok(())
    })?;
    println!("ensembles written to {}", dir.display());
    Ok(())
}

/// `L^2` distance on the seed grid between seed values and a spectral field.
fn seed_l2_gap(values: &[f64], field: &SpectralField, seeds: SeedGrid) -> f64 {
    let s: f64 = values
        .iter()
        .enumerate()
        .map(|(k, v)| (v - field.sample_at(seeds.point(k), Interpolation::Spectral)).powi(2))
        .sum();
    (s / seeds.len() as f64).sqrt()
}

fn print_checks(s: &report::Summary) -> bool {
    for c in &s.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if let Some(f) = &s.failure {
        println!("INCOMPLETE: {f}");
    }
    s.complete
}

fn ladder(args: &Common) -> anyhow::Result<bool> {
    let c = args.load()?;
    let rep = inviscid_lab::run_ladder_with_threads(&c, args.threads)?;
    let mut files = report::emit_report(&rep, &c.output_dir)?;
    files.extend(plot::plot_report(&rep.summary, &rep.rows, &c.output_dir)?);
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(print_checks(&rep.summary))
}

fn serfati(args: &Common) -> anyhow::Result<()> {
    let c = args.load()?;
    let rep = args.pool()?.install(|| inviscid_lab::run_serfati(&c))?;
    std::fs::create_dir_all(&c.output_dir)?;
    let path = c.output_dir.join("serfati.csv");
    rep.write_csv(std::fs::File::create(&path)?)?;
    std::fs::write(c.output_dir.join("serfati.json"), serde_json::to_string_pretty(&rep)?)?;
    for r in &rep.rows {
        println!("nu={:e} t={:e} residual={:e}", r.nu, r.t, r.residual);
    }
    println!("max relative residual {:e}; wrote {}", rep.max_residual(), path.display());
    Ok(())
}

fn regenerate(args: &Common) -> anyhow::Result<bool> {
    let dir = match (&args.out, &args.config) {
        (Some(o), _) => o.clone(),
        (None, Some(_)) => args.load()?.output_dir,
        (None, None) => bail!("give --out or --config"),
    };
    let (_, rows) = report::read_csv(&dir.join(report::CSV_NAME))?;
    let summary = report::read_summary(&dir.join(report::SUMMARY_NAME))?;
    for f in plot::plot_report(&summary, &rows, &dir)? {
        println!("wrote {}", f.display());
    }
    Ok(print_checks(&summary))
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let ok = match &cli.command {
        Command::Simulate(a) => simulate(a).map(|_| true)?,
        Command::Flows(a) => flows(a).map(|_| true)?,
        Command::Ladder(a) => ladder(a)?,
        Command::Serfati(a) => serfati(a).map(|_| true)?,
        Command::Report(a) => regenerate(a)?,
    };
    if !ok {
        std::process::exit(1);
    }
    Ok(())
}
