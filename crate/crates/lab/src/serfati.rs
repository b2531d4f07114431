//! Free-space runs checked against the Serfati velocity identity.

use crate::config::{Domain, LadderConfig};
use crate::datum::initial_datum;
use crate::error::{LabError, Result};
use crate::store;
use inviscid_core::freespace::{serfati_rhs, CutoffParams, FreeSpaceLaw, PaddedGrid, SerfatiHistory};
use inviscid_core::solver::{solve_with_law, SolverSettings, VelocityLaw};
use inviscid_core::{Grid, SpectralField};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SerfatiRow {
    pub nu: f64,
    pub t: f64,
    /// `||rhs - u(t)||_2 / ||u(t)||_2`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SerfatiReport {
    pub n: usize,
    pub length: f64,
    pub dt: f64,
    pub cutoff_scale: f64,
    pub serfati_l2: f64,
    pub laplacian_l1: f64,
    pub laplacian_l2: f64,
    pub rows: Vec<SerfatiRow>,
}

impl SerfatiReport {
    pub fn max_residual(&self) -> f64 {
        self.rows.iter().map(|r| r.residual).fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["nu", "t", "residual"])?;
        for r in &self.rows {
            out.write_record([format!("{:e}", r.nu), format!("{:e}", r.t), format!("{:e}", r.residual)])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Solves each ladder viscosity in free space and evaluates the identity at
/// every checkpoint, with the time integrals accumulated at every step.
pub fn run_serfati(config: &LadderConfig) -> Result<SerfatiReport> {
    config.validate()?;
    if config.domain != Domain::Freespace {
        return Err(LabError::Config("serfati runs need domain = freespace".into()));
    }
    let grid = Grid::periodic_box(config.n, config.box_length)?;
    let pg = PaddedGrid::from_grid(grid);
    let cutoff = CutoffParams {
        scale: config.cutoff_scale,
    };
    let kernels = store::kernels(&pg, cutoff)?;
    let omega0 = initial_datum(&config.initial_datum, grid, config.domain)?.field;
    let (_, every, dt) = config.schedule();
    let runs: Vec<Result<Vec<SerfatiRow>>> = config
        .nus
        .par_iter()
        .map(|&nu| {
            let law = Arc::new(FreeSpaceLaw::new(pg));
            let u0 = law.velocity(&omega0)?;
            let mut history = SerfatiHistory::new(grid);
            let mut rows = Vec::new();
            let mut step = 0usize;
            let mut observe = |t: f64, w: &SpectralField| -> inviscid_core::Result<()> {
                let u = law.velocity(w)?;
                history.push(t, &u, w, nu)?;
                if step > 0 && step % every == 0 {
                    let rhs = serfati_rhs(&u0, w, &omega0, &history, &kernels, &pg)?;
                    let residual = rhs.sub(&u)?.l2_norm() / u.l2_norm();
                    rows.push(SerfatiRow { nu, t, residual });
                }
                step += 1;
                Ok(())
            };
            let settings = SolverSettings::new(dt).with_checkpoint_every(every);
            solve_with_law(law.clone(), &omega0, nu, config.t_end, settings, Some(&mut observe))?;
            Ok(rows)
        })
        .collect();
    let mut rows = Vec::new();
    for r in runs {
        rows.extend(r?);
    }
    Ok(SerfatiReport {
        n: config.n,
        length: config.box_length,
        dt,
        cutoff_scale: config.cutoff_scale,
        serfati_l2: kernels.serfati_l2,
        laplacian_l1: kernels.laplacian_l1,
        laplacian_l2: kernels.laplacian_l2,
        rows,
    })
}
