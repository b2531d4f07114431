//! On-disk layout for trajectories, flow ensembles and kernel caches.
//!
//! A trajectory directory holds `manifest.json` and one file per checkpoint
//! with three containers: the vorticity values, then the real and imaginary
//! parts of its Fourier coefficients (so that reloading is exact). An
//! ensemble directory holds `manifest.json` and one file per stored time `s`
//! with `2 M` containers: for each replica, the `x1` and `x2` coordinates of
//! every seed, unwrapped.

use crate::config::Domain;
use crate::error::{LabError, Result};
use inviscid_core::flows::{FlowEnsemble, SeedGrid};
use inviscid_core::freespace::{
    build_kernels, sample_kernels, CutoffParams, FreeSpaceLaw, KernelPair, KernelSamples, PaddedGrid,
};
use inviscid_core::solver::{FrameKind, TorusLaw, Trajectory, VelocityLaw};
use inviscid_core::spectral::{read_containers, write_container, PayloadKind};
use inviscid_core::{Grid, SpectralField};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

pub const CACHE_ENV: &str = "INVISCID_LAB_CACHE";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryManifest {
    pub domain: Domain,
    pub n: usize,
    pub length: f64,
    pub nu: f64,
    pub dt: f64,
    pub times: Vec<f64>,
    pub frames: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleManifest {
    pub seed_grid: usize,
    pub t: f64,
    pub nu: f64,
    pub replicas: usize,
    pub stochastic: bool,
    pub master_seed: u64,
    pub s_values: Vec<f64>,
    pub files: Vec<String>,
}

pub fn law_for(domain: Domain, grid: Grid) -> Arc<dyn VelocityLaw> {
    match domain {
        Domain::Torus => Arc::new(TorusLaw { grid }),
        Domain::Freespace => Arc::new(FreeSpaceLaw::new(PaddedGrid::from_grid(grid))),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn read_all(path: &Path) -> Result<Vec<(PayloadKind, usize, Vec<f64>)>> {
    Ok(read_containers(&mut BufReader::new(File::open(path)?))?)
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, v)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

pub fn save_trajectory(traj: &Trajectory, domain: Domain, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let g = traj.grid();
    let n = g.n();
    let mut names = Vec::with_capacity(traj.len());
    for (k, f) in traj.frames().iter().enumerate() {
        let name = format!("frame_{k:05}.bin");
        let mut w = create(&dir.join(&name))?;
        write_container(&mut w, PayloadKind::Vorticity, n, f.values())?;
        let re: Vec<f64> = f.coeffs().iter().map(|c| c.re).collect();
        let im: Vec<f64> = f.coeffs().iter().map(|c| c.im).collect();
        write_container(&mut w, PayloadKind::Scalar, n, &re)?;
        write_container(&mut w, PayloadKind::Scalar, n, &im)?;
        w.flush()?;
        names.push(name);
    }
    let m = TrajectoryManifest {
        domain,
        n,
        length: g.length(),
        nu: traj.nu(),
        dt: traj.dt(),
        times: traj.times().to_vec(),
        frames: names,
    };
    write_json(&dir.join("manifest.json"), &m)
}

pub fn load_trajectory(dir: &Path) -> Result<(Trajectory, Domain)> {
    let m: TrajectoryManifest = read_json(&dir.join("manifest.json"))?;
    let grid = match m.domain {
        Domain::Torus => Grid::torus(m.n)?,
        Domain::Freespace => Grid::periodic_box(m.n, m.length)?,
    };
    let mut frames = Vec::with_capacity(m.frames.len());
    for name in &m.frames {
        let parts = read_all(&dir.join(name))?;
        let [(_, n0, values), (_, n1, re), (_, n2, im)] = parts.as_slice() else {
            return Err(LabError::Config(format!("{name}: expected three containers")));
        };
        if [*n0, *n1, *n2].iter().any(|&k| k != m.n) {
            return Err(inviscid_core::Error::GridMismatch.into());
        }
        let coeffs = re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        frames.push(SpectralField::from_parts(grid, values.clone(), coeffs)?);
    }
    let kind = FrameKind::Vorticity(law_for(m.domain, grid));
    let traj = Trajectory::from_parts(kind, m.nu, m.dt, m.times, frames, None)?;
    Ok((traj, m.domain))
}

pub fn save_ensemble(flow: &FlowEnsemble, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let seeds = flow.seeds();
    let m = flow.replicas();
    let mut files = Vec::new();
    for (k, &s) in flow.s_values().iter().enumerate() {
        let name = format!("positions_{k:03}.bin");
        let pos = flow.unwrapped_at(s)?;
        let mut w = create(&dir.join(&name))?;
        for r in 0..m {
            let x1: Vec<f64> = (0..seeds.len()).map(|i| pos[i * m + r][0]).collect();
            let x2: Vec<f64> = (0..seeds.len()).map(|i| pos[i * m + r][1]).collect();
            write_container(&mut w, PayloadKind::PositionX1, seeds.n(), &x1)?;
            write_container(&mut w, PayloadKind::PositionX2, seeds.n(), &x2)?;
        }
        w.flush()?;
        files.push(name);
    }
    let man = EnsembleManifest {
        seed_grid: seeds.n(),
        t: flow.t(),
        nu: flow.nu(),
        replicas: m,
        stochastic: flow.is_stochastic(),
        master_seed: flow.master_seed(),
        s_values: flow.s_values().to_vec(),
        files,
    };
    write_json(&dir.join("manifest.json"), &man)
}

pub fn load_ensemble(dir: &Path) -> Result<FlowEnsemble> {
    let man: EnsembleManifest = read_json(&dir.join("manifest.json"))?;
    let seeds = SeedGrid::new(man.seed_grid)?;
    let m = man.replicas;
    let mut paths = Vec::with_capacity(man.files.len());
    for name in &man.files {
        let parts = read_all(&dir.join(name))?;
        if parts.len() != 2 * m {
            return Err(LabError::Config(format!(
                "{name}: {} containers for {m} replicas",
                parts.len()
            )));
        }
        let mut pos = vec![[0.0; 2]; seeds.len() * m];
        for r in 0..m {
            let (k1, _, x1) = &parts[2 * r];
            let (k2, _, x2) = &parts[2 * r + 1];
            if *k1 != PayloadKind::PositionX1 || *k2 != PayloadKind::PositionX2 || x1.len() != seeds.len() {
                return Err(LabError::Config(format!("{name}: unexpected container layout")));
            }
            for i in 0..seeds.len() {
                pos[i * m + r] = [x1[i], x2[i]];
            }
        }
        paths.push(pos);
    }
    Ok(FlowEnsemble::from_parts(
        seeds,
        man.t,
        man.nu,
        m,
        man.stochastic,
        man.master_seed,
        man.s_values,
        paths,
    )?)
}

pub fn cache_dir() -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
}

/// FNV-1a, stable across platforms and toolchains.
pub fn cache_key(text: &str) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    format!("{h:016x}")
}

/// Free-space kernels, read from or written to the cache when
/// `INVISCID_LAB_CACHE` is set.
pub fn kernels(pg: &PaddedGrid, cutoff: CutoffParams) -> Result<KernelPair> {
    let Some(root) = cache_dir() else {
        return Ok(build_kernels(pg, cutoff)?);
    };
    let key = format!("n{}_L{}_s{}", pg.n(), pg.length(), cutoff.scale);
    let path = root.join("kernels").join(format!("{}.bin", cache_key(&key)));
    if path.exists() {
        let parts = read_all(&path)?;
        let samples = KernelSamples::from_flat(parts.into_iter().map(|p| p.2).collect())?;
        return Ok(KernelPair::from_samples(pg, cutoff, &samples)?);
    }
    let samples = sample_kernels(pg, cutoff)?;
    std::fs::create_dir_all(path.parent().expect("has parent"))?;
    let tmp = path.with_extension("tmp");
    let mut w = create(&tmp)?;
    for v in samples.flat() {
        write_container(&mut w, PayloadKind::Kernel, pg.padded_n(), v)?;
    }
    w.flush()?;
    drop(w);
    std::fs::rename(&tmp, &path)?;
    Ok(KernelPair::from_samples(pg, cutoff, &samples)?)
}

/// Runs `compute` unless a trajectory stored under `key` exists in the cache.
pub fn cached_trajectory(
    key: &str,
    domain: Domain,
    compute: impl FnOnce() -> Result<Trajectory>,
) -> Result<Trajectory> {
    let Some(root) = cache_dir() else {
        return compute();
    };
    let dir = root.join("reference").join(cache_key(key));
    if dir.join("manifest.json").exists() {
        return Ok(load_trajectory(&dir)?.0);
    }
    let traj = compute()?;
    let tmp = dir.with_extension("tmp");
    if tmp.exists() {
        std::fs::remove_dir_all(&tmp)?;
    }
    save_trajectory(&traj, domain, &tmp)?;
    if !dir.exists() {
        std::fs::rename(&tmp, &dir)?;
    }
    Ok(traj)
}
