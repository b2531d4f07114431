use super::ensemble::{FlowEnsemble, SeedGrid};
use crate::error::{Error, Result};
use crate::solver::Trajectory;
use crate::spectral::{sample_values, Grid, Interpolation};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

const CHUNK: usize = 1024;

#[derive(Debug, Clone, Default)]
pub struct FlowOptions {
    /// Extra intermediate times to store besides `t` and `0`; rounded to the
    /// nearest step.
    pub store_s: Vec<f64>,
    /// Scheme used to sample the carrier velocity off the grid.
    pub interp: Interpolation,
}

/// Time-interpolated carrier velocity at one time: frames and weight.
#[derive(Clone, Copy)]
struct Slot {
    i: usize,
    j: usize,
    theta: f64,
}

struct Carrier<'a> {
    grid: Grid,
    u1: Vec<&'a [f64]>,
    u2: Vec<&'a [f64]>,
    interp: Interpolation,
}

impl<'a> Carrier<'a> {
    fn new(traj: &'a Trajectory, interp: Interpolation) -> Result<Self> {
        let mut u1 = Vec::with_capacity(traj.len());
        let mut u2 = Vec::with_capacity(traj.len());
        for i in 0..traj.len() {
            let u = traj.velocity(i)?;
            u1.push(u.u1.values());
            u2.push(u.u2.values());
        }
        Ok(Self {
            grid: traj.grid(),
            u1,
            u2,
            interp,
        })
    }

    #[inline]
    fn at(&self, slot: Slot, x: [f64; 2]) -> [f64; 2] {
        let s = |f: &[f64]| sample_values(f, self.grid, x, self.interp);
        let a = [s(self.u1[slot.i]), s(self.u2[slot.i])];
        if slot.theta == 0.0 {
            return a;
        }
        let b = [s(self.u1[slot.j]), s(self.u2[slot.j])];
        let th = slot.theta;
        [(1.0 - th) * a[0] + th * b[0], (1.0 - th) * a[1] + th * b[1]]
    }
}

struct Schedule {
    h: f64,
    steps: usize,
    /// Step indices after which positions are stored, with their times.
    store: Vec<(usize, f64)>,
}

fn schedule(carrier: &Trajectory, t: f64, extra: &[f64]) -> Result<Schedule> {
    let end = carrier.end_time();
    if !(t >= 0.0) || t > end * (1.0 + 1e-12) {
        return Err(Error::TimeRangeExceeded { requested: t, end });
    }
    let dt = if carrier.dt() > 0.0 { carrier.dt() } else { t.max(1.0) };
    let steps = if t == 0.0 {
        0
    } else {
        ((t / dt) - 1e-9).ceil().max(1.0) as usize
    };
    let h = if steps == 0 { 0.0 } else { t / steps as f64 };
    let mut idx: Vec<usize> = vec![0, steps];
    for &s in extra {
        if !(0.0..=t).contains(&s) {
            return Err(Error::TimeRangeExceeded { requested: s, end: t });
        }
        if h > 0.0 {
            idx.push(((t - s) / h).round() as usize);
        }
    }
    idx.sort_unstable();
    idx.dedup();
    let store = idx
        .into_iter()
        .map(|k| (k, if k == steps { 0.0 } else { t - k as f64 * h }))
        .collect();
    Ok(Schedule { h, steps, store })
}

fn slots(carrier: &Trajectory, times: impl Iterator<Item = f64>) -> Result<Vec<Slot>> {
    times
        .map(|s| {
            let (i, j, theta) = carrier.bracket(s)?;
            Ok(Slot { i, j, theta })
        })
        .collect()
}

/// Runs `advance(k, x, step)` for every particle, storing positions after the
/// scheduled steps. Particles are independent, so chunks run in parallel and
/// the result does not depend on scheduling.
fn run_particles<F, S>(
    count: usize,
    sched: &Schedule,
    init: impl Fn(usize) -> ([f64; 2], S) + Sync,
    advance: F,
) -> Vec<Vec<[f64; 2]>>
where
    F: Fn(&mut S, [f64; 2], usize) -> [f64; 2] + Sync,
{
    let n_store = sched.store.len();
    let chunks: Vec<Vec<Vec<[f64; 2]>>> = (0..count.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(count);
            let mut out = vec![Vec::with_capacity(hi - lo); n_store];
            for k in lo..hi {
                let (mut x, mut state) = init(k);
                let mut next = 0;
                for step in 0..=sched.steps {
                    if step > 0 {
                        x = advance(&mut state, x, step - 1);
                    }
                    if next < n_store && sched.store[next].0 == step {
                        out[next].push(x);
                        next += 1;
                    }
                }
            }
            out
        })
        .collect();
    let mut paths = vec![Vec::with_capacity(count); n_store];
    for chunk in chunks {
        for (dst, src) in paths.iter_mut().zip(chunk) {
            dst.extend(src);
        }
    }
    paths
}

/// Backward flow of `dX/ds = u(s, X)`, `X_{t,t} = x`, integrated with RK4
/// from `s = t` down to `s = 0` using the carrier's time step.
pub fn integrate_backward_flow(carrier: &Trajectory, t: f64, seeds: SeedGrid) -> Result<FlowEnsemble> {
    integrate_backward_flow_with(carrier, t, seeds, &FlowOptions::default())
}

pub fn integrate_backward_flow_with(
    carrier: &Trajectory,
    t: f64,
    seeds: SeedGrid,
    opts: &FlowOptions,
) -> Result<FlowEnsemble> {
    let sched = schedule(carrier, t, &opts.store_s)?;
    let field = Carrier::new(carrier, opts.interp)?;
    let h = sched.h;
    let stage = slots(
        carrier,
        (0..sched.steps).flat_map(|k| {
            let s = t - k as f64 * h;
            [s, s - 0.5 * h, (s - h).max(0.0)]
        }),
    )?;
    let paths = run_particles(
        seeds.len(),
        &sched,
        |k| (seeds.point(k), ()),
        |_, x, step| {
            let [a, m, b] = [stage[3 * step], stage[3 * step + 1], stage[3 * step + 2]];
            let k1 = field.at(a, x);
            let k2 = field.at(m, [x[0] - 0.5 * h * k1[0], x[1] - 0.5 * h * k1[1]]);
            let k3 = field.at(m, [x[0] - 0.5 * h * k2[0], x[1] - 0.5 * h * k2[1]]);
            let k4 = field.at(b, [x[0] - h * k3[0], x[1] - h * k3[1]]);
            [
                x[0] - h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
                x[1] - h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
            ]
        },
    );
    FlowEnsemble::from_parts(
        seeds,
        t,
        0.0,
        1,
        false,
        0,
        sched.store.iter().map(|s| s.1).collect(),
        paths,
    )
}

/// Stochastic backward flow `dX = u(s, X) ds + sqrt(2 nu) dW_s` by
/// Euler–Maruyama. Replica `r` of seed `i` draws its increments from the
/// ChaCha8 stream `i * replicas + r` of `master_seed`.
pub fn integrate_stochastic_flow(
    carrier: &Trajectory,
    t: f64,
    nu: f64,
    seeds: SeedGrid,
    replicas: usize,
    master_seed: u64,
) -> Result<FlowEnsemble> {
    integrate_stochastic_flow_with(carrier, t, nu, seeds, replicas, master_seed, &FlowOptions::default())
}

pub fn integrate_stochastic_flow_with(
    carrier: &Trajectory,
    t: f64,
    nu: f64,
    seeds: SeedGrid,
    replicas: usize,
    master_seed: u64,
    opts: &FlowOptions,
) -> Result<FlowEnsemble> {
    if !(nu > 0.0 && nu.is_finite()) || replicas == 0 {
        return Err(Error::BadParams(format!("nu = {nu}, replicas = {replicas}")));
    }
    let sched = schedule(carrier, t, &opts.store_s)?;
    let field = Carrier::new(carrier, opts.interp)?;
    let h = sched.h;
    let sigma = (2.0 * nu * h).sqrt();
    let stage = slots(carrier, (0..sched.steps).map(|k| t - k as f64 * h))?;
    let paths = run_particles(
        seeds.len() * replicas,
        &sched,
        |k| {
            let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
            rng.set_stream(k as u64);
            (seeds.point(k / replicas), rng)
        },
        |rng, x, step| {
            let v = field.at(stage[step], x);
            let g1: f64 = StandardNormal.sample(rng);
            let g2: f64 = StandardNormal.sample(rng);
            [x[0] - h * v[0] + sigma * g1, x[1] - h * v[1] + sigma * g2]
        },
    );
    FlowEnsemble::from_parts(
        seeds,
        t,
        nu,
        replicas,
        true,
        master_seed,
        sched.store.iter().map(|s| s.1).collect(),
        paths,
    )
}
