use super::wrap_point;
use crate::error::{Error, Result};
use crate::spectral::Grid;

/// Uniform `n x n` grid of seed points on the unit torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedGrid {
    n: usize,
}

impl SeedGrid {
    pub fn new(n: usize) -> Result<Self> {
        Grid::torus(n)?;
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn grid(&self) -> Grid {
        Grid::torus(self.n).expect("validated")
    }

    pub fn point(&self, idx: usize) -> [f64; 2] {
        let h = 1.0 / self.n as f64;
        [(idx / self.n) as f64 * h, (idx % self.n) as f64 * h]
    }
}

/// Particle paths `X_{t,s}(x)` stored at selected times `s`.
///
/// Particle `k = seed * replicas + r`. Positions are kept unwrapped so that
/// displacements have no spurious jumps; wrapped views are computed on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowEnsemble {
    seeds: SeedGrid,
    t: f64,
    nu: f64,
    replicas: usize,
    stochastic: bool,
    master_seed: u64,
    s_values: Vec<f64>,
    paths: Vec<Vec<[f64; 2]>>,
}

impl FlowEnsemble {
    /// `s_values` must start at `t` and decrease strictly; `paths[i]` holds
    /// the unwrapped positions at `s_values[i]`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        seeds: SeedGrid,
        t: f64,
        nu: f64,
        replicas: usize,
        stochastic: bool,
        master_seed: u64,
        s_values: Vec<f64>,
        paths: Vec<Vec<[f64; 2]>>,
    ) -> Result<Self> {
        if replicas == 0 || (!stochastic && replicas != 1) {
            return Err(Error::BadParams(format!("{replicas} replicas")));
        }
        if s_values.is_empty()
            || s_values[0] != t
            || s_values.windows(2).any(|w| w[1] >= w[0])
            || s_values.len() != paths.len()
        {
            return Err(Error::BadParams("stored times must start at t and decrease".into()));
        }
        let count = seeds.len() * replicas;
        if paths.iter().any(|p| p.len() != count) {
            return Err(Error::ShapeMismatch(format!("expected {count} positions per time")));
        }
        Ok(Self {
            seeds,
            t,
            nu,
            replicas,
            stochastic,
            master_seed,
            s_values,
            paths,
        })
    }

    pub fn seeds(&self) -> SeedGrid {
        self.seeds
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn replicas(&self) -> usize {
        self.replicas
    }

    pub fn is_stochastic(&self) -> bool {
        self.stochastic
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn s_values(&self) -> &[f64] {
        &self.s_values
    }

    pub fn particle_count(&self) -> usize {
        self.seeds.len() * self.replicas
    }

    /// Seed point of particle `k`.
    pub fn seed_of(&self, k: usize) -> [f64; 2] {
        self.seeds.point(k / self.replicas)
    }

    fn index_of(&self, s: f64) -> Result<usize> {
        let tol = 1e-9 * self.t.max(1.0);
        self.s_values
            .iter()
            .position(|&v| (v - s).abs() <= tol)
            .ok_or(Error::TimeRangeExceeded {
                requested: s,
                end: self.t,
            })
    }

    /// Unwrapped positions at a stored time `s`.
    pub fn unwrapped_at(&self, s: f64) -> Result<&[[f64; 2]]> {
        Ok(&self.paths[self.index_of(s)?])
    }

    /// Positions at a stored time `s`, wrapped into `[0, 1)^2`.
    pub fn positions_at(&self, s: f64) -> Result<Vec<[f64; 2]>> {
        Ok(self.unwrapped_at(s)?.iter().map(|&p| wrap_point(p)).collect())
    }

    /// Wrapped endpoints `X_{t,0}`.
    pub fn endpoints(&self) -> Vec<[f64; 2]> {
        self.paths
            .last()
            .expect("nonempty")
            .iter()
            .map(|&p| wrap_point(p))
            .collect()
    }

    pub fn unwrapped_endpoints(&self) -> &[[f64; 2]] {
        self.paths.last().expect("nonempty")
    }
}
