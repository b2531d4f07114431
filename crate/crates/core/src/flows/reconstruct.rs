use super::ensemble::FlowEnsemble;
use super::wrap_point;
use crate::error::{Error, Result};
use crate::spectral::{sample_values, Interpolation, SpectralField};

/// `omega(t, x) = omega0(X_{t,0}(x))` on the seed grid.
pub fn lagrangian_vorticity(
    omega0: &SpectralField,
    flow: &FlowEnsemble,
    interp: Interpolation,
) -> Result<SpectralField> {
    if flow.is_stochastic() {
        return Err(Error::StochasticFlowNotAllowed);
    }
    let g = omega0.grid();
    let values = flow
        .unwrapped_endpoints()
        .iter()
        .map(|&x| sample_values(omega0.values(), g, x, interp))
        .collect();
    SpectralField::from_values(flow.seeds().grid(), values)
}

/// Replica average of `omega0(X^nu_{t,0}(x))` with its standard error.
#[derive(Debug, Clone)]
pub struct FeynmanKac {
    pub mean: SpectralField,
    pub std_error: SpectralField,
}

impl FeynmanKac {
    /// Average of the per-point standard errors.
    pub fn mean_std_error(&self) -> f64 {
        let v = self.std_error.values();
        v.iter().sum::<f64>() / v.len() as f64
    }
}

pub fn feynman_kac_vorticity(
    omega0: &SpectralField,
    flow: &FlowEnsemble,
    interp: Interpolation,
) -> Result<FeynmanKac> {
    if !flow.is_stochastic() {
        return Err(Error::DeterministicFlowNotAllowed);
    }
    let g = omega0.grid();
    let m = flow.replicas();
    let ends = flow.unwrapped_endpoints();
    let mut mean = Vec::with_capacity(flow.seeds().len());
    let mut se = Vec::with_capacity(flow.seeds().len());
    for chunk in ends.chunks_exact(m) {
        let (mut s1, mut s2) = (0.0, 0.0);
        for &x in chunk {
            let v = sample_values(omega0.values(), g, x, interp);
            s1 += v;
            s2 += v * v;
        }
        let mu = s1 / m as f64;
        let var = if m > 1 {
            ((s2 - m as f64 * mu * mu) / (m - 1) as f64).max(0.0)
        } else {
            0.0
        };
        mean.push(mu);
        se.push((var / m as f64).sqrt());
    }
    let grid = flow.seeds().grid();
    Ok(FeynmanKac {
        mean: SpectralField::from_values(grid, mean)?,
        std_error: SpectralField::from_values(grid, se)?,
    })
}

/// Largest relative deviation of cell counts from the uniform count when the
/// points are binned into `cells x cells` squares.
pub fn point_cloud_defect(points: impl IntoIterator<Item = [f64; 2]>, cells: usize) -> f64 {
    if cells == 0 {
        return 0.0;
    }
    let mut counts = vec![0u64; cells * cells];
    let mut total = 0u64;
    for p in points {
        let p = wrap_point(p);
        let a = ((p[0] * cells as f64) as usize).min(cells - 1);
        let b = ((p[1] * cells as f64) as usize).min(cells - 1);
        counts[a * cells + b] += 1;
        total += 1;
    }
    if total == 0 {
        return 0.0;
    }
    let expected = total as f64 / (cells * cells) as f64;
    counts
        .iter()
        .map(|&c| (c as f64 - expected).abs() / expected)
        .fold(0.0, f64::max)
}

/// Cell-count defect of the endpoints `X_{t,0}`, replicas pooled.
pub fn measure_preservation_defect(flow: &FlowEnsemble, cells: usize) -> f64 {
    point_cloud_defect(flow.unwrapped_endpoints().iter().copied(), cells)
}
