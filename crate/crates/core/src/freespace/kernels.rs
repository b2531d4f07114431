use super::padded::{KernelSpectrum, PaddedGrid};
use crate::error::{Error, Result};
use std::f64::consts::{FRAC_1_PI, LN_2, PI};

/// Smooth radial cutoff `a`: 1 on `|x| < scale`, 0 on `|x| > 2 scale`,
/// a quintic (C^2) transition in between.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffParams {
    pub scale: f64,
}

impl Default for CutoffParams {
    fn default() -> Self {
        Self { scale: 1.0 }
    }
}

impl CutoffParams {
    /// `b = 1 - a` and its first two radial derivatives.
    pub fn complement(&self, rho: f64) -> (f64, f64, f64) {
        let s = self.scale;
        let x = rho / s - 1.0;
        if x <= 0.0 {
            (0.0, 0.0, 0.0)
        } else if x >= 1.0 {
            (1.0, 0.0, 0.0)
        } else {
            let v = x * x * x * (10.0 - 15.0 * x + 6.0 * x * x);
            let d1 = 30.0 * x * x * (1.0 - x) * (1.0 - x) / s;
            let d2 = 60.0 * x * (1.0 - x) * (1.0 - 2.0 * x) / (s * s);
            (v, d1, d2)
        }
    }

    pub fn a(&self, rho: f64) -> f64 {
        1.0 - self.complement(rho).0
    }
}

/// Biot–Savart kernel `K(x) = x^perp / (2 pi |x|^2)` with `x^perp = (-x2, x1)`.
pub fn biot_savart_kernel(x: [f64; 2]) -> [f64; 2] {
    let r2 = x[0] * x[0] + x[1] * x[1];
    if r2 == 0.0 {
        return [0.0, 0.0];
    }
    let c = 0.5 * FRAC_1_PI / r2;
    [-x[1] * c, x[0] * c]
}

/// Cell average of `ln |x|` over `[-a, a]^2`.
pub fn log_cell_average(a: f64) -> f64 {
    a.ln() + 0.5 * LN_2 + 0.25 * PI - 1.5
}

/// Derivatives of the far kernel `F_i = (1 - a) K_i`: value, gradient and
/// Hessian at `x`.
pub fn far_kernel_jets(c: CutoffParams, i: usize, x: [f64; 2]) -> (f64, [f64; 2], [[f64; 2]; 2]) {
    let rho = x[0].hypot(x[1]);
    let (b, b1, b2) = c.complement(rho);
    if b == 0.0 && b1 == 0.0 {
        return (0.0, [0.0; 2], [[0.0; 2]; 2]);
    }
    let k = 0.5 * FRAC_1_PI;
    // K_i = k L / rho^2 with L linear, grad L = l
    let (l_val, l) = if i == 0 { (-x[1], [0.0, -1.0]) } else { (x[0], [1.0, 0.0]) };
    let r2 = rho * rho;
    let r4 = r2 * r2;
    let r6 = r4 * r2;
    let g = k * l_val / r2;
    let mut gj = [0.0; 2];
    let mut gjk = [[0.0; 2]; 2];
    let mut bj = [0.0; 2];
    let mut bjk = [[0.0; 2]; 2];
    for j in 0..2 {
        gj[j] = k * (l[j] / r2 - 2.0 * l_val * x[j] / r4);
        bj[j] = b1 * x[j] / rho;
        for m in 0..2 {
            let delta = if j == m { 1.0 } else { 0.0 };
            gjk[j][m] = k
                * (-2.0 * l[j] * x[m] / r4 - 2.0 * l[m] * x[j] / r4 - 2.0 * l_val * delta / r4
                    + 8.0 * l_val * x[j] * x[m] / r6);
            bjk[j][m] = b2 * x[j] * x[m] / r2 + b1 * (delta / rho - x[j] * x[m] / (r2 * rho));
        }
    }
    let mut grad = [0.0; 2];
    let mut hess = [[0.0; 2]; 2];
    for j in 0..2 {
        grad[j] = bj[j] * g + b * gj[j];
        for m in 0..2 {
            hess[j][m] = bjk[j][m] * g + bj[j] * gj[m] + bj[m] * gj[j] + b * gjk[j][m];
        }
    }
    (b * g, grad, hess)
}

/// Matrix kernel `M^i_{jk} = d_j (R F_i)_k` with `R = (-d_2, d_1)`, so that
/// `F_i * curl div (v (x) v) = M^i star (v (x) v)`.
pub fn serfati_matrix(c: CutoffParams, i: usize, x: [f64; 2]) -> [[f64; 2]; 2] {
    let (_, _, h) = far_kernel_jets(c, i, x);
    [[-h[0][1], h[0][0]], [-h[1][1], h[1][0]]]
}

/// Sampled near/far splitting of `K` and the kernels derived from the far
/// part, ready for convolution.
#[derive(Debug, Clone)]
pub struct KernelPair {
    pub cutoff: CutoffParams,
    pub near: [KernelSpectrum; 2],
    pub far: [KernelSpectrum; 2],
    /// `serfati[i][2 j + k]` is the spectrum of `M^i_{jk}`.
    pub serfati: [[KernelSpectrum; 4]; 2],
    pub laplacian: [KernelSpectrum; 2],
    /// Discrete `L^2` norm of the matrix kernels (both `i`, Frobenius).
    pub serfati_l2: f64,
    /// Discrete `L^1` and `L^2` norms of `Lap F`.
    pub laplacian_l1: f64,
    pub laplacian_l2: f64,
}

/// Real-space samples of every kernel in a [`KernelPair`], in the padded
/// layout of [`PaddedGrid::sample_kernel`].
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSamples {
    pub near: [Vec<f64>; 2],
    pub far: [Vec<f64>; 2],
    pub serfati: [[Vec<f64>; 4]; 2],
    pub laplacian: [Vec<f64>; 2],
}

impl KernelSamples {
    pub const COUNT: usize = 14;

    /// Fixed order: near, far, serfati (row-major), laplacian.
    pub fn flat(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::with_capacity(Self::COUNT);
        out.extend(self.near.iter().map(Vec::as_slice));
        out.extend(self.far.iter().map(Vec::as_slice));
        out.extend(self.serfati.iter().flatten().map(Vec::as_slice));
        out.extend(self.laplacian.iter().map(Vec::as_slice));
        out
    }

    pub fn from_flat(parts: Vec<Vec<f64>>) -> Result<Self> {
        if parts.len() != Self::COUNT {
            return Err(Error::ShapeMismatch(format!(
                "{} kernel samples, expected {}",
                parts.len(),
                Self::COUNT
            )));
        }
        let mut it = parts.into_iter();
        let mut next = || it.next().expect("length checked");
        let near = [next(), next()];
        let far = [next(), next()];
        let serfati = [
            [next(), next(), next(), next()],
            [next(), next(), next(), next()],
        ];
        let laplacian = [next(), next()];
        Ok(Self {
            near,
            far,
            serfati,
            laplacian,
        })
    }
}

fn check_cutoff(pg: &PaddedGrid, cutoff: CutoffParams) -> Result<()> {
    if !(cutoff.scale > 0.0 && cutoff.scale.is_finite()) {
        return Err(Error::BadCutoff(format!("scale = {}", cutoff.scale)));
    }
    if 2.0 * cutoff.scale > 0.5 * pg.length() || cutoff.scale < 2.0 * pg.spacing() {
        return Err(Error::BadCutoff(format!(
            "cutoff radii {}..{} do not fit a box of side {} with spacing {}",
            cutoff.scale,
            2.0 * cutoff.scale,
            pg.length(),
            pg.spacing()
        )));
    }
    Ok(())
}

pub fn sample_kernels(pg: &PaddedGrid, cutoff: CutoffParams) -> Result<KernelSamples> {
    check_cutoff(pg, cutoff)?;
    let near = [0, 1].map(|i| {
        pg.sample_kernel(|x| cutoff.a(x[0].hypot(x[1])) * biot_savart_kernel(x)[i], 0.0)
    });
    let far = [0, 1].map(|i| {
        pg.sample_kernel(
            |x| cutoff.complement(x[0].hypot(x[1])).0 * biot_savart_kernel(x)[i],
            0.0,
        )
    });
    let serfati = [0, 1].map(|i| {
        [0, 1, 2, 3].map(|e| pg.sample_kernel(|x| serfati_matrix(cutoff, i, x)[e / 2][e % 2], 0.0))
    });
    let laplacian = [0, 1].map(|i| {
        pg.sample_kernel(
            |x| {
                let (_, _, h) = far_kernel_jets(cutoff, i, x);
                h[0][0] + h[1][1]
            },
            0.0,
        )
    });
    Ok(KernelSamples {
        near,
        far,
        serfati,
        laplacian,
    })
}

impl KernelPair {
    pub fn from_samples(pg: &PaddedGrid, cutoff: CutoffParams, s: &KernelSamples) -> Result<Self> {
        check_cutoff(pg, cutoff)?;
        let np = pg.padded_n();
        if s.flat().iter().any(|v| v.len() != np * np) {
            return Err(Error::ShapeMismatch(format!(
                "kernel samples do not match padded size {np}"
            )));
        }
        let mut l2 = 0.0;
        for v in s.serfati.iter().flatten() {
            l2 += pg.kernel_lq_norm(v, 2.0).powi(2);
        }
        let (mut l1_lap, mut l2_lap) = (0.0, 0.0);
        for v in &s.laplacian {
            l1_lap += pg.kernel_lq_norm(v, 1.0);
            l2_lap += pg.kernel_lq_norm(v, 2.0).powi(2);
        }
        Ok(KernelPair {
            cutoff,
            near: [0, 1].map(|i| pg.spectrum(&s.near[i])),
            far: [0, 1].map(|i| pg.spectrum(&s.far[i])),
            serfati: [0, 1].map(|i| [0, 1, 2, 3].map(|e| pg.spectrum(&s.serfati[i][e]))),
            laplacian: [0, 1].map(|i| pg.spectrum(&s.laplacian[i])),
            serfati_l2: l2.sqrt(),
            laplacian_l1: l1_lap,
            laplacian_l2: l2_lap.sqrt(),
        })
    }
}

pub fn build_kernels(pg: &PaddedGrid, cutoff: CutoffParams) -> Result<KernelPair> {
    KernelPair::from_samples(pg, cutoff, &sample_kernels(pg, cutoff)?)
}
