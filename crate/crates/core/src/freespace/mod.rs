//! Whole-plane velocity machinery on a truncated box: free-space
//! Biot–Savart by zero-padded convolution, the near/far kernel split, star
//! convolutions and the Serfati velocity identity.
//!
//! Fields live on `Grid::periodic_box(n, L)`; node `(i, j)` sits at
//! `Grid::centered_point(i, j)` in `[-L/2, L/2)^2`.

mod kernels;
mod padded;

pub use kernels::{
    biot_savart_kernel, build_kernels, far_kernel_jets, log_cell_average, sample_kernels,
    serfati_matrix, CutoffParams, KernelPair, KernelSamples,
};
pub use padded::{KernelSpectrum, PaddedGrid};

use crate::error::{Error, Result};
use crate::solver::VelocityLaw;
use crate::spectral::{Fft2, Grid, SpectralField, VelocityField};
use num_complex::Complex64;
use std::f64::consts::FRAC_1_PI;

/// Relative size below which vorticity counts as absent near the box edge.
pub const SUPPORT_TOL: f64 = 1e-8;

/// Vorticity must vanish outside `|x| < L/4` so that the padded convolution
/// sees a compactly supported field well inside the box.
pub fn check_support(omega: &SpectralField) -> Result<()> {
    let g = omega.grid();
    let n = g.n();
    let limit = SUPPORT_TOL * omega.max_abs();
    let radius = 0.25 * g.length();
    for i in 0..n {
        for j in 0..n {
            let x = g.centered_point(i, j);
            let v = omega.values()[i * n + j].abs();
            if v > limit && x[0].hypot(x[1]) >= radius {
                return Err(Error::SupportViolation(format!(
                    "|omega| = {v:.3e} at |x| = {:.3} >= L/4",
                    x[0].hypot(x[1])
                )));
            }
        }
    }
    Ok(())
}

/// Free-space Biot–Savart law on a padded box.
#[derive(Debug, Clone)]
pub struct FreeSpaceLaw {
    pg: PaddedGrid,
    k1: KernelSpectrum,
    k2: KernelSpectrum,
    combined: KernelSpectrum,
    green: KernelSpectrum,
}

impl FreeSpaceLaw {
    pub fn new(pg: PaddedGrid) -> Self {
        let k1 = pg.kernel_spectrum(|x| biot_savart_kernel(x)[0], 0.0);
        let k2 = pg.kernel_spectrum(|x| biot_savart_kernel(x)[1], 0.0);
        let combined = PaddedGrid::combine(&k1, &k2);
        // G = -(1/2pi) ln|x|, cell-averaged at the origin
        let origin = -0.5 * FRAC_1_PI * log_cell_average(0.5 * pg.spacing());
        let green = pg.kernel_spectrum(|x| -0.5 * FRAC_1_PI * x[0].hypot(x[1]).ln(), origin);
        Self {
            pg,
            k1,
            k2,
            combined,
            green,
        }
    }

    pub fn padded(&self) -> PaddedGrid {
        self.pg
    }

    pub fn kernels(&self) -> (&KernelSpectrum, &KernelSpectrum) {
        (&self.k1, &self.k2)
    }

    /// Stream function `G * omega`.
    pub fn stream_function(&self, omega: &SpectralField) -> Result<SpectralField> {
        let psi = self.pg.convolve(&self.green, omega.values())?;
        SpectralField::from_values(omega.grid(), psi)
    }

    fn velocity_of_values(&self, w: &[f64], fft: &mut Fft2) -> (Vec<f64>, Vec<f64>) {
        self.pg.convolve_combined(&self.combined, w, fft)
    }
}

impl VelocityLaw for FreeSpaceLaw {
    fn grid(&self) -> Grid {
        self.pg.grid()
    }

    fn velocity_values(&self, omega_hat: &[Complex64], fft: &mut Fft2) -> (Vec<f64>, Vec<f64>) {
        let w = fft.inverse_real(omega_hat);
        let mut pfft = Fft2::new(self.pg.padded_n());
        self.velocity_of_values(&w, &mut pfft)
    }

    fn velocity(&self, omega: &SpectralField) -> Result<VelocityField> {
        let mut pfft = Fft2::new(self.pg.padded_n());
        let (u1, u2) = self.velocity_of_values(omega.values(), &mut pfft);
        VelocityField::new(
            SpectralField::from_values(omega.grid(), u1)?,
            SpectralField::from_values(omega.grid(), u2)?,
        )
    }

    /// `int |u|^2 = int (G * omega) omega` for zero-mean vorticity.
    fn energy(&self, omega: &SpectralField) -> Result<f64> {
        let psi = self.stream_function(omega)?;
        Ok(psi
            .values()
            .iter()
            .zip(omega.values())
            .map(|(a, b)| a * b)
            .sum::<f64>()
            * omega.grid().cell_area())
    }
}

/// `u = K * omega` by zero-padded convolution.
pub fn biot_savart_freespace(omega: &SpectralField, pg: &PaddedGrid) -> Result<VelocityField> {
    if omega.grid() != pg.grid() {
        return Err(Error::GridMismatch);
    }
    check_support(omega)?;
    FreeSpaceLaw::new(*pg).velocity(omega)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroMeanReport {
    pub zero_mean: bool,
    /// `int omega`.
    pub integral: f64,
    /// Finite kinetic energy, equivalent to zero mean for compact support.
    pub finite_energy: bool,
}

pub fn zero_mean_check(omega: &SpectralField) -> ZeroMeanReport {
    let integral = omega.integral();
    let l1 = omega.values().iter().map(|v| v.abs()).sum::<f64>() * omega.grid().cell_area();
    let zero_mean = integral.abs() <= 1e-10 * l1;
    ZeroMeanReport {
        zero_mean,
        integral,
        finite_energy: zero_mean,
    }
}

/// `sum_i k_i * f_i`: two entries for vector fields, four (row-major) for
/// matrix fields.
pub fn star_convolution(
    pg: &PaddedGrid,
    kernels: &[&KernelSpectrum],
    fields: &[&[f64]],
) -> Result<Vec<f64>> {
    if kernels.len() != fields.len() || !(kernels.len() == 2 || kernels.len() == 4) {
        return Err(Error::ShapeMismatch(format!(
            "{} kernel entries against {} field entries",
            kernels.len(),
            fields.len()
        )));
    }
    let pairs: Vec<(&KernelSpectrum, &[f64])> =
        kernels.iter().copied().zip(fields.iter().copied()).collect();
    pg.convolve_sum(&pairs)
}

/// Trapezoidal time integrals of `u (x) u` and `nu omega` on uniformly
/// spaced samples.
#[derive(Debug, Clone)]
pub struct SerfatiHistory {
    grid: Grid,
    times: Vec<f64>,
    last: Option<[Vec<f64>; 4]>,
    /// `int u1 u1, int u1 u2, int u2 u2, int nu omega`.
    integrals: [Vec<f64>; 4],
}

impl SerfatiHistory {
    pub fn new(grid: Grid) -> Self {
        Self {
            grid,
            times: Vec::new(),
            last: None,
            integrals: std::array::from_fn(|_| vec![0.0; grid.len()]),
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn end_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    pub fn push(&mut self, t: f64, u: &VelocityField, omega: &SpectralField, nu: f64) -> Result<()> {
        if u.grid() != self.grid || omega.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        match self.times.as_slice() {
            [] if t != 0.0 => {
                return Err(Error::HistoryGap(format!("history must start at 0, got {t}")))
            }
            [.., a, b] => {
                let (step, new) = (b - a, t - b);
                if (new - step).abs() > 1e-9 * step.abs().max(1e-300) {
                    return Err(Error::HistoryGap(format!(
                        "nonuniform spacing: {new} after {step}"
                    )));
                }
            }
            [.., b] if t <= *b => {
                return Err(Error::HistoryGap(format!("time {t} does not advance past {b}")))
            }
            _ => {}
        }
        let (a, b) = (u.u1.values(), u.u2.values());
        let sample = [
            a.iter().map(|x| x * x).collect::<Vec<_>>(),
            a.iter().zip(b).map(|(x, y)| x * y).collect(),
            b.iter().map(|y| y * y).collect(),
            omega.values().iter().map(|w| nu * w).collect(),
        ];
        if let (Some(prev), Some(&tp)) = (&self.last, self.times.last()) {
            let half = 0.5 * (t - tp);
            for (acc, (p, c)) in self.integrals.iter_mut().zip(prev.iter().zip(&sample)) {
                for ((s, x), y) in acc.iter_mut().zip(p).zip(c) {
                    *s += half * (x + y);
                }
            }
        }
        self.last = Some(sample);
        self.times.push(t);
        Ok(())
    }
}

/// Right-hand side of the Serfati identity
/// `u_i(t) = u_i(0) + (a K_i) * (w(t) - w(0)) - int M^i star (u (x) u) + int Lap F_i * (nu w)`.
pub fn serfati_rhs(
    u0: &VelocityField,
    omega_t: &SpectralField,
    omega_0: &SpectralField,
    history: &SerfatiHistory,
    kernels: &KernelPair,
    pg: &PaddedGrid,
) -> Result<VelocityField> {
    let g = pg.grid();
    if u0.grid() != g || omega_t.grid() != g || omega_0.grid() != g || history.grid != g {
        return Err(Error::GridMismatch);
    }
    if history.times.is_empty() {
        return Err(Error::HistoryGap("empty history".into()));
    }
    let dw = omega_t.sub(omega_0)?;
    let [uu11, uu12, uu22, nw] = &history.integrals;
    let mut out = Vec::with_capacity(2);
    for i in 0..2 {
        let s = &kernels.serfati[i];
        let nonlinear = pg.convolve_sum(&[
            (&s[0], uu11.as_slice()),
            (&s[1], uu12.as_slice()),
            (&s[2], uu12.as_slice()),
            (&s[3], uu22.as_slice()),
        ])?;
        let near = pg.convolve(&kernels.near[i], dw.values())?;
        let visc = pg.convolve(&kernels.laplacian[i], nw)?;
        let base = if i == 0 { u0.u1.values() } else { u0.u2.values() };
        let v: Vec<f64> = (0..g.len())
            .map(|k| base[k] + near[k] - nonlinear[k] + visc[k])
            .collect();
        out.push(SpectralField::from_values(g, v)?);
    }
    let u2 = out.pop().expect("two components");
    let u1 = out.pop().expect("two components");
    VelocityField::new(u1, u2)
}
