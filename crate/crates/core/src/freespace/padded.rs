use crate::error::{Error, Result};
use crate::spectral::{Fft2, Grid};
use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Square box `[-L/2, L/2)^2` with an `n x n` grid and a `2n x 2n` buffer
/// for aperiodic (zero-padded) convolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PaddedGrid {
    grid: Grid,
}

/// Spectrum of a kernel sampled on the difference lattice, scaled so that
/// one multiply and one inverse transform give `sum_y k(x - y) f(y) h^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpectrum {
    coeffs: Vec<Complex64>,
}

impl KernelSpectrum {
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    fn add_scaled(&self, other: &Self, s: Complex64) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b * s)
                .collect(),
        }
    }
}

impl PaddedGrid {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        Ok(Self {
            grid: Grid::periodic_box(n, length)?,
        })
    }

    pub fn from_grid(grid: Grid) -> Self {
        Self { grid }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn length(&self) -> f64 {
        self.grid.length()
    }

    pub fn spacing(&self) -> f64 {
        self.grid.spacing()
    }

    /// Size of the padded transform.
    pub fn padded_n(&self) -> usize {
        2 * self.grid.n()
    }

    /// Offset `m` (in cells) stored at padded index `a`; `None` for the unused
    /// middle index.
    fn lattice_offset(&self, a: usize) -> Option<i64> {
        let n = self.n();
        match a.cmp(&n) {
            std::cmp::Ordering::Less => Some(a as i64),
            std::cmp::Ordering::Equal => None,
            std::cmp::Ordering::Greater => Some(a as i64 - 2 * n as i64),
        }
    }

    /// Samples `k` at every difference `x = m h`, `|m_i| < n`, replacing the
    /// value at the origin by `origin`.
    pub fn sample_kernel(&self, k: impl Fn([f64; 2]) -> f64, origin: f64) -> Vec<f64> {
        let np = self.padded_n();
        let h = self.spacing();
        let mut out = vec![0.0; np * np];
        for a in 0..np {
            let Some(m1) = self.lattice_offset(a) else { continue };
            for b in 0..np {
                let Some(m2) = self.lattice_offset(b) else { continue };
                out[a * np + b] = if m1 == 0 && m2 == 0 {
                    origin
                } else {
                    k([m1 as f64 * h, m2 as f64 * h])
                };
            }
        }
        out
    }

    pub fn spectrum(&self, samples: &[f64]) -> KernelSpectrum {
        let np = self.padded_n();
        let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Fft2::new(np).forward(&mut buf);
        let s = (np * np) as f64 * self.grid.cell_area();
        buf.iter_mut().for_each(|c| *c *= s);
        KernelSpectrum { coeffs: buf }
    }

    pub fn kernel_spectrum(&self, k: impl Fn([f64; 2]) -> f64, origin: f64) -> KernelSpectrum {
        self.spectrum(&self.sample_kernel(k, origin))
    }

    fn check(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} values for an {}x{} box",
                f.len(),
                self.n(),
                self.n()
            )));
        }
        Ok(())
    }

    fn padded_forward(&self, f: &[f64], fft: &mut Fft2) -> Vec<Complex64> {
        let (n, np) = (self.n(), self.padded_n());
        let mut buf = vec![ZERO; np * np];
        for i in 0..n {
            for j in 0..n {
                buf[i * np + j] = Complex64::new(f[i * n + j], 0.0);
            }
        }
        fft.forward(&mut buf);
        buf
    }

    fn crop(&self, buf: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
        let (n, np) = (self.n(), self.padded_n());
        let mut re = vec![0.0; n * n];
        let mut im = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let c = buf[i * np + j];
                re[i * n + j] = c.re;
                im[i * n + j] = c.im;
            }
        }
        (re, im)
    }

    /// Sum of `k_i * f_i`.
    pub fn convolve_sum(&self, pairs: &[(&KernelSpectrum, &[f64])]) -> Result<Vec<f64>> {
        let np = self.padded_n();
        let mut fft = Fft2::new(np);
        let mut acc = vec![ZERO; np * np];
        for (k, f) in pairs {
            self.check(f)?;
            let fh = self.padded_forward(f, &mut fft);
            for ((a, x), y) in acc.iter_mut().zip(&fh).zip(&k.coeffs) {
                *a += x * y;
            }
        }
        fft.inverse(&mut acc);
        Ok(self.crop(&acc).0)
    }

    pub fn convolve(&self, k: &KernelSpectrum, f: &[f64]) -> Result<Vec<f64>> {
        self.convolve_sum(&[(k, f)])
    }

    /// `(k1 * f, k2 * f)` with one forward and one inverse transform.
    pub fn convolve_pair(
        &self,
        k1: &KernelSpectrum,
        k2: &KernelSpectrum,
        f: &[f64],
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check(f)?;
        let mut fft = Fft2::new(self.padded_n());
        let mut buf = self.padded_forward(f, &mut fft);
        let i = Complex64::new(0.0, 1.0);
        for ((b, a), c) in buf.iter_mut().zip(&k1.coeffs).zip(&k2.coeffs) {
            *b *= a + c * i;
        }
        fft.inverse(&mut buf);
        Ok(self.crop(&buf))
    }

    /// `k1 + i k2`, precombined for repeated pair convolutions.
    pub(crate) fn combine(k1: &KernelSpectrum, k2: &KernelSpectrum) -> KernelSpectrum {
        k1.add_scaled(k2, Complex64::new(0.0, 1.0))
    }

    pub(crate) fn convolve_combined(&self, k: &KernelSpectrum, f: &[f64], fft: &mut Fft2) -> (Vec<f64>, Vec<f64>) {
        let mut buf = self.padded_forward(f, fft);
        for (b, c) in buf.iter_mut().zip(&k.coeffs) {
            *b *= c;
        }
        fft.inverse(&mut buf);
        self.crop(&buf)
    }

    /// `sum |k|^q h^2` over the sampled difference lattice, to the power `1/q`.
    pub fn kernel_lq_norm(&self, samples: &[f64], q: f64) -> f64 {
        let s: f64 = samples.iter().map(|v| v.abs().powf(q)).sum();
        (s * self.grid.cell_area()).powf(1.0 / q)
    }
}
