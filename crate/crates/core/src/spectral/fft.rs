use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

/// Two-dimensional complex FFT on an `n x n` row-major buffer.
///
/// Forward transforms are normalised by `1/n^2` so that coefficients are the
/// Fourier coefficients of the sampled function; inverse transforms are
/// unnormalised sums. Plans are cached per thread and each instance owns its
/// scratch buffer, so instances must not be shared between workers.
pub struct Fft2 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

thread_local! {
    static PLANS: RefCell<HashMap<usize, (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>)>> =
        RefCell::new(HashMap::new());
}

impl Fft2 {
    pub fn new(n: usize) -> Self {
        let (forward, inverse) = PLANS.with(|plans| {
            plans
                .borrow_mut()
                .entry(n)
                .or_insert_with(|| {
                    let mut planner = FftPlanner::new();
                    (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
                })
                .clone()
        });
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            n,
            forward,
            inverse,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn forward(&mut self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.n * self.n);
        let fft = self.forward.clone();
        self.apply(&*fft, buf);
        let scale = 1.0 / (self.n * self.n) as f64;
        for c in buf.iter_mut() {
            *c *= scale;
        }
    }

    pub fn inverse(&mut self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.n * self.n);
        let fft = self.inverse.clone();
        self.apply(&*fft, buf);
    }

    fn apply(&mut self, fft: &dyn Fft<f64>, buf: &mut [Complex64]) {
        fft.process_with_scratch(buf, &mut self.scratch);
        transpose(buf, self.n);
        fft.process_with_scratch(buf, &mut self.scratch);
        transpose(buf, self.n);
    }

    /// Coefficients of a real field.
    pub fn forward_real(&mut self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward(&mut buf);
        buf
    }

    /// Real part of the inverse transform.
    pub fn inverse_real(&mut self, coeffs: &[Complex64]) -> Vec<f64> {
        let mut buf = coeffs.to_vec();
        self.inverse(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// Inverse transform of two Hermitian coefficient arrays with one complex
    /// FFT, writing the two real fields into `out_a` and `out_b`.
    pub fn inverse_pair(
        &mut self,
        a: &[Complex64],
        b: &[Complex64],
        buf: &mut Vec<Complex64>,
        out_a: &mut [f64],
        out_b: &mut [f64],
    ) {
        buf.clear();
        buf.extend(
            a.iter()
                .zip(b)
                .map(|(x, y)| Complex64::new(x.re - y.im, x.im + y.re)),
        );
        self.inverse(buf);
        for ((c, oa), ob) in buf.iter().zip(out_a.iter_mut()).zip(out_b.iter_mut()) {
            *oa = c.re;
            *ob = c.im;
        }
    }
}

fn transpose(buf: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            buf.swap(i * n + j, j * n + i);
        }
    }
}
