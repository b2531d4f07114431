use super::fft::Fft2;
use super::grid::Grid;
use num_complex::Complex64;

/// Off-grid evaluation scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interpolation {
    /// Periodic bilinear interpolation of nodal values.
    #[default]
    Bilinear,
    /// Tensor-product four-point Lagrange interpolation (fourth order).
    Cubic,
    /// Trigonometric interpolation; exact for band-limited fields, O(n^2) per point.
    Spectral,
}

#[inline]
fn locate(x: f64, inv_h: f64, mask: usize) -> (usize, f64) {
    let s = x * inv_h;
    let fl = s.floor();
    let t = s - fl;
    // rem_euclid through the power-of-two mask
    ((fl as i64 as usize) & mask, t)
}

#[inline]
fn cubic_weights(t: f64) -> [f64; 4] {
    let tm1 = t - 1.0;
    let tm2 = t - 2.0;
    let tp1 = t + 1.0;
    [
        -t * tm1 * tm2 / 6.0,
        tp1 * tm1 * tm2 / 2.0,
        -tp1 * t * tm2 / 2.0,
        tp1 * t * tm1 / 6.0,
    ]
}

/// Samples the nodal values of a field on `grid` at `x`, wrapping periodically.
pub fn sample_values(values: &[f64], grid: Grid, x: [f64; 2], interp: Interpolation) -> f64 {
    let n = grid.n();
    let mask = n - 1;
    let inv_h = 1.0 / grid.spacing();
    match interp {
        Interpolation::Bilinear => {
            let (i0, t1) = locate(x[0], inv_h, mask);
            let (j0, t2) = locate(x[1], inv_h, mask);
            let i1 = (i0 + 1) & mask;
            let j1 = (j0 + 1) & mask;
            let f00 = values[i0 * n + j0];
            let f01 = values[i0 * n + j1];
            let f10 = values[i1 * n + j0];
            let f11 = values[i1 * n + j1];
            let a = f00 + t2 * (f01 - f00);
            let b = f10 + t2 * (f11 - f10);
            a + t1 * (b - a)
        }
        Interpolation::Cubic => {
            let (i0, t1) = locate(x[0], inv_h, mask);
            let (j0, t2) = locate(x[1], inv_h, mask);
            let w1 = cubic_weights(t1);
            let w2 = cubic_weights(t2);
            let mut acc = 0.0;
            for (a, wa) in w1.iter().enumerate() {
                let i = (i0 + n + a - 1) & mask;
                let row = &values[i * n..(i + 1) * n];
                let mut r = 0.0;
                for (b, wb) in w2.iter().enumerate() {
                    r += wb * row[(j0 + n + b - 1) & mask];
                }
                acc += wa * r;
            }
            acc
        }
        Interpolation::Spectral => {
            let c = Fft2::new(n).forward_real(values);
            spectral_eval(&c, grid, x)
        }
    }
}

pub(crate) fn spectral_eval(c: &[Complex64], grid: Grid, x: [f64; 2]) -> f64 {
    let n = grid.n();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        let ei = Complex64::from_polar(1.0, grid.angular(i) * x[0]);
        let wi = if i == n / 2 { Complex64::new(ei.re, 0.0) } else { ei };
        let mut row = Complex64::new(0.0, 0.0);
        for j in 0..n {
            let ej = Complex64::from_polar(1.0, grid.angular(j) * x[1]);
            let wj = if j == n / 2 { Complex64::new(ej.re, 0.0) } else { ej };
            row += c[i * n + j] * wj;
        }
        acc += row * wi;
    }
    acc.re
}
