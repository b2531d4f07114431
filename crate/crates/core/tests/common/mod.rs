#![allow(dead_code)]

use inviscid_core::{Grid, SpectralField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Mean-zero trigonometric polynomial with random coefficients on modes
/// `1 <= |k|_inf <= kmax`, scaled to unit sup-norm bound `amp`.
pub fn smooth_field(grid: Grid, seed: u64, kmax: i64, amp: f64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut modes = Vec::new();
    for k1 in -kmax..=kmax {
        for k2 in 0..=kmax {
            if k2 == 0 && k1 <= 0 {
                continue;
            }
            let a: f64 = rng.random_range(-1.0..1.0);
            let b: f64 = rng.random_range(-1.0..1.0);
            let decay = 1.0 / (1.0 + (k1 * k1 + k2 * k2) as f64);
            modes.push((k1 as f64, k2 as f64, a * decay, b * decay));
        }
    }
    let total: f64 = modes.iter().map(|m| m.2.abs() + m.3.abs()).sum();
    let s = amp / total;
    SpectralField::from_fn(grid, |x, y| {
        modes
            .iter()
            .map(|&(k1, k2, a, b)| {
                let ph = 2.0 * PI * (k1 * x + k2 * y);
                s * (a * ph.cos() + b * ph.sin())
            })
            .sum()
    })
}

pub fn rel_l2(a: &SpectralField, b: &SpectralField) -> f64 {
    let d = a.sub(b).unwrap().lp_norm(2.0).unwrap();
    d / b.lp_norm(2.0).unwrap().max(1e-300)
}
