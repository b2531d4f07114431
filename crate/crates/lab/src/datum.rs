//! Library of initial vorticities.

use crate::config::{DatumSpec, Domain};
use crate::error::{LabError, Result};
use inviscid_core::{Grid, SpectralField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::f64::consts::PI;

pub const DATUM_NAMES: [&str; 6] = [
    "taylor-green",
    "random-smooth",
    "shear",
    "vortex-patch",
    "dipole",
    "lp-singular",
];

/// A mean-zero initial vorticity and, for truncated singular data, the cap
/// applied at the singularity.
#[derive(Debug, Clone)]
pub struct Datum {
    pub field: SpectralField,
    pub truncation: Option<f64>,
}

struct Params<'a> {
    name: &'a str,
    map: &'a BTreeMap<String, f64>,
}

impl Params<'_> {
    fn allow(&self, keys: &[&str]) -> Result<()> {
        match self.map.keys().find(|k| !keys.contains(&k.as_str())) {
            Some(k) => Err(LabError::BadParams(format!(
                "{}: unknown parameter `{k}` (allowed: {})",
                self.name,
                keys.join(", ")
            ))),
            None => Ok(()),
        }
    }

    fn get(&self, key: &str, default: f64) -> f64 {
        self.map.get(key).copied().unwrap_or(default)
    }

    fn positive(&self, key: &str, default: f64) -> Result<f64> {
        let v = self.get(key, default);
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(LabError::BadParams(format!("{}: {key} must be positive, got {v}", self.name)))
        }
    }
}

/// Builds the named datum on `grid`. Torus data are projected by the 2/3
/// dealiasing rule and made exactly mean-zero; free-space data live in
/// `|x| < L/4` and are corrected to zero integral by a smooth bump.
pub fn initial_datum(spec: &DatumSpec, grid: Grid, domain: Domain) -> Result<Datum> {
    let p = Params {
        name: &spec.name,
        map: &spec.params,
    };
    let torus_only = || -> Result<()> {
        if domain == Domain::Freespace {
            return Err(LabError::BadParams(format!(
                "{} is periodic and has no compactly supported version",
                spec.name
            )));
        }
        Ok(())
    };
    let (field, truncation) = match spec.name.as_str() {
        "taylor-green" => {
            p.allow(&["A"])?;
            torus_only()?;
            let a = p.get("A", 1.0);
            let f = SpectralField::from_fn(grid, |x, y| a * (2.0 * PI * x).sin() * (2.0 * PI * y).sin());
            (f, None)
        }
        "shear" => {
            p.allow(&["A", "k"])?;
            torus_only()?;
            let a = p.get("A", 1.0);
            let k = p.positive("k", 1.0)?.round();
            (SpectralField::from_fn(grid, |x, _| a * (2.0 * PI * k * x).sin()), None)
        }
        "random-smooth" => {
            p.allow(&["seed", "kmax", "amplitude"])?;
            let seed = p.get("seed", 0.0);
            if !(seed >= 0.0 && seed.fract() == 0.0) {
                return Err(LabError::BadParams(format!("random-smooth: seed must be a nonnegative integer, got {seed}")));
            }
            let kmax = p.positive("kmax", 4.0)?.round() as i64;
            let amp = p.positive("amplitude", 1.0)?;
            (random_smooth(grid, domain, seed as u64, kmax, amp), None)
        }
        "vortex-patch" => {
            p.allow(&["radius", "strength"])?;
            torus_only()?;
            let r = p.positive("radius", 0.2)?;
            let s = p.get("strength", 1.0);
            if r >= 0.5 {
                return Err(LabError::BadParams(format!("vortex-patch: radius {r} does not fit the torus")));
            }
            let f = SpectralField::from_fn(grid, |x, y| {
                if (x - 0.5).hypot(y - 0.5) < r {
                    s
                } else {
                    0.0
                }
            });
            (f, None)
        }
        "dipole" => {
            p.allow(&["separation", "width", "strength"])?;
            let scale = if domain == Domain::Torus { 1.0 } else { grid.length() / 8.0 };
            let d = p.positive("separation", 0.5 * scale)?;
            let w = p.positive("width", 0.1 * scale)?;
            let s = p.get("strength", 1.0);
            let g = |r2: f64| s * (-r2 / (2.0 * w * w)).exp();
            let f = match domain {
                Domain::Torus => SpectralField::from_fn(grid, |x, y| {
                    let a = periodic_r2([x - 0.5 - 0.5 * d, y - 0.5]);
                    let b = periodic_r2([x - 0.5 + 0.5 * d, y - 0.5]);
                    g(a) - g(b)
                }),
                Domain::Freespace => centered(grid, |x| {
                    let a = (x[0] - 0.5 * d).powi(2) + x[1] * x[1];
                    let b = (x[0] + 0.5 * d).powi(2) + x[1] * x[1];
                    g(a) - g(b)
                }),
            };
            (f, None)
        }
        "lp-singular" => {
            p.allow(&["alpha", "p", "cap", "radius", "separation"])?;
            let alpha = p.positive("alpha", f64::NAN)?;
            if let Some(&pp) = spec.params.get("p") {
                if alpha * pp >= 2.0 {
                    return Err(LabError::NotInLp { alpha, p: pp });
                }
            }
            let cap = p.positive("cap", (2.0 * grid.spacing()).powf(-alpha))?;
            let s = |r: f64| r.powf(-alpha).min(cap);
            let f = match domain {
                Domain::Torus => SpectralField::from_fn(grid, |x, y| {
                    s(periodic_r2([x - 0.5, y - 0.5]).sqrt())
                }),
                Domain::Freespace => {
                    let r0 = p.positive("radius", grid.length() / 10.0)?;
                    let sep = p.positive("separation", 2.2 * r0)?;
                    let lobe = |dx: f64, dy: f64| {
                        let r = dx.hypot(dy);
                        s(r) * plateau(r / r0)
                    };
                    centered(grid, |x| {
                        lobe(x[0] - 0.5 * sep, x[1]) - lobe(x[0] + 0.5 * sep, x[1])
                    })
                }
            };
            (f, Some(cap))
        }
        other => return Err(LabError::UnknownDatum(other.to_string())),
    };
    let field = match domain {
        Domain::Torus => field.dealias().mean_zero(),
        Domain::Freespace => {
            let f = zero_integral(field);
            inviscid_core::freespace::check_support(&f)?;
            f
        }
    };
    Ok(Datum { field, truncation })
}

fn periodic_r2(d: [f64; 2]) -> f64 {
    let w = |v: f64| v - v.round();
    w(d[0]).powi(2) + w(d[1]).powi(2)
}

fn centered(grid: Grid, f: impl Fn([f64; 2]) -> f64) -> SpectralField {
    let n = grid.n();
    let mut v = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            v.push(f(grid.centered_point(i, j)));
        }
    }
    SpectralField::from_values(grid, v).expect("grid-sized")
}

/// 1 on `[0, 1/2]`, 0 beyond 1, quintic smoothstep in between.
fn plateau(rho: f64) -> f64 {
    let s = ((rho - 0.5) / 0.5).clamp(0.0, 1.0);
    1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
}

/// `exp(-1/(1 - (r/R)^2))` with `R = 0.2 L`.
fn bump(grid: Grid) -> SpectralField {
    let big_r = 0.2 * grid.length();
    centered(grid, |x| {
        let q = (x[0] * x[0] + x[1] * x[1]) / (big_r * big_r);
        if q < 1.0 {
            (-1.0 / (1.0 - q)).exp()
        } else {
            0.0
        }
    })
}

fn zero_integral(f: SpectralField) -> SpectralField {
    let b = bump(f.grid());
    let c = f.values().iter().sum::<f64>() / b.values().iter().sum::<f64>();
    f.zip_with(&b, |x, y| x - c * y).expect("same grid")
}

fn random_smooth(grid: Grid, domain: Domain, seed: u64, kmax: i64, amp: f64) -> SpectralField {
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
    let series = |x: f64, y: f64| -> f64 {
        modes
            .iter()
            .map(|&(k1, k2, a, b)| {
                let ph = 2.0 * PI * (k1 * x + k2 * y);
                s * (a * ph.cos() + b * ph.sin())
            })
            .sum()
    };
    match domain {
        Domain::Torus => SpectralField::from_fn(grid, series),
        Domain::Freespace => {
            let window = bump(grid);
            let scale = 0.4 * grid.length();
            let modes = centered(grid, |x| series(x[0] / scale, x[1] / scale));
            let e = (1.0f64).exp();
            modes.zip_with(&window, |m, w| m * w * e).expect("same grid")
        }
    }
}
