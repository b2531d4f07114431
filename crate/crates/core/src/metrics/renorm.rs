use crate::error::{Error, Result};
use crate::solver::Trajectory;
use crate::spectral::{Grid, SpectralField};
use num_complex::Complex64;

/// Quintic smoothstep: `C^2`, 0 below 0 and 1 above 1.
fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
}

fn smoothstep_d1(x: f64) -> f64 {
    if !(0.0..=1.0).contains(&x) {
        return 0.0;
    }
    30.0 * x * x * (1.0 - x) * (1.0 - x)
}

fn smoothstep_d2(x: f64) -> f64 {
    if !(0.0..=1.0).contains(&x) {
        return 0.0;
    }
    60.0 * x * (1.0 - x) * (1.0 - 2.0 * x)
}

/// Renormalization functions, all identically zero on `[-eta, eta]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Beta {
    /// `|s|^q` switched on smoothly over `eta <= |s| <= 2 eta`.
    TruncatedPower { q: f64, eta: f64 },
    /// `(|s| - eta)_+^3`, convex and `C^2`.
    Convex { eta: f64 },
    /// `1 - exp(-|s| / scale)` switched on smoothly over `[eta, 2 eta]`; bounded.
    Bounded { eta: f64, scale: f64 },
}

impl Beta {
    /// Default threshold `1e-3 * ||omega0||_inf`.
    pub fn default_eta(omega0: &SpectralField) -> f64 {
        1e-3 * omega0.max_abs()
    }

    pub fn eta(&self) -> f64 {
        match *self {
            Beta::TruncatedPower { eta, .. } | Beta::Convex { eta } | Beta::Bounded { eta, .. } => {
                eta
            }
        }
    }

    pub fn is_convex(&self) -> bool {
        matches!(self, Beta::Convex { .. })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta() > 0.0 && self.eta().is_finite()) {
            return Err(Error::BadBeta(format!(
                "eta = {} does not give a neighbourhood of zero",
                self.eta()
            )));
        }
        match *self {
            Beta::TruncatedPower { q, .. } if !(q > 0.0) => {
                Err(Error::BadBeta(format!("power q = {q}")))
            }
            Beta::Bounded { scale, .. } if !(scale > 0.0) => {
                Err(Error::BadBeta(format!("scale = {scale}")))
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        let a = s.abs();
        match *self {
            Beta::TruncatedPower { q, eta } => smoothstep((a - eta) / eta) * a.powf(q),
            Beta::Convex { eta } => (a - eta).max(0.0).powi(3),
            Beta::Bounded { eta, scale } => {
                smoothstep((a - eta) / eta) * -(-a / scale).exp_m1()
            }
        }
    }
}

/// `int beta(f) dx`.
pub fn beta_integral(f: &SpectralField, beta: Beta) -> f64 {
    f.values().iter().map(|&v| beta.eval(v)).sum::<f64>() * f.grid().cell_area()
}

/// Per-checkpoint defect of the renormalized balance.
///
/// Inviscid runs return `|int beta(w(t)) - int beta(w0)|`. Viscous runs return
/// the signed drift `int beta(w(t)) - int beta(w0)`; for convex `beta` an
/// increase beyond roundoff is an error.
pub fn renormalization_defect(traj: &Trajectory, beta: Beta) -> Result<Vec<f64>> {
    beta.validate()?;
    let base = beta_integral(traj.frame(0), beta);
    let tol = 1e-8 * base.abs().max(1.0);
    let mut out = Vec::with_capacity(traj.len());
    let mut prev = base;
    for (f, &t) in traj.frames().iter().zip(traj.times()) {
        let v = beta_integral(f, beta);
        if traj.nu() == 0.0 {
            out.push((v - base).abs());
        } else {
            if beta.is_convex() && v - prev > tol {
                return Err(Error::RenormalizationIncrease {
                    t,
                    increase: v - prev,
                });
            }
            prev = v;
            out.push(v - base);
        }
    }
    Ok(out)
}

/// `int_{|x| > r} |f|^q dx`, with `|x|` measured from the centre of the box.
pub fn tail_mass(f: &SpectralField, r: f64, q: f64) -> Result<f64> {
    if !(q >= 1.0) {
        return Err(Error::BadExponent(q));
    }
    let g = f.grid();
    let n = g.n();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            let x = g.centered_point(i, j);
            if x[0].hypot(x[1]) > r {
                s += f.values()[i * n + j].abs().powf(q);
            }
        }
    }
    Ok(s * g.cell_area())
}

/// Radial cutoff that rises on `[r, 2r]`, equals 1 on `[2r, R]` and falls to
/// 0 on `[R, 2R]`, with its measured derivative bounds.
#[derive(Debug, Clone)]
pub struct Cutoff {
    pub field: SpectralField,
    pub r: f64,
    pub big_r: f64,
    /// `r * max |grad psi|` over the grid.
    pub grad_bound: f64,
    /// `r^2 * max |Hess psi|` over the grid.
    pub hessian_bound: f64,
}

impl Cutoff {
    /// Radial profile and its first two derivatives.
    pub fn profile(r: f64, big_r: f64, rho: f64) -> (f64, f64, f64) {
        if rho < 2.0 * r {
            let x = (rho - r) / r;
            (smoothstep(x), smoothstep_d1(x) / r, smoothstep_d2(x) / (r * r))
        } else {
            let x = (rho - big_r) / big_r;
            (
                1.0 - smoothstep(x),
                -smoothstep_d1(x) / big_r,
                -smoothstep_d2(x) / (big_r * big_r),
            )
        }
    }
}

pub fn make_cutoff(r: f64, big_r: f64, grid: Grid) -> Result<Cutoff> {
    if !(r > 0.0 && big_r > 2.0 * r && big_r.is_finite()) {
        return Err(Error::BadRadii { r, big_r });
    }
    let n = grid.n();
    let mut values = vec![0.0; grid.len()];
    let (mut gmax, mut hmax) = (0.0f64, 0.0f64);
    for i in 0..n {
        for j in 0..n {
            let x = grid.centered_point(i, j);
            let rho = x[0].hypot(x[1]);
            let (v, d1, d2) = Cutoff::profile(r, big_r, rho);
            values[i * n + j] = v;
            gmax = gmax.max(d1.abs());
            // radial function: Hessian eigenvalues psi'' and psi'/rho
            if rho > 0.0 {
                hmax = hmax.max(d2.abs()).max((d1 / rho).abs());
            }
        }
    }
    Ok(Cutoff {
        field: SpectralField::from_values(grid, values)?,
        r,
        big_r,
        grad_bound: gmax * r,
        hessian_bound: hmax * r * r,
    })
}

/// `||f(. + h e_1) - f||_{L^1}` for each shift `h`, shifting spectrally.
pub fn translation_modulus(f: &SpectralField, shifts: &[f64]) -> Result<Vec<(f64, f64)>> {
    let g = f.grid();
    let n = g.n();
    shifts
        .iter()
        .map(|&h| {
            let mut c = f.coeffs().to_vec();
            for i in 0..n {
                let phase = Complex64::from_polar(1.0, g.angular(i) * h);
                for v in &mut c[i * n..(i + 1) * n] {
                    *v *= phase;
                }
            }
            let shifted = SpectralField::from_coeffs(g, c)?;
            let d = shifted.sub(f)?;
            Ok((h, d.lp_norm(1.0)?))
        })
        .collect()
}
