use crate::error::{Error, Result};
use crate::solver::{enstrophy, Trajectory};

const SLACK: f64 = 1e-6;

fn check_viscous(traj: &Trajectory) -> Result<()> {
    if !(traj.nu() > 0.0) {
        return Err(Error::BadParams(format!(
            "bound needs nu > 0, got {}",
            traj.nu()
        )));
    }
    Ok(())
}

/// Constants of the enstrophy chain for exponent `p`:
/// `A = ||w0||_2^{-2p/(2-p)}`, `C0 = ||w0||_p^{-2p/(2-p)}` (equality case)
/// and `B = 2 nu p C0 / (2 - p)`.
fn chain_constants(traj: &Trajectory, p: f64) -> Result<(f64, f64, f64)> {
    let w0 = traj.frame(0);
    let e = -2.0 * p / (2.0 - p);
    let a = w0.lp_norm(2.0)?.powf(e);
    let c0 = w0.lp_norm(p)?.powf(e);
    let b = 2.0 * traj.nu() * p * c0 / (2.0 - p);
    Ok((a, c0, b))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnstrophyMargin {
    pub t: f64,
    pub enstrophy: f64,
    /// `(A + B t)^{-(2-p)/p}`.
    pub bound: f64,
    /// `bound - enstrophy`.
    pub margin: f64,
}

impl EnstrophyMargin {
    pub fn holds(&self) -> bool {
        self.margin >= -SLACK * self.bound
    }
}

/// Margins of `||w(t)||_2^2 <= (A + 2 nu p C0 t / (2-p))^{-(2-p)/p}`.
pub fn enstrophy_margins(traj: &Trajectory, p: f64) -> Result<Vec<EnstrophyMargin>> {
    if !(p > 1.0 && p < 2.0) {
        return Err(Error::BadExponent(p));
    }
    check_viscous(traj)?;
    let (a, _, b) = chain_constants(traj, p)?;
    Ok(traj
        .frames()
        .iter()
        .zip(traj.times())
        .map(|(f, &t)| {
            let z = enstrophy(f);
            let bound = (a + b * t).powf(-(2.0 - p) / p);
            EnstrophyMargin {
                t,
                enstrophy: z,
                bound,
                margin: bound - z,
            }
        })
        .collect())
}

/// As [`enstrophy_margins`], failing on the first violated checkpoint.
pub fn enstrophy_bound_check(traj: &Trajectory, p: f64) -> Result<Vec<EnstrophyMargin>> {
    let m = enstrophy_margins(traj, p)?;
    if let Some(bad) = m.iter().find(|m| !m.holds()) {
        return Err(Error::BoundViolation(format!(
            "enstrophy {} exceeds bound {} at t = {}",
            bad.enstrophy, bad.bound, bad.t
        )));
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyMargin {
    pub t: f64,
    pub energy: f64,
    /// `E(0) - E(t)`.
    pub drop: f64,
    /// Largest drop allowed by the integrated enstrophy bound.
    pub allowed_drop: f64,
    /// `drop`, which must be nonnegative.
    pub upper_margin: f64,
    /// `allowed_drop - drop`.
    pub lower_margin: f64,
}

impl EnergyMargin {
    pub fn holds(&self, e0: f64) -> bool {
        self.upper_margin >= -SLACK * e0 && self.lower_margin >= -SLACK * e0.max(self.allowed_drop)
    }
}

/// Sandwich `0 >= E(t) - E(0) >= -(2-p)/(2 C0 (p-1)) [(A + B t)^{2(p-1)/p} - A^{2(p-1)/p}]`.
pub fn energy_margins(traj: &Trajectory, p: f64) -> Result<Vec<EnergyMargin>> {
    if !(p > 1.0 && p < 2.0) {
        return Err(Error::BadExponent(p));
    }
    check_viscous(traj)?;
    let (a, c0, b) = chain_constants(traj, p)?;
    let k = 2.0 * (p - 1.0) / p;
    let pref = (2.0 - p) / (2.0 * c0 * (p - 1.0));
    let e0 = traj.energy(0)?;
    (0..traj.len())
        .map(|i| {
            let t = traj.times()[i];
            let e = traj.energy(i)?;
            let allowed = pref * ((a + b * t).powf(k) - a.powf(k));
            let drop = e0 - e;
            Ok(EnergyMargin {
                t,
                energy: e,
                drop,
                allowed_drop: allowed,
                upper_margin: drop,
                lower_margin: allowed - drop,
            })
        })
        .collect()
}

pub fn energy_drop_check(traj: &Trajectory, p: f64) -> Result<Vec<EnergyMargin>> {
    let m = energy_margins(traj, p)?;
    let e0 = m.first().map(|m| m.energy).unwrap_or(0.0);
    if let Some(bad) = m.iter().find(|m| !m.holds(e0)) {
        return Err(Error::BoundViolation(format!(
            "energy sandwich fails at t = {}: drop {}, allowed {}",
            bad.t, bad.drop, bad.allowed_drop
        )));
    }
    Ok(m)
}
