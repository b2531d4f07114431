use super::law::{TorusLaw, VelocityLaw};
use super::trajectory::{FrameKind, Trajectory};
use crate::error::{Error, Result};
use crate::spectral::{Fft2, Grid, SpectralField};
use num_complex::Complex64;
use std::sync::Arc;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub dt: f64,
    /// Steps between stored frames; the final time is always stored.
    pub checkpoint_every: usize,
    pub dealias: bool,
}

impl SolverSettings {
    pub fn new(dt: f64) -> Self {
        Self {
            dt,
            checkpoint_every: 1,
            dealias: true,
        }
    }

    pub fn with_checkpoint_every(mut self, every: usize) -> Self {
        self.checkpoint_every = every;
        self
    }

    pub fn with_dealias(mut self, on: bool) -> Self {
        self.dealias = on;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::BadParams(format!("dt = {} must be positive", self.dt)));
        }
        if self.checkpoint_every == 0 {
            return Err(Error::BadParams("checkpoint_every must be at least 1".into()));
        }
        Ok(())
    }
}

/// Number of uniform steps covering `[0, t_end]` with step at most `dt`.
fn step_count(t_end: f64, dt: f64) -> usize {
    if t_end <= 0.0 {
        0
    } else {
        ((t_end / dt) - 1e-9).ceil().max(1.0) as usize
    }
}

/// Integrating-factor RK4 workspace for `f_t + b . grad f = nu Lap f`.
struct Stepper {
    grid: Grid,
    dealias: bool,
    fft: Fft2,
    e_full: Vec<f64>,
    e_half: Vec<f64>,
    ik1: Vec<f64>,
    ik2: Vec<f64>,
    buf: Vec<Complex64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

impl Stepper {
    fn new(grid: Grid, nu: f64, dt: f64, dealias: bool) -> Self {
        let n = grid.n();
        let mut e_full = vec![0.0; grid.len()];
        let mut e_half = vec![0.0; grid.len()];
        for i in 0..n {
            for j in 0..n {
                let k2 = grid.angular(i).powi(2) + grid.angular(j).powi(2);
                e_full[i * n + j] = (-nu * k2 * dt).exp();
                e_half[i * n + j] = (-nu * k2 * dt * 0.5).exp();
            }
        }
        Self {
            grid,
            dealias,
            fft: Fft2::new(n),
            e_full,
            e_half,
            ik1: (0..n).map(|i| grid.angular_odd(i)).collect(),
            ik2: (0..n).map(|j| grid.angular_odd(j)).collect(),
            buf: Vec::with_capacity(grid.len()),
            d1: vec![0.0; grid.len()],
            d2: vec![0.0; grid.len()],
        }
    }

    /// Coefficients of `-(b . grad f)`, truncated when dealiasing is on.
    fn advection(&mut self, f_hat: &[Complex64], b1: &[f64], b2: &[f64]) -> Vec<Complex64> {
        let n = self.grid.n();
        let mut g1 = vec![ZERO; self.grid.len()];
        let mut g2 = vec![ZERO; self.grid.len()];
        for i in 0..n {
            for j in 0..n {
                let idx = i * n + j;
                let c = f_hat[idx];
                g1[idx] = Complex64::new(-c.im, c.re) * self.ik1[i];
                g2[idx] = Complex64::new(-c.im, c.re) * self.ik2[j];
            }
        }
        self.fft
            .inverse_pair(&g1, &g2, &mut self.buf, &mut self.d1, &mut self.d2);
        let mut prod: Vec<Complex64> = (0..self.grid.len())
            .map(|k| Complex64::new(-(b1[k] * self.d1[k] + b2[k] * self.d2[k]), 0.0))
            .collect();
        self.fft.forward(&mut prod);
        if self.dealias {
            for i in 0..n {
                for j in 0..n {
                    if !self.grid.keeps_mode(i, j) {
                        prod[i * n + j] = ZERO;
                    }
                }
            }
        }
        prod
    }

    /// One step. `rhs(stage_time_fraction, f_hat)` returns the advection term
    /// and the advecting speed used for the CFL guard.
    fn step(
        &mut self,
        f: &[Complex64],
        t: f64,
        dt: f64,
        mut rhs: impl FnMut(&mut Self, f64, &[Complex64]) -> Result<(Vec<Complex64>, f64)>,
    ) -> Result<Vec<Complex64>> {
        let limit_check = |speed: f64, h: f64| -> Result<()> {
            let limit = 0.5 * h / speed;
            if speed > 0.0 && dt > limit * (1.0 + 1e-12) {
                return Err(Error::CflViolation { t, dt, limit });
            }
            Ok(())
        };
        let h = self.grid.spacing();
        let len = f.len();
        let (k1, s1) = rhs(self, 0.0, f)?;
        limit_check(s1, h)?;
        let w2: Vec<Complex64> = (0..len)
            .map(|k| (f[k] + k1[k] * (0.5 * dt)) * self.e_half[k])
            .collect();
        let (k2, _) = rhs(self, 0.5, &w2)?;
        let w3: Vec<Complex64> = (0..len)
            .map(|k| f[k] * self.e_half[k] + k2[k] * (0.5 * dt))
            .collect();
        let (k3, _) = rhs(self, 0.5, &w3)?;
        let w4: Vec<Complex64> = (0..len)
            .map(|k| f[k] * self.e_full[k] + k3[k] * (dt * self.e_half[k]))
            .collect();
        let (k4, _) = rhs(self, 1.0, &w4)?;
        Ok((0..len)
            .map(|k| {
                let (e, e2) = (self.e_full[k], self.e_half[k]);
                f[k] * e + (k1[k] * e + (k2[k] + k3[k]) * (2.0 * e2) + k4[k]) * (dt / 6.0)
            })
            .collect())
    }
}

fn max_speed(b1: &[f64], b2: &[f64]) -> f64 {
    b1.iter()
        .zip(b2)
        .map(|(a, b)| (a * a + b * b).sqrt())
        .fold(0.0, f64::max)
}

fn vorticity_rhs(
    law: &dyn VelocityLaw,
) -> impl FnMut(&mut Stepper, f64, &[Complex64]) -> Result<(Vec<Complex64>, f64)> + '_ {
    move |st, _, w| {
        let (u1, u2) = law.velocity_values(w, &mut st.fft);
        let mut out = st.advection(w, &u1, &u2);
        out[0] = ZERO;
        Ok((out, max_speed(&u1, &u2)))
    }
}

/// One step of the periodic vorticity equation with viscosity `nu`.
pub fn step_vorticity(omega: &SpectralField, nu: f64, dt: f64) -> Result<SpectralField> {
    omega.require_mean_zero()?;
    if nu < 0.0 || !(dt >= 0.0) {
        return Err(Error::BadParams(format!("nu = {nu}, dt = {dt}")));
    }
    if dt == 0.0 {
        return Ok(omega.clone());
    }
    let law = TorusLaw { grid: omega.grid() };
    let mut st = Stepper::new(omega.grid(), nu, dt, true);
    let next = st.step(omega.coeffs(), 0.0, dt, vorticity_rhs(&law))?;
    SpectralField::from_coeffs(omega.grid(), next)
}

/// Periodic Navier–Stokes (`nu > 0`) or Euler (`nu = 0`) on `[0, t_end]`.
pub fn solve_nse(
    omega0: &SpectralField,
    nu: f64,
    t_end: f64,
    settings: SolverSettings,
) -> Result<Trajectory> {
    let law = Arc::new(TorusLaw {
        grid: omega0.grid(),
    });
    solve_with_law(law, omega0, nu, t_end, settings, None)
}

pub type Observer<'a> = &'a mut dyn FnMut(f64, &SpectralField) -> Result<()>;

/// Vorticity equation with an arbitrary velocity law. The observer, if any,
/// sees the state after every step (and at `t = 0`).
pub fn solve_with_law(
    law: Arc<dyn VelocityLaw>,
    omega0: &SpectralField,
    nu: f64,
    t_end: f64,
    settings: SolverSettings,
    mut observer: Option<Observer<'_>>,
) -> Result<Trajectory> {
    settings.validate()?;
    omega0.require_mean_zero()?;
    let grid = omega0.grid();
    if law.grid() != grid {
        return Err(Error::GridMismatch);
    }
    if nu < 0.0 || !(t_end >= 0.0) {
        return Err(Error::BadParams(format!("nu = {nu}, T = {t_end}")));
    }
    let steps = step_count(t_end, settings.dt);
    let dt = if steps == 0 { settings.dt } else { t_end / steps as f64 };
    let mut st = Stepper::new(grid, nu, dt, settings.dealias);
    let mut times = vec![0.0];
    let mut frames = vec![omega0.clone()];
    if let Some(obs) = observer.as_mut() {
        obs(0.0, omega0)?;
    }
    let mut w = omega0.coeffs().to_vec();
    for s in 1..=steps {
        let t = (s - 1) as f64 * dt;
        w = st.step(&w, t, dt, vorticity_rhs(law.as_ref()))?;
        let keep = s % settings.checkpoint_every == 0 || s == steps;
        if keep || observer.is_some() {
            let field = SpectralField::from_coeffs(grid, w.clone())?;
            let t_now = if s == steps { t_end } else { s as f64 * dt };
            if let Some(obs) = observer.as_mut() {
                obs(t_now, &field)?;
            }
            if keep {
                times.push(t_now);
                frames.push(field);
            }
        }
    }
    Trajectory::from_parts(FrameKind::Vorticity(law), nu, dt, times, frames, None)
}

/// Passive scalar `rho_t + b . grad rho = nu Lap rho` with `b` the carrier
/// velocity interpolated linearly in time between its checkpoints.
pub fn solve_linear_advection_diffusion(
    rho0: &SpectralField,
    carrier: &Trajectory,
    nu: f64,
    t_end: f64,
    settings: SolverSettings,
) -> Result<Trajectory> {
    settings.validate()?;
    let grid = rho0.grid();
    if carrier.grid() != grid {
        return Err(Error::GridMismatch);
    }
    if t_end > carrier.end_time() * (1.0 + 1e-12) {
        return Err(Error::TimeRangeExceeded {
            requested: t_end,
            end: carrier.end_time(),
        });
    }
    if nu < 0.0 || !(t_end >= 0.0) {
        return Err(Error::BadParams(format!("nu = {nu}, T = {t_end}")));
    }
    let steps = step_count(t_end, settings.dt);
    let dt = if steps == 0 { settings.dt } else { t_end / steps as f64 };
    let mut st = Stepper::new(grid, nu, dt, settings.dealias);
    let mut times = vec![0.0];
    let mut frames = vec![rho0.clone()];
    let mut r = rho0.coeffs().to_vec();
    let mean = r[0];
    for s in 1..=steps {
        let t = (s - 1) as f64 * dt;
        r = st.step(&r, t, dt, |st, frac, f| {
            let b = carrier.velocity_values_at(t + frac * dt)?;
            let mut out = st.advection(f, &b.0, &b.1);
            out[0] = ZERO;
            Ok((out, max_speed(&b.0, &b.1)))
        })?;
        r[0] = mean;
        if s % settings.checkpoint_every == 0 || s == steps {
            times.push(if s == steps { t_end } else { s as f64 * dt });
            frames.push(SpectralField::from_coeffs(grid, r.clone())?);
        }
    }
    Trajectory::from_parts(FrameKind::PassiveScalar, nu, dt, times, frames, None)
}

