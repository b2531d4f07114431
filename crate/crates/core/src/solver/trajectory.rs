use super::law::{TorusLaw, VelocityLaw};
use crate::error::{Error, Result};
use crate::spectral::{curl, Grid, SpectralField, VelocityField};
use std::sync::{Arc, OnceLock};

/// What the stored frames represent.
#[derive(Debug, Clone)]
pub enum FrameKind {
    /// Vorticity frames; velocities follow from the law.
    Vorticity(Arc<dyn VelocityLaw>),
    /// Passive scalar frames, no associated velocity.
    PassiveScalar,
}

/// Checkpointed solution on `[0, T]`, immutable once built.
#[derive(Debug, Clone)]
pub struct Trajectory {
    kind: FrameKind,
    nu: f64,
    dt: f64,
    times: Vec<f64>,
    frames: Vec<SpectralField>,
    velocities: Vec<OnceLock<VelocityField>>,
}

impl Trajectory {
    pub fn from_parts(
        kind: FrameKind,
        nu: f64,
        dt: f64,
        times: Vec<f64>,
        frames: Vec<SpectralField>,
        velocities: Option<Vec<VelocityField>>,
    ) -> Result<Self> {
        if times.is_empty() || times.len() != frames.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} times for {} frames",
                times.len(),
                frames.len()
            )));
        }
        if times[0] != 0.0 || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::BadParams(
                "checkpoint times must start at 0 and increase strictly".into(),
            ));
        }
        let grid = frames[0].grid();
        if frames.iter().any(|f| f.grid() != grid) {
            return Err(Error::GridMismatch);
        }
        if let FrameKind::Vorticity(law) = &kind {
            if law.grid() != grid {
                return Err(Error::GridMismatch);
            }
            for f in &frames {
                f.require_mean_zero()?;
            }
        }
        let cells: Vec<OnceLock<VelocityField>> = match velocities {
            Some(v) => {
                if v.len() != frames.len() || v.iter().any(|u| u.grid() != grid) {
                    return Err(Error::ShapeMismatch("velocity frames".into()));
                }
                v.into_iter().map(OnceLock::from).collect()
            }
            None => frames.iter().map(|_| OnceLock::new()).collect(),
        };
        Ok(Self {
            kind,
            nu,
            dt,
            times,
            frames,
            velocities: cells,
        })
    }

    /// Trajectory driven by prescribed periodic velocity frames; the
    /// vorticity frames are their curls.
    pub fn from_velocities(times: Vec<f64>, velocities: Vec<VelocityField>, nu: f64) -> Result<Self> {
        let first = velocities
            .first()
            .ok_or_else(|| Error::ShapeMismatch("no velocity frames".into()))?;
        let grid = first.grid();
        let frames = velocities.iter().map(curl).collect::<Result<Vec<_>>>()?;
        let dt = times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        Self::from_parts(
            FrameKind::Vorticity(Arc::new(TorusLaw { grid })),
            nu,
            dt,
            times,
            frames,
            Some(velocities),
        )
    }

    /// A time-independent velocity held on the checkpoints `times`.
    pub fn steady(velocity: VelocityField, times: Vec<f64>) -> Result<Self> {
        let v = vec![velocity; times.len()];
        Self::from_velocities(times, v, 0.0)
    }

    pub fn grid(&self) -> Grid {
        self.frames[0].grid()
    }

    pub fn kind(&self) -> &FrameKind {
        &self.kind
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Time step actually used by the integrator.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn frames(&self) -> &[SpectralField] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().expect("nonempty")
    }

    pub fn frame(&self, i: usize) -> &SpectralField {
        &self.frames[i]
    }

    pub fn last(&self) -> &SpectralField {
        self.frames.last().expect("nonempty")
    }

    pub fn law(&self) -> Option<&Arc<dyn VelocityLaw>> {
        match &self.kind {
            FrameKind::Vorticity(l) => Some(l),
            FrameKind::PassiveScalar => None,
        }
    }

    /// Velocity of checkpoint `i`, computed on first use.
    pub fn velocity(&self, i: usize) -> Result<&VelocityField> {
        let law = self
            .law()
            .ok_or_else(|| Error::BadParams("passive scalar trajectory has no velocity".into()))?;
        if let Some(u) = self.velocities[i].get() {
            return Ok(u);
        }
        let u = law.velocity(&self.frames[i])?;
        Ok(self.velocities[i].get_or_init(|| u))
    }

    /// Kinetic energy at checkpoint `i`.
    pub fn energy(&self, i: usize) -> Result<f64> {
        match self.velocities[i].get() {
            Some(u) => Ok(u.energy()),
            None => self
                .law()
                .ok_or_else(|| Error::BadParams("passive scalar trajectory has no energy".into()))?
                .energy(&self.frames[i]),
        }
    }

    /// Checkpoints `(i, i + 1)` bracketing `t` and the weight of `i + 1`.
    pub fn bracket(&self, t: f64) -> Result<(usize, usize, f64)> {
        let end = self.end_time();
        let tol = 1e-12 * end.max(1.0);
        if !(t >= -tol && t <= end + tol) {
            return Err(Error::TimeRangeExceeded { requested: t, end });
        }
        if self.times.len() == 1 {
            return Ok((0, 0, 0.0));
        }
        let t = t.clamp(0.0, end);
        let k = self.times.partition_point(|&s| s <= t);
        let i = k.clamp(1, self.times.len() - 1) - 1;
        let theta = ((t - self.times[i]) / (self.times[i + 1] - self.times[i])).clamp(0.0, 1.0);
        Ok((i, i + 1, theta))
    }

    /// Physical velocity values at time `t`, linear in time between checkpoints.
    pub fn velocity_values_at(&self, t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let (i, j, th) = self.bracket(t)?;
        let a = self.velocity(i)?;
        if th == 0.0 {
            return Ok((a.u1.values().to_vec(), a.u2.values().to_vec()));
        }
        let b = self.velocity(j)?;
        let mix = |x: &[f64], y: &[f64]| -> Vec<f64> {
            x.iter().zip(y).map(|(p, q)| (1.0 - th) * p + th * q).collect()
        };
        Ok((
            mix(a.u1.values(), b.u1.values()),
            mix(a.u2.values(), b.u2.values()),
        ))
    }

    /// Vorticity at time `t`, linear in time between checkpoints.
    pub fn frame_at(&self, t: f64) -> Result<SpectralField> {
        let (i, j, th) = self.bracket(t)?;
        if th == 0.0 {
            return Ok(self.frames[i].clone());
        }
        self.frames[i].zip_with(&self.frames[j], |a, b| (1.0 - th) * a + th * b)
    }
}
