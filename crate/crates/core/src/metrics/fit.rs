use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMode {
    /// `err = prefactor * nu^exponent`, least squares in log-log space.
    Power,
    /// `err = offset + prefactor / |ln nu|`, linear least squares.
    Log,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub mode: FitMode,
    pub nus: Vec<f64>,
    pub errors: Vec<f64>,
    /// Power mode only.
    pub exponent: Option<f64>,
    pub prefactor: f64,
    /// Log mode only.
    pub offset: Option<f64>,
    /// Largest deviation between model and data (log-space in power mode).
    pub residual: f64,
}

fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

pub fn fit_rate(nus: &[f64], errors: &[f64], mode: FitMode) -> Result<RateFit> {
    if nus.len() != errors.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} viscosities for {} errors",
            nus.len(),
            errors.len()
        )));
    }
    if nus.len() < 3 {
        return Err(Error::InsufficientPoints {
            needed: 3,
            got: nus.len(),
        });
    }
    if nus.iter().any(|&v| !(v > 0.0 && v < 1.0)) || nus.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::BadParams(
            "viscosities must lie in (0, 1) and decrease strictly".into(),
        ));
    }
    for (index, &value) in errors.iter().enumerate() {
        let bad = match mode {
            FitMode::Power => !(value > 0.0),
            FitMode::Log => !(value >= 0.0),
        };
        if bad || !value.is_finite() {
            return Err(Error::NonPositiveError { index, value });
        }
    }
    let fit = match mode {
        FitMode::Power => {
            let x: Vec<f64> = nus.iter().map(|v| v.ln()).collect();
            let y: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
            let (slope, icept) = least_squares(&x, &y);
            let residual = x
                .iter()
                .zip(&y)
                .map(|(a, b)| (icept + slope * a - b).abs())
                .fold(0.0, f64::max);
            RateFit {
                mode,
                nus: nus.to_vec(),
                errors: errors.to_vec(),
                exponent: Some(slope),
                prefactor: icept.exp(),
                offset: None,
                residual,
            }
        }
        FitMode::Log => {
            let x: Vec<f64> = nus.iter().map(|v| 1.0 / v.ln().abs()).collect();
            let (slope, icept) = least_squares(&x, errors);
            let mut fit = RateFit {
                mode,
                nus: nus.to_vec(),
                errors: errors.to_vec(),
                exponent: None,
                prefactor: slope,
                offset: Some(icept),
                residual: 0.0,
            };
            fit.residual = fit.residuals().iter().map(|r| r.abs()).fold(0.0, f64::max);
            fit
        }
    };
    Ok(fit)
}

impl RateFit {
    /// Model value at `nu`.
    pub fn predict(&self, nu: f64) -> f64 {
        match self.mode {
            FitMode::Power => self.prefactor * nu.powf(self.exponent.unwrap_or(0.0)),
            FitMode::Log => self.offset.unwrap_or(0.0) + self.prefactor / nu.ln().abs(),
        }
    }

    /// `model - measured` at every ladder point.
    pub fn residuals(&self) -> Vec<f64> {
        self.nus
            .iter()
            .zip(&self.errors)
            .map(|(&nu, &e)| self.predict(nu) - e)
            .collect()
    }

    /// Log mode: the same slope with the offset raised until the model lies
    /// on or above every measured error.
    pub fn upper_envelope(&self) -> RateFit {
        let mut env = self.clone();
        if self.mode == FitMode::Log {
            let lift = self.residuals().iter().map(|r| -r).fold(0.0, f64::max);
            let mut offset = self.offset.unwrap_or(0.0) + lift;
            env.offset = Some(offset);
            let scale = self.errors.iter().fold(offset.abs(), |m, e| m.max(e.abs()));
            while env.residuals().iter().any(|&r| r < 0.0) {
                offset += scale.max(f64::MIN_POSITIVE) * f64::EPSILON;
                env.offset = Some(offset);
            }
            env.residual = env.residuals().iter().map(|r| r.abs()).fold(0.0, f64::max);
        }
        env
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const NUS: [f64; 4] = [1e-2, 3e-3, 1e-3, 3e-4];

    #[test]
    fn recovers_exact_power_laws() {
        let e: Vec<f64> = NUS.iter().map(|v| v.powf(0.4)).collect();
        let f = fit_rate(&NUS, &e, FitMode::Power).unwrap();
        assert!((f.exponent.unwrap() - 0.4).abs() < 1e-12);
        assert!(f.residual <= 1e-12);
        let e: Vec<f64> = NUS.iter().map(|v| 3.0 * v.powf(0.25)).collect();
        let f = fit_rate(&NUS, &e, FitMode::Power).unwrap();
        assert!((f.exponent.unwrap() - 0.25).abs() < 1e-12);
        assert!((f.prefactor - 3.0).abs() < 1e-11);
    }

    #[test]
    fn recovers_log_envelope() {
        let e: Vec<f64> = NUS.iter().map(|v| 0.1 + 2.0 / v.ln().abs()).collect();
        let f = fit_rate(&NUS, &e, FitMode::Log).unwrap();
        assert!((f.offset.unwrap() - 0.1).abs() < 1e-12);
        assert!((f.prefactor - 2.0).abs() < 1e-12);
        assert!(f.residual <= 1e-12);
    }

    #[test]
    fn envelope_residuals_are_nonnegative() {
        let e = [0.5, 0.31, 0.3, 0.12];
        let env = fit_rate(&NUS, &e, FitMode::Log).unwrap().upper_envelope();
        assert!(env.residuals().iter().all(|&r| r >= 0.0));
        assert!(env.residuals().iter().any(|&r| r.abs() < 1e-15));
    }

    #[test]
    fn input_errors() {
        assert!(matches!(
            fit_rate(&NUS[..2], &[1.0, 0.5], FitMode::Power),
            Err(Error::InsufficientPoints { needed: 3, got: 2 })
        ));
        assert!(matches!(
            fit_rate(&NUS, &[1.0, 0.5, 0.0, 0.1], FitMode::Power),
            Err(Error::NonPositiveError { index: 2, .. })
        ));
        assert!(fit_rate(&[1e-3, 1e-2, 1e-4], &[1.0; 3], FitMode::Power).is_err());
    }
}
