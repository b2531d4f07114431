use crate::error::{Error, Result};

/// `M(x) = ln(2 - ln x) - ln 2`, the Osgood integral `int_x^1 dr / (r (2 - ln r))`.
pub fn osgood_modulus(x: f64) -> f64 {
    (2.0 - x.ln()).ln() - std::f64::consts::LN_2
}

/// Inverse of [`osgood_modulus`]: `exp(2 - 2 e^m)`.
pub fn osgood_inverse(m: f64) -> f64 {
    (2.0 - 2.0 * m.exp()).exp()
}

/// Osgood bound for `y' <= C y (2 - ln y)`, `y(0) = alpha`:
/// `exp(2 - 2 e^{-C tau}) alpha^{e^{-C tau}}`.
pub fn osgood_bound(alpha: f64, c: f64, tau: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::BadAlpha(alpha));
    }
    if !(c > 0.0 && c.is_finite()) || !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::BadParams(format!("C = {c}, tau = {tau}")));
    }
    if tau == 0.0 {
        return Ok(alpha);
    }
    Ok(osgood_inverse(osgood_modulus(alpha) - c * tau))
}
