use crate::error::{Error, Result};
use crate::flows::{torus_difference, FlowEnsemble};
use crate::solver::Trajectory;
use crate::spectral::{Grid, VelocityField};

/// `q_eps(y) = ln(1 + |y|^2 / eps^2)`.
pub fn q_eps(y: [f64; 2], eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::BadEps(eps));
    }
    Ok(((y[0] * y[0] + y[1] * y[1]) / (eps * eps)).ln_1p())
}

/// Seed-and-replica averages comparing a stochastic flow with a
/// deterministic one at a common time `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    pub eps: f64,
    /// `int E[q_eps(X^nu - X)] dx`, with geodesic displacements.
    pub q_integral: f64,
    /// Measure of `{d(X^nu, X) > sqrt(eps)}`.
    pub superlevel_measure: f64,
    /// `q_integral / ln(1 + 1/eps)`.
    pub chebyshev_rhs: f64,
    /// `int E[d(X^nu, X)] dx`.
    pub flow_distance: f64,
    /// `int E[|X^nu - X|^2] dx` on unwrapped positions.
    pub y_value: f64,
}

pub fn stability_report(
    det: &FlowEnsemble,
    stoch: &FlowEnsemble,
    s: f64,
    eps: f64,
) -> Result<StabilityReport> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::BadEps(eps));
    }
    if det.replicas() != 1 {
        return Err(Error::MismatchedEnsembles(
            "reference flow must have one path per seed".into(),
        ));
    }
    if det.seeds() != stoch.seeds() || det.t() != stoch.t() {
        return Err(Error::MismatchedEnsembles("seeds or release time differ".into()));
    }
    let a = det
        .unwrapped_at(s)
        .map_err(|_| Error::MismatchedEnsembles(format!("s = {s} not stored in reference")))?;
    let b = stoch
        .unwrapped_at(s)
        .map_err(|_| Error::MismatchedEnsembles(format!("s = {s} not stored in perturbed flow")))?;
    let m = stoch.replicas();
    let threshold = eps.sqrt();
    let (mut q, mut sup, mut dist, mut y) = (0.0, 0.0, 0.0, 0.0);
    for (k, xb) in b.iter().enumerate() {
        let xa = a[k / m];
        let d = torus_difference(*xb, xa);
        let dn = d[0].hypot(d[1]);
        q += q_eps(d, eps)?;
        if dn > threshold {
            sup += 1.0;
        }
        dist += dn;
        y += (xb[0] - xa[0]).powi(2) + (xb[1] - xa[1]).powi(2);
    }
    let count = b.len() as f64;
    let q_integral = q / count;
    let superlevel_measure = sup / count;
    let level = (1.0 / eps).ln_1p();
    let report = StabilityReport {
        eps,
        q_integral,
        superlevel_measure,
        chebyshev_rhs: q_integral / level,
        flow_distance: dist / count,
        y_value: y / count,
    };
    if superlevel_measure * level > q_integral * (1.0 + 1e-12) {
        return Err(Error::BoundViolation(format!(
            "Chebyshev step fails: {} > {}",
            superlevel_measure * level,
            q_integral
        )));
    }
    Ok(report)
}

fn l1_gap(grid: Grid, a: (&[f64], &[f64]), b: (&[f64], &[f64])) -> f64 {
    let s: f64 = (0..a.0.len())
        .map(|k| (a.0[k] - b.0[k]).hypot(a.1[k] - b.1[k]))
        .sum();
    s * grid.cell_area()
}

/// `int_0^T ||u_a(t) - u_b(t)||_{L^1} dt` by the trapezoid rule on the
/// checkpoints of `a`; `b` is interpolated linearly in time.
pub fn l1l1_velocity_distance(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = a.grid();
    let end = a.end_time().min(b.end_time());
    let mut total = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for (i, &t) in a.times().iter().enumerate() {
        if t > end * (1.0 + 1e-12) {
            break;
        }
        let ua: &VelocityField = a.velocity(i)?;
        let ub = b.velocity_values_at(t)?;
        let gap = l1_gap(grid, (ua.u1.values(), ua.u2.values()), (&ub.0, &ub.1));
        if let Some((tp, gp)) = prev {
            total += 0.5 * (t - tp) * (gap + gp);
        }
        prev = Some((t, gap));
    }
    Ok(total)
}

/// `eps(nu) = max(sqrt(nu), ||u^nu - u||_{L^1 L^1})`.
pub fn choose_eps(nu: f64, l1l1_distance: f64) -> f64 {
    nu.sqrt().max(l1l1_distance)
}

