//! Declarative experiment description, read from JSON.

use crate::error::{LabError, Result};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Torus,
    Freespace,
}

/// An `L^p` exponent in `[1, inf]`; written as a number or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponent(pub f64);

impl Exponent {
    /// Suffix used in column names: `1.3`, `2`, `inf`.
    pub fn label(&self) -> String {
        if self.0.is_infinite() {
            "inf".to_string()
        } else {
            format!("{}", self.0)
        }
    }

    pub fn parse_label(s: &str) -> Option<Self> {
        if s == "inf" {
            return Some(Exponent(f64::INFINITY));
        }
        s.parse().ok().map(Exponent)
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(p) => Ok(Exponent(p)),
            Raw::Str(s) if s == "inf" => Ok(Exponent(f64::INFINITY)),
            Raw::Str(s) => Err(serde::de::Error::custom(format!(
                "exponent must be a number or \"inf\", got \"{s}\""
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatumSpec {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl DatumSpec {
    pub fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }
}

/// Which columns of the report are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Checks {
    /// `err_vort_p*` and `err_vel_l2`.
    pub errors: bool,
    pub energy: bool,
    pub enstrophy: bool,
    /// `flow_dist`, `q_int`, `superlevel`, `y_val` (torus only).
    pub flows: bool,
    pub renormalization: bool,
    pub enstrophy_bound: bool,
    pub energy_bound: bool,
    /// Rerun the reference at `2N` and report the discrepancy.
    pub resolution_doubling: bool,
}

impl Default for Checks {
    fn default() -> Self {
        Self {
            errors: true,
            energy: true,
            enstrophy: true,
            flows: false,
            renormalization: true,
            enstrophy_bound: false,
            energy_bound: false,
            resolution_doubling: false,
        }
    }
}

/// Renormalization function used for the `renorm_defect` column. A missing
/// `eta` means `1e-3 * ||omega0||_inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BetaSpec {
    TruncatedPower { q: f64, eta: Option<f64> },
    Convex { eta: Option<f64> },
    Bounded { scale: f64, eta: Option<f64> },
}

impl Default for BetaSpec {
    fn default() -> Self {
        BetaSpec::TruncatedPower { q: 2.0, eta: None }
    }
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_checkpoints() -> usize {
    50
}

fn default_box_length() -> f64 {
    8.0
}

fn default_seed_grid() -> usize {
    16
}

fn default_bound_p() -> f64 {
    1.2
}

fn default_cutoff_scale() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderConfig {
    pub domain: Domain,
    pub initial_datum: DatumSpec,
    /// Strictly decreasing positive viscosities; the reference is implicit.
    pub nus: Vec<f64>,
    #[serde(rename = "T")]
    pub t_end: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub dt: f64,
    pub p_list: Vec<Exponent>,
    /// Stochastic replicas per seed.
    #[serde(rename = "M", default)]
    pub replicas: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub checks: Checks,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Number of checkpoint intervals on `[0, T]`.
    #[serde(default = "default_checkpoints")]
    pub checkpoints: usize,
    /// Side of the free-space box.
    #[serde(default = "default_box_length")]
    pub box_length: f64,
    /// Seeds per side for the flow ensembles.
    #[serde(default = "default_seed_grid")]
    pub seed_grid: usize,
    /// Release times for the flow metrics; empty means `T` only.
    #[serde(default)]
    pub flow_times: Vec<f64>,
    /// Exponent of the enstrophy and energy inequalities.
    #[serde(default = "default_bound_p")]
    pub bound_p: f64,
    #[serde(default)]
    pub beta: BetaSpec,
    /// Inner radius of the free-space near/far cutoff.
    #[serde(default = "default_cutoff_scale")]
    pub cutoff_scale: f64,
}

impl LadderConfig {
    /// Minimal torus config with default knobs.
    pub fn torus(datum: DatumSpec, nus: Vec<f64>, t_end: f64, n: usize, dt: f64) -> Self {
        Self {
            domain: Domain::Torus,
            initial_datum: datum,
            nus,
            t_end,
            n,
            dt,
            p_list: vec![Exponent(2.0)],
            replicas: 0,
            master_seed: 0,
            checks: Checks::default(),
            output_dir: default_output_dir(),
            checkpoints: default_checkpoints(),
            box_length: default_box_length(),
            seed_grid: default_seed_grid(),
            flow_times: Vec::new(),
            bound_p: default_bound_p(),
            beta: BetaSpec::default(),
            cutoff_scale: default_cutoff_scale(),
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(s).map_err(|e| LabError::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(LabError::Config(m));
        if let Some(nu) = self.nus.iter().find(|nu| !(**nu > 0.0 && nu.is_finite())) {
            return bad(format!("viscosities must be positive and finite, got {nu}"));
        }
        if self.nus.windows(2).any(|w| w[1] >= w[0]) {
            return bad(format!("nus must be strictly decreasing: {:?}", self.nus));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad(format!("T must be positive, got {}", self.t_end));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if self.n < 8 || !self.n.is_power_of_two() {
            return bad(format!("N must be a power of two >= 8, got {}", self.n));
        }
        if let Some(p) = self.p_list.iter().find(|p| !(p.0 >= 1.0)) {
            return bad(format!("exponent {} outside [1, inf]", p.0));
        }
        if self.checkpoints == 0 {
            return bad("checkpoints must be at least 1".into());
        }
        if self.domain == Domain::Freespace && !(self.box_length > 0.0 && self.box_length.is_finite()) {
            return bad(format!("box_length must be positive, got {}", self.box_length));
        }
        if self.checks.flows {
            if self.domain != Domain::Torus {
                return bad("flow metrics are only available on the torus".into());
            }
            if self.replicas == 0 {
                return bad("flow metrics need M >= 1".into());
            }
            if self.seed_grid < 8 || !self.seed_grid.is_power_of_two() {
                return bad(format!("seed_grid must be a power of two >= 8, got {}", self.seed_grid));
            }
            if let Some(t) = self.flow_times.iter().find(|t| !(**t > 0.0 && **t <= self.t_end)) {
                return bad(format!("flow time {t} outside (0, T]"));
            }
        }
        if (self.checks.enstrophy_bound || self.checks.energy_bound) && !(self.bound_p > 1.0 && self.bound_p < 2.0) {
            return bad(format!("bound_p must lie in (1, 2), got {}", self.bound_p));
        }
        if self.initial_datum.name == "lp-singular" {
            let alpha = self.initial_datum.params.get("alpha").copied().unwrap_or(f64::NAN);
            let mut ps: Vec<f64> = self.p_list.iter().map(|p| p.0).collect();
            ps.extend(self.initial_datum.params.get("p"));
            if self.checks.enstrophy_bound || self.checks.energy_bound {
                ps.push(self.bound_p);
            }
            if let Some(&p) = ps.iter().find(|&&p| alpha * p >= 2.0) {
                return Err(LabError::NotInLp { alpha, p });
            }
        }
        Ok(())
    }

    /// Step count and checkpoint spacing shared by every run of the ladder:
    /// the step is shrunk so that the checkpoints fall on steps.
    pub fn schedule(&self) -> (usize, usize, f64) {
        let raw = (self.t_end / self.dt - 1e-9).ceil().max(1.0) as usize;
        let every = raw.div_ceil(self.checkpoints);
        let steps = every * self.checkpoints;
        (steps, every, self.t_end / steps as f64)
    }
}
