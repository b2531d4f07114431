//! Ladder report: the per-(nu, t) table and its JSON summary.

use crate::config::Exponent;
use crate::error::{LabError, Result};
use inviscid_core::metrics::{fit_rate, FitMode, RateFit};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};

pub const TRAILING_COLUMNS: [&str; 10] = [
    "err_vel_l2",
    "energy",
    "enstrophy",
    "flow_dist",
    "q_int",
    "superlevel",
    "y_val",
    "renorm_defect",
    "enstrophy_margin",
    "energy_margin",
];

/// One row of the table; `None` is an empty cell (check disabled or not
/// measured at this time).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Row {
    pub nu: f64,
    pub t: f64,
    pub err_vort: Vec<Option<f64>>,
    pub err_vel_l2: Option<f64>,
    pub energy: Option<f64>,
    pub enstrophy: Option<f64>,
    pub flow_dist: Option<f64>,
    pub q_int: Option<f64>,
    pub superlevel: Option<f64>,
    pub y_val: Option<f64>,
    pub renorm_defect: Option<f64>,
    /// `(bound - enstrophy) / bound`.
    pub enstrophy_margin: Option<f64>,
    /// Smaller of the two sides of the energy sandwich, each relative to the
    /// scale used by its acceptance test.
    pub energy_margin: Option<f64>,
}

impl Row {
    fn trailing(&self) -> [Option<f64>; 10] {
        [
            self.err_vel_l2,
            self.energy,
            self.enstrophy,
            self.flow_dist,
            self.q_int,
            self.superlevel,
            self.y_val,
            self.renorm_defect,
            self.enstrophy_margin,
            self.energy_margin,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitBlock {
    pub mode: String,
    pub nus: Vec<f64>,
    pub errors: Vec<f64>,
    pub exponent: Option<f64>,
    pub prefactor: f64,
    pub offset: Option<f64>,
    pub residual: f64,
    /// Model minus measurement at each ladder point.
    pub residuals: Vec<f64>,
}

impl From<&RateFit> for FitBlock {
    fn from(f: &RateFit) -> Self {
        Self {
            mode: match f.mode {
                FitMode::Power => "power".into(),
                FitMode::Log => "log".into(),
            },
            nus: f.nus.clone(),
            errors: f.errors.clone(),
            exponent: f.exponent,
            prefactor: f.prefactor,
            offset: f.offset,
            residual: f.residual,
            residuals: f.residuals(),
        }
    }
}

/// Fits of one sup-over-time error against the ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub quantity: String,
    pub power: Option<FitBlock>,
    pub log: Option<FitBlock>,
    /// Log fit shifted up so that every residual is nonnegative.
    pub log_envelope: Option<FitBlock>,
    pub error: Option<String>,
}

impl FitSummary {
    pub fn compute(quantity: &str, nus: &[f64], errors: &[f64]) -> Self {
        let mut s = FitSummary {
            quantity: quantity.to_string(),
            power: None,
            log: None,
            log_envelope: None,
            error: None,
        };
        match fit_rate(nus, errors, FitMode::Power) {
            Ok(f) => s.power = Some((&f).into()),
            Err(e) => s.error = Some(e.to_string()),
        }
        match fit_rate(nus, errors, FitMode::Log) {
            Ok(f) => {
                s.log_envelope = Some((&f.upper_envelope()).into());
                s.log = Some((&f).into());
            }
            Err(e) => {
                s.error.get_or_insert_with(|| e.to_string());
            }
        }
        s
    }
}

/// Sup over checkpoints of the measured errors of one ladder entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupErrors {
    pub nu: f64,
    pub err_vort: Vec<Option<f64>>,
    pub err_vel_l2: Option<f64>,
    /// `E(0) - E(T)`.
    pub energy_drop: Option<f64>,
    /// Threshold `eps` of the stability reports.
    pub flow_eps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoublingCheck {
    pub n_fine: usize,
    /// Sup over checkpoints of `||w_N - w_2N||_p`, one entry per exponent.
    pub vorticity: Vec<f64>,
    pub velocity_l2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    /// False when some entry failed; rows of the failed entries are missing.
    pub complete: bool,
    pub failure: Option<String>,
    pub domain: String,
    pub datum: String,
    pub reference: String,
    pub n: usize,
    pub dt: f64,
    pub steps: usize,
    pub checkpoint_times: Vec<f64>,
    pub p_list: Vec<Exponent>,
    /// Cap applied to a truncated singular datum.
    pub truncation_level: Option<f64>,
    pub sup_errors: Vec<SupErrors>,
    pub fits: Vec<FitSummary>,
    pub resolution_doubling: Option<DoublingCheck>,
    pub checks: Vec<CheckOutcome>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub p_list: Vec<Exponent>,
    pub rows: Vec<Row>,
    pub summary: Summary,
}

impl ConvergenceReport {
    pub fn check(&self, name: &str) -> Option<&CheckOutcome> {
        self.summary.checks.iter().find(|c| c.name == name)
    }

    pub fn rows_for(&self, nu: f64) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(move |r| r.nu == nu)
    }
}

pub fn header(p_list: &[Exponent]) -> Vec<String> {
    let mut h = vec!["nu".to_string(), "t".to_string()];
    h.extend(p_list.iter().map(|p| format!("err_vort_p{}", p.label())));
    h.extend(TRAILING_COLUMNS.iter().map(|s| s.to_string()));
    h
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

pub fn write_csv<W: Write>(p_list: &[Exponent], rows: &[Row], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header(p_list))?;
    for r in rows {
        let mut rec = vec![format!("{:e}", r.nu), format!("{:e}", r.t)];
        rec.extend(r.err_vort.iter().map(|v| cell(*v)));
        rec.extend(r.trailing().iter().map(|v| cell(*v)));
        out.write_record(rec)?;
    }
    out.flush()?;
    Ok(())
}

pub fn csv_string(report: &ConvergenceReport) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(&report.p_list, &report.rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is ascii"))
}

/// Parses a table written by [`write_csv`].
pub fn read_csv(path: &Path) -> Result<(Vec<Exponent>, Vec<Row>)> {
    let mut rd = csv::Reader::from_path(path)?;
    let head: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    let bad = |m: &str| LabError::Config(format!("{}: {m}", path.display()));
    let n_err = head.len().checked_sub(12).ok_or_else(|| bad("too few columns"))?;
    let mut p_list = Vec::with_capacity(n_err);
    for h in &head[2..2 + n_err] {
        let p = h
            .strip_prefix("err_vort_p")
            .and_then(Exponent::parse_label)
            .ok_or_else(|| bad(&format!("unexpected column `{h}`")))?;
        p_list.push(p);
    }
    if head != header(&p_list) {
        return Err(bad("column schema mismatch"));
    }
    let parse = |s: &str| -> Result<Option<f64>> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse().map(Some).map_err(|_| bad(&format!("bad number `{s}`")))
        }
    };
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let v: Vec<Option<f64>> = rec.iter().map(parse).collect::<Result<_>>()?;
        let need = |x: Option<f64>| x.ok_or_else(|| bad("empty nu or t"));
        let tail = &v[2 + n_err..];
        rows.push(Row {
            nu: need(v[0])?,
            t: need(v[1])?,
            err_vort: v[2..2 + n_err].to_vec(),
            err_vel_l2: tail[0],
            energy: tail[1],
            enstrophy: tail[2],
            flow_dist: tail[3],
            q_int: tail[4],
            superlevel: tail[5],
            y_val: tail[6],
            renorm_defect: tail[7],
            enstrophy_margin: tail[8],
            energy_margin: tail[9],
        });
    }
    Ok((p_list, rows))
}

pub const CSV_NAME: &str = "ladder.csv";
pub const SUMMARY_NAME: &str = "summary.json";

/// Writes `ladder.csv` and `summary.json` into `dir`.
pub fn emit_report(report: &ConvergenceReport, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let csv_path = dir.join(CSV_NAME);
    let mut f = std::io::BufWriter::new(std::fs::File::create(&csv_path)?);
    write_csv(&report.p_list, &report.rows, &mut f)?;
    f.flush()?;
    let json_path = dir.join(SUMMARY_NAME);
    let mut f = std::io::BufWriter::new(std::fs::File::create(&json_path)?);
    serde_json::to_writer_pretty(&mut f, &report.summary)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(vec![csv_path, json_path])
}

pub fn read_summary(path: &Path) -> Result<Summary> {
    Ok(serde_json::from_reader(std::io::BufReader::new(std::fs::File::open(path)?))?)
}
