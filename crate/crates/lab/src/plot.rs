//! Static SVG plots of a ladder report.

use crate::error::{LabError, Result};
use crate::report::{FitBlock, Row, Summary};
use plotters::prelude::*;
use std::path::{Path, PathBuf};

const PALETTE: [RGBColor; 6] = [
    RGBColor(31, 119, 180),
    RGBColor(214, 39, 40),
    RGBColor(44, 160, 44),
    RGBColor(148, 103, 189),
    RGBColor(255, 127, 14),
    RGBColor(23, 190, 207),
];

fn plot_err<E: std::fmt::Display>(e: E) -> LabError {
    LabError::Plot(e.to_string())
}

fn padded_range(lo: f64, hi: f64, log: bool) -> (f64, f64) {
    if log {
        let (a, b) = (lo.max(1e-300), hi.max(1e-300));
        if a == b {
            (a / 2.0, b * 2.0)
        } else {
            (a / 1.5, b * 1.5)
        }
    } else if lo == hi {
        (lo - 1.0, hi + 1.0)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    values
        .filter(|v| v.is_finite())
        .fold(None, |acc, v| match acc {
            None => Some((v, v)),
            Some((a, b)) => Some((a.min(v), b.max(v))),
        })
}

/// Log-log sup error against viscosity with the fitted power law.
fn error_vs_nu(summary: &Summary, path: &Path) -> Result<bool> {
    let series: Vec<(&str, &FitBlock)> = summary
        .fits
        .iter()
        .filter_map(|f| f.power.as_ref().map(|p| (f.quantity.as_str(), p)))
        .collect();
    let Some((x0, x1)) = bounds(series.iter().flat_map(|s| s.1.nus.iter().copied())) else {
        return Ok(false);
    };
    let Some((y0, y1)) = bounds(series.iter().flat_map(|s| s.1.errors.iter().copied())) else {
        return Ok(false);
    };
    let (x0, x1) = padded_range(x0, x1, true);
    let (y0, y1) = padded_range(y0, y1, true);
    let root = SVGBackend::new(path, (800, 600)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption("sup-in-time error vs viscosity", ("sans-serif", 22))
        .margin(15)
        .x_label_area_size(45)
        .y_label_area_size(70)
        .build_cartesian_2d((x0..x1).log_scale(), (y0..y1).log_scale())
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("nu")
        .y_desc("error")
        .draw()
        .map_err(plot_err)?;
    for (k, (name, fit)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        chart
            .draw_series(
                fit.nus
                    .iter()
                    .zip(&fit.errors)
                    .map(|(&x, &y)| Circle::new((x, y), 4, color.filled())),
            )
            .map_err(plot_err)?
            .label(format!("{name} (slope {:.3})", fit.exponent.unwrap_or(f64::NAN)))
            .legend(move |(x, y)| Circle::new((x, y), 4, color.filled()));
        let e = fit.exponent.unwrap_or(0.0);
        let line: Vec<(f64, f64)> = (0..=40)
            .map(|i| {
                let x = x0 * (x1 / x0).powf(i as f64 / 40.0);
                (x, fit.prefactor * x.powf(e))
            })
            .collect();
        chart
            .draw_series(LineSeries::new(line, color.stroke_width(1)))
            .map_err(plot_err)?;
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(true)
}

/// Sup error against `1/|ln nu|` with the fitted `delta + C/|ln nu|` envelope.
fn envelope(summary: &Summary, path: &Path) -> Result<bool> {
    let Some((name, fit)) = summary
        .fits
        .iter()
        .find_map(|f| f.log_envelope.as_ref().map(|e| (f.quantity.as_str(), e)))
    else {
        return Ok(false);
    };
    let xs: Vec<f64> = fit.nus.iter().map(|nu| 1.0 / nu.ln().abs()).collect();
    let (x0, x1) = bounds(xs.iter().copied()).expect("fit has points");
    let lo = 0.0f64.min(x0);
    let model = |x: f64| fit.offset.unwrap_or(0.0) + fit.prefactor * x;
    let (y0, y1) = bounds(fit.errors.iter().copied().chain([model(lo), model(x1)])).expect("finite");
    let (y0, y1) = padded_range(y0.min(0.0), y1, false);
    let (_, x1p) = padded_range(lo, x1, false);
    let root = SVGBackend::new(path, (800, 600)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(format!("{name}: envelope delta + C/|ln nu|"), ("sans-serif", 22))
        .margin(15)
        .x_label_area_size(45)
        .y_label_area_size(70)
        .build_cartesian_2d(lo..x1p, y0..y1)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("1/|ln nu|")
        .y_desc("error")
        .draw()
        .map_err(plot_err)?;
    chart
        .draw_series(
            xs.iter()
                .zip(&fit.errors)
                .map(|(&x, &y)| Circle::new((x, y), 4, PALETTE[0].filled())),
        )
        .map_err(plot_err)?;
    chart
        .draw_series(LineSeries::new(
            [(lo, model(lo)), (x1p, model(x1p))],
            PALETTE[1].stroke_width(2),
        ))
        .map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(true)
}

/// Energy against time, one curve per viscosity.
fn energy_vs_t(rows: &[Row], path: &Path) -> Result<bool> {
    let mut nus: Vec<f64> = Vec::new();
    for r in rows.iter().filter(|r| r.energy.is_some()) {
        if !nus.contains(&r.nu) {
            nus.push(r.nu);
        }
    }
    let pts = || rows.iter().filter_map(|r| r.energy.map(|e| (r.t, e)));
    let (Some((x0, x1)), Some((y0, y1))) = (bounds(pts().map(|p| p.0)), bounds(pts().map(|p| p.1))) else {
        return Ok(false);
    };
    let (x0, x1) = padded_range(x0, x1, false);
    let (y0, y1) = padded_range(y0, y1, false);
    let root = SVGBackend::new(path, (800, 600)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption("energy vs time", ("sans-serif", 22))
        .margin(15)
        .x_label_area_size(45)
        .y_label_area_size(80)
        .build_cartesian_2d(x0..x1, y0..y1)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("t")
        .y_desc("energy")
        .draw()
        .map_err(plot_err)?;
    for (k, &nu) in nus.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let line: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.nu == nu)
            .filter_map(|r| r.energy.map(|e| (r.t, e)))
            .collect();
        chart
            .draw_series(LineSeries::new(line, color.stroke_width(2)))
            .map_err(plot_err)?
            .label(format!("nu = {nu:e}"))
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(true)
}

/// Writes `error_vs_nu.svg`, `envelope.svg` and `energy_vs_t.svg` into
/// `dir`, skipping plots without data.
pub fn plot_report(summary: &Summary, rows: &[Row], dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut out = Vec::new();
    let a = dir.join("error_vs_nu.svg");
    if error_vs_nu(summary, &a)? {
        out.push(a);
    }
    let b = dir.join("envelope.svg");
    if envelope(summary, &b)? {
        out.push(b);
    }
    let c = dir.join("energy_vs_t.svg");
    if energy_vs_t(rows, &c)? {
        out.push(c);
    }
    Ok(out)
}
