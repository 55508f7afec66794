//! Plot-ready CSV files. Every file has a header row; values are written at
//! full precision.

use std::path::{Path, PathBuf};

use statrs::distribution::{ContinuousCDF, Normal};

use super::Report;
use crate::diagnostics::AcfResult;
use crate::error::{Error, Result};

/// File names written by [`emit_plot_data`], in write order.
pub const PLOT_FILES: [&str; 9] = [
    "series.csv",
    "correlogram.csv",
    "residuals_time.csv",
    "residuals_fitted.csv",
    "residuals_qq.csv",
    "residuals_correlogram.csv",
    "forecast_errors_qq.csv",
    "forecast_errors_correlogram.csv",
    "forecast_fan.csv",
];

/// Plotting positions `(i - a) / (n + 1 - 2a)` with `a = 3/8` for `n <= 10`
/// and `1/2` otherwise.
fn ppoints(n: usize) -> Vec<f64> {
    let a = if n <= 10 { 0.375 } else { 0.5 };
    (1..=n)
        .map(|i| (i as f64 - a) / (n as f64 + 1.0 - 2.0 * a))
        .collect()
}

/// `(theoretical_quantile, sorted_value)` pairs.
pub(crate) fn normal_qq(values: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let std_normal = Normal::standard();
    ppoints(values.len())
        .into_iter()
        .map(|p| std_normal.inverse_cdf(p))
        .zip(sorted)
        .collect()
}

fn num(v: f64) -> String {
    v.to_string()
}

struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    fn write(&self, path: &Path) -> Result<()> {
        let out_err = |e: csv::Error| Error::Output {
            path: path.to_path_buf(),
            source: std::io::Error::other(e),
        };
        let mut w = csv::Writer::from_path(path).map_err(out_err)?;
        w.write_record(&self.header).map_err(out_err)?;
        for r in &self.rows {
            w.write_record(r).map_err(out_err)?;
        }
        w.flush().map_err(|source| Error::Output {
            path: path.to_path_buf(),
            source,
        })
    }
}

fn correlogram_table(acf: Option<&AcfResult>, pacf: Option<&AcfResult>) -> Table {
    let mut t = Table::new(&["lag", "acf", "pacf", "lower_band", "upper_band"]);
    if let (Some(a), Some(p)) = (acf, pacf) {
        for lag in 1..=a.max_lag() {
            t.rows.push(vec![
                lag.to_string(),
                num(a.at(lag)),
                num(p.at(lag)),
                num(-a.band),
                num(a.band),
            ]);
        }
    }
    t
}

fn qq_table(values: &[f64]) -> Table {
    let mut t = Table::new(&["theoretical_quantile", "sample_quantile"]);
    t.rows = normal_qq(values)
        .into_iter()
        .map(|(q, v)| vec![num(q), num(v)])
        .collect();
    t
}

/// Writes the [`PLOT_FILES`] into `dir`. Files tied to the holdout evaluation
/// carry only their header when evaluation was skipped.
pub fn emit_plot_data(report: &Report, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Output {
        path: dir.to_path_buf(),
        source,
    })?;

    let s = &report.series;
    let d = report.transformation.d;
    let mut series = Table::new(&["period", "raw", "transformed", "differenced"]);
    for (i, period) in s.raw.periods().enumerate() {
        series.rows.push(vec![
            period.iso(),
            num(s.raw.values()[i]),
            num(s.transformed.values()[i]),
            if i >= d {
                num(s.differenced.values()[i - d])
            } else {
                String::new()
            },
        ]);
    }

    let id = &report.identification;
    let rd = &report.residual_diagnostics;
    let res = &report.model.residuals;

    let mut residuals_time = Table::new(&["period", "residual"]);
    residuals_time.rows = res
        .periods()
        .zip(res.values())
        .map(|(p, v)| vec![p.iso(), num(*v)])
        .collect();

    let mut residuals_fitted = Table::new(&["period", "fitted", "residual"]);
    residuals_fitted.rows = res
        .periods()
        .zip(rd.fitted.values().iter().zip(res.values()))
        .map(|(p, (f, v))| vec![p.iso(), num(*f), num(*v)])
        .collect();

    let errors = report
        .evaluation
        .as_ref()
        .map(|e| e.errors())
        .unwrap_or_default();
    let ev = report.evaluation.as_ref();

    let f = &report.forecast;
    let mut fan = Table::new(&["period", "point", "lower", "upper"]);
    fan.rows = (0..f.horizon)
        .map(|k| {
            vec![
                f.periods[k].iso(),
                num(f.point[k]),
                num(f.lower[k]),
                num(f.upper[k]),
            ]
        })
        .collect();

    let tables = [
        series,
        correlogram_table(Some(&id.acf), Some(&id.pacf)),
        residuals_time,
        residuals_fitted,
        qq_table(res.values()),
        correlogram_table(Some(&rd.acf), Some(&rd.pacf)),
        qq_table(&errors),
        correlogram_table(
            ev.and_then(|e| e.error_acf.as_ref()),
            ev.and_then(|e| e.error_pacf.as_ref()),
        ),
        fan,
    ];
    let mut written = Vec::with_capacity(PLOT_FILES.len());
    for (name, table) in PLOT_FILES.iter().zip(&tables) {
        let path = dir.join(name);
        table.write(&path)?;
        written.push(path);
    }
    Ok(written)
}
