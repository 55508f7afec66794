use std::fmt::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::Report;
use crate::diagnostics::{AcfResult, TestResult};
use crate::error::Error;
use crate::selection::Status;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Json,
    /// CSV files for plotting; only meaningful for [`super::write_outputs`].
    PlotData,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "text" => Ok(Format::Text),
            "json" => Ok(Format::Json),
            "plotdata" => Ok(Format::PlotData),
            other => Err(Error::InvalidArgument(format!(
                "unknown format `{other}` (expected text, json or plotdata)"
            ))),
        }
    }
}

/// Renders a report. `PlotData` has no single-document form and renders as
/// JSON.
pub fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Text => render_text(report),
        Format::Json | Format::PlotData => {
            let mut s = serde_json::to_string_pretty(report).expect("report serialises");
            s.push('\n');
            s
        }
    }
}

/// Counts are printed rounded half away from zero.
pub(crate) fn count(v: f64) -> i64 {
    v.round() as i64
}

fn p_value(t: &TestResult) -> String {
    if t.p_clamped && t.statistic < 0.0 {
        format!("<{:.4}", t.p_value)
    } else if t.p_clamped {
        format!(">{:.4}", t.p_value)
    } else {
        format!("{:.4}", t.p_value)
    }
}

fn correlogram(out: &mut String, acf: &AcfResult, pacf: &AcfResult) {
    writeln!(out, "  lag     ACF    PACF   (band ±{:.4})", acf.band).unwrap();
    for lag in 1..=acf.max_lag() {
        let mark = |r: &AcfResult| if r.is_significant(lag) { '*' } else { ' ' };
        writeln!(
            out,
            "  {lag:>3}  {:>6.3}{} {:>6.3}{}",
            acf.at(lag),
            mark(acf),
            pacf.at(lag),
            mark(pacf)
        )
        .unwrap();
    }
}

fn render_text(r: &Report) -> String {
    let mut out = String::new();
    let o = &mut out;
    writeln!(o, "{} {}", r.toolkit.name, r.toolkit.version).unwrap();
    writeln!(o).unwrap();

    let d = &r.data;
    writeln!(o, "Data").unwrap();
    writeln!(
        o,
        "  observations  {} ({} to {})",
        d.n,
        d.start.label(),
        d.end.label()
    )
    .unwrap();
    writeln!(o, "  training      {}", d.n_train).unwrap();
    writeln!(o, "  validation    {}", d.n_validation).unwrap();
    writeln!(o, "  min/mean/max  {} / {:.2} / {}", d.min, d.mean, d.max).unwrap();
    writeln!(o).unwrap();

    let t = &r.transformation;
    writeln!(o, "Transformation").unwrap();
    writeln!(
        o,
        "  Box-Cox lambda = {}{}",
        t.lambda.value(),
        if t.lambda.is_log() { " (log)" } else { "" }
    )
    .unwrap();
    writeln!(
        o,
        "  differences d = {}{}",
        t.d,
        if t.d_chosen_by_test {
            " (chosen by ADF at 0.05)"
        } else {
            " (fixed)"
        }
    )
    .unwrap();
    writeln!(o).unwrap();

    writeln!(o, "Stationarity (ADF with constant and trend)").unwrap();
    writeln!(o, "  d  lag  statistic   p-value").unwrap();
    for s in &r.stationarity {
        writeln!(
            o,
            "  {}  {:>3}  {:>9.4}  {:>8}",
            s.d,
            s.test.lag.unwrap_or(0),
            s.test.statistic,
            p_value(&s.test)
        )
        .unwrap();
    }
    writeln!(o).unwrap();

    let id = &r.identification;
    writeln!(o, "Correlograms of the differenced series").unwrap();
    correlogram(o, &id.acf, &id.pacf);
    writeln!(o).unwrap();

    writeln!(o, "Tentative models").unwrap();
    writeln!(o, "  Model            AIC  Status").unwrap();
    for e in &r.selection.ranked {
        let status = match e.status {
            Status::Selected => "selected".to_string(),
            Status::RejectedInsignificant => format!(
                "rejected ({})",
                e.reason.as_deref().unwrap_or("insignificant coefficient")
            ),
            Status::NotExamined => "not examined".to_string(),
        };
        writeln!(
            o,
            "  {:<13} {:>7.2}  {}",
            e.order.to_string(),
            e.aic,
            status
        )
        .unwrap();
    }
    for f in &r.selection.failures {
        writeln!(
            o,
            "  {:<13} {:>7}  fit failed ({})",
            f.order.to_string(),
            "-",
            f.reason
        )
        .unwrap();
    }
    writeln!(o).unwrap();

    writeln!(o, "Coefficients of {}", r.model.order).unwrap();
    writeln!(o, "  Term       Estimate   Std. Error    z-value  p-value").unwrap();
    for c in &r.coefficients {
        writeln!(
            o,
            "  {:<8} {:>10.6}  {:>11.6}  {:>9.4}  {:>7}",
            c.name,
            c.estimate,
            c.std_error,
            c.z,
            if c.p_value < 1e-4 {
                "<0.0001".to_string()
            } else {
                format!("{:.4}", c.p_value)
            }
        )
        .unwrap();
    }
    writeln!(
        o,
        "  sigma^2 = {:.6}  log-likelihood = {:.4}  AIC = {:.2}",
        r.model.params.sigma2, r.model.loglik, r.model.aic
    )
    .unwrap();
    for w in &r.model.warnings {
        writeln!(o, "  warning: {w}").unwrap();
    }
    writeln!(o).unwrap();

    let rd = &r.residual_diagnostics;
    writeln!(o, "Residual diagnostics").unwrap();
    let lb = &rd.ljung_box;
    writeln!(
        o,
        "  Ljung-Box     Q = {:.4}  df = {}  p-value = {}",
        lb.statistic,
        lb.df.unwrap_or(0),
        p_value(lb)
    )
    .unwrap();
    if let Some(sw) = &rd.shapiro_wilk {
        writeln!(
            o,
            "  Shapiro-Wilk  W = {:.4}  p-value = {}",
            sw.statistic,
            p_value(sw)
        )
        .unwrap();
    }
    correlogram(o, &rd.acf, &rd.pacf);
    writeln!(o).unwrap();

    if let Some(ev) = &r.evaluation {
        writeln!(o, "One-step forecasts on the validation window").unwrap();
        writeln!(o, "  Date      Actual  Forecast  Error").unwrap();
        for row in &ev.rows {
            writeln!(
                o,
                "  {}  {:>6}  {:>8}  {:>5}",
                row.period.label(),
                count(row.actual),
                count(row.forecast),
                count(row.error)
            )
            .unwrap();
        }
        writeln!(o, "  MAE = {:.4}  RMSE = {:.4}", ev.mae, ev.rmse).unwrap();
        if let Some(sw) = &ev.error_normality {
            writeln!(
                o,
                "  Shapiro-Wilk  W = {:.4}  p-value = {}",
                sw.statistic,
                p_value(sw)
            )
            .unwrap();
        }
        writeln!(o).unwrap();
    }

    let f = &r.forecast;
    writeln!(o, "Forecasts with {}% intervals", f.level * 100.0).unwrap();
    writeln!(o, "Date      Fc  Lo  Hi").unwrap();
    for k in 0..f.horizon {
        writeln!(o, "{}", forecast_line(r, k)).unwrap();
    }
    out
}

/// One forecast table row, e.g. `Jan-2019  39  21  74`.
pub(crate) fn forecast_line(r: &Report, k: usize) -> String {
    let f = &r.forecast;
    format!(
        "{}  {:>2}  {:>2}  {:>2}",
        f.periods[k].label(),
        count(f.point[k]),
        count(f.lower[k]),
        count(f.upper[k])
    )
}
