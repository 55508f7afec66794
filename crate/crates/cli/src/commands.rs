use std::fmt::Write;
use std::path::Path;

use serde_json::json;

use boxjenkins::arima::{self, coef_test, ArimaOrder, CoefRow};
use boxjenkins::diagnostics::{
    acf, default_max_lag, ljung_box, pacf, shapiro_wilk, AcfResult, TestResult,
};
use boxjenkins::forecast::{self as fc, one_step_eval};
use boxjenkins::pipeline::choose_d;
use boxjenkins::selection::{classify, suggest_candidates};
use boxjenkins::series::{box_cox, difference, TimeSeries};
use boxjenkins::Error;

use crate::{prefix, DataArgs, ModelArgs};

fn pretty<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialisable");
    s.push('\n');
    s
}

fn count(v: f64) -> i64 {
    v.round() as i64
}

fn p_text(p: f64) -> String {
    if p < 1e-4 {
        "<0.0001".into()
    } else {
        format!("{p:.4}")
    }
}

fn test_line(out: &mut String, t: &TestResult) {
    let extra = t.df.map(|d| format!("  df = {d}")).unwrap_or_default();
    let bound = if t.p_clamped {
        if t.statistic < 0.0 {
            "<"
        } else {
            ">"
        }
    } else {
        ""
    };
    writeln!(
        out,
        "{:<24} {:>9.4}{extra}  p-value = {bound}{:.4}",
        t.name, t.statistic, t.p_value
    )
    .unwrap();
}

fn correlogram(out: &mut String, a: &AcfResult, p: &AcfResult) {
    writeln!(out, "lag     ACF    PACF   (band ±{:.4})", a.band).unwrap();
    for lag in 1..=a.max_lag() {
        let mark = |r: &AcfResult| if r.is_significant(lag) { '*' } else { ' ' };
        writeln!(
            out,
            "{lag:>3}  {:>6.3}{} {:>6.3}{}",
            a.at(lag),
            mark(a),
            p.at(lag),
            mark(p)
        )
        .unwrap();
    }
}

pub fn identify(
    data: &DataArgs,
    d: Option<usize>,
    max_lag: Option<usize>,
) -> Result<String, Error> {
    let series = data.training()?;
    let transformed = box_cox(&series, data.lambda()?)?;
    let (d, steps) = choose_d(&transformed, d)?;
    let w = difference(&transformed, d)?;
    let lag = max_lag
        .unwrap_or_else(|| default_max_lag(w.len()))
        .min(w.len().saturating_sub(1));
    let a = acf(w.values(), lag)?;
    let p = pacf(w.values(), lag)?;
    let candidates = suggest_candidates(&a, &p, d)?;
    if data.json {
        return Ok(pretty(&json!({
            "d": d,
            "stationarity": steps,
            "acf": a,
            "pacf": p,
            "acf_pattern": classify(&a),
            "pacf_pattern": classify(&p),
            "candidates": candidates,
        })));
    }
    let mut out = String::new();
    for s in &steps {
        write!(out, "d = {}  ", s.d).unwrap();
        test_line(&mut out, &s.test);
    }
    writeln!(out, "chosen d = {d}\n").unwrap();
    correlogram(&mut out, &a, &p);
    writeln!(out, "\nACF: {:?}  PACF: {:?}", classify(&a), classify(&p)).unwrap();
    let orders: Vec<String> = candidates
        .orders()
        .iter()
        .map(ArimaOrder::to_string)
        .collect();
    writeln!(out, "candidates: {}", orders.join(", ")).unwrap();
    Ok(out)
}

fn coef_table(out: &mut String, rows: &[CoefRow]) {
    writeln!(out, "Term       Estimate   Std. Error    z-value  p-value").unwrap();
    for c in rows {
        writeln!(
            out,
            "{:<8} {:>10.6}  {:>11.6}  {:>9.4}  {:>7}",
            c.name,
            c.estimate,
            c.std_error,
            c.z,
            p_text(c.p_value)
        )
        .unwrap();
    }
}

pub fn fit(data: &DataArgs, order: ArimaOrder, save: Option<&Path>) -> Result<String, Error> {
    let series = data.training()?;
    let f = arima::fit(&series, order, data.lambda()?)?;
    if let Some(path) = save {
        std::fs::write(path, f.to_json()).map_err(|source| Error::Output {
            path: path.to_path_buf(),
            source,
        })?;
    }
    let rows = coef_test(&f).ok();
    if data.json {
        return Ok(pretty(&json!({ "fit": f, "coefficients": rows })));
    }
    let mut out = String::new();
    writeln!(out, "{}  n = {}", f.order, f.n_used).unwrap();
    match &rows {
        Some(rows) => coef_table(&mut out, rows),
        None => writeln!(out, "coefficient covariance unavailable").unwrap(),
    }
    writeln!(
        out,
        "sigma^2 = {:.6}  log-likelihood = {:.4}  AIC = {:.2}",
        f.params.sigma2, f.loglik, f.aic
    )
    .unwrap();
    for w in &f.warnings {
        writeln!(out, "warning: {w}").unwrap();
    }
    Ok(out)
}

pub fn diagnose(
    data: &DataArgs,
    model: &ModelArgs,
    lag: usize,
    fitdf: usize,
) -> Result<String, Error> {
    let series = data.training()?;
    let f = model.resolve(&series, data.lambda()?)?;
    let res = f.residuals.values();
    let lb = ljung_box(res, lag, fitdf)?;
    let sw = shapiro_wilk(res).ok();
    let max_lag = default_max_lag(res.len());
    let a = acf(res, max_lag)?;
    let p = pacf(res, max_lag)?;
    if data.json {
        return Ok(pretty(&json!({
            "order": f.order,
            "ljung_box": lb,
            "shapiro_wilk": sw,
            "acf": a,
            "pacf": p,
        })));
    }
    let mut out = String::new();
    writeln!(out, "Residuals of {} ({} values)", f.order, res.len()).unwrap();
    test_line(&mut out, &lb);
    if let Some(sw) = &sw {
        test_line(&mut out, sw);
    }
    correlogram(&mut out, &a, &p);
    Ok(out)
}

pub fn evaluate(data: &DataArgs, model: &ModelArgs, validation: usize) -> Result<String, Error> {
    let series = data.load()?;
    let n = series.len();
    let n_train = match data.train {
        Some(t) => t,
        None => n.saturating_sub(validation),
    };
    if validation == 0 || n_train == 0 || n_train + validation > n {
        return Err(Error::InvalidArgument(format!(
            "cannot take {validation} validation values after {n_train} training values from {n}"
        )));
    }
    let train = prefix(&series, n_train)?;
    let holdout = TimeSeries::new(
        series.start().offset(n_train as i64),
        series.values()[n_train..n_train + validation].to_vec(),
    )?;
    let f = model.resolve(&train, data.lambda()?)?;
    let ev = one_step_eval(&f, &train, &holdout)?;
    if data.json {
        return Ok(pretty(&ev));
    }
    let mut out = String::new();
    writeln!(out, "One-step forecasts of {}", f.order).unwrap();
    writeln!(out, "Date      Actual  Forecast  Error").unwrap();
    for r in &ev.rows {
        writeln!(
            out,
            "{}  {:>6}  {:>8}  {:>5}",
            r.period.label(),
            count(r.actual),
            count(r.forecast),
            count(r.error)
        )
        .unwrap();
    }
    writeln!(out, "MAE = {:.4}  RMSE = {:.4}", ev.mae, ev.rmse).unwrap();
    if let Some(sw) = &ev.error_normality {
        test_line(&mut out, sw);
    }
    Ok(out)
}

pub fn forecast(
    data: &DataArgs,
    model: &ModelArgs,
    horizon: usize,
    level: f64,
) -> Result<String, Error> {
    let history = data.training()?;
    let f = model.resolve(&history, data.lambda()?)?;
    let r = fc::forecast(&f, &history, horizon, level)?;
    if data.json {
        return Ok(pretty(&r));
    }
    let mut out = String::new();
    writeln!(
        out,
        "{} forecasts with {}% intervals",
        f.order,
        level * 100.0
    )
    .unwrap();
    writeln!(out, "Date      Fc  Lo  Hi").unwrap();
    for k in 0..r.horizon {
        writeln!(
            out,
            "{}  {:>2}  {:>2}  {:>2}",
            r.periods[k].label(),
            count(r.point[k]),
            count(r.lower[k]),
            count(r.upper[k])
        )
        .unwrap();
    }
    Ok(out)
}
