//! Multi-step forecasts with normal-theory intervals, and fixed-parameter
//! one-step holdout evaluation.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::arima::{ArimaFit, ArimaOrder, ArimaParams, ArmaStateSpace};
use crate::diagnostics::{acf, default_max_lag, pacf, shapiro_wilk, AcfResult, TestResult};
use crate::error::{Error, Result};
use crate::series::{box_cox, difference_slice, BoxCoxLambda, Period, TimeSeries};

/// MA(∞) weights `ψ_0 = 1, ψ_1, …`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiWeights {
    pub weights: Vec<f64>,
}

/// Coefficients `a_i` of `Φ(B)(1 - B)^d = 1 - Σ a_i B^i`.
fn integrated_ar(phi: &[f64], d: usize) -> Vec<f64> {
    // Polynomial in B with constant term first.
    let mut poly = vec![1.0];
    poly.extend(phi.iter().map(|p| -p));
    for _ in 0..d {
        let mut next = vec![0.0; poly.len() + 1];
        for (i, c) in poly.iter().enumerate() {
            next[i] += c;
            next[i + 1] -= c;
        }
        poly = next;
    }
    poly[1..].iter().map(|c| -c).collect()
}

pub fn psi_weights(params: &ArimaParams, order: ArimaOrder, h: usize) -> Result<PsiWeights> {
    if h == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    if !crate::arima::ar_is_stationary(&params.phi) {
        return Err(Error::NonStationary);
    }
    let a = integrated_ar(&params.phi, order.d);
    let mut psi = vec![0.0; h];
    psi[0] = 1.0;
    for j in 1..h {
        let mut v = params.theta.get(j - 1).copied().unwrap_or(0.0);
        for (i, ai) in a.iter().enumerate().take(j) {
            v += ai * psi[j - 1 - i];
        }
        psi[j] = v;
    }
    Ok(PsiWeights { weights: psi })
}

/// How the transformed-scale forecast is mapped back.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointKind {
    /// Back-transformed conditional mean, i.e. the forecast median.
    #[default]
    Median,
    /// Bias-adjusted forecast mean.
    Mean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastResult {
    /// Last observed period.
    pub origin: Period,
    pub horizon: usize,
    pub level: f64,
    pub point_kind: PointKind,
    pub periods: Vec<Period>,
    pub point: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Conditional means on the transformed scale.
    pub transformed_mean: Vec<f64>,
    /// Forecast error variances on the transformed scale.
    pub transformed_variance: Vec<f64>,
}

fn check_level(level: f64) -> Result<()> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "level must be in (0, 1), got {level}"
        )));
    }
    Ok(())
}

fn transformed_history(fit: &ArimaFit, history: &TimeSeries) -> Result<Vec<f64>> {
    let d = fit.order.d;
    if history.len() <= d {
        return Err(Error::TooShort {
            what: "forecasting",
            needed: d + 1,
            got: history.len(),
        });
    }
    Ok(box_cox(history, fit.lambda)?.values().to_vec())
}

/// Forecasts `h` steps past the end of `history` with the fit's parameters.
pub fn forecast(
    fit: &ArimaFit,
    history: &TimeSeries,
    h: usize,
    level: f64,
) -> Result<ForecastResult> {
    forecast_with(fit, history, h, level, PointKind::Median)
}

pub fn forecast_with(
    fit: &ArimaFit,
    history: &TimeSeries,
    h: usize,
    level: f64,
    kind: PointKind,
) -> Result<ForecastResult> {
    check_level(level)?;
    let params = &fit.params;
    let psi = psi_weights(params, fit.order, h)?;
    let y = transformed_history(fit, history)?;
    let d = fit.order.d;
    let w = difference_slice(&y, d);

    let ss = ArmaStateSpace::new(&params.phi, &params.theta)?;
    let mu = params.mean();
    let mut state = ss.filter(&w, mu)?.next_state;
    let mut w_hat = Vec::with_capacity(h);
    for _ in 0..h {
        w_hat.push(mu + state[0]);
        state = ss.advance(&state);
    }
    let mean = undifference(&y, &w_hat, d);

    let z = Normal::standard().inverse_cdf(0.5 * (1.0 + level));
    let lambda = fit.lambda;
    let mut variance = Vec::with_capacity(h);
    let mut acc = 0.0;
    for p in &psi.weights {
        acc += params.sigma2 * p * p;
        variance.push(acc);
    }
    let back = |v: f64| {
        lambda.inverse(v).ok_or_else(|| {
            Error::Numerical(format!(
                "forecast {v} is outside the inverse Box-Cox domain"
            ))
        })
    };
    let mut point = Vec::with_capacity(h);
    let mut lower = Vec::with_capacity(h);
    let mut upper = Vec::with_capacity(h);
    for (m, v) in mean.iter().zip(&variance) {
        let half = z * v.sqrt();
        point.push(match kind {
            PointKind::Median => back(*m)?,
            PointKind::Mean => bias_adjusted(lambda, *m, *v)?,
        });
        lower.push(back(m - half)?);
        upper.push(back(m + half)?);
    }

    let origin = history.end();
    Ok(ForecastResult {
        origin,
        horizon: h,
        level,
        point_kind: kind,
        periods: (1..=h as i64).map(|k| origin.offset(k)).collect(),
        point,
        lower,
        upper,
        transformed_mean: mean,
        transformed_variance: variance,
    })
}

fn bias_adjusted(lambda: BoxCoxLambda, m: f64, v: f64) -> Result<f64> {
    if lambda.is_log() {
        return Ok((m + 0.5 * v).exp());
    }
    let l = lambda.value();
    let base = lambda.inverse(m).ok_or_else(|| {
        Error::Numerical(format!(
            "forecast {m} is outside the inverse Box-Cox domain"
        ))
    })?;
    Ok(base * (1.0 + v * (1.0 - l) / (2.0 * (l * m + 1.0).powi(2))))
}

/// Extends `y` by solving `(1 - B)^d y_t = w_t` for each future `w_t`.
fn undifference(y: &[f64], w_future: &[f64], d: usize) -> Vec<f64> {
    // Coefficients of (1 - B)^d beyond the leading 1.
    let mut binom = vec![1.0f64];
    for _ in 0..d {
        let mut next = vec![0.0; binom.len() + 1];
        for (i, c) in binom.iter().enumerate() {
            next[i] += c;
            next[i + 1] -= c;
        }
        binom = next;
    }
    let mut ext = y.to_vec();
    for &w in w_future {
        let t = ext.len();
        let v = w - (1..=d).map(|i| binom[i] * ext[t - i]).sum::<f64>();
        ext.push(v);
    }
    ext.split_off(y.len())
}

/// One-step predictions on the transformed scale for every observation after
/// the first `d`, with the fit's parameters held fixed.
pub fn one_step_predictions(fit: &ArimaFit, series: &TimeSeries) -> Result<TimeSeries> {
    let y = transformed_history(fit, series)?;
    let d = fit.order.d;
    let w = difference_slice(&y, d);
    let ss = ArmaStateSpace::new(&fit.params.phi, &fit.params.theta)?;
    let out = ss.filter(&w, fit.params.mean())?;
    let pred: Vec<f64> = y[d..]
        .iter()
        .zip(&out.innovations)
        .map(|(obs, v)| obs - v)
        .collect();
    TimeSeries::new(series.start().offset(d as i64), pred)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRow {
    pub period: Period,
    pub actual: f64,
    pub forecast: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationResult {
    pub rows: Vec<EvaluationRow>,
    pub mae: f64,
    pub rmse: f64,
    /// Correlograms and normality test of the errors. Absent when the errors
    /// are too few or constant.
    pub error_acf: Option<AcfResult>,
    pub error_pacf: Option<AcfResult>,
    pub error_normality: Option<TestResult>,
}

impl EvaluationResult {
    pub fn errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.error).collect()
    }

    pub fn forecasts(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.forecast).collect()
    }
}

/// Fixed-parameter one-step forecasts over `validation`, which must directly
/// follow `train`.
pub fn one_step_eval(
    fit: &ArimaFit,
    train: &TimeSeries,
    validation: &TimeSeries,
) -> Result<EvaluationResult> {
    let all = train.concat(validation)?;
    let pred = one_step_predictions(fit, &all)?;
    let offset = train.len() - fit.order.d;
    let rows = validation
        .values()
        .iter()
        .zip(&pred.values()[offset..])
        .enumerate()
        .map(|(i, (&actual, &p))| {
            let forecast = fit.lambda.inverse(p).ok_or_else(|| {
                Error::Numerical(format!(
                    "prediction {p} is outside the inverse Box-Cox domain"
                ))
            })?;
            Ok(EvaluationRow {
                period: validation.period_at(i),
                actual,
                forecast,
                error: actual - forecast,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(rows))
}

pub(crate) fn summarize(rows: Vec<EvaluationRow>) -> EvaluationResult {
    let n = rows.len() as f64;
    let errors: Vec<f64> = rows.iter().map(|r| r.error).collect();
    let mae = errors.iter().map(|e| e.abs()).sum::<f64>() / n;
    let rmse = (errors.iter().map(|e| e * e).sum::<f64>() / n).sqrt();
    let lag = default_max_lag(errors.len());
    EvaluationResult {
        rows,
        mae,
        rmse,
        error_acf: (lag > 0).then(|| acf(&errors, lag).ok()).flatten(),
        error_pacf: (lag > 0).then(|| pacf(&errors, lag).ok()).flatten(),
        error_normality: shapiro_wilk(&errors).ok(),
    }
}
