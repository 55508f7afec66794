use std::f64::consts::PI;

use super::statespace::{ArmaStateSpace, FilterOutput};
use super::{ArimaOrder, ArimaParams};
use crate::error::{Error, Result};
use crate::series::{difference_slice, TimeSeries};

/// Runs the Kalman filter of the ARMA part of `params` over the already
/// differenced series `w`.
pub(crate) fn arma_filter(params: &ArimaParams, w: &[f64]) -> Result<FilterOutput> {
    let ss = ArmaStateSpace::new(&params.phi, &params.theta)?;
    ss.filter(w, params.mean())
}

fn differenced(order: ArimaOrder, series: &TimeSeries) -> Result<Vec<f64>> {
    if series.len() <= order.d {
        return Err(Error::TooShort {
            what: "likelihood evaluation",
            needed: order.d + 1,
            got: series.len(),
        });
    }
    Ok(difference_slice(series.values(), order.d))
}

/// Exact Gaussian log-likelihood of `series` (on the transformed scale) under
/// `params`, with σ² taken from `params`.
pub fn exact_loglik(params: &ArimaParams, order: ArimaOrder, series: &TimeSeries) -> Result<f64> {
    params.check(order)?;
    let w = differenced(order, series)?;
    let out = arma_filter(params, &w)?;
    let s2 = params.sigma2;
    let ll = out
        .innovations
        .iter()
        .zip(&out.variances)
        .map(|(v, f)| (2.0 * PI * s2 * f).ln() + v * v / (s2 * f))
        .sum::<f64>();
    Ok(-0.5 * ll)
}

/// Log-likelihood with σ² replaced by its maximiser `Σ v²/F / n`. Returns the
/// likelihood and that σ².
pub(crate) fn profile_loglik(out: &FilterOutput) -> (f64, f64) {
    let n = out.innovations.len() as f64;
    let sigma2 = out.sum_sq() / n;
    let ll = -0.5 * (n * ((2.0 * PI).ln() + sigma2.ln() + 1.0) + out.sum_log_f());
    (ll, sigma2)
}

/// Conditional sum of squares: residuals are built recursively from the
/// `(p+1)`-th differenced observation on, with earlier errors set to zero.
pub fn css_objective(params: &ArimaParams, order: ArimaOrder, series: &TimeSeries) -> Result<f64> {
    if params.phi.len() != order.p || params.theta.len() != order.q {
        return Err(Error::InvalidArgument(format!(
            "coefficient count does not match {order}"
        )));
    }
    if !super::ar_is_stationary(&params.phi) {
        return Err(Error::NonStationary);
    }
    let w = differenced(order, series)?;
    Ok(css_sum(&params.phi, &params.theta, params.mean(), &w))
}

pub(crate) fn css_sum(phi: &[f64], theta: &[f64], mean: f64, w: &[f64]) -> f64 {
    let p = phi.len();
    let mut e = vec![0.0; w.len()];
    let mut total = 0.0;
    for t in p..w.len() {
        let mut r = w[t] - mean;
        for (i, ph) in phi.iter().enumerate() {
            r -= ph * (w[t - 1 - i] - mean);
        }
        for (j, th) in theta.iter().enumerate() {
            if t > j {
                r -= th * e[t - 1 - j];
            }
        }
        e[t] = r;
        total += r * r;
    }
    total
}
