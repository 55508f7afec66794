//! ARIMA(p, d, q) estimation.
//!
//! The model for the Box-Cox transformed series `y_t` is
//!
//! ```text
//! Φ(B) (1 - B)^d y_t = δ + Θ(B) ε_t,   ε_t ~ N(0, σ²)
//! Φ(B) = 1 - Σ φ_i B^i                 Θ(B) = 1 + Σ θ_j B^j
//! ```
//!
//! Note the plus sign in `Θ`: a fitted MA coefficient of `-0.86` means
//! `ε_t - 0.86 ε_{t-1}`.
//!
//! Parameters are estimated by maximising the exact Gaussian likelihood of the
//! differenced series (Kalman filter, stationary initial state), starting from
//! conditional-sum-of-squares estimates. σ² is profiled out of the objective.

mod fit;
mod likelihood;
mod optim;
mod statespace;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{BoxCoxLambda, TimeSeries};

pub use fit::{coef_test, fit, fit_with, CoefRow, FitOptions};
pub use likelihood::{css_objective, exact_loglik};
pub use optim::{Minimum, NelderMead};
pub use statespace::{ar_is_stationary, is_stable, ma_is_invertible};

pub(crate) use statespace::ArmaStateSpace;

/// Largest AR or MA order the engine accepts.
pub const MAX_ORDER: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ArimaOrder {
    pub p: usize,
    pub d: usize,
    pub q: usize,
}

impl ArimaOrder {
    pub fn new(p: usize, d: usize, q: usize) -> Result<Self> {
        if p > MAX_ORDER || q > MAX_ORDER {
            return Err(Error::InvalidArgument(format!(
                "AR and MA orders are limited to {MAX_ORDER}, got ({p},{d},{q})"
            )));
        }
        Ok(ArimaOrder { p, d, q })
    }

    /// Parses `p,d,q`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let bad = || Error::InvalidArgument(format!("order `{s}` is not of the form p,d,q"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let nums = parts
            .iter()
            .map(|p| p.parse::<usize>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        ArimaOrder::new(nums[0], nums[1], nums[2])
    }

    /// Number of ARMA coefficients, `p + q`.
    pub fn n_coefficients(&self) -> usize {
        self.p + self.q
    }
}

impl std::fmt::Display for ArimaOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ARIMA({},{},{})", self.p, self.d, self.q)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArimaParams {
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    /// Constant term δ of the differenced model; the mean of the differenced
    /// series is `δ / (1 - Σ φ_i)`.
    pub delta: f64,
    pub sigma2: f64,
}

impl ArimaParams {
    pub fn new(phi: Vec<f64>, theta: Vec<f64>, delta: f64, sigma2: f64) -> Self {
        ArimaParams {
            phi,
            theta,
            delta,
            sigma2,
        }
    }

    /// Mean of the stationary (differenced) series.
    pub fn mean(&self) -> f64 {
        let denom = 1.0 - self.phi.iter().sum::<f64>();
        if self.delta == 0.0 {
            0.0
        } else {
            self.delta / denom
        }
    }

    pub(crate) fn check(&self, order: ArimaOrder) -> Result<()> {
        if self.phi.len() != order.p || self.theta.len() != order.q {
            return Err(Error::InvalidArgument(format!(
                "{order} needs {} AR and {} MA coefficients, got {} and {}",
                order.p,
                order.q,
                self.phi.len(),
                self.theta.len()
            )));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "sigma2 must be positive, got {}",
                self.sigma2
            )));
        }
        if !ar_is_stationary(&self.phi) {
            return Err(Error::NonStationary);
        }
        Ok(())
    }
}

/// A fitted model.
///
/// Serialises to the persisted fit schema documented in `docs/formats.md`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArimaFit {
    pub schema_version: u32,
    pub order: ArimaOrder,
    pub lambda: BoxCoxLambda,
    pub params: ArimaParams,
    /// Whether δ was estimated (only possible when `d = 0`).
    pub include_constant: bool,
    /// Names of the estimated coefficients, in covariance order.
    pub coefficient_names: Vec<String>,
    /// Log-likelihood on the transformed scale.
    pub loglik: f64,
    pub aic: f64,
    /// Row-major covariance of the estimated coefficients, absent when the
    /// Hessian could not be inverted.
    pub covariance: Option<Vec<f64>>,
    /// Standardised one-step innovations, on the transformed scale.
    pub residuals: TimeSeries,
    pub n_used: usize,
    pub evaluations: usize,
    pub warnings: Vec<String>,
    /// SHA-256 of the training series in CSV form.
    pub data_fingerprint: String,
}

pub const FIT_SCHEMA_VERSION: u32 = 1;

impl ArimaFit {
    /// Estimated coefficients in covariance order.
    pub fn coefficients(&self) -> Vec<f64> {
        let mut c: Vec<f64> = self
            .params
            .phi
            .iter()
            .chain(&self.params.theta)
            .copied()
            .collect();
        if self.include_constant {
            c.push(self.params.delta);
        }
        c
    }

    pub fn n_parameters(&self) -> usize {
        self.coefficient_names.len() + 1
    }

    pub fn covariance_matrix(&self) -> Option<Vec<Vec<f64>>> {
        let k = self.coefficient_names.len();
        self.covariance
            .as_ref()
            .map(|c| c.chunks(k.max(1)).take(k).map(<[f64]>::to_vec).collect())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fit serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let fit: ArimaFit = serde_json::from_str(text)
            .map_err(|e| Error::InvalidArgument(format!("invalid fit JSON: {e}")))?;
        if fit.schema_version != FIT_SCHEMA_VERSION {
            return Err(Error::InvalidArgument(format!(
                "unsupported fit schema version {}",
                fit.schema_version
            )));
        }
        fit.params.check(fit.order)?;
        Ok(fit)
    }
}

pub(crate) fn coefficient_names(order: ArimaOrder, include_constant: bool) -> Vec<String> {
    let mut names: Vec<String> = (1..=order.p).map(|i| format!("ar{i}")).collect();
    names.extend((1..=order.q).map(|j| format!("ma{j}")));
    if include_constant {
        names.push("constant".into());
    }
    names
}
