//! Augmented Dickey-Fuller test, constant plus linear trend.
//!
//! The regression is
//!
//! ```text
//! Δy_t = α + β·t + ρ·y_{t-1} + Σ_{i=1..k} δ_i·Δy_{t-i} + e_t
//! ```
//!
//! with `k = trunc((n - 1)^(1/3))`. The statistic is the t-ratio of `ρ̂`; its
//! p-value is read off [`DF_TREND_TABLE`] by linear interpolation, first along
//! the sample-size axis and then along the statistic axis. Statistics beyond
//! the table are reported at the nearest tabulated probability with
//! `p_clamped` set.

use nalgebra::{DMatrix, DVector};

use super::TestResult;
use crate::error::{Error, Result};

/// Sample sizes (number of differences) indexing the rows of the table.
pub const DF_SAMPLE_SIZES: [f64; 6] = [25.0, 50.0, 100.0, 250.0, 500.0, 100_000.0];

/// Lower-tail probabilities indexing the columns of the table.
pub const DF_PROBABILITIES: [f64; 8] = [0.01, 0.025, 0.05, 0.10, 0.90, 0.95, 0.975, 0.99];

/// Quantiles of the Dickey-Fuller τ statistic with constant and trend
/// (Fuller 1976, table 8.5.2). `DF_TREND_TABLE[i][j]` is the quantile at
/// probability `DF_PROBABILITIES[j]` for sample size `DF_SAMPLE_SIZES[i]`.
///
/// Table version 1. Any change to these numbers changes reported p-values and
/// must bump [`DF_TABLE_VERSION`].
pub const DF_TREND_TABLE: [[f64; 8]; 6] = [
    [-4.38, -3.95, -3.60, -3.24, -1.14, -0.80, -0.50, -0.15],
    [-4.15, -3.80, -3.50, -3.18, -1.19, -0.87, -0.58, -0.24],
    [-4.04, -3.73, -3.45, -3.15, -1.22, -0.90, -0.62, -0.28],
    [-3.99, -3.69, -3.43, -3.13, -1.23, -0.92, -0.64, -0.31],
    [-3.98, -3.68, -3.42, -3.13, -1.24, -0.93, -0.65, -0.32],
    [-3.96, -3.66, -3.41, -3.12, -1.25, -0.94, -0.66, -0.33],
];

pub const DF_TABLE_VERSION: u32 = 1;

const NULL: &str = "the series has a unit root (non-stationary)";

/// Default lag order for a series of length `n`.
pub fn default_lag(n: usize) -> usize {
    ((n as f64 - 1.0).cbrt()).trunc() as usize
}

pub fn adf_test(x: &[f64]) -> Result<TestResult> {
    adf_test_with_lag(x, default_lag(x.len()))
}

pub fn adf_test_with_lag(x: &[f64], k: usize) -> Result<TestResult> {
    let n_obs = x.len();
    if n_obs < 8 {
        return Err(Error::TooShort {
            what: "ADF test",
            needed: 8,
            got: n_obs,
        });
    }
    let dy: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let n = dy.len();
    let cols = 3 + k;
    // Rows t = k..n-1 (0-based into dy); each needs k lagged differences.
    let rows = n
        .checked_sub(k)
        .filter(|&r| r > cols)
        .ok_or(Error::TooShort {
            what: "ADF regression",
            needed: cols + k + 2,
            got: n_obs,
        })?;

    let mut design = DMatrix::<f64>::zeros(rows, cols);
    let mut target = DVector::<f64>::zeros(rows);
    for (r, t) in (k..n).enumerate() {
        target[r] = dy[t];
        design[(r, 0)] = 1.0;
        design[(r, 1)] = x[t];
        design[(r, 2)] = (t + 1) as f64;
        for i in 1..=k {
            design[(r, 2 + i)] = dy[t - i];
        }
    }

    let xtx = design.transpose() * &design;
    let xty = design.transpose() * &target;
    let chol = xtx
        .cholesky()
        .ok_or_else(|| Error::Numerical("singular ADF regression matrix".into()))?;
    let beta = chol.solve(&xty);
    let resid = &target - &design * &beta;
    let s2 = resid.norm_squared() / (rows - cols) as f64;
    let inv = chol.inverse();
    let se = (s2 * inv[(1, 1)]).sqrt();
    if !(se > 0.0 && se.is_finite()) {
        return Err(Error::Numerical("degenerate ADF standard error".into()));
    }
    let stat = beta[1] / se;
    let (p_value, p_clamped) = df_p_value(stat, n);

    Ok(TestResult {
        name: "Augmented Dickey-Fuller".into(),
        statistic: stat,
        df: None,
        lag: Some(k),
        p_value,
        p_clamped,
        null_hypothesis: NULL.into(),
    })
}

/// Interpolated p-value for statistic `stat` at `n` differences, plus whether
/// it was clamped to the edge of the table.
pub fn df_p_value(stat: f64, n: usize) -> (f64, bool) {
    let quantiles: Vec<f64> = (0..DF_PROBABILITIES.len())
        .map(|j| {
            let column: Vec<f64> = DF_TREND_TABLE.iter().map(|row| row[j]).collect();
            interpolate(&DF_SAMPLE_SIZES, &column, n as f64)
        })
        .collect();
    let lo = quantiles[0];
    let hi = quantiles[quantiles.len() - 1];
    let clamped = stat < lo || stat > hi;
    (interpolate(&quantiles, &DF_PROBABILITIES, stat), clamped)
}

/// Piecewise-linear interpolation over increasing `xs`, constant beyond the
/// ends.
fn interpolate(xs: &[f64], ys: &[f64], at: f64) -> f64 {
    if at <= xs[0] {
        return ys[0];
    }
    let last = xs.len() - 1;
    if at >= xs[last] {
        return ys[last];
    }
    let i = xs.partition_point(|&x| x <= at) - 1;
    let w = (at - xs[i]) / (xs[i + 1] - xs[i]);
    ys[i] + w * (ys[i + 1] - ys[i])
}
