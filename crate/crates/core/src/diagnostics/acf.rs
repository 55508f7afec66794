use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two-sided 95% normal quantile used for plot bands.
pub const BAND_Z: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelogramKind {
    Acf,
    Pacf,
}

/// Sample (partial) autocorrelations for lags `1..=max_lag`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcfResult {
    pub kind: CorrelogramKind,
    /// `coefficients[k - 1]` is the value at lag `k`.
    pub coefficients: Vec<f64>,
    pub n: usize,
    /// Half-width of the `±1.96/√n` significance band.
    pub band: f64,
}

impl AcfResult {
    pub fn max_lag(&self) -> usize {
        self.coefficients.len()
    }

    pub fn at(&self, lag: usize) -> f64 {
        self.coefficients[lag - 1]
    }

    pub fn is_significant(&self, lag: usize) -> bool {
        self.at(lag).abs() > self.band
    }
}

/// `floor(10 · log10 n)`, capped at `n - 1`.
pub fn default_max_lag(n: usize) -> usize {
    if n < 2 {
        return 0;
    }
    ((10.0 * (n as f64).log10()).floor() as usize).clamp(1, n - 1)
}

pub fn band(n: usize) -> f64 {
    BAND_Z / (n as f64).sqrt()
}

/// Biased (denominator `n`) sample autocorrelations.
pub fn acf(x: &[f64], max_lag: usize) -> Result<AcfResult> {
    let coefficients = autocorrelations(x, max_lag)?;
    Ok(AcfResult {
        kind: CorrelogramKind::Acf,
        coefficients,
        n: x.len(),
        band: band(x.len()),
    })
}

/// Partial autocorrelations via the Durbin-Levinson recursion.
pub fn pacf(x: &[f64], max_lag: usize) -> Result<AcfResult> {
    let r = autocorrelations(x, max_lag)?;
    let coefficients = durbin_levinson(&r)?;
    Ok(AcfResult {
        kind: CorrelogramKind::Pacf,
        coefficients,
        n: x.len(),
        band: band(x.len()),
    })
}

pub(crate) fn autocorrelations(x: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = x.len();
    if n < 2 {
        return Err(Error::TooShort {
            what: "autocorrelation",
            needed: 2,
            got: n,
        });
    }
    if max_lag == 0 || max_lag >= n {
        return Err(Error::InvalidArgument(format!(
            "max_lag must be in 1..{n}, got {max_lag}"
        )));
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let dev: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let c0: f64 = dev.iter().map(|v| v * v).sum();
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if c0 <= n as f64 * (1e-12 * scale).powi(2) {
        return Err(Error::ZeroVariance);
    }
    Ok((1..=max_lag)
        .map(|k| {
            dev[..n - k]
                .iter()
                .zip(&dev[k..])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / c0
        })
        .collect())
}

/// Maps autocorrelations `r[0] = ρ(1), …` to partial autocorrelations.
pub(crate) fn durbin_levinson(r: &[f64]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(r.len());
    let mut phi: Vec<f64> = Vec::with_capacity(r.len());
    let mut v = 1.0;
    for k in 0..r.len() {
        let num = r[k]
            - phi
                .iter()
                .enumerate()
                .map(|(j, p)| p * r[k - 1 - j])
                .sum::<f64>();
        let a = num / v;
        if !a.is_finite() || a.abs() >= 1.0 {
            return Err(Error::Numerical(format!(
                "Durbin-Levinson breakdown at lag {}: partial autocorrelation {a}",
                k + 1
            )));
        }
        let prev = phi.clone();
        for j in 0..k {
            phi[j] = prev[j] - a * prev[k - 1 - j];
        }
        phi.push(a);
        v *= 1.0 - a * a;
        out.push(a);
    }
    Ok(out)
}
