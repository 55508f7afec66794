use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::acf::autocorrelations;
use super::TestResult;
use crate::error::{Error, Result};

const NULL: &str = "the residuals are independently distributed (no lack of fit)";

/// Ljung-Box portmanteau test on `residuals` over lags `1..=lag`, with
/// `df = lag - fitdf`.
pub fn ljung_box(residuals: &[f64], lag: usize, fitdf: usize) -> Result<TestResult> {
    let n = residuals.len();
    if lag == 0 || lag >= n {
        return Err(Error::InvalidArgument(format!(
            "Ljung-Box lag must be in 1..{n}, got {lag}"
        )));
    }
    let r = autocorrelations(residuals, lag)?;
    ljung_box_from_acf(&r, n, fitdf)
}

/// Ljung-Box statistic from precomputed autocorrelations `r[k-1] = r_k`.
pub fn ljung_box_from_acf(r: &[f64], n: usize, fitdf: usize) -> Result<TestResult> {
    let lag = r.len();
    if lag == 0 || lag >= n {
        return Err(Error::InvalidArgument(format!(
            "Ljung-Box lag must be in 1..{n}, got {lag}"
        )));
    }
    if fitdf >= lag {
        return Err(Error::InvalidArgument(format!(
            "Ljung-Box needs lag > fitdf, got lag {lag} and fitdf {fitdf}"
        )));
    }
    let nf = n as f64;
    let q = nf
        * (nf + 2.0)
        * r.iter()
            .enumerate()
            .map(|(i, rk)| rk * rk / (nf - (i + 1) as f64))
            .sum::<f64>();
    let df = lag - fitdf;
    let chi2 = ChiSquared::new(df as f64).map_err(|e| Error::Numerical(e.to_string()))?;
    let p_value = chi2.sf(q).clamp(0.0, 1.0);
    Ok(TestResult {
        name: "Ljung-Box".into(),
        statistic: q,
        df: Some(df),
        lag: Some(lag),
        p_value,
        p_clamped: false,
        null_hypothesis: NULL.into(),
    })
}
