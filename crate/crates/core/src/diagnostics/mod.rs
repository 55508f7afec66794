//! Correlograms and the hypothesis tests used to check stationarity, model
//! adequacy and normality.

mod acf;
mod adf;
mod ljung_box;
mod shapiro;

use serde::{Deserialize, Serialize};

pub use acf::{acf, band, default_max_lag, pacf, AcfResult, CorrelogramKind, BAND_Z};
pub use adf::{
    adf_test, adf_test_with_lag, default_lag as adf_default_lag, df_p_value, DF_PROBABILITIES,
    DF_SAMPLE_SIZES, DF_TABLE_VERSION, DF_TREND_TABLE,
};
pub use ljung_box::{ljung_box, ljung_box_from_acf};
pub use shapiro::shapiro_wilk;

/// Outcome of a hypothesis test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub name: String,
    pub statistic: f64,
    /// Degrees of freedom of the chi-square reference distribution, if any.
    pub df: Option<usize>,
    /// Lag order used by the test, if it has one.
    pub lag: Option<usize>,
    pub p_value: f64,
    /// The statistic fell outside a lookup table and `p_value` is the table
    /// boundary.
    pub p_clamped: bool,
    pub null_hypothesis: String,
}

impl TestResult {
    pub fn rejects(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}
