//! End-to-end run: load, transform, difference, identify, select, diagnose,
//! evaluate on the holdout and forecast.

mod plot;
mod render;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::arima::{coef_test, ArimaFit, ArimaOrder, CoefRow};
use crate::diagnostics::{
    acf, adf_test, default_max_lag, ljung_box, pacf, shapiro_wilk, AcfResult, TestResult,
};
use crate::error::{Error, Result};
use crate::forecast::{
    forecast, one_step_eval, one_step_predictions, EvaluationResult, ForecastResult,
};
use crate::selection::{
    classify, select, suggest_candidates, CandidateSet, Pattern, SelectionTrace,
};
use crate::series::{
    box_cox, difference, fire_incidence, load_csv, BoxCoxLambda, Period, TimeSeries,
};

pub use plot::{emit_plot_data, PLOT_FILES};
pub use render::{render, Format};

/// Version of the JSON report layout.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Differencing never goes beyond this order.
pub const MAX_D: usize = 2;

/// Level at which the ADF test must reject before differencing stops.
pub const ADF_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// CSV input. `None` runs on the bundled fire incidence series.
    pub input: Option<PathBuf>,
    pub lambda: BoxCoxLambda,
    /// Differencing order; `None` picks it with the ADF test.
    pub d: Option<usize>,
    /// Explicit candidate orders; `None` derives them from the correlograms.
    pub grid: Option<Vec<ArimaOrder>>,
    /// Training length; `None` means everything before the validation window.
    pub train: Option<usize>,
    pub validation: usize,
    /// Run the one-step evaluation on the validation window. The window stays
    /// part of the forecast history either way.
    pub evaluate: bool,
    pub horizon: usize,
    pub level: f64,
    pub alpha: f64,
    /// Correlogram length; `None` uses `floor(10 log10 n)`.
    pub max_lag: Option<usize>,
    pub ljung_box_lag: usize,
    /// Degrees of freedom subtracted from the Ljung-Box reference distribution.
    pub ljung_box_fitdf: usize,
    pub output_dir: Option<PathBuf>,
    pub formats: Vec<Format>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            input: None,
            lambda: BoxCoxLambda::LOG,
            d: None,
            grid: None,
            train: None,
            validation: 12,
            evaluate: true,
            horizon: 12,
            level: 0.95,
            alpha: 0.05,
            max_lag: None,
            ljung_box_lag: 10,
            ljung_box_fitdf: 0,
            output_dir: None,
            formats: vec![Format::Text],
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.horizon == 0 {
            return bad("horizon must be at least 1".into());
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return bad(format!("level must be in (0, 1), got {}", self.level));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must be in (0, 1), got {}", self.alpha));
        }
        if let Some(d) = self.d {
            if d > MAX_D {
                return bad(format!("d must be at most {MAX_D}, got {d}"));
            }
        }
        if let Some(grid) = &self.grid {
            CandidateSet::explicit(grid.clone())?;
            if let Some(d) = self.d {
                if grid.iter().any(|o| o.d != d) {
                    return bad(format!("grid orders must use d = {d}"));
                }
            }
        }
        if self.train == Some(0) {
            return bad("training length must be positive".into());
        }
        if self.ljung_box_lag == 0 {
            return bad("Ljung-Box lag must be at least 1".into());
        }
        if self.max_lag == Some(0) {
            return bad("max_lag must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSummary {
    pub n: usize,
    pub start: Period,
    pub end: Period,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub n_train: usize,
    pub n_validation: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRecord {
    /// Training series on the original scale.
    pub raw: TimeSeries,
    pub transformed: TimeSeries,
    pub differenced: TimeSeries,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transformation {
    pub lambda: BoxCoxLambda,
    pub d: usize,
    pub d_chosen_by_test: bool,
}

/// ADF result on the transformed training series differenced `d` times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityStep {
    pub d: usize,
    pub test: TestResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Identification {
    pub acf: AcfResult,
    pub pacf: AcfResult,
    pub acf_pattern: Pattern,
    pub pacf_pattern: Pattern,
    pub candidates: CandidateSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualDiagnostics {
    pub ljung_box: TestResult,
    pub shapiro_wilk: Option<TestResult>,
    pub acf: AcfResult,
    pub pacf: AcfResult,
    /// One-step predictions on the transformed scale, aligned with the
    /// model residuals.
    pub fitted: TimeSeries,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Toolkit {
    pub name: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub toolkit: Toolkit,
    /// Effective configuration, defaults included.
    pub config: PipelineConfig,
    pub data: DataSummary,
    pub series: SeriesRecord,
    pub transformation: Transformation,
    pub stationarity: Vec<StationarityStep>,
    pub identification: Identification,
    pub selection: SelectionTrace,
    pub model: ArimaFit,
    pub coefficients: Vec<CoefRow>,
    pub residual_diagnostics: ResidualDiagnostics,
    pub evaluation: Option<EvaluationResult>,
    pub forecast: ForecastResult,
}

impl Report {
    pub fn to_json(&self) -> String {
        render(self, Format::Json)
    }
}

fn load(config: &PipelineConfig) -> Result<TimeSeries> {
    match &config.input {
        Some(path) => load_csv(path),
        None => Ok(fire_incidence()),
    }
}

fn windows(
    series: &TimeSeries,
    config: &PipelineConfig,
) -> Result<(TimeSeries, Option<TimeSeries>)> {
    let n = series.len();
    let v = config.validation;
    let n_train = match config.train {
        Some(t) => t,
        None => n.checked_sub(v).filter(|&t| t > 0).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "validation length {v} leaves no training data out of {n}"
            ))
        })?,
    };
    if n_train + v > n {
        return Err(Error::InvalidArgument(format!(
            "train ({n_train}) plus validation ({v}) exceeds the {n} observations"
        )));
    }
    let values = series.values();
    let train = TimeSeries::new(series.start(), values[..n_train].to_vec())?;
    let validation = if v == 0 {
        None
    } else {
        Some(TimeSeries::new(
            series.start().offset(n_train as i64),
            values[n_train..n_train + v].to_vec(),
        )?)
    };
    Ok((train, validation))
}

/// Differences until the ADF test rejects a unit root at [`ADF_ALPHA`], up to
/// [`MAX_D`]. With a fixed `d`, tests each level up to it.
pub fn choose_d(
    transformed: &TimeSeries,
    fixed: Option<usize>,
) -> Result<(usize, Vec<StationarityStep>)> {
    let mut steps = Vec::new();
    let limit = fixed.unwrap_or(MAX_D);
    for d in 0..=limit {
        let x = difference(transformed, d)?;
        let test = adf_test(x.values())?;
        let stationary = test.rejects(ADF_ALPHA);
        steps.push(StationarityStep { d, test });
        if fixed.is_none() && (stationary || d == MAX_D) {
            return Ok((d, steps));
        }
    }
    Ok((limit, steps))
}

fn correlogram_lag(config: &PipelineConfig, n: usize) -> usize {
    config
        .max_lag
        .unwrap_or_else(|| default_max_lag(n))
        .min(n.saturating_sub(1))
}

/// Runs every stage and assembles the report. Fails as a whole: no partial
/// report is produced.
pub fn run_pipeline(config: &PipelineConfig) -> Result<Report> {
    config
        .validate()
        .map_err(|e| e.in_stage("config", "check the command-line options"))?;
    let series =
        load(config).map_err(|e| e.in_stage("load", "check the input CSV path and format"))?;
    let (train, validation) = windows(&series, config)
        .map_err(|e| e.in_stage("load", "adjust --train or the validation length"))?;

    let transformed = box_cox(&train, config.lambda).map_err(|e| {
        e.in_stage(
            "transform",
            "choose lambda = 1 or remove non-positive values",
        )
    })?;
    let (d, stationarity) = choose_d(&transformed, config.d)
        .map_err(|e| e.in_stage("stationarity", "supply more observations or a fixed d"))?;
    let differenced = difference(&transformed, d)
        .map_err(|e| e.in_stage("stationarity", "supply more observations or a lower d"))?;

    let identification = identify(config, &differenced, d).map_err(|e| {
        e.in_stage(
            "identification",
            "supply an explicit grid or more observations",
        )
    })?;
    let (model, trace) = select(
        &train,
        &identification.candidates,
        config.lambda,
        config.alpha,
    )
    .map_err(|e| e.in_stage("selection", "try a different grid or a larger alpha"))?;
    let coefficients =
        coef_test(&model).map_err(|e| e.in_stage("selection", "try a different grid"))?;

    let residual_diagnostics = diagnose(config, &model, &train)
        .map_err(|e| e.in_stage("diagnostics", "lower the Ljung-Box lag"))?;

    let evaluation = match validation.as_ref().filter(|_| config.evaluate) {
        Some(v) => Some(
            one_step_eval(&model, &train, v)
                .map_err(|e| e.in_stage("evaluation", "check the validation window"))?,
        ),
        None => None,
    };
    let history = match &validation {
        Some(v) => train.concat(v)?,
        None => train.clone(),
    };
    let forecast = forecast(&model, &history, config.horizon, config.level)
        .map_err(|e| e.in_stage("forecast", "reduce the horizon or change lambda"))?;

    let mut effective = config.clone();
    effective.train = Some(train.len());
    let values = series.values();
    Ok(Report {
        schema_version: REPORT_SCHEMA_VERSION,
        toolkit: Toolkit {
            name: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
        },
        config: effective,
        data: DataSummary {
            n: series.len(),
            start: series.start(),
            end: series.end(),
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean: values.iter().sum::<f64>() / values.len() as f64,
            n_train: train.len(),
            n_validation: validation.as_ref().map_or(0, TimeSeries::len),
        },
        series: SeriesRecord {
            raw: train,
            transformed,
            differenced,
        },
        transformation: Transformation {
            lambda: config.lambda,
            d,
            d_chosen_by_test: config.d.is_none(),
        },
        stationarity,
        identification,
        selection: trace,
        model,
        coefficients,
        residual_diagnostics,
        evaluation,
        forecast,
    })
}

fn identify(config: &PipelineConfig, differenced: &TimeSeries, d: usize) -> Result<Identification> {
    let lag = correlogram_lag(config, differenced.len());
    let a = acf(differenced.values(), lag)?;
    let p = pacf(differenced.values(), lag)?;
    let candidates = match &config.grid {
        Some(grid) => {
            if let Some(o) = grid.iter().find(|o| o.d != d) {
                return Err(Error::InvalidArgument(format!(
                    "grid order {o} does not match the chosen d = {d}"
                )));
            }
            CandidateSet::explicit(grid.clone())?
        }
        None => suggest_candidates(&a, &p, d)?,
    };
    Ok(Identification {
        acf_pattern: classify(&a),
        pacf_pattern: classify(&p),
        acf: a,
        pacf: p,
        candidates,
    })
}

fn diagnose(
    config: &PipelineConfig,
    model: &ArimaFit,
    train: &TimeSeries,
) -> Result<ResidualDiagnostics> {
    let res = model.residuals.values();
    let lag = correlogram_lag(config, res.len());
    Ok(ResidualDiagnostics {
        ljung_box: ljung_box(res, config.ljung_box_lag, config.ljung_box_fitdf)?,
        shapiro_wilk: shapiro_wilk(res).ok(),
        acf: acf(res, lag)?,
        pacf: pacf(res, lag)?,
        fitted: one_step_predictions(model, train)?,
    })
}

/// Writes the requested renderings into `dir`, creating it if needed.
pub fn write_outputs(report: &Report, dir: &Path, formats: &[Format]) -> Result<Vec<PathBuf>> {
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| Error::Output { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();
    for f in formats {
        match f {
            Format::Text | Format::Json => {
                let path = dir.join(match f {
                    Format::Text => "report.txt",
                    _ => "report.json",
                });
                std::fs::write(&path, render(report, *f)).map_err(io_err(&path))?;
                written.push(path);
            }
            Format::PlotData => written.extend(emit_plot_data(report, dir)?),
        }
    }
    Ok(written)
}
