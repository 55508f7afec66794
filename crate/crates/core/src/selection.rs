//! Tentative model identification from correlograms, AIC ranking, and the
//! significance-rejection loop.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arima::{coef_test, fit, ArimaFit, ArimaOrder, MAX_ORDER};
use crate::diagnostics::AcfResult;
use crate::error::{Error, Result};
use crate::series::{BoxCoxLambda, TimeSeries};

/// Lags after a cut-off that must all be insignificant.
pub const CUTOFF_WINDOW: usize = 5;

/// Largest AR and MA order of the mixed grid.
pub const GRID_MAX: usize = 3;

/// AICs closer than this are treated as tied.
pub const AIC_TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CandidateSource {
    Heuristic,
    ExplicitGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    orders: Vec<ArimaOrder>,
    d: usize,
    source: CandidateSource,
}

impl CandidateSet {
    /// A user-supplied grid. Orders must be distinct and share `d`.
    pub fn explicit(orders: Vec<ArimaOrder>) -> Result<Self> {
        Self::build(orders, CandidateSource::ExplicitGrid)
    }

    fn build(orders: Vec<ArimaOrder>, source: CandidateSource) -> Result<Self> {
        let Some(first) = orders.first() else {
            return Err(Error::InvalidArgument("candidate set is empty".into()));
        };
        let d = first.d;
        if let Some(o) = orders.iter().find(|o| o.d != d) {
            return Err(Error::InvalidArgument(format!(
                "candidates must share d = {d}, found {o}"
            )));
        }
        let mut seen = BTreeSet::new();
        if let Some(o) = orders.iter().find(|o| !seen.insert(**o)) {
            return Err(Error::InvalidArgument(format!("duplicate candidate {o}")));
        }
        Ok(CandidateSet { orders, d, source })
    }

    pub fn orders(&self) -> &[ArimaOrder] {
        &self.orders
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn source(&self) -> CandidateSource {
        self.source
    }

    pub fn len(&self) -> usize {
        self.orders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orders.is_empty()
    }
}

/// Reading of a single correlogram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "pattern", content = "lag")]
pub enum Pattern {
    /// Nothing significant in the first `1 + CUTOFF_WINDOW` lags.
    NoSpikes,
    /// Lags `1..=k` significant, the next `CUTOFF_WINDOW` are not.
    CutOff(usize),
    /// Leading run of `k` significant lags followed by further spikes.
    Ambiguous(usize),
    TailsOff,
}

pub fn classify(r: &AcfResult) -> Pattern {
    let k = (1..=r.max_lag())
        .take_while(|&l| r.is_significant(l))
        .count();
    if k + CUTOFF_WINDOW > r.max_lag() || k > MAX_ORDER {
        return Pattern::TailsOff;
    }
    let spike_after = (k + 1..=k + CUTOFF_WINDOW).any(|l| r.is_significant(l));
    match (k, spike_after) {
        (0, false) => Pattern::NoSpikes,
        (0, true) => Pattern::TailsOff,
        (k, false) => Pattern::CutOff(k),
        (k, true) => Pattern::Ambiguous(k),
    }
}

/// Tentative orders from the ACF and PACF of the differenced series.
///
/// A cut-off (clean or followed by later spikes) in the ACF suggests
/// `(0,d,k)`, in the PACF `(k,d,0)`. Unless exactly one plot cuts off cleanly
/// and the other shows no competing reading, the mixed grid
/// `p, q ∈ 1..=3` is added.
pub fn suggest_candidates(acf: &AcfResult, pacf: &AcfResult, d: usize) -> Result<CandidateSet> {
    let needed = 1 + CUTOFF_WINDOW;
    if acf.max_lag() < needed || pacf.max_lag() < needed {
        return Err(Error::InvalidArgument(format!(
            "at least {needed} lags are needed to classify a correlogram"
        )));
    }
    let (a, p) = (classify(acf), classify(pacf));

    let mut orders = Vec::new();
    if a == Pattern::NoSpikes && p == Pattern::NoSpikes {
        orders.push(ArimaOrder::new(0, d, 0)?);
        return CandidateSet::build(orders, CandidateSource::Heuristic);
    }
    if let Pattern::CutOff(k) | Pattern::Ambiguous(k) = a {
        orders.push(ArimaOrder::new(0, d, k)?);
    }
    if let Pattern::CutOff(k) | Pattern::Ambiguous(k) = p {
        orders.push(ArimaOrder::new(k, d, 0)?);
    }
    let quiet = |x: Pattern| matches!(x, Pattern::TailsOff | Pattern::NoSpikes);
    let single_reading =
        matches!((a, p), (Pattern::CutOff(_), o) | (o, Pattern::CutOff(_)) if quiet(o));
    if !single_reading {
        for pp in 1..=GRID_MAX {
            for qq in 1..=GRID_MAX {
                orders.push(ArimaOrder::new(pp, d, qq)?);
            }
        }
    }
    let mut seen = BTreeSet::new();
    orders.retain(|o| seen.insert(*o));
    CandidateSet::build(orders, CandidateSource::Heuristic)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Selected,
    RejectedInsignificant,
    NotExamined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub order: ArimaOrder,
    pub aic: f64,
    pub status: Status,
    /// Largest coefficient p-value, once examined.
    pub max_p_value: Option<f64>,
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitFailure {
    pub order: ArimaOrder,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionTrace {
    /// Successful fits, best AIC first.
    pub ranked: Vec<TraceEntry>,
    /// Candidates that could not be fitted, in candidate order.
    pub failures: Vec<FitFailure>,
    pub alpha: Option<f64>,
}

impl SelectionTrace {
    pub fn selected(&self) -> Option<&TraceEntry> {
        self.ranked.iter().find(|e| e.status == Status::Selected)
    }
}

/// AIC first; near-ties go to fewer coefficients, then lower q.
fn rank_cmp(a: &ArimaFit, b: &ArimaFit) -> Ordering {
    let parsimony = |f: &ArimaFit| (f.order.p + f.order.q, f.order.q);
    parsimony(a).cmp(&parsimony(b))
}

fn sort_fits(fits: &mut [ArimaFit]) {
    fits.sort_by(|a, b| a.aic.total_cmp(&b.aic).then_with(|| rank_cmp(a, b)));
    // Resolve near-ties group by group so the ordering stays a total order.
    let mut start = 0;
    while start < fits.len() {
        let base = fits[start].aic;
        let end = start
            + fits[start..]
                .iter()
                .take_while(|f| f.aic - base <= AIC_TIE_TOL)
                .count();
        fits[start..end].sort_by(rank_cmp);
        start = end;
    }
}

fn fit_all(
    series: &TimeSeries,
    candidates: &CandidateSet,
    lambda: BoxCoxLambda,
) -> Result<(Vec<ArimaFit>, Vec<FitFailure>)> {
    let outcomes: Vec<(ArimaOrder, Result<ArimaFit>)> = candidates
        .orders()
        .par_iter()
        .map(|&o| (o, fit(series, o, lambda)))
        .collect();
    let mut fits = Vec::new();
    let mut failures = Vec::new();
    for (order, outcome) in outcomes {
        match outcome {
            Ok(f) => fits.push(f),
            Err(e) => failures.push(FitFailure {
                order,
                reason: e.to_string(),
            }),
        }
    }
    if fits.is_empty() {
        let reasons: Vec<String> = failures
            .iter()
            .map(|f| format!("{}: {}", f.order, f.reason))
            .collect();
        return Err(Error::SelectionFailed(format!(
            "every candidate failed to fit ({})",
            reasons.join("; ")
        )));
    }
    sort_fits(&mut fits);
    Ok((fits, failures))
}

fn entry(f: &ArimaFit) -> TraceEntry {
    TraceEntry {
        order: f.order,
        aic: f.aic,
        status: Status::NotExamined,
        max_p_value: None,
        reason: None,
    }
}

/// Fits every candidate and orders the successes by AIC.
pub fn rank_by_aic(
    series: &TimeSeries,
    candidates: &CandidateSet,
    lambda: BoxCoxLambda,
) -> Result<SelectionTrace> {
    let (fits, failures) = fit_all(series, candidates, lambda)?;
    Ok(SelectionTrace {
        ranked: fits.iter().map(entry).collect(),
        failures,
        alpha: None,
    })
}

/// Walks the AIC ranking and returns the first model whose coefficients are
/// all significant at `alpha`.
pub fn select(
    series: &TimeSeries,
    candidates: &CandidateSet,
    lambda: BoxCoxLambda,
    alpha: f64,
) -> Result<(ArimaFit, SelectionTrace)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha must be in (0, 1), got {alpha}"
        )));
    }
    let (fits, failures) = fit_all(series, candidates, lambda)?;
    let mut ranked: Vec<TraceEntry> = fits.iter().map(entry).collect();
    let mut chosen = None;
    for (i, f) in fits.iter().enumerate() {
        let e = &mut ranked[i];
        match coef_test(f) {
            Ok(rows) => {
                let worst = rows.iter().map(|r| r.p_value).fold(0.0, f64::max);
                e.max_p_value = Some(worst);
                if rows.iter().all(|r| r.p_value < alpha) {
                    e.status = Status::Selected;
                    chosen = Some(i);
                    break;
                }
                let names: Vec<&str> = rows
                    .iter()
                    .filter(|r| r.p_value >= alpha)
                    .map(|r| r.name.as_str())
                    .collect();
                e.status = Status::RejectedInsignificant;
                e.reason = Some(format!("not significant: {}", names.join(", ")));
            }
            Err(err) => {
                e.status = Status::RejectedInsignificant;
                e.reason = Some(err.to_string());
            }
        }
    }
    let trace = SelectionTrace {
        ranked,
        failures,
        alpha: Some(alpha),
    };
    match chosen {
        Some(i) => Ok((fits.into_iter().nth(i).expect("index in range"), trace)),
        None => {
            let all: Vec<String> = trace
                .ranked
                .iter()
                .map(|e| {
                    format!(
                        "{} ({})",
                        e.order,
                        e.reason.as_deref().unwrap_or("rejected")
                    )
                })
                .chain(
                    trace
                        .failures
                        .iter()
                        .map(|f| format!("{} ({})", f.order, f.reason)),
                )
                .collect();
            Err(Error::SelectionFailed(format!(
                "no candidate has all coefficients significant at {alpha}: {}",
                all.join("; ")
            )))
        }
    }
}
