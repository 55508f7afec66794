//! Monthly series container and the transformations applied before modelling:
//! CSV ingestion, Box-Cox, differencing (and its inverse) and train/validation
//! splitting.
//!
//! All operations are pure and return new series.

use std::fmt;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Observations per year. Only monthly data is supported.
pub const MONTHLY: u32 = 12;

const MONTH_ABBR: [&str; 12] = [
    "Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec",
];

/// A calendar month.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Period {
    pub year: i32,
    pub month: u32,
}

impl Period {
    pub fn new(year: i32, month: u32) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::InvalidArgument(format!(
                "month {month} not in 1..=12"
            )));
        }
        Ok(Period { year, month })
    }

    fn index(self) -> i64 {
        self.year as i64 * 12 + (self.month as i64 - 1)
    }

    fn from_index(idx: i64) -> Self {
        Period {
            year: idx.div_euclid(12) as i32,
            month: (idx.rem_euclid(12) + 1) as u32,
        }
    }

    /// The period `months` months later (or earlier, if negative).
    pub fn offset(self, months: i64) -> Self {
        Self::from_index(self.index() + months)
    }

    /// Months from `self` to `other`.
    pub fn months_until(self, other: Period) -> i64 {
        other.index() - self.index()
    }

    /// Parses the zero-padded `YYYY-MM` form.
    pub fn parse_iso(s: &str) -> Option<Self> {
        let (y, m) = s.split_once('-')?;
        if y.len() != 4 || m.len() != 2 || !y.bytes().chain(m.bytes()).all(|b| b.is_ascii_digit()) {
            return None;
        }
        Period::new(y.parse().ok()?, m.parse().ok()?).ok()
    }

    /// `YYYY-MM`.
    pub fn iso(self) -> String {
        format!("{:04}-{:02}", self.year, self.month)
    }

    /// `Mon-YYYY`, the layout used in report tables.
    pub fn label(self) -> String {
        format!("{}-{:04}", MONTH_ABBR[self.month as usize - 1], self.year)
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.iso())
    }
}

/// A gap-free monthly series of finite values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    start: Period,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(start: Period, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSeries(
                "series must contain at least one value".into(),
            ));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSeries(format!(
                "non-finite value at index {i}"
            )));
        }
        Ok(TimeSeries { start, values })
    }

    pub fn start(&self) -> Period {
        self.start
    }

    pub fn end(&self) -> Period {
        self.start.offset(self.values.len() as i64 - 1)
    }

    pub fn frequency(&self) -> u32 {
        MONTHLY
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn period_at(&self, i: usize) -> Period {
        self.start.offset(i as i64)
    }

    pub fn periods(&self) -> impl Iterator<Item = Period> + '_ {
        (0..self.values.len()).map(|i| self.period_at(i))
    }

    /// Appends `next`, which must begin the month after `self` ends.
    pub fn concat(&self, next: &TimeSeries) -> Result<TimeSeries> {
        if next.start != self.end().offset(1) {
            return Err(Error::InvalidSeries(format!(
                "series not contiguous: {} does not follow {}",
                next.start,
                self.end()
            )));
        }
        let mut values = self.values.clone();
        values.extend_from_slice(&next.values);
        Ok(TimeSeries {
            start: self.start,
            values,
        })
    }

    fn with_values(&self, start: Period, values: Vec<f64>) -> Result<TimeSeries> {
        TimeSeries::new(start, values)
    }
}

/// Box-Cox power parameter. Zero selects the log transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BoxCoxLambda(f64);

impl BoxCoxLambda {
    pub const LOG: BoxCoxLambda = BoxCoxLambda(0.0);

    pub fn new(lambda: f64) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "lambda must be finite, got {lambda}"
            )));
        }
        Ok(BoxCoxLambda(lambda))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_log(self) -> bool {
        self.0 == 0.0
    }

    /// Transforms a single value, or `None` outside the domain.
    pub fn forward(self, y: f64) -> Option<f64> {
        if y <= 0.0 {
            return None;
        }
        Some(if self.is_log() {
            y.ln()
        } else {
            (y.powf(self.0) - 1.0) / self.0
        })
    }

    /// Inverse of [`forward`](Self::forward), or `None` outside the domain.
    pub fn inverse(self, z: f64) -> Option<f64> {
        if self.is_log() {
            return Some(z.exp());
        }
        let base = self.0 * z + 1.0;
        if base <= 0.0 {
            return None;
        }
        Some(base.powf(1.0 / self.0))
    }
}

impl Default for BoxCoxLambda {
    fn default() -> Self {
        BoxCoxLambda::LOG
    }
}

/// Size of the training prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub n_train: usize,
}

/// Reads a `date,value` CSV file.
pub fn load_csv(path: impl AsRef<Path>) -> Result<TimeSeries> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv(&text)
}

/// Parses CSV text in the `date,value` format. Row numbers in errors are
/// 1-based file lines, the header being row 1.
pub fn parse_csv(text: &str) -> Result<TimeSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = reader.records();

    let header = match records.next() {
        Some(rec) => rec.map_err(|e| Error::Csv {
            row: 1,
            message: e.to_string(),
        })?,
        None => {
            return Err(Error::Csv {
                row: 1,
                message: "empty file, expected header `date,value`".into(),
            })
        }
    };
    if header.len() != 2 || &header[0] != "date" || &header[1] != "value" {
        return Err(Error::Csv {
            row: 1,
            message: format!(
                "malformed header, expected `date,value`, found `{}`",
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }

    let mut start = None;
    let mut prev: Option<Period> = None;
    let mut values = Vec::new();
    for (i, rec) in records.enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| Error::Csv {
            row,
            message: e.to_string(),
        })?;
        if rec.len() != 2 {
            return Err(Error::Csv {
                row,
                message: format!("expected 2 fields, found {}", rec.len()),
            });
        }
        let period = Period::parse_iso(&rec[0]).ok_or_else(|| Error::Csv {
            row,
            message: format!("date `{}` is not YYYY-MM", &rec[0]),
        })?;
        if let Some(p) = prev {
            match p.months_until(period) {
                1 => {}
                0 => {
                    return Err(Error::Csv {
                        row,
                        message: format!("duplicate month {period}"),
                    })
                }
                k if k > 1 => {
                    return Err(Error::Csv {
                        row,
                        message: format!("gap at row {row}: {period} follows {p}"),
                    })
                }
                _ => {
                    return Err(Error::Csv {
                        row,
                        message: format!("month {period} is out of order after {p}"),
                    })
                }
            }
        }
        let value: f64 = rec[1].parse().map_err(|_| Error::Csv {
            row,
            message: format!("cannot parse value `{}`", &rec[1]),
        })?;
        if !value.is_finite() {
            return Err(Error::Csv {
                row,
                message: format!("non-finite value `{}`", &rec[1]),
            });
        }
        start.get_or_insert(period);
        prev = Some(period);
        values.push(value);
    }

    match start {
        Some(start) => TimeSeries::new(start, values),
        None => Err(Error::Csv {
            row: 2,
            message: "no data rows".into(),
        }),
    }
}

/// Renders a series in the same format [`parse_csv`] reads.
pub fn to_csv_string(series: &TimeSeries) -> String {
    let mut out = String::from("date,value\n");
    for (p, v) in series.periods().zip(series.values()) {
        out.push_str(&format!("{},{}\n", p.iso(), v));
    }
    out
}

pub fn write_csv(series: &TimeSeries, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut f = std::fs::File::create(path).map_err(|source| Error::Output {
        path: path.to_path_buf(),
        source,
    })?;
    f.write_all(to_csv_string(series).as_bytes())
        .map_err(|source| Error::Output {
            path: path.to_path_buf(),
            source,
        })
}

pub fn box_cox(series: &TimeSeries, lambda: BoxCoxLambda) -> Result<TimeSeries> {
    let values = series
        .values
        .iter()
        .enumerate()
        .map(|(index, &value)| {
            lambda.forward(value).ok_or(Error::BoxCoxDomain {
                index,
                value,
                lambda: lambda.value(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    series.with_values(series.start, values)
}

pub fn inv_box_cox(series: &TimeSeries, lambda: BoxCoxLambda) -> Result<TimeSeries> {
    let values = series
        .values
        .iter()
        .enumerate()
        .map(|(index, &value)| {
            lambda.inverse(value).ok_or(Error::BoxCoxDomain {
                index,
                value,
                lambda: lambda.value(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    series.with_values(series.start, values)
}

/// Applies `(1 - B)` `d` times; the result starts `d` months later.
pub fn difference(series: &TimeSeries, d: usize) -> Result<TimeSeries> {
    if series.len() <= d {
        return Err(Error::TooShort {
            what: "differencing",
            needed: d + 1,
            got: series.len(),
        });
    }
    let values = difference_slice(&series.values, d);
    series.with_values(series.start.offset(d as i64), values)
}

pub(crate) fn difference_slice(x: &[f64], d: usize) -> Vec<f64> {
    let mut out = x.to_vec();
    for _ in 0..d {
        out = out.windows(2).map(|w| w[1] - w[0]).collect();
    }
    out
}

/// Undoes `difference(x, seeds.len())` given the first `d` values of `x`.
///
/// The result starts `d` months before `diffs`.
pub fn integrate(diffs: &TimeSeries, seeds: &[f64]) -> Result<TimeSeries> {
    integrate_values(diffs.values(), seeds)
        .and_then(|v| TimeSeries::new(diffs.start.offset(-(seeds.len() as i64)), v))
}

/// Slice form of [`integrate`], accepting an empty `diffs`.
pub fn integrate_values(diffs: &[f64], seeds: &[f64]) -> Result<Vec<f64>> {
    let d = seeds.len();
    if d == 0 {
        return Ok(diffs.to_vec());
    }
    // Leading value of each intermediate differencing level: level k of
    // seeds (k = 0 is the original series) starts with the first element of
    // difference(seeds, k).
    let heads: Vec<f64> = (0..d).map(|k| difference_slice(seeds, k)[0]).collect();
    let mut cur = diffs.to_vec();
    for k in (0..d).rev() {
        let mut next = Vec::with_capacity(cur.len() + 1);
        let mut acc = heads[k];
        next.push(acc);
        for v in &cur {
            acc += v;
            next.push(acc);
        }
        cur = next;
    }
    Ok(cur)
}

/// Validates a seed count against the differencing order being undone.
pub fn check_seeds(d: usize, seeds: &[f64]) -> Result<()> {
    if seeds.len() != d {
        return Err(Error::InvalidArgument(format!(
            "integration needs {d} seed values, got {}",
            seeds.len()
        )));
    }
    Ok(())
}

pub fn split(series: &TimeSeries, spec: SplitSpec) -> Result<(TimeSeries, TimeSeries)> {
    let n = series.len();
    if spec.n_train < 1 || spec.n_train >= n {
        return Err(Error::InvalidArgument(format!(
            "training length {} must be in 1..{}",
            spec.n_train, n
        )));
    }
    let train = TimeSeries::new(series.start, series.values[..spec.n_train].to_vec())?;
    let validation = TimeSeries::new(
        series.start.offset(spec.n_train as i64),
        series.values[spec.n_train..].to_vec(),
    )?;
    Ok((train, validation))
}

/// The 84-month fire incidence series bundled with the crate
/// (January 2012 to December 2018).
pub fn fire_incidence() -> TimeSeries {
    parse_csv(FIRE_CSV).expect("bundled dataset is valid")
}

/// Raw text of the bundled dataset.
pub const FIRE_CSV: &str = include_str!("../data/fire_davao_2012_2018.csv");

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn ts(values: &[f64]) -> TimeSeries {
        TimeSeries::new(Period::new(2012, 1).unwrap(), values.to_vec()).unwrap()
    }

    #[test]
    fn parses_first_rows() {
        let s = parse_csv("date,value\n2012-01,22\n2012-02,16\n2012-03,24\n").unwrap();
        assert_eq!(s.start(), Period::new(2012, 1).unwrap());
        assert_eq!(s.values(), &[22.0, 16.0, 24.0]);
    }

    #[test]
    fn accepts_crlf() {
        let s = parse_csv("date,value\r\n2012-01,22\r\n2012-02,16\r\n").unwrap();
        assert_eq!(s.values(), &[22.0, 16.0]);
    }

    #[test]
    fn gap_is_reported_with_row() {
        let err = parse_csv("date,value\n2012-01,22\n2012-03,24\n").unwrap_err();
        assert!(err.to_string().contains("gap at row 3"), "{err}");
    }

    #[test]
    fn duplicate_month_rejected() {
        let err = parse_csv("date,value\n2012-01,22\n2012-01,24\n").unwrap_err();
        assert!(matches!(err, Error::Csv { row: 3, .. }));
    }

    #[test]
    fn bad_value_names_row() {
        let err = parse_csv("date,value\n2012-01,22\n2012-02,abc\n").unwrap_err();
        assert!(matches!(err, Error::Csv { row: 3, .. }));
        assert!(err.to_string().contains("abc"));
        let err = parse_csv("date,value\n2012-01,inf\n").unwrap_err();
        assert!(matches!(err, Error::Csv { row: 2, .. }));
    }

    #[test]
    fn bad_header_and_dates() {
        assert!(matches!(
            parse_csv("month,value\n2012-01,1\n"),
            Err(Error::Csv { row: 1, .. })
        ));
        assert!(matches!(
            parse_csv("date,value\n2012-1,1\n"),
            Err(Error::Csv { row: 2, .. })
        ));
        assert!(matches!(
            parse_csv("date,value\n2012-13,1\n"),
            Err(Error::Csv { row: 2, .. })
        ));
        assert!(parse_csv("date,value\n").is_err());
    }

    #[test]
    fn missing_file() {
        assert!(matches!(
            load_csv("/nonexistent/x.csv"),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn box_cox_examples() {
        let s = box_cox(&ts(&[E, E * E]), BoxCoxLambda::LOG).unwrap();
        assert!((s.values()[0] - 1.0).abs() < 1e-15);
        assert!((s.values()[1] - 2.0).abs() < 1e-15);
        let s = box_cox(&ts(&[5.0, 9.0]), BoxCoxLambda::new(1.0).unwrap()).unwrap();
        assert_eq!(s.values(), &[4.0, 8.0]);
        let s = box_cox(&ts(&[22.0]), BoxCoxLambda::LOG).unwrap();
        assert!((s.values()[0] - 3.091_042_453_358_316).abs() < 1e-12);
    }

    #[test]
    fn box_cox_domain() {
        assert!(matches!(
            box_cox(&ts(&[1.0, 0.0]), BoxCoxLambda::LOG),
            Err(Error::BoxCoxDomain { index: 1, .. })
        ));
        assert!(box_cox(&ts(&[-1.0]), BoxCoxLambda::new(0.5).unwrap()).is_err());
        assert!(inv_box_cox(&ts(&[-3.0]), BoxCoxLambda::new(0.5).unwrap()).is_err());
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(
            inv_box_cox(&ts(&[0.0]), BoxCoxLambda::LOG)
                .unwrap()
                .values(),
            &[1.0]
        );
        assert_eq!(
            inv_box_cox(&ts(&[4.0]), BoxCoxLambda::new(1.0).unwrap())
                .unwrap()
                .values(),
            &[5.0]
        );
        let x = ts(&[22.0, 16.0, 24.0]);
        let back =
            inv_box_cox(&box_cox(&x, BoxCoxLambda::LOG).unwrap(), BoxCoxLambda::LOG).unwrap();
        for (a, b) in back.values().iter().zip(x.values()) {
            assert!(((a - b) / b).abs() < 1e-12);
        }
    }

    #[test]
    fn difference_examples() {
        let d = difference(&ts(&[22.0, 16.0, 24.0, 9.0]), 1).unwrap();
        assert_eq!(d.values(), &[-6.0, 8.0, -15.0]);
        assert_eq!(d.start(), Period::new(2012, 2).unwrap());
        let x = ts(&[3.0, 1.0]);
        assert_eq!(difference(&x, 0).unwrap(), x);
        assert_eq!(
            difference(&ts(&[1.0, 4.0, 9.0, 16.0]), 2).unwrap().values(),
            &[2.0, 2.0]
        );
        assert!(matches!(
            difference(&ts(&[1.0]), 1),
            Err(Error::TooShort { .. })
        ));
    }

    #[test]
    fn integrate_examples() {
        let d = difference(&ts(&[22.0, 16.0, 24.0, 9.0]), 1).unwrap();
        let x = integrate(&d, &[22.0]).unwrap();
        assert_eq!(x.values(), &[22.0, 16.0, 24.0, 9.0]);
        assert_eq!(x.start(), Period::new(2012, 1).unwrap());
        assert_eq!(integrate_values(&[], &[5.0]).unwrap(), vec![5.0]);
        let sq = ts(&[1.0, 4.0, 9.0, 16.0]);
        let d2 = difference(&sq, 2).unwrap();
        assert_eq!(integrate(&d2, &[1.0, 4.0]).unwrap().values(), sq.values());
        assert!(check_seeds(2, &[1.0]).is_err());
    }

    #[test]
    fn fire_roundtrip_d1() {
        let fire = fire_incidence();
        let d = difference(&fire, 1).unwrap();
        let back = integrate(&d, &fire.values()[..1]).unwrap();
        for (a, b) in back.values().iter().zip(fire.values()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn split_examples() {
        let fire = fire_incidence();
        assert_eq!(fire.len(), 84);
        let (train, val) = split(&fire, SplitSpec { n_train: 72 }).unwrap();
        assert_eq!(train.end(), Period::new(2017, 12).unwrap());
        assert_eq!(*train.values().last().unwrap(), 26.0);
        assert_eq!(val.start(), Period::new(2018, 1).unwrap());
        assert_eq!(val.values()[0], 37.0);

        let (a, b) = split(&ts(&[1.0, 2.0]), SplitSpec { n_train: 1 }).unwrap();
        assert_eq!((a.len(), b.len()), (1, 1));
        assert!(split(&fire, SplitSpec { n_train: 84 }).is_err());
        assert!(split(&fire, SplitSpec { n_train: 0 }).is_err());
    }

    #[test]
    fn period_labels() {
        let p = Period::new(2019, 1).unwrap();
        assert_eq!(p.label(), "Jan-2019");
        assert_eq!(p.offset(-1).iso(), "2018-12");
        assert_eq!(p.offset(23), Period::new(2020, 12).unwrap());
    }

    #[test]
    fn concat_requires_contiguity() {
        let a = ts(&[1.0, 2.0]);
        let b = TimeSeries::new(Period::new(2012, 3).unwrap(), vec![3.0]).unwrap();
        assert_eq!(a.concat(&b).unwrap().values(), &[1.0, 2.0, 3.0]);
        let c = TimeSeries::new(Period::new(2012, 5).unwrap(), vec![3.0]).unwrap();
        assert!(a.concat(&c).is_err());
    }
}
