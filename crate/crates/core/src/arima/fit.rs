use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use statrs::distribution::{ContinuousCDF, Normal};

use super::likelihood::{arma_filter, css_sum, profile_loglik};
use super::optim::NelderMead;
use super::statespace::{ar_is_stationary, is_stable, ma_is_invertible};
use super::{coefficient_names, ArimaFit, ArimaOrder, ArimaParams, FIT_SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::series::{box_cox, difference_slice, to_csv_string, BoxCoxLambda, TimeSeries};

/// Knobs for [`fit_with`]. The defaults reproduce [`fit`].
#[derive(Debug, Clone, Copy, Default)]
pub struct FitOptions {
    /// Estimate δ. `None` means "only when d = 0"; asking for a constant with
    /// `d >= 1` is rejected.
    pub include_constant: Option<bool>,
    pub optimizer: NelderMead,
}

/// Fits `order` to `series` given on the original scale.
pub fn fit(series: &TimeSeries, order: ArimaOrder, lambda: BoxCoxLambda) -> Result<ArimaFit> {
    fit_with(series, order, lambda, &FitOptions::default())
}

/// Unpacks an optimizer vector `[φ.., θ.., δ?]`.
#[derive(Clone, Copy)]
struct Layout {
    p: usize,
    q: usize,
    constant: bool,
}

impl Layout {
    fn len(&self) -> usize {
        self.p + self.q + usize::from(self.constant)
    }

    fn params(&self, x: &[f64], sigma2: f64) -> ArimaParams {
        let delta = if self.constant {
            x[self.p + self.q]
        } else {
            0.0
        };
        ArimaParams::new(
            x[..self.p].to_vec(),
            x[self.p..self.p + self.q].to_vec(),
            delta,
            sigma2,
        )
    }

    fn feasible(&self, x: &[f64]) -> bool {
        x.iter().all(|v| v.is_finite())
            && ar_is_stationary(&x[..self.p])
            && ma_is_invertible(&x[self.p..self.p + self.q])
    }
}

/// Negative profile log-likelihood, `+∞` outside the admissible region.
fn neg_profile(layout: Layout, w: &[f64], x: &[f64]) -> f64 {
    if !layout.feasible(x) {
        return f64::INFINITY;
    }
    match arma_filter(&layout.params(x, 1.0), w) {
        Ok(out) => -profile_loglik(&out).0,
        Err(_) => f64::INFINITY,
    }
}

fn css_start(layout: Layout, w: &[f64], nm: &NelderMead) -> Vec<f64> {
    let mean = w.iter().sum::<f64>() / w.len() as f64;
    let mut zero = vec![0.0; layout.len()];
    if layout.constant {
        zero[layout.p + layout.q] = mean;
    }
    if layout.p + layout.q == 0 {
        return zero;
    }
    let objective = |x: &[f64]| {
        if !layout.feasible(x) {
            return f64::INFINITY;
        }
        let params = layout.params(x, 1.0);
        css_sum(&params.phi, &params.theta, params.mean(), w)
    };
    let m = nm.minimize(objective, &zero);
    if m.value.is_finite() && layout.feasible(&m.x) {
        m.x
    } else {
        zero
    }
}

pub fn fit_with(
    series: &TimeSeries,
    order: ArimaOrder,
    lambda: BoxCoxLambda,
    options: &FitOptions,
) -> Result<ArimaFit> {
    let constant = match options.include_constant {
        Some(true) if order.d > 0 => {
            return Err(Error::InvalidArgument(
                "a constant can only be estimated when d = 0".into(),
            ))
        }
        Some(c) => c,
        None => order.d == 0,
    };
    if order.p + order.d + order.q == 0 && !constant {
        return Err(Error::InvalidArgument(format!(
            "{order} has nothing to estimate"
        )));
    }
    let needed = order.d + order.p + order.q + 6;
    if series.len() < needed {
        return Err(Error::TooShort {
            what: "model fitting",
            needed,
            got: series.len(),
        });
    }

    let transformed = box_cox(series, lambda)?;
    let w = difference_slice(transformed.values(), order.d);
    let layout = Layout {
        p: order.p,
        q: order.q,
        constant,
    };
    let nm = options.optimizer;

    let start = css_start(layout, &w, &nm);
    let objective = |x: &[f64]| neg_profile(layout, &w, x);
    let best = nm.minimize(objective, &start);
    if !best.converged {
        return Err(Error::NoConvergence {
            evaluations: best.evaluations,
        });
    }
    if !best.value.is_finite() {
        return Err(Error::Numerical(format!(
            "likelihood is not finite at every candidate for {order}"
        )));
    }
    let x = best.x;
    if !ar_is_stationary(&x[..order.p]) {
        return Err(Error::NonStationary);
    }
    if !ma_is_invertible(&x[order.p..order.p + order.q]) {
        return Err(Error::NonInvertible);
    }

    let out = arma_filter(&layout.params(&x, 1.0), &w)?;
    let (loglik, sigma2) = profile_loglik(&out);
    let params = layout.params(&x, sigma2);
    let names = coefficient_names(order, constant);
    let aic = -2.0 * loglik + 2.0 * (names.len() + 1) as f64;

    let mut warnings = Vec::new();
    if near_unit_circle(&params.theta) {
        warnings.push("MA polynomial has a root near the unit circle".to_string());
    }
    let covariance = if x.is_empty() {
        Some(Vec::new())
    } else {
        match hessian(|v| neg_profile(layout, &w, v), &x).and_then(invert_pd) {
            Some(c) => Some(c),
            None => {
                warnings.push("Hessian is not positive definite; covariance unavailable".into());
                None
            }
        }
    };

    let residuals: Vec<f64> = out
        .innovations
        .iter()
        .zip(&out.variances)
        .map(|(v, f)| v / f.sqrt())
        .collect();
    let residuals = TimeSeries::new(transformed.start().offset(order.d as i64), residuals)?;

    Ok(ArimaFit {
        schema_version: FIT_SCHEMA_VERSION,
        order,
        lambda,
        params,
        include_constant: constant,
        coefficient_names: names,
        loglik,
        aic,
        covariance,
        residuals,
        n_used: w.len(),
        evaluations: best.evaluations,
        warnings,
        data_fingerprint: fingerprint(series),
    })
}

/// SHA-256 of the series' CSV rendering, hex encoded.
pub(crate) fn fingerprint(series: &TimeSeries) -> String {
    let digest = Sha256::digest(to_csv_string(series).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// True when `1 + Σ θ_j z^j` has a root of modulus below 1.001.
fn near_unit_circle(theta: &[f64]) -> bool {
    const RHO: f64 = 1.001;
    let scaled: Vec<f64> = theta
        .iter()
        .enumerate()
        .map(|(j, t)| -t * RHO.powi(j as i32 + 1))
        .collect();
    !is_stable(&scaled)
}

/// Central-difference Hessian with steps `1e-4 · max(1, |x_i|)`. `None` if the
/// objective is not finite at any stencil point.
fn hessian<F: Fn(&[f64]) -> f64>(f: F, x: &[f64]) -> Option<DMatrix<f64>> {
    let k = x.len();
    let h: Vec<f64> = x.iter().map(|v| 1e-4 * v.abs().max(1.0)).collect();
    let f0 = f(x);
    let at = |moves: &[(usize, f64)]| {
        let mut y = x.to_vec();
        for &(i, s) in moves {
            y[i] += s * h[i];
        }
        f(&y)
    };
    let mut m = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        let d = (at(&[(i, 1.0)]) - 2.0 * f0 + at(&[(i, -1.0)])) / (h[i] * h[i]);
        m[(i, i)] = d;
        for j in 0..i {
            let d = (at(&[(i, 1.0), (j, 1.0)])
                - at(&[(i, 1.0), (j, -1.0)])
                - at(&[(i, -1.0), (j, 1.0)])
                + at(&[(i, -1.0), (j, -1.0)]))
                / (4.0 * h[i] * h[j]);
            m[(i, j)] = d;
            m[(j, i)] = d;
        }
    }
    m.iter().all(|v| v.is_finite()).then_some(m)
}

fn invert_pd(h: DMatrix<f64>) -> Option<Vec<f64>> {
    let k = h.nrows();
    let inv = h.cholesky()?.inverse();
    let mut out = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..k {
            out[i * k + j] = 0.5 * (inv[(i, j)] + inv[(j, i)]);
        }
    }
    out.iter().all(|v| v.is_finite()).then_some(out)
}

/// One row of a coefficient significance table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefRow {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub z: f64,
    pub p_value: f64,
}

/// Wald z-tests of each estimated coefficient against zero.
pub fn coef_test(fit: &ArimaFit) -> Result<Vec<CoefRow>> {
    let cov = fit
        .covariance
        .as_ref()
        .ok_or(Error::CovarianceUnavailable)?;
    let k = fit.coefficient_names.len();
    let std_normal = Normal::standard();
    Ok(fit
        .coefficient_names
        .iter()
        .zip(fit.coefficients())
        .enumerate()
        .map(|(i, (name, estimate))| {
            let std_error = cov[i * k + i].max(0.0).sqrt();
            let z = if estimate == 0.0 {
                0.0
            } else {
                estimate / std_error
            };
            CoefRow {
                name: name.clone(),
                estimate,
                std_error,
                z,
                p_value: 2.0 * std_normal.sf(z.abs()),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{fire_incidence, split, Period, SplitSpec};

    fn training() -> TimeSeries {
        split(&fire_incidence(), SplitSpec { n_train: 72 })
            .unwrap()
            .0
    }

    fn fit_order(p: usize, d: usize, q: usize) -> ArimaFit {
        fit(
            &training(),
            ArimaOrder::new(p, d, q).unwrap(),
            BoxCoxLambda::LOG,
        )
        .unwrap()
    }

    #[test]
    fn random_walk_is_closed_form() {
        let f = fit_order(0, 1, 0);
        let w = difference_slice(box_cox(&training(), BoxCoxLambda::LOG).unwrap().values(), 1);
        let n = w.len() as f64;
        let s2 = w.iter().map(|v| v * v).sum::<f64>() / n;
        let ll = -0.5 * n * ((2.0 * std::f64::consts::PI).ln() + s2.ln() + 1.0);
        assert!((f.loglik - ll).abs() < 1e-10);
        assert!((f.aic - (-2.0 * ll + 2.0)).abs() < 1e-10);
        assert!(f.coefficient_names.is_empty());
    }

    #[test]
    fn residual_length_and_start() {
        let f = fit_order(1, 1, 1);
        assert_eq!(f.residuals.len(), 71);
        assert_eq!(f.n_used, 71);
        assert_eq!(f.residuals.start(), Period::new(2012, 2).unwrap());
    }

    #[test]
    fn constant_rules() {
        let t = training();
        let o = ArimaOrder::new(1, 1, 0).unwrap();
        let with = FitOptions {
            include_constant: Some(true),
            ..FitOptions::default()
        };
        assert!(fit_with(&t, o, BoxCoxLambda::LOG, &with).is_err());
        let f = fit(&t, ArimaOrder::new(1, 0, 0).unwrap(), BoxCoxLambda::LOG).unwrap();
        assert_eq!(f.coefficient_names, vec!["ar1", "constant"]);
    }

    #[test]
    fn too_short() {
        let s = TimeSeries::new(Period::new(2000, 1).unwrap(), vec![1.0, 2.0, 3.0]).unwrap();
        let r = fit(&s, ArimaOrder::new(1, 1, 1).unwrap(), BoxCoxLambda::LOG);
        assert!(matches!(r, Err(Error::TooShort { .. })));
    }

    #[test]
    fn zero_estimate_row() {
        let mut f = fit_order(1, 1, 1);
        f.params.phi[0] = 0.0;
        let rows = coef_test(&f).unwrap();
        assert_eq!(rows[0].z, 0.0);
        assert!((rows[0].p_value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn missing_covariance() {
        let mut f = fit_order(0, 1, 1);
        f.covariance = None;
        assert!(matches!(coef_test(&f), Err(Error::CovarianceUnavailable)));
    }

    #[test]
    fn near_unit_circle_flag() {
        assert!(near_unit_circle(&[-0.9999]));
        assert!(!near_unit_circle(&[-0.9]));
        assert!(!near_unit_circle(&[]));
    }
}
