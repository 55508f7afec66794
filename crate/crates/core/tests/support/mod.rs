//! Independent oracles and reusable property checks shared by the
//! integration tests and the acceptance runner.
#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Normal};

use boxjenkins::arima::{exact_loglik, ArimaFit, ArimaOrder, ArimaParams};
use boxjenkins::diagnostics::{acf, adf_test, ljung_box, pacf, shapiro_wilk};
use boxjenkins::forecast::psi_weights;
use boxjenkins::series::{
    box_cox, difference, fire_incidence, integrate, inv_box_cox, split, BoxCoxLambda, Period,
    SplitSpec, TimeSeries,
};

pub type Check = Result<(), String>;

pub fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

pub fn jan2012() -> Period {
    Period::new(2012, 1).unwrap()
}

pub fn series(values: Vec<f64>) -> TimeSeries {
    TimeSeries::new(jan2012(), values).unwrap()
}

/// The 72-month training window and the 12-month holdout.
pub fn fire_split() -> (TimeSeries, TimeSeries) {
    split(&fire_incidence(), SplitSpec { n_train: 72 }).unwrap()
}

// ---------------------------------------------------------------------------
// Oracles

/// MA(∞) weights of a stationary ARMA by direct expansion of Θ(B)/Φ(B).
pub fn psi_oracle(phi: &[f64], theta: &[f64], n: usize) -> Vec<f64> {
    let mut psi = Vec::with_capacity(n);
    for j in 0..n {
        let mut v = if j == 0 {
            1.0
        } else if j <= theta.len() {
            theta[j - 1]
        } else {
            0.0
        };
        for (i, ph) in phi.iter().enumerate() {
            if j > i {
                v += ph * psi[j - 1 - i];
            }
        }
        psi.push(v);
    }
    psi
}

/// Autocovariances γ(0..=max_lag) from a truncated ψ expansion.
pub fn autocov_oracle(phi: &[f64], theta: &[f64], sigma2: f64, max_lag: usize) -> Vec<f64> {
    const TERMS: usize = 4000;
    let psi = psi_oracle(phi, theta, TERMS + max_lag);
    let tail = psi[TERMS - 20..]
        .iter()
        .map(|v| v.abs())
        .fold(0.0, f64::max);
    assert!(tail < 1e-14, "ψ expansion not converged (tail {tail:e})");
    (0..=max_lag)
        .map(|h| sigma2 * (0..TERMS).map(|j| psi[j] * psi[j + h]).sum::<f64>())
        .collect()
}

/// Gaussian log-density of `w` under the stationary ARMA, via a dense
/// covariance matrix and its Cholesky factor.
pub fn mvn_loglik_oracle(params: &ArimaParams, w: &[f64]) -> f64 {
    let n = w.len();
    let gamma = autocov_oracle(&params.phi, &params.theta, params.sigma2, n);
    let cov = DMatrix::from_fn(n, n, |i, j| gamma[i.abs_diff(j)]);
    let chol = cov.cholesky().expect("covariance is positive definite");
    let mean = params.delta / (1.0 - params.phi.iter().sum::<f64>());
    let x = DVector::from_iterator(n, w.iter().map(|v| v - mean));
    let quad = x.dot(&chol.solve(&x));
    let log_det = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    -0.5 * (n as f64 * (2.0 * PI).ln() + log_det + quad)
}

/// AR coefficients from partial autocorrelations (Levinson step-up).
pub fn ar_from_reflection(r: &[f64]) -> Vec<f64> {
    let mut phi: Vec<f64> = Vec::new();
    for &k in r {
        let prev = phi.clone();
        let m = prev.len();
        phi = (0..m).map(|i| prev[i] - k * prev[m - 1 - i]).collect();
        phi.push(k);
    }
    phi
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn white_noise(n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    let z = Normal::new(0.0, 1.0).unwrap();
    (0..n).map(|_| z.sample(&mut r)).collect()
}

pub fn random_walk(n: usize, seed: u64) -> Vec<f64> {
    let mut acc = 0.0;
    white_noise(n, seed)
        .into_iter()
        .map(|e| {
            acc += e;
            acc
        })
        .collect()
}

/// ARMA path `x_t = mean + Σ φ_i (x_{t-i} - mean) + e_t + Σ θ_j e_{t-j}` after
/// a burn-in of 500 steps.
pub fn simulate_arma(
    phi: &[f64],
    theta: &[f64],
    mean: f64,
    sigma: f64,
    n: usize,
    seed: u64,
) -> Vec<f64> {
    const BURN: usize = 500;
    let e: Vec<f64> = white_noise(n + BURN, seed)
        .into_iter()
        .map(|v| v * sigma)
        .collect();
    let mut x = vec![0.0; n + BURN];
    for t in 0..n + BURN {
        let mut v = e[t];
        for (i, ph) in phi.iter().enumerate() {
            if t > i {
                v += ph * x[t - 1 - i];
            }
        }
        for (j, th) in theta.iter().enumerate() {
            if t > j {
                v += th * e[t - 1 - j];
            }
        }
        x[t] = v;
    }
    x[BURN..].iter().map(|v| v + mean).collect()
}

/// A random stationary, invertible parameter draw for the likelihood oracle.
pub fn random_params(p: usize, q: usize, r: &mut StdRng) -> ArimaParams {
    let refl: Vec<f64> = (0..p).map(|_| r.random_range(-0.7..0.7)).collect();
    let phi = ar_from_reflection(&refl);
    let theta = (0..q).map(|_| r.random_range(-0.9..0.9)).collect();
    let delta = r.random_range(-2.0..2.0);
    let sigma2 = r.random_range(0.2..3.0);
    ArimaParams::new(phi, theta, delta, sigma2)
}

/// Draws a stationary sample path of length `n` from `params`.
pub fn random_series(params: &ArimaParams, n: usize, seed: u64) -> Vec<f64> {
    let mean = params.delta / (1.0 - params.phi.iter().sum::<f64>());
    simulate_arma(
        &params.phi,
        &params.theta,
        mean,
        params.sigma2.sqrt(),
        n,
        seed,
    )
}

// ---------------------------------------------------------------------------
// Property checks

pub fn check_likelihood_oracle(p: usize, q: usize, n: usize, seed: u64) -> Check {
    let mut r = rng(seed);
    let params = random_params(p, q, &mut r);
    let w = random_series(&params, n, seed.wrapping_add(1));
    let order = ArimaOrder::new(p, 0, q).unwrap();
    let got = exact_loglik(&params, order, &series(w.clone())).map_err(|e| e.to_string())?;
    let want = mvn_loglik_oracle(&params, &w);
    ensure((got - want).abs() < 1e-8, || {
        format!("ARMA({p},{q}) n={n} seed={seed}: filter {got} vs dense {want}")
    })
}

pub fn check_box_cox_roundtrip(values: &[f64], lambda: f64) -> Check {
    let lam = BoxCoxLambda::new(lambda).unwrap();
    let x = series(values.to_vec());
    let back = inv_box_cox(&box_cox(&x, lam).map_err(|e| e.to_string())?, lam)
        .map_err(|e| e.to_string())?;
    for (a, b) in values.iter().zip(back.values()) {
        ensure((a - b).abs() <= 1e-10 * a.abs(), || {
            format!("λ={lambda}: {a} came back as {b}")
        })?;
    }
    ensure(back.start() == x.start(), || "start period changed".into())
}

pub fn check_difference_roundtrip(values: &[f64], d: usize) -> Check {
    let x = series(values.to_vec());
    let w = difference(&x, d).map_err(|e| e.to_string())?;
    let back = integrate(&w, &values[..d]).map_err(|e| e.to_string())?;
    ensure(back.start() == x.start(), || "start period changed".into())?;
    for (a, b) in values.iter().zip(back.values()) {
        ensure((a - b).abs() <= 1e-10 * a.abs().max(1.0), || {
            format!("d={d}: {a} came back as {b}")
        })?;
    }
    Ok(())
}

/// `Φ(B)(1-B)^d Ψ(B) = Θ(B)` through `B^{h-1}`.
pub fn check_psi_convolution(phi: &[f64], theta: &[f64], d: usize, h: usize) -> Check {
    let order = ArimaOrder::new(phi.len(), d, theta.len()).unwrap();
    let params = ArimaParams::new(phi.to_vec(), theta.to_vec(), 0.0, 1.0);
    let psi = psi_weights(&params, order, h)
        .map_err(|e| e.to_string())?
        .weights;
    let mut lhs_poly = vec![1.0];
    lhs_poly.extend(phi.iter().map(|v| -v));
    for _ in 0..d {
        let mut next = vec![0.0; lhs_poly.len() + 1];
        for (i, c) in lhs_poly.iter().enumerate() {
            next[i] += c;
            next[i + 1] -= c;
        }
        lhs_poly = next;
    }
    for k in 0..h {
        let conv: f64 = (0..=k)
            .filter(|i| *i < lhs_poly.len())
            .map(|i| lhs_poly[i] * psi[k - i])
            .sum();
        let target = match k {
            0 => 1.0,
            k if k <= theta.len() => theta[k - 1],
            _ => 0.0,
        };
        let scale = psi[..=k].iter().map(|v| v.abs()).fold(1.0, f64::max);
        ensure((conv - target).abs() <= 1e-12 * scale, || {
            format!("coefficient {k}: {conv} vs {target}")
        })?;
    }
    Ok(())
}

pub fn check_acf_bounded(values: &[f64], max_lag: usize) -> Check {
    let a = acf(values, max_lag).map_err(|e| e.to_string())?;
    ensure(a.coefficients.iter().all(|r| r.abs() <= 1.0 + 1e-9), || {
        format!("|r| > 1 in {:?}", a.coefficients)
    })
}

pub fn check_pacf_lag1(values: &[f64]) -> Check {
    let max_lag = (values.len() - 1).min(5);
    let a = acf(values, max_lag).map_err(|e| e.to_string())?;
    let p = pacf(values, max_lag).map_err(|e| e.to_string())?;
    ensure(a.at(1) == p.at(1), || {
        format!("ACF(1) {} vs PACF(1) {}", a.at(1), p.at(1))
    })
}

pub fn check_ljung_box_scale(values: &[f64], c: f64) -> Check {
    let lag = (values.len() - 1).min(10);
    let q0 = ljung_box(values, lag, 0)
        .map_err(|e| e.to_string())?
        .statistic;
    let scaled: Vec<f64> = values.iter().map(|v| c * v).collect();
    let q1 = ljung_box(&scaled, lag, 0)
        .map_err(|e| e.to_string())?
        .statistic;
    ensure((q0 - q1).abs() <= 1e-9 * q0.abs().max(1.0), || {
        format!("Q {q0} vs {q1} after scaling by {c}")
    })
}

pub fn check_shapiro_affine(values: &[f64], a: f64, b: f64) -> Check {
    let w0 = shapiro_wilk(values).map_err(|e| e.to_string())?.statistic;
    let moved: Vec<f64> = values.iter().map(|v| a * v + b).collect();
    let w1 = shapiro_wilk(&moved).map_err(|e| e.to_string())?.statistic;
    ensure((w0 - w1).abs() <= 1e-10, || {
        format!("W {w0} vs {w1} under {a}x + {b}")
    })
}

pub fn check_aic_identity(fit: &ArimaFit) -> Check {
    let k = fit.coefficients().len() as f64;
    let lhs = fit.aic - (-2.0 * fit.loglik);
    ensure((lhs - 2.0 * (k + 1.0)).abs() < 1e-9, || {
        format!("{}: AIC + 2ℓ = {lhs}, k = {k}", fit.order)
    })
}

/// Central-difference gradient of `exact_loglik` in the coefficients at the
/// fitted optimum.
pub fn loglik_gradient(fit: &ArimaFit, train: &TimeSeries) -> Vec<f64> {
    let z = box_cox(train, fit.lambda).unwrap();
    let base = fit.coefficients();
    let (p, q) = (fit.order.p, fit.order.q);
    let eval = |x: &[f64]| {
        let delta = if fit.include_constant { x[p + q] } else { 0.0 };
        let params = ArimaParams::new(
            x[..p].to_vec(),
            x[p..p + q].to_vec(),
            delta,
            fit.params.sigma2,
        );
        exact_loglik(&params, fit.order, &z).unwrap()
    };
    (0..base.len())
        .map(|i| {
            let h = 1e-5 * base[i].abs().max(1.0);
            let mut up = base.clone();
            let mut dn = base.clone();
            up[i] += h;
            dn[i] -= h;
            (eval(&up) - eval(&dn)) / (2.0 * h)
        })
        .collect()
}

pub fn check_first_order(fit: &ArimaFit, train: &TimeSeries) -> Check {
    let g = loglik_gradient(fit, train);
    let worst = g.iter().map(|v| v.abs()).fold(0.0, f64::max);
    ensure(worst < 1e-3, || format!("{}: gradient {g:?}", fit.order))
}

/// Fraction of `reps` white-noise replicates of length `n` rejected by
/// Ljung-Box at lag 10 and level 0.05.
pub fn ljung_box_size(reps: u64, n: usize) -> f64 {
    let rejected = (0..reps)
        .filter(|s| {
            ljung_box(&white_noise(n, 10_000 + s), 10, 0)
                .unwrap()
                .rejects(0.05)
        })
        .count();
    rejected as f64 / reps as f64
}

pub fn check_adf_power_and_size() -> Check {
    let rw = adf_test(&random_walk(200, 7)).map_err(|e| e.to_string())?;
    ensure(rw.p_value > 0.05, || {
        format!("random walk p = {}", rw.p_value)
    })?;
    let iid = adf_test(&white_noise(200, 8)).map_err(|e| e.to_string())?;
    ensure(iid.p_value <= 0.01, || format!("iid p = {}", iid.p_value))
}
