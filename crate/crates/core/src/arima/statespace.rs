//! ARMA(p, q) in state-space form and the Kalman filter that evaluates its
//! exact Gaussian likelihood.
//!
//! State dimension `r = max(p, q + 1)`:
//!
//! ```text
//! a_{t+1} = T a_t + R ε_t        T = [φ | I_{r-1}; 0]   R = (1, θ_1, …, θ_{r-1})'
//! w_t - μ = Z a_t                Z = (1, 0, …, 0)
//! ```
//!
//! The filter runs with unit innovation variance, so prediction variances
//! `F_t` are relative to σ². The initial state covariance is the stationary
//! solution of `P = T P T' + R R'`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Whether `1 - Σ c_i z^i` has every root strictly outside the unit circle.
///
/// Runs the step-down (inverse Durbin-Levinson) recursion: the polynomial is
/// stable iff every reflection coefficient has modulus below one.
pub fn is_stable(coefs: &[f64]) -> bool {
    let mut a: Vec<f64> = coefs.to_vec();
    while let Some(&0.0) = a.last() {
        a.pop();
    }
    while let Some(&kappa) = a.last() {
        if kappa.is_nan() || kappa.abs() >= 1.0 {
            return false;
        }
        let k = a.len();
        let denom = 1.0 - kappa * kappa;
        let next: Vec<f64> = (0..k - 1)
            .map(|i| (a[i] + kappa * a[k - 2 - i]) / denom)
            .collect();
        a = next;
    }
    true
}

/// AR stationarity: roots of `1 - Σ φ_i z^i` outside the unit circle.
pub fn ar_is_stationary(phi: &[f64]) -> bool {
    is_stable(phi)
}

/// MA invertibility under the plus convention: roots of `1 + Σ θ_j z^j`
/// outside the unit circle.
pub fn ma_is_invertible(theta: &[f64]) -> bool {
    let neg: Vec<f64> = theta.iter().map(|t| -t).collect();
    is_stable(&neg)
}

#[derive(Debug, Clone)]
pub(crate) struct ArmaStateSpace {
    phi: Vec<f64>,
    /// `R` vector, `(1, θ_1, …)` padded to length `r`.
    r_vec: Vec<f64>,
    p0: Vec<f64>,
    dim: usize,
}

/// Result of filtering a series.
#[derive(Debug, Clone)]
pub(crate) struct FilterOutput {
    /// One-step prediction errors `v_t`.
    pub innovations: Vec<f64>,
    /// Prediction variances `F_t` relative to σ².
    pub variances: Vec<f64>,
    /// Predicted state `a_{n+1|n}` after the last observation.
    pub next_state: Vec<f64>,
}

impl FilterOutput {
    pub fn sum_sq(&self) -> f64 {
        self.innovations
            .iter()
            .zip(&self.variances)
            .map(|(v, f)| v * v / f)
            .sum()
    }

    pub fn sum_log_f(&self) -> f64 {
        self.variances.iter().map(|f| f.ln()).sum()
    }
}

impl ArmaStateSpace {
    pub fn new(phi: &[f64], theta: &[f64]) -> Result<Self> {
        if !ar_is_stationary(phi) {
            return Err(Error::NonStationary);
        }
        let dim = phi.len().max(theta.len() + 1);
        let mut phi_full = vec![0.0; dim];
        phi_full[..phi.len()].copy_from_slice(phi);
        let mut r_vec = vec![0.0; dim];
        r_vec[0] = 1.0;
        r_vec[1..=theta.len()].copy_from_slice(theta);
        let p0 = stationary_covariance(&phi_full, &r_vec)?;
        Ok(ArmaStateSpace {
            phi: phi_full,
            r_vec,
            p0,
            dim,
        })
    }

    /// Unconditional covariance of the state, row-major.
    #[cfg(test)]
    pub fn initial_covariance(&self) -> &[f64] {
        &self.p0
    }

    /// `T a`.
    pub fn advance(&self, a: &[f64]) -> Vec<f64> {
        let r = self.dim;
        (0..r)
            .map(|i| self.phi[i] * a[0] + if i + 1 < r { a[i + 1] } else { 0.0 })
            .collect()
    }

    /// Filters `w - mean`.
    pub fn filter(&self, w: &[f64], mean: f64) -> Result<FilterOutput> {
        let r = self.dim;
        let mut a = vec![0.0; r];
        let mut p = self.p0.clone();
        let mut innovations = Vec::with_capacity(w.len());
        let mut variances = Vec::with_capacity(w.len());
        let mut k = vec![0.0; r];
        let mut tp = vec![0.0; r * r];

        for &obs in w {
            let f = p[0];
            if !(f > 0.0 && f.is_finite()) {
                return Err(Error::Numerical(format!(
                    "non-positive prediction variance {f} in Kalman filter"
                )));
            }
            let v = obs - mean - a[0];
            innovations.push(v);
            variances.push(f);

            // Measurement update.
            for i in 0..r {
                k[i] = p[i * r] / f;
            }
            for i in 0..r {
                a[i] += k[i] * v;
            }
            for i in 0..r {
                for j in 0..r {
                    p[i * r + j] -= k[i] * k[j] * f;
                }
            }
            // Time update: a = T a, P = T P T' + R R'.
            a = self.advance(&a);
            for i in 0..r {
                for j in 0..r {
                    let below = if i + 1 < r { p[(i + 1) * r + j] } else { 0.0 };
                    tp[i * r + j] = self.phi[i] * p[j] + below;
                }
            }
            for i in 0..r {
                for j in 0..r {
                    let right = if j + 1 < r { tp[i * r + j + 1] } else { 0.0 };
                    p[i * r + j] = tp[i * r] * self.phi[j] + right + self.r_vec[i] * self.r_vec[j];
                }
            }
        }

        Ok(FilterOutput {
            innovations,
            variances,
            next_state: a,
        })
    }
}

/// Solves `P = T P T' + R R'` for the companion transition with first column
/// `phi`, via the vectorised system `(I - T ⊗ T) vec P = vec(R R')`.
fn stationary_covariance(phi: &[f64], r_vec: &[f64]) -> Result<Vec<f64>> {
    let r = phi.len();
    let mut t = DMatrix::<f64>::zeros(r, r);
    for i in 0..r {
        t[(i, 0)] = phi[i];
        if i + 1 < r {
            t[(i, i + 1)] = 1.0;
        }
    }
    let n = r * r;
    let kron = t.kronecker(&t);
    let system = DMatrix::<f64>::identity(n, n) - kron;
    let rhs = DVector::<f64>::from_iterator(
        n,
        (0..r)
            .flat_map(|i| (0..r).map(move |j| (i, j)))
            .map(|(i, j)| r_vec[i] * r_vec[j]),
    );
    let sol = system
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numerical("singular Lyapunov system".into()))?;
    // Row-major vec of P matches the Kronecker ordering for symmetric P.
    let mut p: Vec<f64> = sol.iter().copied().collect();
    for i in 0..r {
        for j in 0..i {
            let s = 0.5 * (p[i * r + j] + p[j * r + i]);
            p[i * r + j] = s;
            p[j * r + i] = s;
        }
    }
    if !(p[0] > 0.0 && p.iter().all(|v| v.is_finite())) {
        return Err(Error::Numerical(
            "stationary state covariance is degenerate".into(),
        ));
    }
    Ok(p)
}
