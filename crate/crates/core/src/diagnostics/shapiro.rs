//! Shapiro-Wilk W test using Royston's AS R94 approximation for the
//! coefficients and the p-value.

use statrs::distribution::{ContinuousCDF, Normal};

use super::TestResult;
use crate::error::{Error, Result};

const NULL: &str = "the sample is drawn from a normal distribution";

const SMALL: f64 = 1e-19;

const G: [f64; 2] = [-2.273, 0.459];
const C1: [f64; 6] = [0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056];
const C2: [f64; 6] = [0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633];
const C3: [f64; 4] = [0.544, -0.39978, 0.025054, -6.714e-4];
const C4: [f64; 4] = [1.3822, -0.77857, 0.062767, -0.0020322];
const C5: [f64; 4] = [-1.5861, -0.31082, -0.083751, 0.0038915];
const C6: [f64; 3] = [-0.4803, -0.082676, 0.0030302];

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

/// Half of the antisymmetric weight vector: `a[i]` pairs with the `i`-th
/// smallest (negated) and `i`-th largest observation.
fn weights(n: usize) -> Vec<f64> {
    let nn2 = n / 2;
    if n == 3 {
        return vec![std::f64::consts::FRAC_1_SQRT_2];
    }
    let std_normal = Normal::standard();
    let an25 = n as f64 + 0.25;
    let mut m: Vec<f64> = (1..=nn2)
        .map(|i| std_normal.inverse_cdf((i as f64 - 0.375) / an25))
        .collect();
    let summ2 = 2.0 * m.iter().map(|v| v * v).sum::<f64>();
    let ssumm2 = summ2.sqrt();
    let rsn = 1.0 / (n as f64).sqrt();
    let a1 = poly(&C1, rsn) - m[0] / ssumm2;

    let (first_scaled, fac) = if n > 5 {
        let a2 = -m[1] / ssumm2 + poly(&C2, rsn);
        let fac = ((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1])
            / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2))
            .sqrt();
        m[1] = a2;
        (2, fac)
    } else {
        let fac = ((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1)).sqrt();
        (1, fac)
    };
    m[0] = a1;
    for v in &mut m[first_scaled..] {
        *v /= -fac;
    }
    m
}

/// Shapiro-Wilk normality test for `3 <= n <= 5000` observations.
pub fn shapiro_wilk(sample: &[f64]) -> Result<TestResult> {
    let n = sample.len();
    if !(3..=5000).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "Shapiro-Wilk needs 3..=5000 observations, got {n}"
        )));
    }
    if sample.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "Shapiro-Wilk sample contains non-finite values".into(),
        ));
    }
    let mut x = sample.to_vec();
    x.sort_by(f64::total_cmp);
    let range = x[n - 1] - x[0];
    if range < SMALL || range < 1e-10 * x[n - 1].abs().max(x[0].abs()) {
        return Err(Error::ZeroVariance);
    }

    let half = weights(n);
    let coef: Vec<f64> = (0..n)
        .map(|i| {
            let j = n - 1 - i;
            match i.cmp(&j) {
                std::cmp::Ordering::Less => -half[i],
                std::cmp::Ordering::Greater => half[j],
                std::cmp::Ordering::Equal => 0.0,
            }
        })
        .collect();

    // W is the squared correlation between the sorted data and the weights;
    // computing 1 - W directly avoids cancellation when W is close to 1.
    let nf = n as f64;
    let scaled: Vec<f64> = x.iter().map(|v| v / range).collect();
    let mean_a = coef.iter().sum::<f64>() / nf;
    let mean_x = scaled.iter().sum::<f64>() / nf;
    let (mut ssa, mut ssx, mut sax) = (0.0, 0.0, 0.0);
    for (a, xi) in coef.iter().zip(&scaled) {
        let da = a - mean_a;
        let dx = xi - mean_x;
        ssa += da * da;
        ssx += dx * dx;
        sax += da * dx;
    }
    let ssassx = (ssa * ssx).sqrt();
    let w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);
    let w = 1.0 - w1;

    Ok(TestResult {
        name: "Shapiro-Wilk".into(),
        statistic: w,
        df: None,
        lag: None,
        p_value: w_p_value(w, w1, n).clamp(0.0, 1.0),
        p_clamped: false,
        null_hypothesis: NULL.into(),
    })
}

fn w_p_value(w: f64, w1: f64, n: usize) -> f64 {
    if n == 3 {
        const SIX_OVER_PI: f64 = 1.909_859_317_102_744;
        const ASIN_SQRT_3_4: f64 = std::f64::consts::FRAC_PI_3;
        return (SIX_OVER_PI * (w.sqrt().asin() - ASIN_SQRT_3_4)).max(0.0);
    }
    let an = n as f64;
    let mut y = w1.ln();
    let (m, s) = if n <= 11 {
        let gamma = poly(&G, an);
        if y >= gamma {
            return 1e-99;
        }
        y = -(gamma - y).ln();
        (poly(&C3, an), poly(&C4, an).exp())
    } else {
        let lx = an.ln();
        (poly(&C5, lx), poly(&C6, lx).exp())
    };
    Normal::new(m, s).map(|d| d.sf(y)).unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    // (sample, W, p) frozen from an independent AS R94 implementation.
    fn reference_cases() -> Vec<(Vec<f64>, f64, f64)> {
        vec![
            (
                vec![1.0, 1.0, 1.0, 2.0],
                0.629_776_264_554_299,
                0.001_240_725_915_103_626_4,
            ),
            (
                vec![
                    11.0, 1.0, 21.0, -1.0, 3.0, -7.0, 22.0, -2.0, -13.0, 1.0, 16.0, 2.0,
                ],
                0.934_561_787_815_464_3,
                0.430_978_546_638_621_34,
            ),
            (
                vec![2.1, 3.5, 1.2, 8.9, 4.4],
                0.897_212_858_271_471_1,
                0.394_673_305_167_594_25,
            ),
            (
                vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0],
                0.793_189_701_498_575_6,
                0.035_054_766_740_024_26,
            ),
            (
                (1..=20).map(f64::from).collect(),
                0.960_375_183_242_988_4,
                0.551_371_745_791_677_1,
            ),
            (
                vec![
                    0.5, -1.2, 0.3, 2.2, -0.7, 1.1, -0.4, 0.9, -2.5, 0.05, 1.7, -0.3, 0.6, -1.1,
                ],
                0.989_176_188_366_007_7,
                0.999_225_746_273_837_8,
            ),
        ]
    }

    #[test]
    fn matches_reference_implementation() {
        for (x, w, p) in reference_cases() {
            let t = shapiro_wilk(&x).unwrap();
            assert!(
                (t.statistic - w).abs() < 1e-6,
                "{x:?}: W {} vs {w}",
                t.statistic
            );
            assert!(
                (t.p_value - p).abs() < 1e-5,
                "{x:?}: p {} vs {p}",
                t.p_value
            );
        }
    }

    #[test]
    fn three_points_exact() {
        let t = shapiro_wilk(&[1.0, 2.0, 3.0]).unwrap();
        assert!((t.statistic - 1.0).abs() < 1e-12);
        assert!((t.p_value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn order_does_not_matter() {
        let a = shapiro_wilk(&[3.0, 1.0, 7.0, 2.0, 9.0]).unwrap();
        let b = shapiro_wilk(&[9.0, 7.0, 3.0, 2.0, 1.0]).unwrap();
        assert_eq!(a.statistic, b.statistic);
    }

    #[test]
    fn errors() {
        assert!(shapiro_wilk(&[1.0, 2.0]).is_err());
        assert!(shapiro_wilk(&vec![0.0; 5001]).is_err());
        assert!(matches!(shapiro_wilk(&[4.0; 6]), Err(Error::ZeroVariance)));
    }
}
