//! Derivative-free Nelder-Mead simplex minimiser.
//!
//! Infeasible points are expressed by returning `+∞` (or NaN, which is treated
//! the same way) from the objective; the simplex then contracts away from them.

/// Settings for [`NelderMead::minimize`].
#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    /// Stop once every vertex lies within this (max-norm) distance of the best.
    pub diameter_tol: f64,
    pub max_evals: usize,
    /// Edge length of the initial simplex, scaled by `max(1, |x0_i|)`.
    pub initial_step: f64,
    /// Rebuild the simplex around the optimum this many times to guard
    /// against premature collapse.
    pub restarts: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        NelderMead {
            diameter_tol: 1e-8,
            max_evals: 5000,
            initial_step: 0.1,
            restarts: 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

impl NelderMead {
    pub fn minimize<F>(&self, mut f: F, x0: &[f64]) -> Minimum
    where
        F: FnMut(&[f64]) -> f64,
    {
        let mut evals = 0usize;
        let mut eval = |x: &[f64], evals: &mut usize| {
            *evals += 1;
            sanitize(f(x))
        };

        if x0.is_empty() {
            let value = eval(x0, &mut evals);
            return Minimum {
                x: Vec::new(),
                value,
                evaluations: evals,
                converged: true,
            };
        }

        let mut best = x0.to_vec();
        let mut best_value = eval(&best, &mut evals);
        let mut converged = false;
        for round in 0..=self.restarts {
            let budget = self.max_evals.saturating_sub(evals);
            if budget == 0 {
                break;
            }
            let (x, value, ok) = self.run(&mut eval, &best, best_value, &mut evals, budget);
            let improved = value < best_value;
            let moved = x
                .iter()
                .zip(&best)
                .any(|(a, b)| (a - b).abs() > self.diameter_tol);
            if value <= best_value {
                best = x;
                best_value = value;
            }
            converged = ok || (round > 0 && converged);
            if !ok || (round > 0 && !(improved && moved)) {
                break;
            }
        }
        Minimum {
            x: best,
            value: best_value,
            evaluations: evals,
            converged,
        }
    }

    fn run<E>(
        &self,
        eval: &mut E,
        x0: &[f64],
        f0: f64,
        evals: &mut usize,
        budget: usize,
    ) -> (Vec<f64>, f64, bool)
    where
        E: FnMut(&[f64], &mut usize) -> f64,
    {
        let n = x0.len();
        let stop_at = *evals + budget;
        let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        let mut values: Vec<f64> = Vec::with_capacity(n + 1);
        simplex.push(x0.to_vec());
        values.push(f0);
        for i in 0..n {
            let mut v = x0.to_vec();
            v[i] += self.initial_step * x0[i].abs().max(1.0);
            values.push(eval(&v, evals));
            simplex.push(v);
        }

        loop {
            // Order vertices by value; ties keep their index order so runs are
            // reproducible.
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            simplex = order.iter().map(|&i| simplex[i].clone()).collect();
            values = order.iter().map(|&i| values[i]).collect();

            let diameter = simplex[1..]
                .iter()
                .flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
                .fold(0.0f64, f64::max);
            if diameter < self.diameter_tol && values[0].is_finite() {
                return (simplex[0].clone(), values[0], true);
            }
            if *evals >= stop_at {
                return (simplex[0].clone(), values[0], false);
            }

            let centroid: Vec<f64> = (0..n)
                .map(|j| simplex[..n].iter().map(|v| v[j]).sum::<f64>() / n as f64)
                .collect();
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&simplex[n])
                    .map(|(c, w)| c + t * (c - w))
                    .collect()
            };

            let xr = along(REFLECT);
            let fr = eval(&xr, evals);
            if fr < values[0] {
                let xe = along(REFLECT * EXPAND);
                let fe = eval(&xe, evals);
                if fe < fr {
                    simplex[n] = xe;
                    values[n] = fe;
                } else {
                    simplex[n] = xr;
                    values[n] = fr;
                }
                continue;
            }
            if fr < values[n - 1] {
                simplex[n] = xr;
                values[n] = fr;
                continue;
            }
            // Contraction, outside if the reflected point beats the worst.
            let (xc, fc) = if fr < values[n] {
                let xc = along(REFLECT * CONTRACT);
                let fc = eval(&xc, evals);
                (xc, fc)
            } else {
                let xc = along(-CONTRACT);
                let fc = eval(&xc, evals);
                (xc, fc)
            };
            if fc < values[n].min(fr) {
                simplex[n] = xc;
                values[n] = fc;
                continue;
            }
            // Shrink toward the best vertex.
            for i in 1..=n {
                let v: Vec<f64> = simplex[0]
                    .iter()
                    .zip(&simplex[i])
                    .map(|(b, x)| b + SHRINK * (x - b))
                    .collect();
                values[i] = eval(&v, evals);
                simplex[i] = v;
            }
        }
    }
}
