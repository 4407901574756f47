//! Derivative-free Nelder–Mead simplex minimisation with multiple starts.

use crate::par::{map_indexed, Exec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    /// Evaluation budget per start, restarts included.
    pub max_evals: usize,
    /// Stop when the spread of simplex values falls below this.
    pub f_tol: f64,
    /// Edge length of the initial simplex.
    pub initial_step: f64,
    /// Fresh simplices rebuilt around the incumbent after convergence.
    pub restarts: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            max_evals: 20_000,
            f_tol: 1e-8,
            initial_step: 0.1,
            restarts: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    /// Final simplex spread reached `f_tol` before the budget ran out.
    pub converged: bool,
}

/// Adaptive-coefficient Nelder–Mead from a single start point.
pub fn nelder_mead<F>(f: &F, x0: &[f64], opts: &SimplexOptions) -> Minimum
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    let nf = n as f64;
    let (alpha, gamma, rho, sigma) = (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf);
    let mut evals = 0usize;
    let eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut best_x = x0.to_vec();
    let mut best_f = eval(x0, &mut evals);
    let mut converged = false;

    for round in 0..=opts.restarts {
        let step = opts.initial_step / (1 << round.min(8)) as f64;
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        simplex.push((best_x.clone(), best_f));
        for k in 0..n {
            let mut x = best_x.clone();
            x[k] += if x[k].abs() > 1.0 {
                step * x[k].abs()
            } else {
                step
            };
            let fx = eval(&x, &mut evals);
            simplex.push((x, fx));
        }
        converged = false;
        while evals < opts.max_evals {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let spread = simplex[n].1 - simplex[0].1;
            if spread.abs() <= opts.f_tol {
                converged = true;
                break;
            }
            let mut centroid = vec![0.0; n];
            for (x, _) in &simplex[..n] {
                for (c, xi) in centroid.iter_mut().zip(x) {
                    *c += xi / nf;
                }
            }
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&simplex[n].0)
                    .map(|(c, w)| c + t * (c - w))
                    .collect()
            };
            let xr = along(alpha);
            let fr = eval(&xr, &mut evals);
            if fr < simplex[0].1 {
                let xe = along(alpha * gamma);
                let fe = eval(&xe, &mut evals);
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            } else if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
            } else {
                let (xc, fc) = if fr < simplex[n].1 {
                    let xc = along(alpha * rho);
                    let fc = eval(&xc, &mut evals);
                    (xc, fc)
                } else {
                    let xc = along(-rho);
                    let fc = eval(&xc, &mut evals);
                    (xc, fc)
                };
                if fc < simplex[n].1.min(fr) {
                    simplex[n] = (xc, fc);
                } else {
                    let x_best = simplex[0].0.clone();
                    for (x, fx) in simplex.iter_mut().skip(1) {
                        for (xi, bi) in x.iter_mut().zip(&x_best) {
                            *xi = bi + sigma * (*xi - bi);
                        }
                        *fx = eval(x, &mut evals);
                    }
                }
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let improved = best_f - simplex[0].1;
        if simplex[0].1 <= best_f {
            best_x = simplex[0].0.clone();
            best_f = simplex[0].1;
        }
        if evals >= opts.max_evals || (round > 0 && improved <= opts.f_tol) {
            break;
        }
    }
    Minimum {
        x: best_x,
        value: best_f,
        evals,
        converged,
    }
}

/// Runs [`nelder_mead`] from every start and keeps the lowest value; ties go
/// to the earliest start, so the result does not depend on scheduling.
pub fn multistart<F>(f: &F, starts: &[Vec<f64>], opts: &SimplexOptions, exec: Exec) -> Minimum
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    assert!(!starts.is_empty(), "multistart needs at least one start");
    let runs = map_indexed(exec, starts.len(), |k| nelder_mead(f, &starts[k], opts));
    runs.into_iter()
        .reduce(|best, next| if next.value < best.value { next } else { best })
        .expect("non-empty")
}
