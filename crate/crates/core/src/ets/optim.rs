//! Derivative-free minimization (Nelder–Mead downhill simplex).

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadConfig {
    pub max_evals: usize,
    /// Stop when the spread of simplex values falls below
    /// `ftol * (|f_best| + ftol)`.
    pub ftol: f64,
    /// Number of times to rebuild the simplex around the best point once the
    /// tolerance is met.
    pub restarts: usize,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        Self { max_evals: 2000, ftol: 1e-10, restarts: 1 }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// Minimizes `f` from `start`, with the initial simplex displaced by
/// `step[i]` along each axis. Non-finite objective values are treated as
/// `+inf`, so infeasible regions simply repel the simplex.
pub fn nelder_mead<F>(mut f: F, start: &[f64], step: &[f64], config: &NelderMeadConfig) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    assert_eq!(start.len(), step.len());
    let n = start.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut best_x = start.to_vec();
    let mut best_v = eval(&best_x, &mut evals);
    if n == 0 {
        return Minimum { x: best_x, value: best_v, evals };
    }

    for _round in 0..=config.restarts {
        let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        let mut values: Vec<f64> = Vec::with_capacity(n + 1);
        simplex.push(best_x.clone());
        values.push(best_v);
        for i in 0..n {
            let mut x = best_x.clone();
            x[i] += step[i];
            values.push(eval(&x, &mut evals));
            simplex.push(x);
        }

        let mut centroid = vec![0.0; n];
        let mut trial = vec![0.0; n];
        let mut trial2 = vec![0.0; n];
        loop {
            // Order vertices by value; stable so ties keep insertion order.
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            simplex = order.iter().map(|&i| simplex[i].clone()).collect();
            values = order.iter().map(|&i| values[i]).collect();

            let lo = values[0];
            let hi = values[n];
            let converged = if lo.is_finite() && hi.is_finite() {
                (hi - lo).abs() <= config.ftol * (lo.abs() + config.ftol)
            } else {
                false
            };
            if converged || evals >= config.max_evals {
                break;
            }

            centroid.iter_mut().for_each(|c| *c = 0.0);
            for v in &simplex[..n] {
                for (c, x) in centroid.iter_mut().zip(v) {
                    *c += x;
                }
            }
            centroid.iter_mut().for_each(|c| *c /= n as f64);

            let worst = &simplex[n];
            for i in 0..n {
                trial[i] = centroid[i] + REFLECT * (centroid[i] - worst[i]);
            }
            let fr = eval(&trial, &mut evals);

            if fr < values[0] {
                for i in 0..n {
                    trial2[i] = centroid[i] + EXPAND * (trial[i] - centroid[i]);
                }
                let fe = eval(&trial2, &mut evals);
                if fe < fr {
                    simplex[n].copy_from_slice(&trial2);
                    values[n] = fe;
                } else {
                    simplex[n].copy_from_slice(&trial);
                    values[n] = fr;
                }
                continue;
            }
            if fr < values[n - 1] {
                simplex[n].copy_from_slice(&trial);
                values[n] = fr;
                continue;
            }

            // Contraction: outside if the reflection improved on the worst.
            let outside = fr < values[n];
            for i in 0..n {
                trial2[i] = if outside {
                    centroid[i] + CONTRACT * (trial[i] - centroid[i])
                } else {
                    centroid[i] + CONTRACT * (simplex[n][i] - centroid[i])
                };
            }
            let fc = eval(&trial2, &mut evals);
            if (outside && fc <= fr) || (!outside && fc < values[n]) {
                simplex[n].copy_from_slice(&trial2);
                values[n] = fc;
                continue;
            }

            let best = simplex[0].clone();
            for j in 1..=n {
                for i in 0..n {
                    simplex[j][i] = best[i] + SHRINK * (simplex[j][i] - best[i]);
                }
                values[j] = eval(&simplex[j], &mut evals);
            }
        }

        if values[0] < best_v || (values[0] == best_v && simplex[0] != best_x) {
            best_v = values[0];
            best_x = simplex[0].clone();
        }
        if evals >= config.max_evals {
            break;
        }
    }

    Minimum { x: best_x, value: best_v, evals }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_quadratic() {
        let f = |x: &[f64]| (x[0] - 3.0).powi(2) + 10.0 * (x[1] + 1.0).powi(2);
        let m = nelder_mead(f, &[0.0, 0.0], &[0.5, 0.5], &NelderMeadConfig::default());
        assert!((m.x[0] - 3.0).abs() < 1e-4, "{:?}", m.x);
        assert!((m.x[1] + 1.0).abs() < 1e-4, "{:?}", m.x);
    }

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2);
        let cfg = NelderMeadConfig { max_evals: 5000, ftol: 1e-14, restarts: 2 };
        let m = nelder_mead(f, &[-1.2, 1.0], &[0.1, 0.1], &cfg);
        assert!(m.value < 1e-8, "{m:?}");
    }

    #[test]
    fn never_worse_than_start() {
        let f = |x: &[f64]| x.iter().map(|v| v.abs().sqrt()).sum::<f64>();
        let start = [0.0, 0.0, 0.0];
        let m = nelder_mead(f, &start, &[1.0; 3], &NelderMeadConfig::default());
        assert_eq!(m.value, 0.0);
    }

    #[test]
    fn infeasible_region_is_avoided() {
        let f = |x: &[f64]| if x[0] < 1.0 { f64::NAN } else { (x[0] - 2.0).powi(2) };
        let m = nelder_mead(f, &[5.0], &[1.0], &NelderMeadConfig::default());
        assert!((m.x[0] - 2.0).abs() < 1e-4);
    }
}
