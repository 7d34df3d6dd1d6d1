use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::model::{EtsFit, Recursion, Smoothing, States};
use super::spec::{ErrorKind, EtsSpec};
use crate::error::{Error, Result};
use crate::stats::quantile_sorted;

/// Point forecasts with a central prediction interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastResult {
    pub point: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Nominal coverage of `[lower, upper]`.
    pub level: f64,
}

impl ForecastResult {
    pub fn horizon(&self) -> usize {
        self.point.len()
    }
}

/// Forecasts `h` steps ahead of the training sample.
///
/// Point forecasts follow the recursion with zero innovations. Interval
/// bounds are type-7 quantiles at `(1 - level)/2` and `(1 + level)/2` of
/// `num_paths` sample paths driven by Gaussian innovations with the fitted
/// variance. The generator is seeded from `seed` only.
pub fn forecast(fit: &EtsFit, h: usize, level: f64, num_paths: usize, seed: u64) -> Result<ForecastResult> {
    if h == 0 {
        return Err(Error::InvalidArgument("forecast horizon must be positive".into()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidArgument(format!("interval level {level} outside (0, 1)")));
    }
    if num_paths == 0 {
        return Err(Error::InvalidArgument("num_paths must be positive".into()));
    }

    let start = Recursion::new(fit.spec, &fit.smoothing, &fit.final_states);
    let point = point_forecast(fit, h);

    let sigma = fit.sigma2.max(0.0).sqrt();
    let multiplicative = fit.spec.error == ErrorKind::Multiplicative;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // paths[j * num_paths + p] = value of path p at step j
    let mut paths = vec![0.0; h * num_paths];
    for p in 0..num_paths {
        let mut rec = start.clone();
        for j in 0..h {
            let mu = rec.mean();
            let z: f64 = StandardNormal.sample(&mut rng);
            let e = sigma * z;
            let y = if multiplicative { mu * (1.0 + e) } else { mu + e };
            paths[j * num_paths + p] = y;
            rec.update(y);
        }
    }

    let lo_p = (1.0 - level) / 2.0;
    let hi_p = (1.0 + level) / 2.0;
    let mut lower = Vec::with_capacity(h);
    let mut upper = Vec::with_capacity(h);
    for (j, step) in paths.chunks_mut(num_paths).enumerate() {
        let mut finite: Vec<f64> = step.iter().copied().filter(|v| v.is_finite()).collect();
        if finite.is_empty() {
            lower.push(point[j]);
            upper.push(point[j]);
            continue;
        }
        finite.sort_by(f64::total_cmp);
        lower.push(quantile_sorted(&finite, lo_p));
        upper.push(quantile_sorted(&finite, hi_p));
    }

    Ok(ForecastResult { point, lower, upper, level })
}

/// Zero-innovation point forecasts for steps `1..=h`.
pub fn point_forecast(fit: &EtsFit, h: usize) -> Vec<f64> {
    let mut rec = Recursion::new(fit.spec, &fit.smoothing, &fit.final_states);
    (0..h)
        .map(|_| {
            let mu = rec.mean();
            rec.update(mu);
            mu
        })
        .collect()
}

/// Generates `n` observations from the model with Gaussian innovations of
/// standard deviation `sigma` (relative for multiplicative error).
pub fn simulate<R: Rng + ?Sized>(
    spec: EtsSpec,
    smoothing: &Smoothing,
    initial: &States,
    n: usize,
    sigma: f64,
    rng: &mut R,
) -> Vec<f64> {
    let noise = Normal::new(0.0, sigma.max(0.0)).expect("finite sigma");
    let mut rec = Recursion::new(spec, smoothing, initial);
    let multiplicative = spec.error == ErrorKind::Multiplicative;
    (0..n)
        .map(|_| {
            let mu = rec.mean();
            let e = noise.sample(rng);
            let y = if multiplicative { mu * (1.0 + e) } else { mu + e };
            rec.update(y);
            y
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Frequency, TimeSeries};
    use crate::ets::model::fit;

    fn ann_fit(alpha: f64, level: f64, sigma2: f64) -> EtsFit {
        let states = States { level, trend: None, seasonal: vec![] };
        EtsFit {
            spec: "ANN".parse().unwrap(),
            period: 1,
            smoothing: Smoothing { alpha, beta: None, gamma: None, phi: None },
            initial_states: states.clone(),
            final_states: states,
            log_likelihood: 0.0,
            num_params: 3,
            sigma2,
            train_length: 30,
        }
    }

    #[test]
    fn constant_series_has_flat_tight_forecast() {
        let s = TimeSeries::new("c", Frequency::Yearly, vec![5.0; 30]).unwrap();
        let f = fit("ANN".parse().unwrap(), &s).unwrap();
        let fc = forecast(&f, 6, 0.95, 2000, 1).unwrap();
        for j in 0..6 {
            assert!((fc.point[j] - 5.0).abs() < 1e-6);
            assert!(fc.upper[j] - fc.lower[j] <= 1e-4);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let f = ann_fit(0.3, 10.0, 1.0);
        let a = forecast(&f, 8, 0.9, 500, 42).unwrap();
        let b = forecast(&f, 8, 0.9, 500, 42).unwrap();
        assert_eq!(a, b);
        let c = forecast(&f, 8, 0.9, 500, 43).unwrap();
        assert_ne!(a.lower, c.lower);
    }

    #[test]
    fn one_step_interval_matches_gaussian() {
        let f = ann_fit(0.3, 10.0, 1.0);
        let fc = forecast(&f, 1, 0.95, 20_000, 7).unwrap();
        let half = (fc.upper[0] - fc.lower[0]) / 2.0;
        assert!((half / 1.959964 - 1.0).abs() < 0.02, "half-width {half}");
        assert_eq!(fc.point[0], 10.0);
    }

    #[test]
    fn rejects_bad_arguments() {
        let f = ann_fit(0.3, 10.0, 1.0);
        assert!(forecast(&f, 0, 0.95, 10, 1).is_err());
        assert!(forecast(&f, 3, 1.0, 10, 1).is_err());
        assert!(forecast(&f, 3, 0.95, 0, 1).is_err());
    }

    #[test]
    fn lower_never_exceeds_upper() {
        let f = ann_fit(0.8, 3.0, 4.0);
        let fc = forecast(&f, 12, 0.8, 100, 3).unwrap();
        assert!(fc.lower.iter().zip(&fc.upper).all(|(l, u)| l <= u));
        assert_eq!(fc.point.len(), 12);
        assert_eq!(fc.lower.len(), 12);
        assert_eq!(fc.upper.len(), 12);
    }
}
