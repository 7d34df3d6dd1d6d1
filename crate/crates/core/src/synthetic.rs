//! Synthetic corpora drawn from the non-seasonal ETS forms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Frequency, TimeSeries};
use crate::ets::{simulate, EtsSpec, Smoothing, States};

/// Mixture over the six non-seasonal forms, in yearly pool order.
#[derive(Debug, Clone)]
pub struct MixtureConfig {
    /// Relative frequency of ANN, MNN, AAN, MAN, AAdN, MAdN.
    pub weights: [f64; 6],
    /// Inclusive range of series lengths, test portion included.
    pub length: (usize, usize),
    /// Range of the relative noise scale.
    pub noise: (f64, f64),
}

impl Default for MixtureConfig {
    fn default() -> Self {
        Self { weights: [0.1, 0.1, 0.2, 0.2, 0.2, 0.2], length: (20, 40), noise: (0.02, 0.08) }
    }
}

const FORMS: [&str; 6] = ["ANN", "MNN", "AAN", "MAN", "AAdN", "MAdN"];

fn pick<R: Rng>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

/// Draws one strictly positive yearly series with its generating model.
pub fn draw_series<R: Rng>(id: &str, config: &MixtureConfig, rng: &mut R) -> (EtsSpec, TimeSeries) {
    let spec: EtsSpec = FORMS[pick(&config.weights, rng)].parse().expect("valid form");
    loop {
        let n = rng.random_range(config.length.0..=config.length.1);
        let level = 100.0 * rng.random_range(-0.5f64..0.5).exp();
        let alpha = rng.random_range(0.1..0.9);
        let smoothing = Smoothing {
            alpha,
            beta: spec.has_trend().then(|| alpha * rng.random_range(0.01..0.3)),
            gamma: None,
            phi: spec.damped.then(|| rng.random_range(0.8..0.98)),
        };
        let states = States {
            level,
            trend: spec.has_trend().then(|| level * rng.random_range(-0.01..0.05)),
            seasonal: Vec::new(),
        };
        let rel = rng.random_range(config.noise.0..config.noise.1);
        let sigma = match spec.error {
            crate::ets::ErrorKind::Additive => rel * level,
            crate::ets::ErrorKind::Multiplicative => rel,
        };
        let values = simulate(spec, &smoothing, &states, n, sigma, rng);
        if values.iter().all(|v| v.is_finite() && *v > 0.0) {
            let series = TimeSeries::new(id, Frequency::Yearly, values).expect("finite values");
            return (spec, series);
        }
    }
}

/// `n` series with ids `{prefix}{i}`, reproducible from `seed`.
pub fn mixture_corpus(prefix: &str, n: usize, seed: u64, config: &MixtureConfig) -> Vec<TimeSeries> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|i| draw_series(&format!("{prefix}{i}"), config, &mut rng).1).collect()
}
