//! Innovations state-space recursions, likelihood and maximum-likelihood
//! fitting.
//!
//! State updates use the error-correction form shared by additive and
//! multiplicative error models:
//!
//! ```text
//! q  = l + phi*b
//! p  = y - s | y / s | y             (seasonal A | M | N)
//! l' = q + alpha*(p - q)
//! b' = phi*b + (beta/alpha)*(l' - l - phi*b)
//! s' = s + gamma*(t - s),  t = y - q | y / q
//! ```
//!
//! The error type only changes the one-step innovation (`y - mu` or
//! `(y - mu)/mu`) and therefore the likelihood.

use serde::{Deserialize, Serialize};

use super::optim::{nelder_mead, NelderMeadConfig};
use super::spec::{ErrorKind, EtsSpec, SeasonalKind};
use crate::corpus::TimeSeries;
use crate::error::{Error, Result};

/// Smoothing parameters. `beta`, `gamma` and `phi` are present only when the
/// model has the corresponding component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Smoothing {
    pub alpha: f64,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub phi: Option<f64>,
}

/// A state vector. `seasonal` is in chronological order: `seasonal[0]` is
/// the index applied to the next observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct States {
    pub level: f64,
    pub trend: Option<f64>,
    pub seasonal: Vec<f64>,
}

/// Damping bounds.
pub const PHI_MIN: f64 = 0.8;
pub const PHI_MAX: f64 = 0.98;

/// Bound on transformed parameters; keeps logistic images strictly inside
/// their open intervals.
const LOGIT_CLAMP: f64 = 30.0;

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x.clamp(-LOGIT_CLAMP, LOGIT_CLAMP)).exp())
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln().clamp(-LOGIT_CLAMP, LOGIT_CLAMP)
}

/// Running state of the recursion.
#[derive(Debug, Clone)]
pub(crate) struct Recursion {
    spec: EtsSpec,
    alpha: f64,
    beta_ratio: f64,
    gamma: f64,
    phi: f64,
    level: f64,
    trend: f64,
    season: Vec<f64>,
    pos: usize,
}

impl Recursion {
    pub(crate) fn new(spec: EtsSpec, smoothing: &Smoothing, states: &States) -> Self {
        let alpha = smoothing.alpha;
        Self {
            spec,
            alpha,
            beta_ratio: smoothing.beta.map_or(0.0, |b| b / alpha),
            gamma: smoothing.gamma.unwrap_or(0.0),
            phi: if spec.has_trend() { smoothing.phi.unwrap_or(1.0) } else { 0.0 },
            level: states.level,
            trend: if spec.has_trend() { states.trend.unwrap_or(0.0) } else { 0.0 },
            season: states.seasonal.clone(),
            pos: 0,
        }
    }

    /// One-step-ahead conditional mean.
    #[inline]
    pub(crate) fn mean(&self) -> f64 {
        let q = self.level + self.phi * self.trend;
        match self.spec.seasonal {
            SeasonalKind::None => q,
            SeasonalKind::Additive => q + self.season[self.pos],
            SeasonalKind::Multiplicative => q * self.season[self.pos],
        }
    }

    /// Absorbs observation `y`. Returns false if the state became non-finite.
    #[inline]
    pub(crate) fn update(&mut self, y: f64) -> bool {
        let phib = self.phi * self.trend;
        let q = self.level + phib;
        let (p, t) = match self.spec.seasonal {
            SeasonalKind::None => (y, 0.0),
            SeasonalKind::Additive => (y - self.season[self.pos], y - q),
            SeasonalKind::Multiplicative => (y / self.season[self.pos], y / q),
        };
        let new_level = q + self.alpha * (p - q);
        if self.spec.has_trend() {
            self.trend = phib + self.beta_ratio * (new_level - self.level - phib);
        }
        self.level = new_level;
        if self.spec.has_season() {
            let s = self.season[self.pos];
            self.season[self.pos] = s + self.gamma * (t - s);
            let ok = self.season[self.pos].is_finite();
            self.pos = (self.pos + 1) % self.season.len();
            if !ok {
                return false;
            }
        }
        self.level.is_finite() && self.trend.is_finite()
    }

    pub(crate) fn states(&self) -> States {
        let mut seasonal = self.season.clone();
        if !seasonal.is_empty() {
            seasonal.rotate_left(self.pos);
        }
        States { level: self.level, trend: self.spec.has_trend().then_some(self.trend), seasonal }
    }
}

/// Result of running the recursion over a sample.
#[derive(Debug, Clone)]
pub struct Filtered {
    /// One-step-ahead means.
    pub fitted: Vec<f64>,
    /// Innovations: `y - mu` (additive error) or `(y - mu)/mu` (multiplicative).
    pub innovations: Vec<f64>,
    /// Level after absorbing each observation.
    pub levels: Vec<f64>,
    /// Final state.
    pub final_state: States,
}

struct Pass {
    sse: f64,
    sum_log_mean: f64,
}

fn pass(
    spec: EtsSpec,
    smoothing: &Smoothing,
    states: &States,
    y: &[f64],
    mut trace: Option<&mut Filtered>,
) -> Option<(Pass, Recursion)> {
    let mut rec = Recursion::new(spec, smoothing, states);
    let mut sse = 0.0;
    let mut sum_log_mean = 0.0;
    let multiplicative = spec.error == ErrorKind::Multiplicative;
    for &obs in y {
        let mu = rec.mean();
        if !mu.is_finite() {
            return None;
        }
        let e = if multiplicative {
            if mu <= 0.0 {
                return None;
            }
            sum_log_mean += mu.ln();
            (obs - mu) / mu
        } else {
            obs - mu
        };
        sse += e * e;
        if !rec.update(obs) {
            return None;
        }
        if let Some(t) = trace.as_deref_mut() {
            t.fitted.push(mu);
            t.innovations.push(e);
            t.levels.push(rec.level);
        }
    }
    Some((Pass { sse, sum_log_mean }, rec))
}

/// Runs the recursion of `spec` over `y` from the given initial state.
pub fn filter(spec: EtsSpec, smoothing: &Smoothing, initial: &States, y: &[f64]) -> Result<Filtered> {
    let mut out = Filtered {
        fitted: Vec::with_capacity(y.len()),
        innovations: Vec::with_capacity(y.len()),
        levels: Vec::with_capacity(y.len()),
        final_state: initial.clone(),
    };
    let (_, rec) = pass(spec, smoothing, initial, y, Some(&mut out))
        .ok_or_else(|| Error::Unfittable(format!("{spec}: recursion left the admissible region")))?;
    out.final_state = rec.states();
    Ok(out)
}

/// Concentrated Gaussian log-likelihood. `var_floor` bounds the variance
/// away from zero so a perfect fit stays finite.
fn log_likelihood(p: &Pass, n: usize, var_floor: f64) -> f64 {
    let nf = n as f64;
    let sigma2 = (p.sse / nf).max(var_floor);
    -0.5 * nf * ((2.0 * std::f64::consts::PI * sigma2).ln() + 1.0) - p.sum_log_mean
}

/// A fitted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtsFit {
    pub spec: EtsSpec,
    pub period: usize,
    pub smoothing: Smoothing,
    pub initial_states: States,
    /// State after the last training observation; forecasts start here.
    pub final_states: States,
    pub log_likelihood: f64,
    pub num_params: usize,
    /// Mean squared innovation.
    pub sigma2: f64,
    pub train_length: usize,
}

impl EtsFit {
    /// Serializes the fit for caching.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Smoothing parameters held fixed during fitting.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FixedSmoothing {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub phi: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct FitConfig {
    pub fixed: FixedSmoothing,
    pub optimizer: NelderMeadConfig,
    /// Starting values of alpha for the heuristic starts.
    pub alpha_starts: Vec<f64>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            fixed: FixedSmoothing::default(),
            optimizer: NelderMeadConfig::default(),
            alpha_starts: vec![0.1, 0.5, 0.9],
        }
    }
}

/// Maps between admissible parameters and the unconstrained vector searched
/// by the optimizer.
///
/// `alpha = sig(a)`, `beta = alpha*sig(b)`, `gamma = (1-alpha)*sig(g)`,
/// `phi = 0.8 + 0.18*sig(p)`; level, trend and additive seasonal states are
/// divided by the data scale; multiplicative seasonal states are offset by 1.
/// The last seasonal index is implied by normalization.
struct Layout {
    spec: EtsSpec,
    period: usize,
    fixed: FixedSmoothing,
    scale: f64,
    alpha: Option<usize>,
    beta: Option<usize>,
    gamma: Option<usize>,
    phi: Option<usize>,
    level: usize,
    trend: Option<usize>,
    season: Option<usize>,
    dim: usize,
}

impl Layout {
    fn new(spec: EtsSpec, period: usize, fixed: FixedSmoothing, scale: f64) -> Self {
        let mut dim = 0;
        let mut next = |present: bool| {
            present.then(|| {
                dim += 1;
                dim - 1
            })
        };
        let alpha = next(fixed.alpha.is_none());
        let beta = next(spec.has_trend() && fixed.beta.is_none());
        let gamma = next(spec.has_season() && fixed.gamma.is_none());
        let phi = next(spec.damped && fixed.phi.is_none());
        let level = next(true).unwrap();
        let trend = next(spec.has_trend());
        let season = if spec.has_season() {
            let start = dim;
            dim += period - 1;
            Some(start)
        } else {
            None
        };
        Self { spec, period, fixed, scale, alpha, beta, gamma, phi, level, trend, season, dim }
    }

    fn num_free_smoothing(&self) -> usize {
        [self.alpha, self.beta, self.gamma, self.phi].iter().filter(|i| i.is_some()).count()
    }

    fn decode(&self, x: &[f64]) -> Option<(Smoothing, States)> {
        let alpha = match self.alpha {
            Some(i) => sigmoid(x[i]),
            None => self.fixed.alpha?,
        };
        let beta = if self.spec.has_trend() {
            Some(match self.beta {
                Some(i) => alpha * sigmoid(x[i]),
                None => self.fixed.beta?,
            })
        } else {
            None
        };
        let gamma = if self.spec.has_season() {
            Some(match self.gamma {
                Some(i) => (1.0 - alpha) * sigmoid(x[i]),
                None => self.fixed.gamma?,
            })
        } else {
            None
        };
        let phi = if self.spec.damped {
            Some(match self.phi {
                Some(i) => PHI_MIN + (PHI_MAX - PHI_MIN) * sigmoid(x[i]),
                None => self.fixed.phi?,
            })
        } else {
            None
        };
        if !(alpha > 0.0 && alpha < 1.0) {
            return None;
        }
        if beta.is_some_and(|b| !(b > 0.0 && b < alpha)) {
            return None;
        }
        if gamma.is_some_and(|g| !(g > 0.0 && g < 1.0 - alpha)) {
            return None;
        }

        let level = self.scale * x[self.level];
        let trend = self.trend.map(|i| self.scale * x[i]);
        let mut seasonal = Vec::new();
        if let Some(start) = self.season {
            let m = self.period;
            match self.spec.seasonal {
                SeasonalKind::Additive => {
                    seasonal.extend(x[start..start + m - 1].iter().map(|v| self.scale * v));
                    let sum: f64 = seasonal.iter().sum();
                    seasonal.push(-sum);
                }
                SeasonalKind::Multiplicative => {
                    seasonal.extend(x[start..start + m - 1].iter().map(|v| 1.0 + v));
                    let sum: f64 = seasonal.iter().sum();
                    seasonal.push(m as f64 - sum);
                    if seasonal.iter().any(|&s| s <= 0.0) {
                        return None;
                    }
                }
                SeasonalKind::None => unreachable!(),
            }
        }
        Some((Smoothing { alpha, beta, gamma, phi }, States { level, trend, seasonal }))
    }

    fn encode(&self, smoothing: &Smoothing, states: &States) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        let alpha = self.fixed.alpha.unwrap_or(smoothing.alpha);
        if let Some(i) = self.alpha {
            x[i] = logit(alpha);
        }
        if let Some(i) = self.beta {
            x[i] = logit(smoothing.beta.unwrap_or(0.1 * alpha) / alpha);
        }
        if let Some(i) = self.gamma {
            x[i] = logit(smoothing.gamma.unwrap_or(0.1 * (1.0 - alpha)) / (1.0 - alpha));
        }
        if let Some(i) = self.phi {
            let phi = smoothing.phi.unwrap_or(0.9);
            x[i] = logit((phi - PHI_MIN) / (PHI_MAX - PHI_MIN));
        }
        x[self.level] = states.level / self.scale;
        if let Some(i) = self.trend {
            x[i] = states.trend.unwrap_or(0.0) / self.scale;
        }
        if let Some(start) = self.season {
            for j in 0..self.period - 1 {
                x[start + j] = match self.spec.seasonal {
                    SeasonalKind::Additive => states.seasonal[j] / self.scale,
                    _ => states.seasonal[j] - 1.0,
                };
            }
        }
        x
    }

    fn steps(&self) -> Vec<f64> {
        let mut step = vec![0.0; self.dim];
        for i in [self.alpha, self.beta, self.gamma, self.phi].into_iter().flatten() {
            step[i] = 1.0;
        }
        step[self.level] = 0.05;
        if let Some(i) = self.trend {
            step[i] = 0.01;
        }
        if let Some(start) = self.season {
            for s in &mut step[start..start + self.period - 1] {
                *s = 0.02;
            }
        }
        step
    }
}

/// Heuristic initial states: level from the first seasonal cycle, trend
/// from average first differences (or cycle means), seasonal indices from
/// detrended cycle values.
pub(crate) fn heuristic_states(spec: EtsSpec, period: usize, y: &[f64]) -> States {
    let m = if spec.has_season() { period } else { 1 };
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;

    if m == 1 {
        let k = (y.len() - 1).clamp(1, 5);
        let slope = if spec.has_trend() && y.len() > 1 { (y[k] - y[0]) / k as f64 } else { 0.0 };
        return States { level: y[0] - slope, trend: spec.has_trend().then_some(slope), seasonal: Vec::new() };
    }

    let cycles = (y.len() / m).clamp(1, 2);
    let first = mean(&y[..m]);
    let slope = if !spec.has_trend() {
        0.0
    } else if cycles >= 2 {
        (mean(&y[m..2 * m]) - first) / m as f64
    } else {
        (y[m - 1] - y[0]) / (m - 1) as f64
    };
    let mut seasonal = vec![0.0; m];
    for c in 0..cycles {
        let centre = first + slope * (c * m) as f64;
        for j in 0..m {
            let trend_line = centre + slope * (j as f64 - (m as f64 - 1.0) / 2.0);
            let v = y[c * m + j];
            seasonal[j] += match spec.seasonal {
                SeasonalKind::Multiplicative => v / trend_line,
                _ => v - trend_line,
            };
        }
    }
    seasonal.iter_mut().for_each(|s| *s /= cycles as f64);
    match spec.seasonal {
        SeasonalKind::Multiplicative => {
            if seasonal.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
                seasonal.iter_mut().for_each(|s| *s = 1.0);
            }
            let avg = mean(&seasonal);
            seasonal.iter_mut().for_each(|s| *s /= avg);
        }
        _ => {
            let avg = mean(&seasonal);
            seasonal.iter_mut().for_each(|s| *s -= avg);
        }
    }
    States { level: first - slope * (m as f64 + 1.0) / 2.0, trend: spec.has_trend().then_some(slope), seasonal }
}

fn check_fittable(spec: EtsSpec, series: &TimeSeries) -> Result<()> {
    let period = series.period();
    if spec.has_season() && period < 2 {
        return Err(Error::Unfittable(format!("{spec} needs a seasonal period > 1")));
    }
    let min = spec.min_fit_length(period);
    if series.len() <= min {
        return Err(Error::Unfittable(format!(
            "{spec} needs more than {min} observations, series {} has {}",
            series.id(),
            series.len()
        )));
    }
    if spec.requires_positive() && series.values().iter().any(|&v| v <= 0.0) {
        return Err(Error::Unfittable(format!(
            "{spec} needs positive data, series {} has non-positive values",
            series.id()
        )));
    }
    Ok(())
}

/// Fits `spec` to `series` by maximum likelihood with the default starts.
pub fn fit(spec: EtsSpec, series: &TimeSeries) -> Result<EtsFit> {
    fit_with(spec, series, &FitConfig::default(), &[])
}

/// Fits `spec` with explicit configuration and extra starting points.
pub fn fit_with(
    spec: EtsSpec,
    series: &TimeSeries,
    config: &FitConfig,
    warm_starts: &[(Smoothing, States)],
) -> Result<EtsFit> {
    check_fittable(spec, series)?;
    let y = series.values();
    let n = y.len();
    let period = series.period();
    let scale = {
        let s = y.iter().map(|v| v.abs()).sum::<f64>() / n as f64;
        if s > 0.0 {
            s
        } else {
            1.0
        }
    };
    let var_floor = match spec.error {
        ErrorKind::Additive => (1e-10 * scale).powi(2),
        ErrorKind::Multiplicative => 1e-20,
    };
    let layout = Layout::new(spec, period, config.fixed, scale);
    let objective = |x: &[f64]| -> f64 {
        let Some((sm, st)) = layout.decode(x) else {
            return f64::INFINITY;
        };
        match pass(spec, &sm, &st, y, None) {
            Some((p, _)) => -log_likelihood(&p, n, var_floor),
            None => f64::INFINITY,
        }
    };

    let heuristic = heuristic_states(spec, period, y);
    let mut starts: Vec<Vec<f64>> = config
        .alpha_starts
        .iter()
        .map(|&alpha| {
            let sm = Smoothing {
                alpha,
                beta: spec.has_trend().then_some(0.1 * alpha),
                gamma: spec.has_season().then_some(0.1 * (1.0 - alpha)),
                phi: spec.damped.then_some(0.9),
            };
            layout.encode(&sm, &heuristic)
        })
        .collect();
    starts.extend(warm_starts.iter().map(|(sm, st)| layout.encode(sm, st)));

    let step = layout.steps();
    let mut best: Option<(Vec<f64>, f64)> = None;
    for start in &starts {
        let min = nelder_mead(objective, start, &step, &config.optimizer);
        if min.value.is_finite() && best.as_ref().is_none_or(|(_, v)| min.value < *v) {
            best = Some((min.x, min.value));
        }
    }
    let (x, _) = best.ok_or_else(|| {
        Error::Unfittable(format!("{spec}: likelihood not finite at any start for series {}", series.id()))
    })?;
    let (smoothing, initial_states) = layout.decode(&x).expect("optimum is admissible");
    let (p, rec) = pass(spec, &smoothing, &initial_states, y, None).expect("optimum is admissible");
    Ok(EtsFit {
        spec,
        period,
        smoothing,
        initial_states,
        final_states: rec.states(),
        log_likelihood: log_likelihood(&p, n, var_floor),
        num_params: layout.num_free_smoothing() + spec.num_initial_states(period) + 1,
        sigma2: p.sse / n as f64,
        train_length: n,
    })
}

/// Embeds a fit of a contained model as a starting point for `target`:
/// dropped components get near-zero smoothing and neutral states.
fn embed(target: EtsSpec, period: usize, sub: &EtsFit) -> (Smoothing, States) {
    let tiny = sigmoid(-LOGIT_CLAMP);
    let alpha = sub.smoothing.alpha;
    let smoothing = Smoothing {
        alpha,
        beta: target.has_trend().then(|| sub.smoothing.beta.unwrap_or(alpha * tiny)),
        gamma: target.has_season().then(|| sub.smoothing.gamma.unwrap_or((1.0 - alpha) * tiny)),
        phi: target.damped.then(|| sub.smoothing.phi.unwrap_or(0.9)),
    };
    let seasonal = if !target.has_season() {
        Vec::new()
    } else if sub.spec.has_season() {
        sub.initial_states.seasonal.clone()
    } else if target.seasonal == SeasonalKind::Multiplicative {
        vec![1.0; period]
    } else {
        vec![0.0; period]
    };
    let states = States {
        level: sub.initial_states.level,
        trend: target.has_trend().then(|| sub.initial_states.trend.unwrap_or(0.0)),
        seasonal,
    };
    (smoothing, states)
}

/// Fits every model of `pool` to `series`, in pool order. Each model also
/// starts from the optima of already-fitted models it contains, so a larger
/// model's likelihood never falls below that of a model nested in it.
pub fn fit_pool(pool: &[EtsSpec], series: &TimeSeries, config: &FitConfig) -> Vec<Result<EtsFit>> {
    let mut fits: Vec<Result<EtsFit>> = Vec::with_capacity(pool.len());
    for &spec in pool {
        let warm: Vec<_> = fits
            .iter()
            .filter_map(|f| f.as_ref().ok())
            .filter(|f| spec.contains(&f.spec))
            .map(|f| embed(spec, series.period(), f))
            .collect();
        fits.push(fit_with(spec, series, config, &warm));
    }
    fits
}
