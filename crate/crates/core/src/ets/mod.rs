//! Exponential smoothing state-space models: the candidate pool,
//! maximum-likelihood fitting, forecasting and information criteria.

mod forecast;
mod model;
pub mod optim;
mod spec;

pub use forecast::{forecast, point_forecast, simulate, ForecastResult};
pub use model::{
    filter, fit, fit_pool, fit_with, EtsFit, Filtered, FitConfig, FixedSmoothing, Smoothing, States, PHI_MAX, PHI_MIN,
};
pub use spec::{model_pool, ErrorKind, EtsSpec, SeasonalKind, TrendKind};

use crate::error::{Error, Result};

/// Bayesian information criterion, `-2 logL + k ln T`.
pub fn bic(fit: &EtsFit) -> f64 {
    bic_value(fit.log_likelihood, fit.num_params, fit.train_length)
}

/// Akaike information criterion, `-2 logL + 2k`.
pub fn aic(fit: &EtsFit) -> f64 {
    aic_value(fit.log_likelihood, fit.num_params)
}

/// Small-sample corrected AIC. Requires `T > k + 1`.
pub fn aicc(fit: &EtsFit) -> Result<f64> {
    aicc_value(fit.log_likelihood, fit.num_params, fit.train_length)
}

pub fn bic_value(log_likelihood: f64, k: usize, n: usize) -> f64 {
    -2.0 * log_likelihood + k as f64 * (n as f64).ln()
}

pub fn aic_value(log_likelihood: f64, k: usize) -> f64 {
    -2.0 * log_likelihood + 2.0 * k as f64
}

pub fn aicc_value(log_likelihood: f64, k: usize, n: usize) -> Result<f64> {
    if n <= k + 1 {
        return Err(Error::InvalidArgument(format!("AICc undefined for T={n}, k={k}")));
    }
    let k = k as f64;
    Ok(aic_value(log_likelihood, k as usize) + 2.0 * k * (k + 1.0) / (n as f64 - k - 1.0))
}
