//! Online phase: forecast a target series with every scheme in one pass.
//!
//! Each pool model is fitted once; criterion values, forecasts and the
//! availability mask are shared by all requested schemes.

use rayon::prelude::*;

use crate::baserate::ContingencyTable;
use crate::combine::{
    combine_forecasts, exclude_outlier_models, scheme_weights, Scheme, WeightVector, DEFAULT_IQR_MULTIPLIER,
};
use crate::corpus::TimeSeries;
use crate::criteria::{information_criterion, selection_validation_with, Selection};
use crate::error::{Error, Result};
use crate::ets::{self, EtsSpec, FitConfig, ForecastResult};

#[derive(Debug, Clone)]
pub struct OnlineConfig {
    pub pool: Vec<EtsSpec>,
    pub selection: Selection,
    pub horizon: usize,
    pub level: f64,
    pub num_paths: usize,
    pub seed: u64,
    pub iqr_multiplier: f64,
    /// Simulate prediction intervals. When off, bounds equal the point
    /// forecasts and the outlier exclusion is skipped.
    pub intervals: bool,
    pub fit: FitConfig,
}

impl OnlineConfig {
    pub fn new(pool: Vec<EtsSpec>, selection: Selection, horizon: usize) -> Self {
        Self {
            pool,
            selection,
            horizon,
            level: 0.95,
            num_paths: 5000,
            seed: 20_210_901,
            iqr_multiplier: DEFAULT_IQR_MULTIPLIER,
            intervals: true,
            fit: FitConfig::default(),
        }
    }
}

/// Forecasts of one series.
#[derive(Debug, Clone)]
pub struct SeriesForecasts {
    pub series_id: String,
    /// Per pool model; `None` where the model could not be fitted.
    pub models: Vec<Option<ForecastResult>>,
    pub criterion: Vec<Option<f64>>,
    /// Models eligible for selection and combination after exclusions.
    pub available: Vec<bool>,
    pub schemes: Vec<SchemeForecast>,
}

#[derive(Debug, Clone)]
pub struct SchemeForecast {
    pub scheme: Scheme,
    pub weights: WeightVector,
    pub forecast: ForecastResult,
}

impl SchemeForecast {
    /// Model whose forecast a select scheme returns.
    pub fn selected_model(&self) -> usize {
        self.weights.argmax()
    }
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Simulation seed for one (series, model) pair; independent of processing
/// order.
pub fn path_seed(seed: u64, series_id: &str, model: usize) -> u64 {
    splitmix64(seed ^ splitmix64(fnv1a(series_id)) ^ splitmix64(model as u64 + 1))
}

/// Fits the pool to `series` and produces every scheme's forecast.
pub fn forecast_series(
    series: &TimeSeries,
    schemes: &[Scheme],
    table: Option<&ContingencyTable>,
    config: &OnlineConfig,
) -> Result<SeriesForecasts> {
    if table.is_none() && schemes.iter().any(|s| s.needs_table()) {
        return Err(Error::InvalidArgument("table required".into()));
    }
    if let Some(t) = table {
        t.check_pool(&config.pool)?;
    }
    let h = config.horizon;
    let fits = ets::fit_pool(&config.pool, series, &config.fit);
    let criterion: Vec<Option<f64>> = match config.selection {
        Selection::Validation => selection_validation_with(series, &config.pool, h, &config.fit)?,
        ic => information_criterion(series.id(), &fits, ic)?,
    }
    .into_iter()
    .map(|v| v.value)
    .collect();

    let models: Vec<Option<ForecastResult>> = fits
        .iter()
        .enumerate()
        .map(|(k, fit)| {
            let fit = fit.as_ref().ok()?;
            let result = if config.intervals {
                ets::forecast(fit, h, config.level, config.num_paths, path_seed(config.seed, series.id(), k)).ok()?
            } else {
                let point = ets::point_forecast(fit, h);
                ForecastResult { lower: point.clone(), upper: point.clone(), point, level: config.level }
            };
            let finite = result.point.iter().chain(&result.lower).chain(&result.upper).all(|v| v.is_finite());
            finite.then_some(result)
        })
        .collect();

    let mut available: Vec<bool> = models.iter().zip(&criterion).map(|(m, c)| m.is_some() && c.is_some()).collect();
    if config.intervals {
        available = exclude_outlier_models(&models, &available, config.iqr_multiplier);
    }
    if !available.iter().any(|&a| a) {
        return Err(Error::NoCandidates);
    }
    let masked: Vec<Option<ForecastResult>> =
        models.iter().zip(&available).map(|(m, &a)| if a { m.clone() } else { None }).collect();

    let schemes = schemes
        .iter()
        .map(|&scheme| {
            let weights = scheme_weights(scheme.weight_scheme(), &criterion, table, &available)?;
            let forecast = combine_forecasts(&masked, &weights, scheme.mode())?;
            Ok(SchemeForecast { scheme, weights, forecast })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(SeriesForecasts { series_id: series.id().to_string(), models, criterion, available, schemes })
}

/// [`forecast_series`] over a corpus in parallel; results keep input order.
pub fn forecast_corpus(
    corpus: &[TimeSeries],
    schemes: &[Scheme],
    table: Option<&ContingencyTable>,
    config: &OnlineConfig,
) -> Vec<Result<SeriesForecasts>> {
    corpus.par_iter().map(|s| forecast_series(s, schemes, table, config)).collect()
}
