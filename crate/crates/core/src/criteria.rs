//! Per-series selection criteria (in-sample) and the out-of-sample
//! evaluation criterion. Lower values are better throughout.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::TimeSeries;
use crate::error::{Error, Result};
use crate::ets::{self, EtsFit, EtsSpec, FitConfig};

/// A criterion score for one (series, model) pair. `value` is `None` when
/// the model could not be evaluated for the series.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionValue {
    pub series_id: String,
    pub model_index: usize,
    pub value: Option<f64>,
}

impl CriterionValue {
    pub fn is_available(&self) -> bool {
        self.value.is_some()
    }
}

/// Selection criterion used to pick a model from in-sample data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selection {
    Bic,
    Aic,
    Aicc,
    /// MAE of forecasts for the last `h` in-sample observations from a fit on
    /// the observations before them.
    Validation,
}

impl Selection {
    pub fn as_str(self) -> &'static str {
        match self {
            Selection::Bic => "bic",
            Selection::Aic => "aic",
            Selection::Aicc => "aicc",
            Selection::Validation => "validation",
        }
    }

    /// Validation needs an extra `h` observations held back.
    pub fn needs_double_split(self) -> bool {
        self == Selection::Validation
    }
}

impl fmt::Display for Selection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Selection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bic" => Ok(Selection::Bic),
            "aic" => Ok(Selection::Aic),
            "aicc" => Ok(Selection::Aicc),
            "validation" | "val" => Ok(Selection::Validation),
            other => Err(Error::InvalidArgument(format!("unknown selection criterion {other:?}"))),
        }
    }
}

fn ensure_any(values: &[CriterionValue]) -> Result<()> {
    if values.iter().any(CriterionValue::is_available) {
        Ok(())
    } else {
        Err(Error::NoCandidates)
    }
}

/// Information-criterion values of already fitted models, aligned to the
/// pool order of `fits`.
pub fn information_criterion(
    series_id: &str,
    fits: &[Result<EtsFit>],
    selection: Selection,
) -> Result<Vec<CriterionValue>> {
    let values: Vec<_> = fits
        .iter()
        .enumerate()
        .map(|(i, fit)| {
            let value = fit.as_ref().ok().and_then(|f| match selection {
                Selection::Bic => Some(ets::bic(f)),
                Selection::Aic => Some(ets::aic(f)),
                Selection::Aicc => ets::aicc(f).ok(),
                Selection::Validation => None,
            });
            CriterionValue { series_id: series_id.to_string(), model_index: i, value: value.filter(|v| v.is_finite()) }
        })
        .collect();
    ensure_any(&values)?;
    Ok(values)
}

/// BIC of every pool model fitted to `train`.
pub fn selection_bic(train: &TimeSeries, pool: &[EtsSpec]) -> Result<Vec<CriterionValue>> {
    let fits = ets::fit_pool(pool, train, &FitConfig::default());
    information_criterion(train.id(), &fits, Selection::Bic)
}

/// Time-series validation: each model is fitted on all but the last `h`
/// observations of `train` and scored by the MAE of its forecasts of them.
pub fn selection_validation(train: &TimeSeries, pool: &[EtsSpec], h: usize) -> Result<Vec<CriterionValue>> {
    selection_validation_with(train, pool, h, &FitConfig::default())
}

pub fn selection_validation_with(
    train: &TimeSeries,
    pool: &[EtsSpec],
    h: usize,
    config: &FitConfig,
) -> Result<Vec<CriterionValue>> {
    let (fit_part, holdout) = validation_split(train, h)?;
    let fits = ets::fit_pool(pool, &fit_part, config);
    let point_forecasts: Vec<Option<Vec<f64>>> =
        fits.iter().map(|f| f.as_ref().ok().map(|f| ets::point_forecast(f, h))).collect();
    let values = validation_scores(train.id(), holdout, &point_forecasts)?;
    ensure_any(&values)?;
    Ok(values)
}

/// Splits `train` into the portion used for validation fits (first
/// `T - h` observations) and the validation targets (last `h`).
pub fn validation_split(train: &TimeSeries, h: usize) -> Result<(TimeSeries, &[f64])> {
    if h == 0 {
        return Err(Error::InvalidArgument("horizon must be positive".into()));
    }
    if train.len() <= h {
        return Err(Error::TooShort { len: train.len(), h });
    }
    let cut = train.len() - h;
    Ok((train.truncated(cut)?, &train.values()[cut..]))
}

/// MAE of each model's forecasts against the validation targets.
pub fn validation_scores(
    series_id: &str,
    holdout: &[f64],
    forecasts: &[Option<Vec<f64>>],
) -> Result<Vec<CriterionValue>> {
    forecasts
        .iter()
        .enumerate()
        .map(|(i, fc)| {
            let value = match fc {
                Some(points) => Some(evaluation_mae(holdout, points)?).filter(|v| v.is_finite()),
                None => None,
            };
            Ok(CriterionValue { series_id: series_id.to_string(), model_index: i, value })
        })
        .collect()
}

/// Mean absolute error.
pub fn evaluation_mae(test: &[f64], point: &[f64]) -> Result<f64> {
    if test.len() != point.len() {
        return Err(Error::LengthMismatch(format!("{} actuals vs {} forecasts", test.len(), point.len())));
    }
    if test.is_empty() {
        return Err(Error::InvalidArgument("MAE of empty sequences".into()));
    }
    Ok(test.iter().zip(point).map(|(y, f)| (y - f).abs()).sum::<f64>() / test.len() as f64)
}

/// Position of the best available value; ties go to the lowest index.
pub fn best_index(values: &[CriterionValue]) -> Option<usize> {
    crate::stats::argmin(values.iter().map(|v| v.value))
}
