//! Combination weights and the selection/averaging schemes.
//!
//! Given the criterion values `S_k` of a target series and a contingency
//! table `W` from the reference corpus, with `i* = argmin S`:
//!
//! * criterion weights are proportional to `exp(-S_k / 2)`,
//! * precision weights to `w[i*][k]`, i.e. `p(C_k | S_i*)`,
//! * sensitivity weights to `w[i*][k] / sum_i w[i][k]`, i.e. `p(S_i* | C_k)`.
//!
//! A *select* scheme uses the forecast of the highest-weighted model, an
//! *average* scheme the weighted mean of all forecasts.

use std::fmt;
use std::str::FromStr;

use log::debug;
use serde::{Deserialize, Serialize};

use crate::baserate::ContingencyTable;
use crate::error::{Error, Result};
use crate::ets::ForecastResult;
use crate::stats::{argmax, argmin, quantile};

/// Default Tukey fence multiplier for the outlier exclusion rule.
pub const DEFAULT_IQR_MULTIPLIER: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightScheme {
    Criterion,
    Precision,
    Sensitivity,
    Equal,
    Aggregate,
}

/// Normalized weights over the pool, aligned to pool order.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    pub scheme: WeightScheme,
    pub weights: Vec<f64>,
    /// The criterion-selected model for criterion/precision/sensitivity
    /// weights; the argmax for equal and aggregate weights.
    pub selected_index: usize,
}

impl WeightVector {
    /// Highest-weighted model, lowest index on ties.
    pub fn argmax(&self) -> usize {
        argmax(&self.weights).expect("non-empty weights")
    }
}

fn normalize(raw: Vec<f64>) -> Option<Vec<f64>> {
    let total: f64 = raw.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return None;
    }
    Some(raw.into_iter().map(|w| w / total).collect())
}

/// `w_k ∝ exp(-S_k / 2)`, computed after subtracting `min S`. Unavailable
/// models get zero weight.
pub fn criterion_weights(values: &[Option<f64>]) -> Result<WeightVector> {
    let finite = |v: Option<f64>| v.filter(|x| x.is_finite());
    let selected = argmin(values.iter().map(|&v| finite(v))).ok_or(Error::NoCandidates)?;
    let best = values[selected].unwrap();
    let raw = values.iter().map(|&v| finite(v).map_or(0.0, |s| (-(s - best) / 2.0).exp())).collect();
    Ok(WeightVector {
        scheme: WeightScheme::Criterion,
        weights: normalize(raw).expect("selected model has weight 1"),
        selected_index: selected,
    })
}

fn check_table_args(table: &ContingencyTable, selected: usize, available: &[bool]) {
    assert_eq!(available.len(), table.k(), "mask length must equal pool size");
    assert!(selected < table.k(), "selected index out of range");
}

/// Row `i*` of the table restricted to available models, normalized.
/// `None` if that row has no mass on any available model.
pub fn precision_weights(table: &ContingencyTable, selected: usize, available: &[bool]) -> Option<WeightVector> {
    check_table_args(table, selected, available);
    let raw = (0..table.k()).map(|k| if available[k] { table.prob(selected, k) } else { 0.0 }).collect();
    Some(WeightVector { scheme: WeightScheme::Precision, weights: normalize(raw)?, selected_index: selected })
}

/// `w[i*][k] / colsum_k` for available models with a non-empty column,
/// normalized. `None` if every contribution is zero.
pub fn sensitivity_weights(table: &ContingencyTable, selected: usize, available: &[bool]) -> Option<WeightVector> {
    check_table_args(table, selected, available);
    let cols = table.col_sums();
    let raw = (0..table.k())
        .map(|k| if available[k] && cols[k] > 0.0 { table.prob(selected, k) / cols[k] } else { 0.0 })
        .collect();
    Some(WeightVector { scheme: WeightScheme::Sensitivity, weights: normalize(raw)?, selected_index: selected })
}

/// One-hot on the available model with the largest column total, i.e. the
/// model most often best across the reference corpus.
pub fn aggregate_weights(table: &ContingencyTable, available: &[bool]) -> Result<WeightVector> {
    assert_eq!(available.len(), table.k(), "mask length must equal pool size");
    let cols = table.col_sums();
    let masked: Vec<f64> = cols.iter().zip(available).map(|(&c, &a)| if a { c } else { f64::NEG_INFINITY }).collect();
    if !available.iter().any(|&a| a) {
        return Err(Error::NoCandidates);
    }
    let best = argmax(&masked).expect("non-empty");
    let mut weights = vec![0.0; table.k()];
    weights[best] = 1.0;
    Ok(WeightVector { scheme: WeightScheme::Aggregate, weights, selected_index: best })
}

/// `1/|available|` on each available model.
pub fn equal_weights(available: &[bool]) -> Result<WeightVector> {
    let n = available.iter().filter(|&&a| a).count();
    if n == 0 {
        return Err(Error::NoCandidates);
    }
    let weights: Vec<f64> = available.iter().map(|&a| if a { 1.0 / n as f64 } else { 0.0 }).collect();
    let selected_index = available.iter().position(|&a| a).unwrap();
    Ok(WeightVector { scheme: WeightScheme::Equal, weights, selected_index })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Select,
    Average,
}

/// The eight forecasting schemes: two benchmarks and three weight schemes
/// in select and average mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    AggregateSelect,
    CriterionSelect,
    PrecisionSelect,
    SensitivitySelect,
    EqwAverage,
    CriterionAverage,
    PrecisionAverage,
    SensitivityAverage,
}

impl Scheme {
    pub const ALL: [Scheme; 8] = [
        Scheme::AggregateSelect,
        Scheme::CriterionSelect,
        Scheme::PrecisionSelect,
        Scheme::SensitivitySelect,
        Scheme::EqwAverage,
        Scheme::CriterionAverage,
        Scheme::PrecisionAverage,
        Scheme::SensitivityAverage,
    ];

    pub fn weight_scheme(self) -> WeightScheme {
        match self {
            Scheme::AggregateSelect => WeightScheme::Aggregate,
            Scheme::CriterionSelect | Scheme::CriterionAverage => WeightScheme::Criterion,
            Scheme::PrecisionSelect | Scheme::PrecisionAverage => WeightScheme::Precision,
            Scheme::SensitivitySelect | Scheme::SensitivityAverage => WeightScheme::Sensitivity,
            Scheme::EqwAverage => WeightScheme::Equal,
        }
    }

    pub fn mode(self) -> Mode {
        match self {
            Scheme::AggregateSelect | Scheme::CriterionSelect | Scheme::PrecisionSelect | Scheme::SensitivitySelect => {
                Mode::Select
            }
            _ => Mode::Average,
        }
    }

    /// Whether the scheme reads the contingency table.
    pub fn needs_table(self) -> bool {
        matches!(self.weight_scheme(), WeightScheme::Precision | WeightScheme::Sensitivity | WeightScheme::Aggregate)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::AggregateSelect => "aggregate-select",
            Scheme::CriterionSelect => "criterion-select",
            Scheme::PrecisionSelect => "precision-select",
            Scheme::SensitivitySelect => "sensitivity-select",
            Scheme::EqwAverage => "eqw-average",
            Scheme::CriterionAverage => "criterion-average",
            Scheme::PrecisionAverage => "precision-average",
            Scheme::SensitivityAverage => "sensitivity-average",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown scheme {s:?}")))
    }
}

/// Weights of `scheme` for a target series with criterion values `values`
/// (unavailable models are `None` or masked out by `available`).
///
/// Precision and sensitivity weights fall back to criterion weights when
/// the selected model's row gives no mass to any available model.
pub fn scheme_weights(
    scheme: WeightScheme,
    values: &[Option<f64>],
    table: Option<&ContingencyTable>,
    available: &[bool],
) -> Result<WeightVector> {
    let masked: Vec<Option<f64>> = values.iter().zip(available).map(|(&v, &a)| v.filter(|_| a)).collect();
    let usable: Vec<bool> = masked.iter().map(|v| v.is_some_and(f64::is_finite)).collect();
    let need_table = || table.ok_or_else(|| Error::InvalidArgument("table required".into()));
    match scheme {
        WeightScheme::Criterion => criterion_weights(&masked),
        WeightScheme::Equal => equal_weights(&usable),
        WeightScheme::Aggregate => aggregate_weights(need_table()?, &usable),
        WeightScheme::Precision | WeightScheme::Sensitivity => {
            let table = need_table()?;
            let crit = criterion_weights(&masked)?;
            let revised = if scheme == WeightScheme::Precision {
                precision_weights(table, crit.selected_index, &usable)
            } else {
                sensitivity_weights(table, crit.selected_index, &usable)
            };
            Ok(revised.unwrap_or_else(|| {
                debug!(
                    "{scheme:?} weights empty for selected model {}; using criterion weights",
                    table.models()[crit.selected_index]
                );
                crit
            }))
        }
    }
}

/// Combines per-model forecasts. `results[k]` is `None` for models without a
/// forecast; such models must carry zero weight.
pub fn combine_forecasts(
    results: &[Option<ForecastResult>],
    weights: &WeightVector,
    mode: Mode,
) -> Result<ForecastResult> {
    if results.len() != weights.weights.len() {
        return Err(Error::LengthMismatch(format!("{} forecasts vs {} weights", results.len(), weights.weights.len())));
    }
    let reference = results.iter().flatten().next().ok_or(Error::NoCandidates)?;
    let h = reference.horizon();
    for r in results.iter().flatten() {
        if r.horizon() != h || r.level != reference.level {
            return Err(Error::LengthMismatch("forecasts differ in horizon or level".into()));
        }
    }
    for (k, (r, &w)) in results.iter().zip(&weights.weights).enumerate() {
        if r.is_none() && w > 0.0 {
            return Err(Error::InvalidArgument(format!("model {k} has weight {w} but no forecast")));
        }
    }

    match mode {
        Mode::Select => {
            let k = weights.argmax();
            Ok(results[k].clone().expect("positive weight implies a forecast"))
        }
        Mode::Average => {
            let mut out = ForecastResult {
                point: vec![0.0; h],
                lower: vec![0.0; h],
                upper: vec![0.0; h],
                level: reference.level,
            };
            for (r, &w) in results.iter().zip(&weights.weights) {
                let Some(r) = r else { continue };
                if w == 0.0 {
                    continue;
                }
                for j in 0..h {
                    out.point[j] += w * r.point[j];
                    out.lower[j] += w * r.lower[j];
                    out.upper[j] += w * r.upper[j];
                }
            }
            Ok(out)
        }
    }
}

/// Marks as unavailable the models whose furthest-horizon lower or upper
/// bound lies outside `[Q1 - m*IQR, Q3 + m*IQR]` of that bound across the
/// available models. Needs at least four available models; never removes
/// every model.
pub fn exclude_outlier_models(results: &[Option<ForecastResult>], available: &[bool], multiplier: f64) -> Vec<bool> {
    assert_eq!(results.len(), available.len());
    let members: Vec<usize> = (0..results.len()).filter(|&k| available[k] && results[k].is_some()).collect();
    if members.len() < 4 {
        return available.to_vec();
    }
    let last = |k: usize, upper: bool| {
        let r = results[k].as_ref().unwrap();
        if upper {
            *r.upper.last().unwrap()
        } else {
            *r.lower.last().unwrap()
        }
    };
    let mut out = available.to_vec();
    for upper in [false, true] {
        let vals: Vec<f64> = members.iter().map(|&k| last(k, upper)).collect();
        let q1 = quantile(&vals, 0.25);
        let q3 = quantile(&vals, 0.75);
        let iqr = q3 - q1;
        let (lo, hi) = (q1 - multiplier * iqr, q3 + multiplier * iqr);
        for (&k, &v) in members.iter().zip(&vals) {
            if !(v >= lo && v <= hi) {
                out[k] = false;
            }
        }
    }
    if !members.iter().any(|&k| out[k]) {
        return available.to_vec();
    }
    out
}
