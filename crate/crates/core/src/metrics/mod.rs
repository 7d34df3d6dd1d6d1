//! Forecast accuracy measures, selection diagnostics and multiple
//! comparison tests.

mod accuracy;
mod diagnostics;
mod ranking;

pub use accuracy::{mase, msis, seasonal_naive_scale, ScoreRow, DEFAULT_MSIS_ALPHA};
pub use diagnostics::{confusion_matrix, model_diagnostics, ModelDiagnostics};
pub use ranking::{friedman_nemenyi, nemenyi_critical_value, rank_thirds, FriedmanNemenyi, PairComparison, Thirds};
