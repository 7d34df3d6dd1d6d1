//! Forecast model selection and combination with revised base-rates.
//!
//! An offline pass over a reference corpus records, for every series, which
//! exponential smoothing model a selection criterion picks in-sample and
//! which model turns out best out-of-sample. The resulting contingency table
//! of joint frequencies is then used online to turn a per-series selection
//! into precision (`p(correct | selected)`) or sensitivity
//! (`p(selected | correct)`) combination weights.

pub mod baserate;
pub mod combine;
pub mod corpus;
pub mod criteria;
pub mod error;
pub mod ets;
pub mod metrics;
pub mod pipeline;
pub mod stats;
pub mod synthetic;

pub use baserate::ContingencyTable;
pub use combine::{Scheme, WeightScheme, WeightVector};
pub use corpus::{Frequency, SplitSeries, TimeSeries};
pub use criteria::{CriterionValue, Selection};
pub use error::{Error, Result};
pub use ets::{EtsFit, EtsSpec, ForecastResult};
