use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Frequency;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorKind {
    Additive,
    Multiplicative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrendKind {
    None,
    Additive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SeasonalKind {
    None,
    Additive,
    Multiplicative,
}

/// An exponential smoothing model form in the error/trend/seasonal taxonomy.
///
/// Serialized as its acronym, e.g. `"MAdN"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct EtsSpec {
    pub error: ErrorKind,
    pub trend: TrendKind,
    pub damped: bool,
    pub seasonal: SeasonalKind,
}

impl EtsSpec {
    /// Builds a spec, rejecting damping without a trend.
    pub fn new(error: ErrorKind, trend: TrendKind, damped: bool, seasonal: SeasonalKind) -> Result<Self> {
        if damped && trend != TrendKind::Additive {
            return Err(Error::InvalidArgument("damping requires an additive trend".into()));
        }
        Ok(Self { error, trend, damped, seasonal })
    }

    pub fn has_trend(&self) -> bool {
        self.trend == TrendKind::Additive
    }

    pub fn has_season(&self) -> bool {
        self.seasonal != SeasonalKind::None
    }

    /// Multiplicative error or seasonality needs strictly positive data.
    pub fn requires_positive(&self) -> bool {
        self.error == ErrorKind::Multiplicative || self.seasonal == SeasonalKind::Multiplicative
    }

    /// Number of smoothing parameters, counting the damping parameter.
    pub fn num_smoothing(&self) -> usize {
        1 + usize::from(self.has_trend()) + usize::from(self.has_season()) + usize::from(self.damped)
    }

    /// Number of free initial states: level, trend, and `m - 1` seasonal
    /// indices (the last index is fixed by normalization).
    pub fn num_initial_states(&self, period: usize) -> usize {
        let season = if self.has_season() { period.saturating_sub(1) } else { 0 };
        1 + usize::from(self.has_trend()) + season
    }

    /// Parameter count `k` used by the information criteria when every
    /// parameter is estimated (smoothing + initial states + variance).
    pub fn num_params(&self, period: usize) -> usize {
        self.num_smoothing() + self.num_initial_states(period) + 1
    }

    /// A training sample must be strictly longer than this to be fitted.
    pub fn min_fit_length(&self, period: usize) -> usize {
        self.num_initial_states(period) + self.num_smoothing() + 3
    }

    /// True if `other` is obtained from `self` by dropping components, so
    /// `self` contains `other` as a limiting case (zero smoothing of the
    /// dropped components).
    pub fn contains(&self, other: &EtsSpec) -> bool {
        if self == other || self.error != other.error {
            return false;
        }
        let trend_ok = !other.has_trend() || (other.trend == self.trend && other.damped == self.damped);
        let season_ok = !other.has_season() || other.seasonal == self.seasonal;
        trend_ok && season_ok
    }

    pub fn acronym(&self) -> String {
        let e = match self.error {
            ErrorKind::Additive => "A",
            ErrorKind::Multiplicative => "M",
        };
        let t = match (self.trend, self.damped) {
            (TrendKind::None, _) => "N",
            (TrendKind::Additive, false) => "A",
            (TrendKind::Additive, true) => "Ad",
        };
        let s = match self.seasonal {
            SeasonalKind::None => "N",
            SeasonalKind::Additive => "A",
            SeasonalKind::Multiplicative => "M",
        };
        format!("{e}{t}{s}")
    }
}

impl fmt::Display for EtsSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.acronym())
    }
}

impl FromStr for EtsSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("invalid model acronym {s:?}"));
        let mut chars = s.chars();
        let error = match chars.next() {
            Some('A') => ErrorKind::Additive,
            Some('M') => ErrorKind::Multiplicative,
            _ => return Err(bad()),
        };
        let rest: String = chars.collect();
        let (trend, damped, season) = if let Some(r) = rest.strip_prefix("Ad") {
            (TrendKind::Additive, true, r)
        } else if let Some(r) = rest.strip_prefix('A') {
            (TrendKind::Additive, false, r)
        } else if let Some(r) = rest.strip_prefix('N') {
            (TrendKind::None, false, r)
        } else {
            return Err(bad());
        };
        let seasonal = match season {
            "N" => SeasonalKind::None,
            "A" => SeasonalKind::Additive,
            "M" => SeasonalKind::Multiplicative,
            _ => return Err(bad()),
        };
        EtsSpec::new(error, trend, damped, seasonal)
    }
}

impl From<EtsSpec> for String {
    fn from(spec: EtsSpec) -> String {
        spec.acronym()
    }
}

impl TryFrom<String> for EtsSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// The default candidate pool for a frequency.
///
/// Order: non-seasonal forms (ANN, MNN, AAN, MAN, AAdN, MAdN), then the same
/// six with additive seasonality, then MNM, MAM, MAdM. Seasonal frequencies
/// get all 15; yearly data gets the first 6. Additive error with
/// multiplicative seasonality is never included. Every model appears after
/// all of the models it contains.
pub fn model_pool(frequency: Frequency) -> Vec<EtsSpec> {
    use ErrorKind as E;
    use SeasonalKind as S;

    let trends = [(TrendKind::None, false), (TrendKind::Additive, false), (TrendKind::Additive, true)];
    let mut seasons = vec![S::None];
    if frequency.is_seasonal() {
        seasons.push(S::Additive);
        seasons.push(S::Multiplicative);
    }
    let mut pool = Vec::new();
    for seasonal in seasons {
        for &(trend, damped) in &trends {
            for error in [E::Additive, E::Multiplicative] {
                if error == E::Additive && seasonal == S::Multiplicative {
                    continue;
                }
                pool.push(EtsSpec { error, trend, damped, seasonal });
            }
        }
    }
    pool
}
