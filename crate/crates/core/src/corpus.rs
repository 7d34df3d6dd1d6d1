//! Time series data model and corpus ingestion.
//!
//! A corpus file is a ragged CSV with one series per row: the series id
//! followed by its observations, oldest first. The sampling frequency is a
//! property of the whole file and is supplied by the caller.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ets::EtsSpec;

/// Sampling frequency of a corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frequency {
    Yearly,
    Quarterly,
    Monthly,
}

impl Frequency {
    /// Seasonal period `s`.
    pub fn period(self) -> usize {
        match self {
            Frequency::Yearly => 1,
            Frequency::Quarterly => 4,
            Frequency::Monthly => 12,
        }
    }

    /// Competition forecast horizon for this frequency.
    pub fn default_horizon(self) -> usize {
        match self {
            Frequency::Yearly => 6,
            Frequency::Quarterly => 8,
            Frequency::Monthly => 12,
        }
    }

    pub fn is_seasonal(self) -> bool {
        self.period() > 1
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Frequency::Yearly => "yearly",
            Frequency::Quarterly => "quarterly",
            Frequency::Monthly => "monthly",
        }
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Frequency {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "yearly" | "y" => Ok(Frequency::Yearly),
            "quarterly" | "q" => Ok(Frequency::Quarterly),
            "monthly" | "m" => Ok(Frequency::Monthly),
            other => Err(Error::InvalidArgument(format!("unknown frequency {other:?}"))),
        }
    }
}

/// One observed series.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    id: String,
    frequency: Frequency,
    values: Vec<f64>,
    /// Position of the first observation within the seasonal cycle, if known.
    pub period_of_first_obs: Option<usize>,
}

impl TimeSeries {
    /// Builds a series, rejecting empty or non-finite data.
    pub fn new(id: impl Into<String>, frequency: Frequency, values: Vec<f64>) -> Result<Self> {
        let id = id.into();
        if values.is_empty() {
            return Err(Error::InvalidArgument(format!("series {id} has no observations")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { id });
        }
        Ok(Self { id, frequency, values, period_of_first_obs: None })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn frequency(&self) -> Frequency {
        self.frequency
    }

    pub fn period(&self) -> usize {
        self.frequency.period()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The first `len` observations as a new series with the same id.
    pub fn truncated(&self, len: usize) -> Result<Self> {
        if len == 0 || len > self.values.len() {
            return Err(Error::InvalidArgument(format!(
                "cannot truncate series {} of length {} to {len}",
                self.id,
                self.values.len()
            )));
        }
        Ok(Self {
            id: self.id.clone(),
            frequency: self.frequency,
            values: self.values[..len].to_vec(),
            period_of_first_obs: self.period_of_first_obs,
        })
    }
}

/// A series split into a training sample and a held-out test sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitSeries {
    pub train: TimeSeries,
    pub test: Vec<f64>,
}

/// Splits off the final `h` observations as the test sample.
pub fn split(series: &TimeSeries, h: usize) -> Result<SplitSeries> {
    if h == 0 {
        return Err(Error::InvalidArgument("horizon must be positive".into()));
    }
    let len = series.len();
    if len <= h {
        return Err(Error::TooShort { len, h });
    }
    let train = series.truncated(len - h)?;
    Ok(SplitSeries { train, test: series.values[len - h..].to_vec() })
}

/// Keeps the series whose training portion can be fitted by every model in
/// `pool`.
///
/// The training portion is `T - h` observations, or `T - 2h` when the
/// validation criterion needs a second split. Multiplicative models
/// additionally require strictly positive training data (`T - h` values).
pub fn filter_fittable(corpus: &[TimeSeries], pool: &[EtsSpec], h: usize, needs_double_split: bool) -> Vec<TimeSeries> {
    let holdout = if needs_double_split { 2 * h } else { h };
    let needs_positive = pool.iter().any(|s| s.requires_positive());
    corpus
        .iter()
        .filter(|series| {
            let len = series.len();
            let min_len = pool.iter().map(|s| s.min_fit_length(series.period())).max().unwrap_or(0);
            if len <= holdout || len - holdout <= min_len {
                return false;
            }
            if needs_positive {
                let train = &series.values()[..len - h];
                if train.iter().any(|&v| v <= 0.0) {
                    return false;
                }
            }
            true
        })
        .cloned()
        .collect()
}

/// Reads a corpus CSV from `path`.
pub fn load_corpus(path: impl AsRef<Path>, frequency: Frequency) -> Result<Vec<TimeSeries>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_corpus(file, frequency)
}

/// Parses corpus CSV data. A first row whose second field is not numeric is
/// treated as a header.
pub fn read_corpus<R: Read>(reader: R, frequency: Frequency) -> Result<Vec<TimeSeries>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(reader);

    let mut out = Vec::new();
    for (idx, record) in rdr.records().enumerate() {
        let row = idx + 1;
        let record = record?;
        if idx == 0 {
            let looks_like_header =
                record.get(1).map(|f| f.trim().parse::<f64>().is_err() && !f.trim().is_empty()).unwrap_or(false);
            if looks_like_header {
                continue;
            }
        }
        if record.len() == 1 && record.get(0).is_some_and(|f| f.trim().is_empty()) {
            // blank line
            continue;
        }
        let id = record.get(0).unwrap_or("").trim();
        if id.is_empty() {
            return Err(Error::MalformedRow { row, reason: "missing series id".into() });
        }
        if record.len() < 2 {
            return Err(Error::MalformedRow { row, reason: "no observations".into() });
        }
        let mut values = Vec::with_capacity(record.len() - 1);
        for field in record.iter().skip(1) {
            let field = field.trim();
            if field.is_empty() {
                return Err(Error::MalformedRow { row, reason: "blank field".into() });
            }
            let v: f64 =
                field.parse().map_err(|_| Error::MalformedRow { row, reason: format!("not a number: {field:?}") })?;
            if !v.is_finite() {
                return Err(Error::NonFinite { id: id.to_string() });
            }
            values.push(v);
        }
        out.push(TimeSeries::new(id, frequency, values)?);
    }
    if out.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(out)
}

/// Writes series in corpus CSV layout (no header).
pub fn write_corpus<W: Write>(writer: W, corpus: &[TimeSeries]) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().flexible(true).from_writer(writer);
    for series in corpus {
        let mut record = Vec::with_capacity(series.len() + 1);
        record.push(series.id().to_string());
        record.extend(series.values().iter().map(|v| format!("{v}")));
        wtr.write_record(&record)?;
    }
    wtr.flush().map_err(|e| Error::io("<corpus writer>", e))?;
    Ok(())
}

/// Writes series in corpus CSV layout to `path`.
pub fn save_corpus(path: impl AsRef<Path>, corpus: &[TimeSeries]) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_corpus(std::io::BufWriter::new(file), corpus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ets::model_pool;

    fn series(id: &str, values: Vec<f64>) -> TimeSeries {
        TimeSeries::new(id, Frequency::Yearly, values).unwrap()
    }

    #[test]
    fn parses_simple_row() {
        let c = read_corpus("Y1,5,10,15\n".as_bytes(), Frequency::Yearly).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].id(), "Y1");
        assert_eq!(c[0].values(), &[5.0, 10.0, 15.0]);
        assert_eq!(c[0].period(), 1);
    }

    #[test]
    fn skips_header() {
        let data = "id,v1,v2\nQ1,1,2,3\n";
        let c = read_corpus(data.as_bytes(), Frequency::Quarterly).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].period(), 4);
    }

    #[test]
    fn empty_file_is_error() {
        let err = read_corpus("".as_bytes(), Frequency::Yearly).unwrap_err();
        assert_eq!(err.to_string(), "empty corpus");
        let err = read_corpus("id,v1\n".as_bytes(), Frequency::Yearly).unwrap_err();
        assert!(matches!(err, Error::EmptyCorpus));
    }

    #[test]
    fn blank_field_names_row() {
        let err = read_corpus("Y1,1,2\nY2,1,,3\n".as_bytes(), Frequency::Yearly).unwrap_err();
        assert!(err.to_string().starts_with("malformed row 2"), "{err}");
        let err = read_corpus("Y1,1,2,\n".as_bytes(), Frequency::Yearly).unwrap_err();
        assert!(matches!(err, Error::MalformedRow { row: 1, .. }));
    }

    #[test]
    fn non_finite_names_series() {
        let err = read_corpus("Y1,1,2\nY7,1,NaN\n".as_bytes(), Frequency::Yearly).unwrap_err();
        assert!(matches!(err, Error::NonFinite { ref id } if id == "Y7"));
        assert!(err.to_string().contains("Y7"));
    }

    #[test]
    fn split_examples() {
        let s = series("a", (1..=10).map(f64::from).collect());
        let sp = split(&s, 3).unwrap();
        assert_eq!(sp.train.values(), &[1., 2., 3., 4., 5., 6., 7.]);
        assert_eq!(sp.test, vec![8., 9., 10.]);

        let s = series("b", vec![1.0; 6]);
        assert!(matches!(split(&s, 6), Err(Error::TooShort { len: 6, h: 6 })));

        let s = series("c", (1..=20).map(f64::from).collect());
        assert_eq!(split(&s, 6).unwrap().train.len(), 14);
    }

    #[test]
    fn filter_by_min_length() {
        let pool = model_pool(Frequency::Monthly);
        let max_min = pool.iter().map(|s| s.min_fit_length(12)).max().unwrap();
        assert_eq!(max_min, 20);
        let corpus: Vec<_> = (0..3)
            .map(|i| {
                TimeSeries::new(format!("M{i}"), Frequency::Monthly, (0..50).map(|t| 100.0 + t as f64).collect())
                    .unwrap()
            })
            .collect();
        let kept = filter_fittable(&corpus, &pool, 12, true);
        assert_eq!(kept.len() == 3, 50 - 24 > max_min);
        let kept = filter_fittable(&corpus, &pool, 12, false);
        assert_eq!(kept.len() == 3, 50 - 12 > max_min);
    }

    #[test]
    fn filter_drops_nonpositive_for_multiplicative() {
        let pool = model_pool(Frequency::Yearly);
        let mut vals: Vec<f64> = (1..=30).map(f64::from).collect();
        vals[3] = 0.0;
        let corpus = vec![series("z", vals.clone()), series("ok", (1..=30).map(f64::from).collect())];
        let kept = filter_fittable(&corpus, &pool, 6, false);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].id(), "ok");

        let additive: Vec<_> = pool.iter().copied().filter(|s| !s.requires_positive()).collect();
        assert_eq!(filter_fittable(&corpus, &additive, 6, false).len(), 2);
    }

    #[test]
    fn filter_empty() {
        assert!(filter_fittable(&[], &model_pool(Frequency::Yearly), 6, false).is_empty());
    }
}
