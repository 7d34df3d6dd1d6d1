//! Contingency tables of (selected model, best out-of-sample model) over a
//! reference corpus.
//!
//! For each reference series the pool is fitted to the training sample; the
//! model minimizing the selection criterion is the *selected* model `i*` and
//! the model minimizing the evaluation criterion on the test sample is the
//! *correct* model `j*`. The table counts each `(i*, j*)` pair; dividing by
//! the number of series gives the joint probabilities `w[i][j]`.

use std::path::Path;

use log::{debug, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{split, Frequency, TimeSeries};
use crate::criteria::{evaluation_mae, information_criterion, selection_validation_with, Selection};
use crate::error::{Error, Result};
use crate::ets::{self, EtsSpec, FitConfig};
use crate::stats::argmin;

pub const SCHEMA_VERSION: u32 = 1;

/// Tolerance on the grand total of a table given as rounded probabilities.
pub const ROUNDED_SUM_TOLERANCE: f64 = 5e-3;

/// A K×K table of joint selection/correctness frequencies. Rows index the
/// selected model, columns the correct model.
#[derive(Debug, Clone, PartialEq)]
pub struct ContingencyTable {
    models: Vec<String>,
    /// Counts. Integral for tables built from data; `p * n_series` for
    /// tables constructed from published probabilities.
    counts: Vec<Vec<f64>>,
    n_series: usize,
    pub frequency: Frequency,
    pub selection_criterion: String,
    pub evaluation_criterion: String,
    pub horizon: usize,
    /// Set when built from rounded probabilities rather than counts.
    rounded: bool,
}

/// Descriptive fields shared by every table constructor.
#[derive(Debug, Clone, PartialEq)]
pub struct TableMeta {
    pub frequency: Frequency,
    pub selection_criterion: String,
    pub evaluation_criterion: String,
    pub horizon: usize,
}

impl TableMeta {
    pub fn new(frequency: Frequency, selection: Selection, horizon: usize) -> Self {
        Self {
            frequency,
            selection_criterion: selection.as_str().to_string(),
            evaluation_criterion: "mae".to_string(),
            horizon,
        }
    }
}

impl ContingencyTable {
    /// Builds a table from integer counts.
    pub fn from_counts(models: Vec<String>, counts: Vec<Vec<u64>>, meta: TableMeta) -> Result<Self> {
        let k = models.len();
        check_shape(k, &counts)?;
        let n: u64 = counts.iter().flatten().sum();
        if n == 0 {
            return Err(Error::InvalidTable("table has no observations".into()));
        }
        Ok(Self {
            models,
            counts: counts.into_iter().map(|r| r.into_iter().map(|c| c as f64).collect()).collect(),
            n_series: n as usize,
            frequency: meta.frequency,
            selection_criterion: meta.selection_criterion,
            evaluation_criterion: meta.evaluation_criterion,
            horizon: meta.horizon,
            rounded: false,
        })
    }

    /// Builds a table from a matrix of (possibly rounded) joint
    /// probabilities, as printed in published results. The grand total must
    /// be within [`ROUNDED_SUM_TOLERANCE`] of one.
    pub fn from_matrix(models: Vec<String>, matrix: Vec<Vec<f64>>, n_series: usize, meta: TableMeta) -> Result<Self> {
        let k = models.len();
        check_shape(k, &matrix)?;
        if n_series == 0 {
            return Err(Error::InvalidTable("n_series must be positive".into()));
        }
        if matrix.iter().flatten().any(|&p| !(p.is_finite() && p >= 0.0)) {
            return Err(Error::InvalidTable("entries must be finite and non-negative".into()));
        }
        let total: f64 = matrix.iter().flatten().sum();
        if (total - 1.0).abs() > ROUNDED_SUM_TOLERANCE {
            return Err(Error::InvalidTable(format!("entries sum to {total}, expected 1")));
        }
        let n = n_series as f64;
        Ok(Self {
            models,
            counts: matrix.into_iter().map(|r| r.into_iter().map(|p| p * n).collect()).collect(),
            n_series,
            frequency: meta.frequency,
            selection_criterion: meta.selection_criterion,
            evaluation_criterion: meta.evaluation_criterion,
            horizon: meta.horizon,
            rounded: true,
        })
    }

    pub fn models(&self) -> &[String] {
        &self.models
    }

    pub fn k(&self) -> usize {
        self.models.len()
    }

    pub fn n_series(&self) -> usize {
        self.n_series
    }

    pub fn is_rounded(&self) -> bool {
        self.rounded
    }

    pub fn counts(&self) -> &[Vec<f64>] {
        &self.counts
    }

    /// Joint probability `w[i][j]` of selecting `i` while `j` is correct.
    pub fn prob(&self, i: usize, j: usize) -> f64 {
        self.counts[i][j] / self.n_series as f64
    }

    /// The probability matrix `W`.
    pub fn matrix(&self) -> Vec<Vec<f64>> {
        (0..self.k()).map(|i| (0..self.k()).map(|j| self.prob(i, j)).collect()).collect()
    }

    /// Row totals, `p(S_i)`.
    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.k()).map(|i| (0..self.k()).map(|j| self.prob(i, j)).sum()).collect()
    }

    /// Column totals, `p(C_j)`.
    pub fn col_sums(&self) -> Vec<f64> {
        (0..self.k()).map(|j| (0..self.k()).map(|i| self.prob(i, j)).sum()).collect()
    }

    pub fn model_index(&self, name: &str) -> Option<usize> {
        self.models.iter().position(|m| m == name)
    }

    /// Errors unless the table's models are exactly `pool`, in order.
    pub fn check_pool(&self, pool: &[EtsSpec]) -> Result<()> {
        let requested: Vec<String> = pool.iter().map(|s| s.acronym()).collect();
        if requested != self.models {
            return Err(Error::PoolMismatch { table: self.models.clone(), requested });
        }
        Ok(())
    }

    fn to_file(&self) -> Result<TableFile> {
        if self.rounded {
            return Err(Error::InvalidTable(
                "table was built from rounded probabilities and has no integer counts".into(),
            ));
        }
        Ok(TableFile {
            schema_version: SCHEMA_VERSION,
            models: self.models.clone(),
            counts: self.counts.iter().map(|r| r.iter().map(|&c| c as i64).collect()).collect(),
            n_series: self.n_series as u64,
            frequency: self.frequency,
            selection_criterion: self.selection_criterion.clone(),
            evaluation_criterion: self.evaluation_criterion.clone(),
            horizon: self.horizon,
        })
    }

    fn from_file(file: TableFile) -> Result<Self> {
        if file.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidTable(format!(
                "schema version {} (expected {SCHEMA_VERSION})",
                file.schema_version
            )));
        }
        if file.counts.iter().flatten().any(|&c| c < 0) {
            return Err(Error::InvalidTable("negative count".into()));
        }
        let counts: Vec<Vec<u64>> =
            file.counts.into_iter().map(|r| r.into_iter().map(|c| c as u64).collect()).collect();
        let total: u64 = counts.iter().flatten().sum();
        if total != file.n_series {
            return Err(Error::InvalidTable(format!("counts sum to {total} but n_series is {}", file.n_series)));
        }
        Self::from_counts(
            file.models,
            counts,
            TableMeta {
                frequency: file.frequency,
                selection_criterion: file.selection_criterion,
                evaluation_criterion: file.evaluation_criterion,
                horizon: file.horizon,
            },
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file()?)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: TableFile = serde_json::from_str(s).map_err(|e| Error::InvalidTable(e.to_string()))?;
        Self::from_file(file)
    }
}

fn check_shape<T>(k: usize, rows: &[Vec<T>]) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidTable("no models".into()));
    }
    if rows.len() != k || rows.iter().any(|r| r.len() != k) {
        return Err(Error::InvalidTable(format!("matrix is not {k}x{k}")));
    }
    Ok(())
}

/// On-disk layout. Counts are stored, probabilities never are.
#[derive(Debug, Serialize, Deserialize)]
struct TableFile {
    schema_version: u32,
    models: Vec<String>,
    counts: Vec<Vec<i64>>,
    n_series: u64,
    frequency: Frequency,
    selection_criterion: String,
    evaluation_criterion: String,
    horizon: usize,
}

/// Writes a table as JSON.
pub fn save_table(table: &ContingencyTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut json = table.to_json()?;
    json.push('\n');
    std::fs::write(path, json).map_err(|e| Error::io(path, e))
}

/// Reads and validates a table.
pub fn load_table(path: impl AsRef<Path>) -> Result<ContingencyTable> {
    let path = path.as_ref();
    let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ContingencyTable::from_json(&s)
}

/// Reads a table and checks it was built for `pool`.
pub fn load_table_for_pool(path: impl AsRef<Path>, pool: &[EtsSpec]) -> Result<ContingencyTable> {
    let table = load_table(path)?;
    table.check_pool(pool)?;
    Ok(table)
}

/// Constructs a table from published probabilities; see
/// [`ContingencyTable::from_matrix`].
pub fn table_from_matrix(
    models: Vec<String>,
    matrix: Vec<Vec<f64>>,
    n_series: usize,
    meta: TableMeta,
) -> Result<ContingencyTable> {
    ContingencyTable::from_matrix(models, matrix, n_series, meta)
}

/// Selection and evaluation criterion values of one reference series.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesScores {
    pub selection: Vec<Option<f64>>,
    pub evaluation: Vec<Option<f64>>,
}

impl SeriesScores {
    /// `(i*, j*)` over models with both values available, or `None` if no
    /// model is available.
    pub fn outcome(&self) -> Option<(usize, usize)> {
        let avail = |i: usize| self.selection[i].is_some() && self.evaluation[i].is_some();
        let k = self.selection.len();
        let i = argmin((0..k).map(|i| self.selection[i].filter(|_| avail(i))))?;
        let j = argmin((0..k).map(|j| self.evaluation[j].filter(|_| avail(j))))?;
        Some((i, j))
    }
}

/// Produces criterion values for one reference series.
pub trait Scorer: Sync {
    fn num_models(&self) -> usize;
    fn score(&self, series: &TimeSeries, h: usize) -> Result<SeriesScores>;
}

/// Scores a series with the ETS pool: fit on the first `T - h`
/// observations, select by `selection`, evaluate by MAE on the last `h`.
pub struct EtsScorer {
    pub pool: Vec<EtsSpec>,
    pub selection: Selection,
    pub config: FitConfig,
}

impl EtsScorer {
    pub fn new(pool: Vec<EtsSpec>, selection: Selection) -> Self {
        Self { pool, selection, config: FitConfig::default() }
    }
}

impl Scorer for EtsScorer {
    fn num_models(&self) -> usize {
        self.pool.len()
    }

    fn score(&self, series: &TimeSeries, h: usize) -> Result<SeriesScores> {
        let sp = split(series, h)?;
        let fits = ets::fit_pool(&self.pool, &sp.train, &self.config);
        let evaluation = fits
            .iter()
            .map(|f| match f {
                Ok(f) => evaluation_mae(&sp.test, &ets::point_forecast(f, h)).ok().filter(|v| v.is_finite()),
                Err(_) => None,
            })
            .collect();
        let selection = match self.selection {
            Selection::Validation => selection_validation_with(&sp.train, &self.pool, h, &self.config)?,
            ic => information_criterion(series.id(), &fits, ic)?,
        }
        .into_iter()
        .map(|v| v.value)
        .collect();
        Ok(SeriesScores { selection, evaluation })
    }
}

/// Counts `(selected, correct)` outcomes into a K×K matrix.
pub fn tabulate(k: usize, outcomes: impl IntoIterator<Item = (usize, usize)>) -> Vec<Vec<u64>> {
    let mut counts = vec![vec![0u64; k]; k];
    for (i, j) in outcomes {
        counts[i][j] += 1;
    }
    counts
}

/// Populates a contingency table from `corpus` with an arbitrary scorer.
///
/// Series are scored in parallel; the table is a reduction over the
/// multiset of outcomes and does not depend on scheduling. Series that
/// cannot be scored, or where no model is available, are skipped and do not
/// count towards `n_series`.
pub fn build_table_with<S: Scorer>(
    corpus: &[TimeSeries],
    models: Vec<String>,
    scorer: &S,
    h: usize,
    meta: TableMeta,
) -> Result<ContingencyTable> {
    let k = models.len();
    if k != scorer.num_models() {
        return Err(Error::InvalidArgument(format!(
            "{k} model names for a scorer with {} models",
            scorer.num_models()
        )));
    }
    let outcomes: Vec<Option<(usize, usize)>> = corpus
        .par_iter()
        .map(|series| match scorer.score(series, h) {
            Ok(scores) => {
                let outcome = scores.outcome();
                if outcome.is_none() {
                    warn!("skipping series {}: no model available", series.id());
                }
                outcome
            }
            Err(e) => {
                warn!("skipping series {}: {e}", series.id());
                None
            }
        })
        .collect();
    let used = outcomes.iter().flatten().count();
    debug!("table: {used} of {} series used", corpus.len());
    if used == 0 {
        return Err(Error::NoUsableSeries);
    }
    ContingencyTable::from_counts(models, tabulate(k, outcomes.into_iter().flatten()), meta)
}

/// Populates the contingency table for the ETS pool. The corpus should
/// already be restricted with [`crate::corpus::filter_fittable`].
pub fn build_table(
    corpus: &[TimeSeries],
    pool: &[EtsSpec],
    selection: Selection,
    h: usize,
    config: &FitConfig,
) -> Result<ContingencyTable> {
    let frequency = corpus.first().ok_or(Error::NoUsableSeries)?.frequency();
    let scorer = EtsScorer { pool: pool.to_vec(), selection, config: config.clone() };
    build_table_with(
        corpus,
        pool.iter().map(|s| s.acronym()).collect(),
        &scorer,
        h,
        TableMeta::new(frequency, selection, h),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta() -> TableMeta {
        TableMeta::new(Frequency::Yearly, Selection::Bic, 6)
    }

    fn ab() -> Vec<String> {
        vec!["A".into(), "B".into()]
    }

    /// Replays fixed scores keyed by series id.
    struct Replay(Vec<(String, SeriesScores)>);

    impl Scorer for Replay {
        fn num_models(&self) -> usize {
            self.0[0].1.selection.len()
        }
        fn score(&self, series: &TimeSeries, _h: usize) -> Result<SeriesScores> {
            self.0.iter().find(|(id, _)| id == series.id()).map(|(_, s)| s.clone()).ok_or(Error::NoCandidates)
        }
    }

    fn scores(s: &[f64], c: &[f64]) -> SeriesScores {
        SeriesScores {
            selection: s.iter().map(|&v| Some(v)).collect(),
            evaluation: c.iter().map(|&v| Some(v)).collect(),
        }
    }

    fn dummy(id: &str) -> TimeSeries {
        TimeSeries::new(id, Frequency::Yearly, vec![1.0, 2.0]).unwrap()
    }

    #[test]
    fn hand_traced_three_series() {
        let replay = Replay(vec![
            ("s1".into(), scores(&[1.0, 2.0], &[1.0, 2.0])),
            ("s2".into(), scores(&[1.0, 2.0], &[2.0, 1.0])),
            ("s3".into(), scores(&[2.0, 1.0], &[2.0, 1.0])),
        ]);
        let corpus = vec![dummy("s1"), dummy("s2"), dummy("s3")];
        let t = build_table_with(&corpus, ab(), &replay, 1, meta()).unwrap();
        let third = 1.0 / 3.0;
        assert_eq!(t.matrix(), vec![vec![third, third], vec![0.0, third]]);
        assert_eq!(t.n_series(), 3);
        assert!((t.row_sums()[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((t.col_sums()[1] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn unavailable_series_skipped() {
        let replay = Replay(vec![
            ("s1".into(), scores(&[1.0, 2.0], &[1.0, 2.0])),
            ("s2".into(), SeriesScores { selection: vec![None, None], evaluation: vec![Some(1.0), Some(2.0)] }),
            ("s3".into(), SeriesScores { selection: vec![Some(5.0), None], evaluation: vec![Some(2.0), Some(1.0)] }),
        ]);
        let corpus = vec![dummy("s1"), dummy("s2"), dummy("s3"), dummy("missing")];
        let t = build_table_with(&corpus, ab(), &replay, 1, meta()).unwrap();
        assert_eq!(t.n_series(), 2);
        // s3: only model A is available for both criteria
        assert_eq!(t.counts()[0][0], 2.0);
    }

    #[test]
    fn empty_after_skips() {
        let replay =
            Replay(vec![("s1".into(), SeriesScores { selection: vec![None, None], evaluation: vec![None, None] })]);
        let err = build_table_with(&[dummy("s1")], ab(), &replay, 1, meta()).unwrap_err();
        assert!(matches!(err, Error::NoUsableSeries));
        assert_eq!(err.to_string(), "no usable series");
    }

    #[test]
    fn json_roundtrip() {
        let t = ContingencyTable::from_counts(ab(), vec![vec![1, 1], vec![0, 1]], meta()).unwrap();
        let back = ContingencyTable::from_json(&t.to_json().unwrap()).unwrap();
        assert_eq!(back, t);
        for (a, b) in back.matrix().iter().flatten().zip(t.matrix().iter().flatten()) {
            assert!((a - b).abs() <= 1e-15);
        }
    }

    #[test]
    fn rejects_invalid_files() {
        let good =
            ContingencyTable::from_counts(ab(), vec![vec![1, 1], vec![0, 1]], meta()).unwrap().to_json().unwrap();
        let negative = good.replacen("\n      0,", "\n      -1,", 1);
        assert_ne!(negative, good);
        let err = ContingencyTable::from_json(&negative).unwrap_err();
        assert!(err.to_string().starts_with("invalid table"), "{err}");

        let bad_version = good.replace("\"schema_version\": 1", "\"schema_version\": 2");
        assert!(matches!(ContingencyTable::from_json(&bad_version), Err(Error::InvalidTable(_))));

        let bad_n = good.replace("\"n_series\": 3", "\"n_series\": 4");
        assert!(matches!(ContingencyTable::from_json(&bad_n), Err(Error::InvalidTable(_))));
    }

    #[test]
    fn pool_mismatch() {
        let pool = crate::ets::model_pool(Frequency::Yearly);
        let t = ContingencyTable::from_counts(ab(), vec![vec![1, 1], vec![0, 1]], meta()).unwrap();
        assert!(matches!(t.check_pool(&pool), Err(Error::PoolMismatch { .. })));
    }

    #[test]
    fn from_matrix_tolerance() {
        let ok = ContingencyTable::from_matrix(ab(), vec![vec![0.5, 0.0], vec![0.0, 0.502]], 100, meta());
        assert!(ok.unwrap().is_rounded());
        let bad = ContingencyTable::from_matrix(ab(), vec![vec![0.5, 0.0], vec![0.0, 0.51]], 100, meta());
        assert!(matches!(bad, Err(Error::InvalidTable(_))));
        let diag = ContingencyTable::from_matrix(ab(), vec![vec![0.5, 0.0], vec![0.0, 0.5]], 10, meta()).unwrap();
        assert_eq!(diag.prob(1, 1), 0.5);
        assert!(diag.to_json().is_err());
    }
}
