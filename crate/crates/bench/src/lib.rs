//! Fixtures shared by the benchmarks.

use baserate_core::baserate::{build_table, ContingencyTable, TableMeta};
use baserate_core::ets::{model_pool, FitConfig};
use baserate_core::synthetic::{mixture_corpus, MixtureConfig};
use baserate_core::{Frequency, Selection, TimeSeries};

pub const HORIZON: usize = 6;

/// Reproducible yearly corpus of `n` series.
pub fn yearly_corpus(n: usize) -> Vec<TimeSeries> {
    mixture_corpus("b", n, 7, &MixtureConfig::default())
}

/// Table built from a 100-series yearly reference corpus.
pub fn yearly_table() -> ContingencyTable {
    build_table(&yearly_corpus(100), &model_pool(Frequency::Yearly), Selection::Bic, HORIZON, &FitConfig::default())
        .expect("fixture table")
}

/// A 6×6 table with every cell populated.
pub fn dense_table() -> ContingencyTable {
    let counts = (0..6).map(|i| (0..6).map(|j| 1 + ((i * 7 + j * 3) % 11) as u64).collect()).collect();
    let models = model_pool(Frequency::Yearly).iter().map(|s| s.acronym()).collect();
    ContingencyTable::from_counts(models, counts, TableMeta::new(Frequency::Yearly, Selection::Bic, HORIZON))
        .expect("fixture table")
}
