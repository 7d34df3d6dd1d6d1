use crate::baserate::ContingencyTable;
use crate::combine::{precision_weights, sensitivity_weights, WeightScheme};
use crate::error::{Error, Result};

/// Per-model precision, sensitivity and F-score of a selection scheme on a
/// contingency table, with unweighted (macro) averages over models.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelDiagnostics {
    pub models: Vec<String>,
    pub precision: Vec<f64>,
    pub sensitivity: Vec<f64>,
    pub f_score: Vec<f64>,
    pub macro_precision: f64,
    pub macro_sensitivity: f64,
    /// Mean of per-model F-scores. Not the F-score of the macro precision
    /// and sensitivity.
    pub macro_f: f64,
}

/// Joint (selected, correct) probabilities after remapping each row's
/// selection through `scheme`: the mass of row `i` moves to the model with
/// the largest `scheme` weight for criterion selection `i`.
pub fn confusion_matrix(table: &ContingencyTable, scheme: WeightScheme) -> Result<Vec<Vec<f64>>> {
    let k = table.k();
    let all = vec![true; k];
    let mut out = vec![vec![0.0; k]; k];
    for i in 0..k {
        let target = match scheme {
            WeightScheme::Criterion => i,
            WeightScheme::Precision => precision_weights(table, i, &all).map_or(i, |w| w.argmax()),
            WeightScheme::Sensitivity => sensitivity_weights(table, i, &all).map_or(i, |w| w.argmax()),
            other => {
                return Err(Error::InvalidArgument(format!(
                    "diagnostics need a criterion, precision or sensitivity scheme, got {other:?}"
                )))
            }
        };
        for (j, cell) in out[target].iter_mut().enumerate() {
            *cell += table.prob(i, j);
        }
    }
    Ok(out)
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Precision `TP/(TP+FP)`, sensitivity `TP/(TP+FN)` and
/// `F = TP/(TP + (FP+FN)/2)` per model; zero where undefined.
pub fn model_diagnostics(table: &ContingencyTable, scheme: WeightScheme) -> Result<ModelDiagnostics> {
    let m = confusion_matrix(table, scheme)?;
    let k = table.k();
    let mut precision = Vec::with_capacity(k);
    let mut sensitivity = Vec::with_capacity(k);
    let mut f_score = Vec::with_capacity(k);
    for (c, row) in m.iter().enumerate() {
        let tp = row[c];
        let selected: f64 = row.iter().sum();
        let correct: f64 = m.iter().map(|r| r[c]).sum();
        let fp = selected - tp;
        let fn_ = correct - tp;
        precision.push(ratio(tp, tp + fp));
        sensitivity.push(ratio(tp, tp + fn_));
        f_score.push(ratio(tp, tp + 0.5 * (fp + fn_)));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    Ok(ModelDiagnostics {
        models: table.models().to_vec(),
        macro_precision: mean(&precision),
        macro_sensitivity: mean(&sensitivity),
        macro_f: mean(&f_score),
        precision,
        sensitivity,
        f_score,
    })
}
