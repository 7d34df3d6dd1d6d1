use std::collections::HashMap;

use baserate_core::baserate::{self, load_table_for_pool};
use baserate_core::combine::Mode;
use baserate_core::corpus::{filter_fittable, load_corpus, save_corpus, split as split_series};
use baserate_core::criteria::evaluation_mae;
use baserate_core::ets::{model_pool, FitConfig};
use baserate_core::metrics::{friedman_nemenyi, mase, msis, rank_thirds, seasonal_naive_scale};
use baserate_core::pipeline::{forecast_corpus, OnlineConfig};
use baserate_core::{Error, TimeSeries};
use log::{info, warn};

use crate::args::{BuildTableArgs, EvaluateArgs, ForecastArgs, SplitArgs};
use crate::records::{
    read_rows, write_rows, ForecastRow, MetricsRow, ModelForecastRow, SelectionRow, SignificanceRow, ThirdsRow,
};
use crate::CliError;

type Result<T> = std::result::Result<T, CliError>;

fn user(msg: impl Into<String>) -> CliError {
    CliError::User(msg.into())
}

fn check_horizon(h: usize) -> Result<()> {
    if h == 0 {
        return Err(user("horizon must be at least 1"));
    }
    Ok(())
}

pub fn split(args: &SplitArgs) -> Result<()> {
    let h = args.series.horizon();
    check_horizon(h)?;
    let corpus = load_corpus(&args.corpus, args.series.frequency)?;
    let mut train = Vec::with_capacity(corpus.len());
    let mut test = Vec::with_capacity(corpus.len());
    for series in &corpus {
        match split_series(series, h) {
            Ok(sp) => {
                train.push(TimeSeries::new(series.id(), series.frequency(), sp.train.values().to_vec())?);
                test.push(TimeSeries::new(series.id(), series.frequency(), sp.test)?);
            }
            Err(e) => warn!("skipping series {}: {e}", series.id()),
        }
    }
    if train.is_empty() {
        return Err(Error::NoUsableSeries.into());
    }
    save_corpus(&args.train, &train)?;
    save_corpus(&args.test, &test)?;
    eprintln!("split {} series ({} skipped)", train.len(), corpus.len() - train.len());
    Ok(())
}

pub fn build_table(args: &BuildTableArgs) -> Result<()> {
    let h = args.series.horizon();
    check_horizon(h)?;
    let freq = args.series.frequency;
    let corpus = match load_corpus(&args.corpus, freq) {
        Err(Error::EmptyCorpus) => return Err(Error::NoUsableSeries.into()),
        other => other?,
    };
    let pool = model_pool(freq);
    let retained = filter_fittable(&corpus, &pool, h, args.criterion.needs_double_split());
    eprintln!(
        "retained {} of {} series ({} skipped as too short or non-positive)",
        retained.len(),
        corpus.len(),
        corpus.len() - retained.len()
    );
    if retained.is_empty() {
        return Err(Error::NoUsableSeries.into());
    }
    let table = baserate::build_table(&retained, &pool, args.criterion, h, &FitConfig::default())?;
    baserate::save_table(&table, &args.output)?;
    eprintln!("table built from {} series", table.n_series());
    Ok(())
}

pub fn forecast(args: &ForecastArgs) -> Result<()> {
    let h = args.series.horizon();
    check_horizon(h)?;
    if !(args.level > 0.0 && args.level < 1.0) {
        return Err(user(format!("level {} outside (0, 1)", args.level)));
    }
    if args.num_paths == 0 {
        return Err(user("num-paths must be at least 1"));
    }
    if !(args.iqr_multiplier >= 0.0 && args.iqr_multiplier.is_finite()) {
        return Err(user("iqr-multiplier must be a non-negative number"));
    }
    let schemes = args.parsed_schemes()?;
    if schemes.is_empty() {
        return Err(user("no schemes requested"));
    }
    let freq = args.series.frequency;
    let pool = model_pool(freq);
    let table = match &args.table {
        Some(path) => Some(load_table_for_pool(path, &pool)?),
        None if schemes.iter().any(|s| s.needs_table()) => return Err(user("table required")),
        None => None,
    };
    if let Some(t) = &table {
        if t.horizon != h {
            warn!("table was built with horizon {}, forecasting with {h}", t.horizon);
        }
        if t.selection_criterion != args.criterion.as_str() {
            warn!("table was built with criterion {}, forecasting with {}", t.selection_criterion, args.criterion);
        }
    }
    let corpus = load_corpus(&args.corpus, freq)?;

    let mut config = OnlineConfig::new(pool.clone(), args.criterion, h);
    config.level = args.level;
    config.num_paths = args.num_paths;
    config.seed = args.seed;
    config.iqr_multiplier = args.iqr_multiplier;
    config.intervals = !args.no_intervals;

    let results = forecast_corpus(&corpus, &schemes, table.as_ref(), &config);

    let mut rows = Vec::new();
    let mut model_rows = Vec::new();
    let mut selection_rows = Vec::new();
    let mut done = 0usize;
    for (series, result) in corpus.iter().zip(results) {
        let out = match result {
            Ok(out) => out,
            Err(e) => {
                warn!("skipping series {}: {e}", series.id());
                continue;
            }
        };
        done += 1;
        for sf in &out.schemes {
            let fc = &sf.forecast;
            for j in 0..fc.horizon() {
                rows.push(ForecastRow {
                    series_id: out.series_id.clone(),
                    scheme: sf.scheme.to_string(),
                    step: j + 1,
                    point: fc.point[j],
                    lower: fc.lower[j],
                    upper: fc.upper[j],
                });
            }
            if sf.scheme.mode() == Mode::Select {
                selection_rows.push(SelectionRow {
                    series_id: out.series_id.clone(),
                    scheme: sf.scheme.to_string(),
                    model: pool[sf.selected_model()].acronym(),
                });
            }
        }
        for (spec, fc) in pool.iter().zip(&out.models) {
            let Some(fc) = fc else { continue };
            for j in 0..fc.horizon() {
                model_rows.push(ModelForecastRow {
                    series_id: out.series_id.clone(),
                    model: spec.acronym(),
                    step: j + 1,
                    point: fc.point[j],
                    lower: fc.lower[j],
                    upper: fc.upper[j],
                });
            }
        }
    }
    if done == 0 {
        return Err(Error::NoUsableSeries.into());
    }
    info!("forecast {done} of {} series", corpus.len());

    write_rows(&args.output, &["series_id", "scheme", "step", "point", "lower", "upper"], &rows)?;
    if let Some(path) = &args.model_output {
        write_rows(path, &["series_id", "model", "step", "point", "lower", "upper"], &model_rows)?;
    }
    if let Some(path) = &args.selections {
        write_rows(path, &["series_id", "scheme", "model"], &selection_rows)?;
    }
    eprintln!("forecast {done} series ({} skipped)", corpus.len() - done);
    Ok(())
}

/// A scheme's forecast of one series, assembled from CSV rows.
#[derive(Debug, Default, Clone)]
struct Bounds {
    point: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Bounds {
    fn push(&mut self, what: &str, step: usize, point: f64, lower: f64, upper: f64) -> Result<()> {
        if step != self.point.len() + 1 {
            return Err(user(format!("{what}: expected step {}, found {step}", self.point.len() + 1)));
        }
        self.point.push(point);
        self.lower.push(lower);
        self.upper.push(upper);
        Ok(())
    }
}

/// Per series, keyed forecasts in file order.
type Grouped = Vec<(String, Vec<(String, Bounds)>)>;

/// Groups rows by series (first-appearance order), then by key within each
/// series (first-appearance order).
fn group<R>(rows: Vec<R>, fields: impl Fn(&R) -> (&str, &str, usize, f64, f64, f64)) -> Result<Grouped> {
    let mut out: Grouped = Vec::new();
    let mut series_pos: HashMap<String, usize> = HashMap::new();
    for row in &rows {
        let (id, key, step, point, lower, upper) = fields(row);
        let pos = *series_pos.entry(id.to_string()).or_insert_with(|| {
            out.push((id.to_string(), Vec::new()));
            out.len() - 1
        });
        let entries = &mut out[pos].1;
        let idx = match entries.iter().position(|(k, _)| k == key) {
            Some(i) => i,
            None => {
                entries.push((key.to_string(), Bounds::default()));
                entries.len() - 1
            }
        };
        entries[idx].1.push(&format!("series {id}, {key}"), step, point, lower, upper)?;
    }
    Ok(out)
}

pub fn evaluate(args: &EvaluateArgs) -> Result<()> {
    let freq = args.frequency;
    let period = freq.period();
    let by_id = |corpus: Vec<TimeSeries>| -> HashMap<String, TimeSeries> {
        corpus.into_iter().map(|s| (s.id().to_string(), s)).collect()
    };
    let insample = by_id(load_corpus(&args.insample, freq)?);
    let actuals = by_id(load_corpus(&args.actuals, freq)?);

    let forecasts = group(read_rows::<ForecastRow>(&args.forecasts)?, |r| {
        (&r.series_id, &r.scheme, r.step, r.point, r.lower, r.upper)
    })?;
    if forecasts.is_empty() {
        return Err(user(format!("{} holds no forecasts", args.forecasts.display())));
    }
    let schemes: Vec<String> = forecasts[0].1.iter().map(|(s, _)| s.clone()).collect();

    // Per included series: (MASE, MSIS) for every scheme, in `schemes` order.
    let mut scores: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    for (id, entries) in &forecasts {
        let found: Vec<&String> = entries.iter().map(|(s, _)| s).collect();
        if found.len() != schemes.len() || found.iter().zip(&schemes).any(|(a, b)| *a != b) {
            return Err(user(format!("series {id}: schemes {found:?} differ from {schemes:?}")));
        }
        let actual = actuals.get(id).ok_or_else(|| user(format!("series {id} in forecasts has no actuals")))?;
        let history =
            insample.get(id).ok_or_else(|| user(format!("series {id} in forecasts has no in-sample data")))?;
        match seasonal_naive_scale(history.values(), period) {
            Ok(_) => {}
            Err(e @ (Error::UndefinedScale | Error::TooShort { .. })) => {
                warn!("excluding series {id} from all schemes: {e}");
                continue;
            }
            Err(e) => return Err(e.into()),
        }
        let mut row = (Vec::with_capacity(schemes.len()), Vec::with_capacity(schemes.len()));
        for (scheme, b) in entries {
            if b.point.len() != actual.len() {
                return Err(user(format!(
                    "series {id}, {scheme}: {} forecast steps vs {} actuals",
                    b.point.len(),
                    actual.len()
                )));
            }
            row.0.push(mase(history.values(), period, actual.values(), &b.point)?);
            row.1.push(msis(history.values(), period, actual.values(), &b.lower, &b.upper, args.msis_alpha)?);
        }
        scores.push(row);
    }
    let n = scores.len();
    if n == 0 {
        return Err(Error::NoUsableSeries.into());
    }

    let metrics: Vec<MetricsRow> = schemes
        .iter()
        .enumerate()
        .map(|(m, scheme)| MetricsRow {
            scheme: scheme.clone(),
            frequency: freq.to_string(),
            criterion: args.criterion.clone(),
            mase: scores.iter().map(|r| r.0[m]).sum::<f64>() / n as f64,
            msis: scores.iter().map(|r| r.1[m]).sum::<f64>() / n as f64,
            n,
        })
        .collect();
    write_rows(&args.metrics, &["scheme", "frequency", "criterion", "mase", "msis", "n"], &metrics)?;

    let significance_headers = ["scheme_a", "scheme_b", "meanrank_a", "meanrank_b", "cd", "significant"];
    if schemes.len() >= 2 && n >= 2 {
        let mase_matrix: Vec<Vec<f64>> = scores.iter().map(|r| r.0.clone()).collect();
        let test = friedman_nemenyi(&mase_matrix, &schemes, args.significance_alpha)?;
        info!("Friedman statistic {:.4} over {n} series", test.statistic);
        let rows: Vec<SignificanceRow> = test
            .pairs
            .iter()
            .map(|p| SignificanceRow {
                scheme_a: p.a.clone(),
                scheme_b: p.b.clone(),
                meanrank_a: p.rank_a,
                meanrank_b: p.rank_b,
                cd: test.critical_difference,
                significant: p.significant,
            })
            .collect();
        write_rows(&args.significance, &significance_headers, &rows)?;
    } else {
        warn!("significance test needs at least two schemes and two series");
        write_rows::<SignificanceRow>(&args.significance, &significance_headers, &[])?;
    }

    if let (Some(models_path), Some(sel_path), Some(out_path)) =
        (&args.model_forecasts, &args.selections, &args.rank_thirds)
    {
        let thirds = thirds_from_files(args, models_path, sel_path, &actuals, &forecasts)?;
        write_rows(out_path, &["scheme", "top", "middle", "bottom"], &thirds)?;
    }
    eprintln!("evaluated {} schemes on {n} series", schemes.len());
    Ok(())
}

fn thirds_from_files(
    args: &EvaluateArgs,
    models_path: &std::path::Path,
    selections_path: &std::path::Path,
    actuals: &HashMap<String, TimeSeries>,
    forecasts: &Grouped,
) -> Result<Vec<ThirdsRow>> {
    let pool: Vec<String> = model_pool(args.frequency).iter().map(|s| s.acronym()).collect();
    let model_fc = group(read_rows::<ModelForecastRow>(models_path)?, |r| {
        (&r.series_id, &r.model, r.step, r.point, r.lower, r.upper)
    })?;
    let model_fc: HashMap<String, Vec<(String, Bounds)>> = model_fc.into_iter().collect();

    // MAE of every pool model; models without forecasts rank last.
    let mut mae = Vec::with_capacity(forecasts.len());
    for (id, _) in forecasts {
        let actual = &actuals[id];
        let entries = model_fc.get(id).ok_or_else(|| user(format!("series {id} has no model forecasts")))?;
        let mut row = vec![f64::INFINITY; pool.len()];
        for (model, b) in entries {
            let k = pool
                .iter()
                .position(|m| m == model)
                .ok_or_else(|| user(format!("series {id}: model {model} not in the {} pool", args.frequency)))?;
            row[k] = evaluation_mae(actual.values(), &b.point)?;
        }
        mae.push(row);
    }

    let mut chosen: Vec<(String, HashMap<String, usize>)> = Vec::new();
    for r in read_rows::<SelectionRow>(selections_path)? {
        let k = pool
            .iter()
            .position(|m| *m == r.model)
            .ok_or_else(|| user(format!("series {}: model {} not in pool", r.series_id, r.model)))?;
        match chosen.iter_mut().find(|(s, _)| *s == r.scheme) {
            Some((_, map)) => {
                map.insert(r.series_id, k);
            }
            None => chosen.push((r.scheme, HashMap::from([(r.series_id, k)]))),
        }
    }
    let selections = chosen
        .into_iter()
        .map(|(scheme, map)| {
            let per_series = forecasts
                .iter()
                .map(|(id, _)| {
                    map.get(id).copied().ok_or_else(|| user(format!("{scheme}: no selection for series {id}")))
                })
                .collect::<Result<Vec<usize>>>()?;
            Ok((scheme, per_series))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(rank_thirds(&mae, &selections)?
        .into_iter()
        .map(|t| ThirdsRow { scheme: t.scheme, top: t.top, middle: t.middle, bottom: t.bottom })
        .collect())
}
