use crate::error::{Error, Result};

/// Default interval score tail probability (95% intervals).
pub const DEFAULT_MSIS_ALPHA: f64 = 0.05;

/// Per-series scores of one scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    pub series_id: String,
    pub scheme: String,
    pub mase: f64,
    pub msis: f64,
}

/// In-sample mean absolute seasonal difference,
/// `sum_{t>s} |y_t - y_{t-s}| / (T - s)`. Shared denominator of MASE and MSIS.
pub fn seasonal_naive_scale(in_sample: &[f64], s: usize) -> Result<f64> {
    if s == 0 {
        return Err(Error::InvalidArgument("seasonal period must be positive".into()));
    }
    if in_sample.len() <= s {
        return Err(Error::TooShort { len: in_sample.len(), h: s });
    }
    let n = in_sample.len() - s;
    let total: f64 = in_sample.windows(s + 1).map(|w| (w[s] - w[0]).abs()).sum();
    let scale = total / n as f64;
    if scale > 0.0 && scale.is_finite() {
        Ok(scale)
    } else {
        Err(Error::UndefinedScale)
    }
}

fn check_lengths(test: &[f64], other: &[f64]) -> Result<()> {
    if test.is_empty() || test.len() != other.len() {
        return Err(Error::LengthMismatch(format!("{} actuals vs {} forecasts", test.len(), other.len())));
    }
    Ok(())
}

/// Mean absolute scaled error.
pub fn mase(in_sample: &[f64], s: usize, test: &[f64], point: &[f64]) -> Result<f64> {
    check_lengths(test, point)?;
    let scale = seasonal_naive_scale(in_sample, s)?;
    let mae = test.iter().zip(point).map(|(y, f)| (y - f).abs()).sum::<f64>() / test.len() as f64;
    Ok(mae / scale)
}

/// Mean scaled interval score at tail probability `alpha`.
pub fn msis(in_sample: &[f64], s: usize, test: &[f64], lower: &[f64], upper: &[f64], alpha: f64) -> Result<f64> {
    check_lengths(test, lower)?;
    check_lengths(test, upper)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha {alpha} outside (0, 1)")));
    }
    if lower.iter().zip(upper).any(|(l, u)| l > u) {
        return Err(Error::InvalidArgument("invalid interval: lower bound above upper".into()));
    }
    let scale = seasonal_naive_scale(in_sample, s)?;
    let penalty = 2.0 / alpha;
    let total: f64 = test
        .iter()
        .zip(lower.iter().zip(upper))
        .map(|(&y, (&l, &u))| {
            let mut score = u - l;
            if y < l {
                score += penalty * (l - y);
            }
            if y > u {
                score += penalty * (y - u);
            }
            score
        })
        .sum();
    Ok(total / test.len() as f64 / scale)
}
