use serde::Serialize;

use crate::error::{Error, Result};

/// Points whose bracket width exceeds this fraction of the value are not fitted.
pub const MAX_REL_WIDTH: f64 = 0.05;

/// Fewest admissible points a fit accepts.
pub const MIN_POINTS: usize = 6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitPoint {
    pub n: f64,
    pub value: f64,
    /// Absolute bracket width.
    pub width: f64,
    pub used: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExponentFit {
    pub series: Vec<FitPoint>,
    pub window: (f64, f64),
    pub slope: f64,
    pub intercept: f64,
    /// |slope(first half) − slope(second half)| over the admitted points.
    pub drift: f64,
    pub points: usize,
}

fn least_squares(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Least-squares slope of log value against log n over `(n, value, width)` rows.
///
/// Only rows inside `window` (inclusive, all rows if `None`) with width ≤ 5% of a positive
/// value are used; at least six must remain.
pub fn fit_exponent(series: &[(f64, f64, f64)], window: Option<(f64, f64)>) -> Result<ExponentFit> {
    let window = window.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
    let pts: Vec<FitPoint> = series
        .iter()
        .map(|&(n, value, width)| FitPoint {
            n,
            value,
            width,
            used: n >= window.0 && n <= window.1 && n > 0.0 && value > 0.0 && width <= MAX_REL_WIDTH * value,
        })
        .collect();
    let logs: Vec<(f64, f64)> = pts.iter().filter(|p| p.used).map(|p| (p.n.ln(), p.value.ln())).collect();
    if logs.len() < MIN_POINTS {
        return Err(Error::TooFewPoints { got: logs.len(), need: MIN_POINTS });
    }
    let (slope, intercept) = least_squares(&logs);
    let half = logs.len() / 2;
    let drift = (least_squares(&logs[..half]).0 - least_squares(&logs[logs.len() - half..]).0).abs();
    Ok(ExponentFit { points: logs.len(), series: pts, window, slope, intercept, drift })
}
