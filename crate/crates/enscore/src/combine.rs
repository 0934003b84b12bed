//! Multiplicative combination of marginal and copula scores.

use crate::error::ScoreError;
use serde::Serialize;

/// Study-level view of a combined marginal-copula score.
///
/// `per_window` holds the products `MS_i * CS_i`; `aggregate` is the plug-in
/// estimate `mean(MS) * mean(CS) - cov(MS, CS)` of the expected product of
/// the two scores' means.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CombinedScoreReport {
    pub per_window: Vec<f64>,
    pub aggregate: f64,
}

/// Combines paired marginal and copula score series.
///
/// The covariance uses divisor `n - 1`, matching the unbiased convention of
/// the sample covariance elsewhere.
pub fn combine_marginal_copula(
    ms: &[f64],
    cs: &[f64],
) -> Result<CombinedScoreReport, ScoreError> {
    if ms.len() != cs.len() {
        return Err(ScoreError::LengthMismatch {
            left: ms.len(),
            right: cs.len(),
        });
    }
    let n = ms.len();
    if n < 2 {
        return Err(ScoreError::DegenerateSeries);
    }
    if !ms.iter().chain(cs).all(|v| v.is_finite()) {
        return Err(ScoreError::NonFiniteValue);
    }
    let ms_mean = ms.iter().sum::<f64>() / n as f64;
    let cs_mean = cs.iter().sum::<f64>() / n as f64;
    let cov = ms
        .iter()
        .zip(cs)
        .map(|(a, b)| (a - ms_mean) * (b - cs_mean))
        .sum::<f64>()
        / (n - 1) as f64;
    let per_window = ms.iter().zip(cs).map(|(a, b)| a * b).collect();
    Ok(CombinedScoreReport {
        per_window,
        aggregate: ms_mean * cs_mean - cov,
    })
}
