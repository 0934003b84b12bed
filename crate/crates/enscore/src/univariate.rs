//! CRPS per marginal and the weighted marginal score.

use crate::error::ScoreError;
use crate::forecast::{validate_pairing, EnsembleForecast, ObservationPath};

/// Positive weights for combining per-horizon marginal scores.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalWeights {
    a: Vec<f64>,
}

impl MarginalWeights {
    pub fn new(a: Vec<f64>) -> Result<Self, ScoreError> {
        if a.is_empty() {
            return Err(ScoreError::EmptySample);
        }
        if !a.iter().all(|v| v.is_finite() && *v > 0.0) {
            return Err(ScoreError::InvalidParameter(
                "marginal weights must be positive".into(),
            ));
        }
        Ok(Self { a })
    }

    /// The default `1/H` weighting that averages the marginals.
    pub fn uniform(h: usize) -> Self {
        Self {
            a: vec![1.0 / h as f64; h],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.a
    }
}

/// CRPS of an ensemble sample against a scalar observation.
///
/// Evaluates `mean|x_j - y| - (1/(2 m^2)) sum_{j,k} |x_j - x_k|`, which equals
/// the squared-integral form with the ecdf plugged in. The pairwise term uses
/// the sorted-sample identity `sum_{j,k} |x_j - x_k| = 2 sum_j (2j - m - 1)
/// x_(j)`, so the whole evaluation is O(m log m).
pub fn crps(sample: &[f64], y: f64) -> Result<f64, ScoreError> {
    let m = sample.len();
    if m < 2 {
        return Err(ScoreError::EmptySample);
    }
    if !y.is_finite() || !sample.iter().all(|v| v.is_finite()) {
        return Err(ScoreError::NonFiniteValue);
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mf = m as f64;
    let abs_term = sorted.iter().map(|x| (x - y).abs()).sum::<f64>() / mf;
    let mut spread = 0.0;
    for (j, x) in sorted.iter().enumerate() {
        spread += ((2 * (j + 1)) as f64 - mf - 1.0) * x;
    }
    Ok(abs_term - spread / (mf * mf))
}

/// CRPS of each horizon step's marginal ensemble distribution.
pub fn crps_per_horizon(
    ensemble: &EnsembleForecast,
    obs: &ObservationPath,
) -> Result<Vec<f64>, ScoreError> {
    validate_pairing(ensemble, obs)?;
    (0..ensemble.h())
        .map(|k| crps(&ensemble.column(k), obs.values()[k]))
        .collect()
}

/// Weighted sum of per-horizon scores, `sum_h a_h * per_h[h]`.
pub fn marginal_score(per_h: &[f64], weights: &MarginalWeights) -> Result<f64, ScoreError> {
    if per_h.len() != weights.values().len() {
        return Err(ScoreError::DimensionMismatch {
            expected: weights.values().len(),
            actual: per_h.len(),
        });
    }
    Ok(per_h
        .iter()
        .zip(weights.values())
        .map(|(s, a)| s * a)
        .sum())
}
