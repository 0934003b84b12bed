//! Score aggregation, relative change, and the Diebold-Mariano test.

use crate::error::ScoreError;
use serde::Serialize;

/// A per-window score trajectory for one (model, score) pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreSeries {
    pub model: String,
    pub score: String,
    pub values: Vec<f64>,
}

impl ScoreSeries {
    pub fn new(model: impl Into<String>, score: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            model: model.into(),
            score: score.into(),
            values,
        }
    }
}

/// Arithmetic mean of a score series.
pub fn score_average(values: &[f64]) -> Result<f64, ScoreError> {
    if values.is_empty() {
        return Err(ScoreError::EmptySeries);
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// Relative change of a mean score against a reference model's mean score.
pub fn relative_change(values: &[f64], reference: &[f64]) -> Result<f64, ScoreError> {
    let mean = score_average(values)?;
    let ref_mean = score_average(reference)?;
    if ref_mean == 0.0 {
        return Err(ScoreError::ZeroReferenceMean);
    }
    Ok((mean - ref_mean) / ref_mean)
}

/// Variance estimator for the mean loss difference in the DM test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DmVariance {
    /// Sample standard deviation of the differences (divisor n-1).
    Plain,
    /// Bartlett-kernel long-run variance over `lags` autocovariances, for
    /// overlapping forecast windows.
    Bartlett { lags: usize },
}

/// Diebold-Mariano test outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DmResult {
    pub statistic: f64,
    pub p_one_sided: f64,
    pub n: usize,
    pub mean_diff: f64,
    pub sd_mean_diff: f64,
}

/// Diebold-Mariano test on two per-window loss series.
///
/// The statistic is `mean(d) / sd(mean(d))` with `d_i = loss_a_i - loss_b_i`,
/// and `p = Phi(statistic)` one-sided: for negatively oriented scores, a small
/// p says A is significantly better than B.
pub fn dm_test(loss_a: &[f64], loss_b: &[f64], variance: DmVariance) -> Result<DmResult, ScoreError> {
    if loss_a.len() != loss_b.len() {
        return Err(ScoreError::LengthMismatch {
            left: loss_a.len(),
            right: loss_b.len(),
        });
    }
    let n = loss_a.len();
    if n < 2 {
        return Err(ScoreError::DegenerateSeries);
    }
    if !loss_a.iter().chain(loss_b).all(|v| v.is_finite()) {
        return Err(ScoreError::NonFiniteValue);
    }
    let diffs: Vec<f64> = loss_a.iter().zip(loss_b).map(|(a, b)| a - b).collect();
    let mean = diffs.iter().sum::<f64>() / n as f64;

    let var_of_mean = match variance {
        DmVariance::Plain => {
            let ss: f64 = diffs.iter().map(|d| (d - mean).powi(2)).sum();
            ss / (n - 1) as f64 / n as f64
        }
        DmVariance::Bartlett { lags } => {
            if lags >= n {
                return Err(ScoreError::InvalidParameter(format!(
                    "bartlett lags {lags} must be below the series length {n}"
                )));
            }
            let gamma = |lag: usize| -> f64 {
                (lag..n)
                    .map(|i| (diffs[i] - mean) * (diffs[i - lag] - mean))
                    .sum::<f64>()
                    / n as f64
            };
            let mut long_run = gamma(0);
            for lag in 1..=lags {
                let weight = 1.0 - lag as f64 / (lags + 1) as f64;
                long_run += 2.0 * weight * gamma(lag);
            }
            long_run.max(0.0) / n as f64
        }
    };
    let sd_mean = var_of_mean.sqrt();
    if sd_mean == 0.0 {
        return Err(ScoreError::ZeroVarianceDifferences);
    }
    let statistic = mean / sd_mean;
    Ok(DmResult {
        statistic,
        p_one_sided: standard_normal_cdf(statistic),
        n,
        mean_diff: mean,
        sd_mean_diff: sd_mean,
    })
}

/// Standard normal CDF via the complementary error function.
pub fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Complementary error function, rational Chebyshev approximation
/// (W. J. Cody, 1969; the SPECFUN coefficient set). Relative error is below
/// 1e-15 across the three branches.
pub fn erfc(x: f64) -> f64 {
    let y = x.abs();
    let result = if y <= 0.46875 {
        return 1.0 - erf_small(x);
    } else if y <= 4.0 {
        const C: [f64; 9] = [
            5.64188496988670089e-1,
            8.88314979438837594e0,
            6.61191906371416295e1,
            2.98635138197400131e2,
            8.81952221241769090e2,
            1.71204761263407058e3,
            2.05107837782607147e3,
            1.23033935479799725e3,
            2.15311535474403846e-8,
        ];
        const D: [f64; 8] = [
            1.57449261107098347e1,
            1.17693950891312499e2,
            5.37181101862009858e2,
            1.62138957456669019e3,
            3.29079923573345963e3,
            4.36261909014324716e3,
            3.43936767414372164e3,
            1.23033935480374942e3,
        ];
        let mut num = C[8] * y;
        let mut den = y;
        for i in 0..7 {
            num = (num + C[i]) * y;
            den = (den + D[i]) * y;
        }
        scaled_exp(y) * (num + C[7]) / (den + D[7])
    } else if y < 26.543 {
        const P: [f64; 6] = [
            3.05326634961232344e-1,
            3.60344899949804439e-1,
            1.25781726111229246e-1,
            1.60837851487422766e-2,
            6.58749161529837803e-4,
            1.63153871373020978e-2,
        ];
        const Q: [f64; 5] = [
            2.56852019228982242e0,
            1.87295284992346047e0,
            5.27905102951428412e-1,
            6.05183413124413191e-2,
            2.33520497626869185e-3,
        ];
        const INV_SQRT_PI: f64 = 5.6418958354775628695e-1;
        let ysq = 1.0 / (y * y);
        let mut num = P[5] * ysq;
        let mut den = ysq;
        for i in 0..4 {
            num = (num + P[i]) * ysq;
            den = (den + Q[i]) * ysq;
        }
        let tail = ysq * (num + P[4]) / (den + Q[4]);
        scaled_exp(y) * (INV_SQRT_PI - tail) / y
    } else {
        0.0
    };
    if x < 0.0 {
        2.0 - result
    } else {
        result
    }
}

/// erf on |x| <= 0.46875.
fn erf_small(x: f64) -> f64 {
    const A: [f64; 5] = [
        3.16112374387056560e0,
        1.13864154151050156e2,
        3.77485237685302021e2,
        3.20937758913846947e3,
        1.85777706184603153e-1,
    ];
    const B: [f64; 4] = [
        2.36012909523441209e1,
        2.44024637934444173e2,
        1.28261652607737228e3,
        2.84423683343917062e3,
    ];
    let z = x * x;
    let mut num = A[4] * z;
    let mut den = z;
    for i in 0..3 {
        num = (num + A[i]) * z;
        den = (den + B[i]) * z;
    }
    x * (num + A[3]) / (den + B[3])
}

/// exp(-y^2) evaluated as exp(-hi^2) * exp(-(y-hi)(y+hi)) with hi a 1/16
/// multiple, which keeps the argument splitting accurate for large y.
fn scaled_exp(y: f64) -> f64 {
    let hi = (y * 16.0).trunc() / 16.0;
    let del = (y - hi) * (y + hi);
    (-hi * hi).exp() * (-del).exp()
}
