//! Domain types for ensemble forecasts and rolling-window studies.

use crate::error::ScoreError;

/// An ensemble forecast: `m` simulated paths of length `h`, stored row-major
/// (one row per path). All entries must be finite and `m >= 2` so that
/// pairwise estimators are defined.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleForecast {
    values: Vec<f64>,
    m: usize,
    h: usize,
}

impl EnsembleForecast {
    pub fn new(values: Vec<f64>, m: usize, h: usize) -> Result<Self, ScoreError> {
        if m < 2 {
            return Err(ScoreError::EmptySample);
        }
        if h < 1 || values.len() != m * h {
            return Err(ScoreError::DimensionMismatch {
                expected: m * h.max(1),
                actual: values.len(),
            });
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(ScoreError::NonFiniteValue);
        }
        Ok(Self { values, m, h })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, ScoreError> {
        let m = rows.len();
        let h = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != h) {
            return Err(ScoreError::DimensionMismatch {
                expected: h,
                actual: rows.iter().map(Vec::len).find(|&l| l != h).unwrap_or(0),
            });
        }
        Self::new(rows.concat(), m, h)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.values[j * self.h..(j + 1) * self.h]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.h)
    }

    /// Copies column `k` (forecast horizon step `k`) out of the row-major store.
    pub fn column(&self, k: usize) -> Vec<f64> {
        (0..self.m).map(|j| self.values[j * self.h + k]).collect()
    }

    /// Sub-ensemble restricted to a contiguous range of horizon steps.
    pub fn select_columns(&self, start: usize, len: usize) -> EnsembleForecast {
        assert!(start + len <= self.h);
        let mut values = Vec::with_capacity(self.m * len);
        for j in 0..self.m {
            values.extend_from_slice(&self.values[j * self.h + start..j * self.h + start + len]);
        }
        EnsembleForecast {
            values,
            m: self.m,
            h: len,
        }
    }
}

/// A realized observation path of length `h`, in the same units as the
/// paired forecast.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationPath {
    y: Vec<f64>,
}

impl ObservationPath {
    pub fn new(y: Vec<f64>) -> Result<Self, ScoreError> {
        if y.is_empty() {
            return Err(ScoreError::EmptySample);
        }
        if !y.iter().all(|v| v.is_finite()) {
            return Err(ScoreError::NonFiniteValue);
        }
        Ok(Self { y })
    }

    pub fn h(&self) -> usize {
        self.y.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }
}

/// Checks that an ensemble and an observation can be scored together.
pub fn validate_pairing(
    ensemble: &EnsembleForecast,
    obs: &ObservationPath,
) -> Result<(), ScoreError> {
    if ensemble.h() != obs.h() {
        return Err(ScoreError::DimensionMismatch {
            expected: ensemble.h(),
            actual: obs.h(),
        });
    }
    Ok(())
}

/// An ordered rolling-window study: `n` (forecast, observation) pairs sharing
/// one horizon, plus the window shift between consecutive windows. Shift below
/// the horizon means overlapping forecast periods, which matters for the
/// variance estimator in the DM test.
#[derive(Debug, Clone)]
pub struct StudyLedger {
    windows: Vec<(EnsembleForecast, ObservationPath)>,
    shift: usize,
}

impl StudyLedger {
    pub fn new(
        windows: Vec<(EnsembleForecast, ObservationPath)>,
        shift: usize,
    ) -> Result<Self, ScoreError> {
        if windows.len() < 2 {
            return Err(ScoreError::DegenerateSeries);
        }
        let h = windows[0].0.h();
        for (ens, obs) in &windows {
            validate_pairing(ens, obs)?;
            if ens.h() != h {
                return Err(ScoreError::DimensionMismatch {
                    expected: h,
                    actual: ens.h(),
                });
            }
        }
        Ok(Self { windows, shift })
    }

    pub fn n(&self) -> usize {
        self.windows.len()
    }

    pub fn h(&self) -> usize {
        self.windows[0].0.h()
    }

    pub fn shift(&self) -> usize {
        self.shift
    }

    /// Whether consecutive forecast periods overlap (shift < horizon).
    pub fn overlapping(&self) -> bool {
        self.shift < self.h()
    }

    pub fn window(&self, i: usize) -> &(EnsembleForecast, ObservationPath) {
        &self.windows[i]
    }

    pub fn windows(&self) -> &[(EnsembleForecast, ObservationPath)] {
        &self.windows
    }
}

/// Symmetric nonnegative weight matrix for the variogram score.
///
/// A zero matrix is representable (the raw variogram score is then zero); the
/// scaled copula variogram score additionally requires positive total mass.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    w: Vec<f64>,
    h: usize,
}

impl WeightMatrix {
    pub fn new(w: Vec<f64>, h: usize) -> Result<Self, ScoreError> {
        if w.len() != h * h {
            return Err(ScoreError::DimensionMismatch {
                expected: h * h,
                actual: w.len(),
            });
        }
        if !w.iter().all(|v| v.is_finite() && *v >= 0.0) {
            return Err(ScoreError::NonFiniteValue);
        }
        for i in 0..h {
            for j in 0..i {
                if w[i * h + j] != w[j * h + i] {
                    return Err(ScoreError::InvalidParameter(
                        "weight matrix must be symmetric".into(),
                    ));
                }
            }
        }
        Ok(Self { w, h })
    }

    /// The standard all-ones weights.
    pub fn ones(h: usize) -> Self {
        Self {
            w: vec![1.0; h * h],
            h,
        }
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.w[i * self.h + j]
    }

    /// Total mass `1' W 1`.
    pub fn total_mass(&self) -> f64 {
        self.w.iter().sum()
    }
}
