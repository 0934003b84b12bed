//! Rank transforms, copula observations, and the copula scores CES/CVS/CDSS.

use crate::error::ScoreError;
use crate::forecast::{EnsembleForecast, ObservationPath, WeightMatrix};
use crate::multivariate::{
    dawid_sebastiani_score, energy_components, EnergyEstimatorSpec,
};
use rand::Rng;

/// Lower-bound offset subtracted inside the copula energy score,
/// `1/4 - 1/(2 sqrt(6))`: the first term's lower bound minus half the second
/// term's upper bound.
pub fn ces_lower_bound() -> f64 {
    0.25 - 0.5 / 6.0f64.sqrt()
}

/// Rank-transformed ensemble: every column is a permutation of the mid-point
/// grid `(2r - 1) / (2m)`, so the rows are an empirical-copula sample.
#[derive(Debug, Clone, PartialEq)]
pub struct CopulaEnsemble {
    u: Vec<f64>,
    m: usize,
    h: usize,
}

impl CopulaEnsemble {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.u[j * self.h..(j + 1) * self.h]
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        (0..self.m).map(|j| self.u[j * self.h + k]).collect()
    }

    /// Sub-copula on a contiguous range of coordinates. Ranks are column-wise,
    /// so this equals rank-transforming the corresponding sub-ensemble.
    pub fn select_columns(&self, start: usize, len: usize) -> CopulaEnsemble {
        assert!(start + len <= self.h);
        let mut u = Vec::with_capacity(self.m * len);
        for j in 0..self.m {
            u.extend_from_slice(&self.u[j * self.h + start..j * self.h + start + len]);
        }
        CopulaEnsemble {
            u,
            m: self.m,
            h: len,
        }
    }

    /// View as a plain ensemble on the unit cube, for moment-based scores.
    pub fn as_ensemble(&self) -> EnsembleForecast {
        EnsembleForecast::new(self.u.clone(), self.m, self.h).expect("grid values are finite")
    }
}

/// Copula observations for a study's windows: an `n x h` matrix in (0, 1).
/// When `adjusted`, each column is exactly a permutation of the grid
/// `(2r - 1) / (2n)`, i.e. the marginals are perfectly uniform.
#[derive(Debug, Clone, PartialEq)]
pub struct CopulaObservationSet {
    u_obs: Vec<f64>,
    n: usize,
    h: usize,
    pub adjusted: bool,
}

impl CopulaObservationSet {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.u_obs[i * self.h..(i + 1) * self.h]
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.u_obs[i * self.h + k]).collect()
    }
}

/// Sorts `0..len` by `(value, key)`. Tied values are ordered by their iid
/// uniform keys, i.e. a uniformly random permutation within each tie group.
/// One key per row, shared by all columns, keeps exact co- and
/// countermonotone structure intact instead of diffusing it inside tie
/// groups.
fn ranked_order(values: &[f64], keys: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        values[a]
            .partial_cmp(&values[b])
            .unwrap()
            .then(keys[a].partial_cmp(&keys[b]).unwrap())
    });
    idx
}

/// Column-wise mid-point rank transform of an ensemble, ties broken at
/// random. Output entries are `(2r - 1) / (2m)` per column.
pub fn rank_transform(ensemble: &EnsembleForecast, rng: &mut impl Rng) -> CopulaEnsemble {
    let m = ensemble.m();
    let h = ensemble.h();
    let keys: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
    let mut u = vec![0.0; m * h];
    let mut col = vec![0.0; m];
    for k in 0..h {
        for j in 0..m {
            col[j] = ensemble.row(j)[k];
        }
        for (pos, &j) in ranked_order(&col, &keys).iter().enumerate() {
            u[j * h + k] = (2 * (pos + 1) - 1) as f64 / (2 * m) as f64;
        }
    }
    CopulaEnsemble { u, m, h }
}

/// Estimated copula observation of `y` under the ensemble's column-wise ecdf.
/// The mid-point rule `(#{x <= y} + #{x < y}) / (2m)` is the default; the
/// plain right-continuous ecdf is available for comparison.
pub fn copula_observation(
    ensemble: &EnsembleForecast,
    obs: &ObservationPath,
    midpoint: bool,
) -> Result<Vec<f64>, ScoreError> {
    crate::forecast::validate_pairing(ensemble, obs)?;
    let m = ensemble.m() as f64;
    let mut u = Vec::with_capacity(ensemble.h());
    for (k, y) in obs.values().iter().enumerate() {
        let mut le = 0usize;
        let mut lt = 0usize;
        for j in 0..ensemble.m() {
            let x = ensemble.row(j)[k];
            if x <= *y {
                le += 1;
            }
            if x < *y {
                lt += 1;
            }
        }
        u.push(if midpoint {
            (le + lt) as f64 / (2.0 * m)
        } else {
            le as f64 / m
        });
    }
    Ok(u)
}

/// Rank-adjusts raw copula observations across the study windows so every
/// column takes exactly the values `(2r - 1) / (2n)` ("perfect uniform
/// marginals"). Ties in the ranks are broken at random.
pub fn adjust_copula_observations(
    raw: &[Vec<f64>],
    rng: &mut impl Rng,
) -> Result<CopulaObservationSet, ScoreError> {
    let n = raw.len();
    if n < 2 {
        return Err(ScoreError::DegenerateSeries);
    }
    let h = raw[0].len();
    if raw.iter().any(|r| r.len() != h) {
        return Err(ScoreError::DimensionMismatch {
            expected: h,
            actual: raw.iter().map(Vec::len).find(|&l| l != h).unwrap_or(0),
        });
    }
    if !raw.iter().flatten().all(|v| v.is_finite()) {
        return Err(ScoreError::NonFiniteValue);
    }
    let keys: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let mut u_obs = vec![0.0; n * h];
    let mut col = vec![0.0; n];
    for k in 0..h {
        for i in 0..n {
            col[i] = raw[i][k];
        }
        for (pos, &i) in ranked_order(&col, &keys).iter().enumerate() {
            u_obs[i * h + k] = (2 * (pos + 1) - 1) as f64 / (2 * n) as f64;
        }
    }
    Ok(CopulaObservationSet {
        u_obs,
        n,
        h,
        adjusted: true,
    })
}

fn check_unit_cube(u: &[f64], h: usize) -> Result<(), ScoreError> {
    if u.len() != h {
        return Err(ScoreError::DimensionMismatch {
            expected: h,
            actual: u.len(),
        });
    }
    if !u.iter().all(|v| v.is_finite() && (0.0..=1.0).contains(v)) {
        return Err(ScoreError::OutOfUnitCube);
    }
    Ok(())
}

/// Copula energy score: the energy score of the rank ensemble against a
/// copula observation, shifted by the lower-bound constant and scaled by
/// `1/sqrt(h)` to adjust for the dimension. Defined for beta = 1 only.
pub fn copula_energy_score(
    cop: &CopulaEnsemble,
    u: &[f64],
    spec: &EnergyEstimatorSpec,
) -> Result<f64, ScoreError> {
    check_unit_cube(u, cop.h())?;
    if spec.beta != 1.0 {
        return Err(ScoreError::InvalidParameter(format!(
            "copula energy score is defined for beta = 1, got {}",
            spec.beta
        )));
    }
    let (ed, ei) = energy_components(&cop.as_ensemble(), u, spec)?;
    Ok((ed - 0.5 * ei - ces_lower_bound()) / (cop.h() as f64).sqrt())
}

/// Copula variogram score: the variogram score of the rank ensemble scaled by
/// the weight mass `1' W 1`, which bounds the raw score; values lie in [0, 1].
pub fn copula_variogram_score(
    cop: &CopulaEnsemble,
    u: &[f64],
    w: &WeightMatrix,
    p: f64,
) -> Result<f64, ScoreError> {
    check_unit_cube(u, cop.h())?;
    let mass = w.total_mass();
    if mass <= 0.0 {
        return Err(ScoreError::ZeroWeightMass);
    }
    let obs = ObservationPath::new(u.to_vec())?;
    let raw = crate::multivariate::variogram_score(&cop.as_ensemble(), &obs, w, p)?;
    Ok(raw / mass)
}

/// Copula Dawid-Sebastiani score: the DSS with the sample moments of the rank
/// ensemble. Degenerate dependency structures (co- or countermonotone rank
/// columns) make the sample covariance singular.
pub fn copula_dss(cop: &CopulaEnsemble, u: &[f64]) -> Result<f64, ScoreError> {
    check_unit_cube(u, cop.h())?;
    if cop.m() <= cop.h() {
        return Err(ScoreError::SampleTooSmall {
            m: cop.m(),
            h: cop.h(),
        });
    }
    let obs = ObservationPath::new(u.to_vec())?;
    dawid_sebastiani_score(&cop.as_ensemble(), &obs)
}
