//! Shared scoring pipeline: all nine measures over the windows of a
//! rolling-window study.
//!
//! Windows are produced by a closure so large ensembles never have to be
//! materialized all at once; the closure must be a pure function of the
//! window index (it is invoked twice, once for the raw scores and copula
//! observations, and once more after the study-level observation adjustment
//! for the copula scores).

use crate::combine::combine_marginal_copula;
use crate::copula::{
    adjust_copula_observations, copula_dss, copula_energy_score, copula_observation,
    copula_variogram_score, rank_transform, CopulaEnsemble,
};
use crate::error::ScoreError;
use crate::evaluation::score_average;
use crate::forecast::{EnsembleForecast, ObservationPath, StudyLedger, WeightMatrix};
use crate::multivariate::{
    dawid_sebastiani_score, energy_score, variogram_score, EnergyEstimatorSpec,
};
use crate::rng::StreamScope;
use crate::univariate::{crps_per_horizon, marginal_score, MarginalWeights};

/// The nine evaluation measures, in the conventional reporting order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ScoreKind {
    EnergyScore,
    VariogramScore,
    DawidSebastiani,
    CrpsCopulaEnergy,
    CrpsCopulaVariogram,
    Crps,
    CopulaEnergy,
    CopulaVariogram,
    CopulaDawidSebastiani,
}

impl ScoreKind {
    pub const ALL: [ScoreKind; 9] = [
        ScoreKind::EnergyScore,
        ScoreKind::VariogramScore,
        ScoreKind::DawidSebastiani,
        ScoreKind::CrpsCopulaEnergy,
        ScoreKind::CrpsCopulaVariogram,
        ScoreKind::Crps,
        ScoreKind::CopulaEnergy,
        ScoreKind::CopulaVariogram,
        ScoreKind::CopulaDawidSebastiani,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ScoreKind::EnergyScore => "ES",
            ScoreKind::VariogramScore => "VS",
            ScoreKind::DawidSebastiani => "DSS",
            ScoreKind::CrpsCopulaEnergy => "CRPS-CES",
            ScoreKind::CrpsCopulaVariogram => "CRPS-CVS",
            ScoreKind::Crps => "CRPS",
            ScoreKind::CopulaEnergy => "CES",
            ScoreKind::CopulaVariogram => "CVS",
            ScoreKind::CopulaDawidSebastiani => "CDSS",
        }
    }

    /// Whether the study aggregate is the covariance-corrected product
    /// estimate rather than the plain mean.
    pub fn is_combined(&self) -> bool {
        matches!(
            self,
            ScoreKind::CrpsCopulaEnergy | ScoreKind::CrpsCopulaVariogram
        )
    }
}

impl std::fmt::Display for ScoreKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Estimator settings for the nine-measure evaluation.
#[derive(Debug, Clone)]
pub struct ScoreOptions {
    /// Energy score estimator (study default: beta = 1, K-band with K = 1).
    pub energy: EnergyEstimatorSpec,
    /// Variogram exponent (study default 1).
    pub vs_p: f64,
    /// Copula energy score estimator (beta must be 1).
    pub copula_energy: EnergyEstimatorSpec,
    /// Copula variogram exponent.
    pub cvs_p: f64,
    /// Mid-point ecdf for copula observations (default) or plain ecdf.
    pub midpoint_ecdf: bool,
}

impl Default for ScoreOptions {
    fn default() -> Self {
        Self {
            energy: EnergyEstimatorSpec::k_band_default(),
            vs_p: 1.0,
            copula_energy: EnergyEstimatorSpec::k_band_default(),
            cvs_p: 1.0,
            midpoint_ecdf: true,
        }
    }
}

/// Per-window series of all nine scores for one model.
///
/// Scores that cannot be evaluated (a singular covariance in DSS or CDSS)
/// carry the error instead of a series; every other score is a full
/// length-`n` series.
#[derive(Debug, Clone)]
pub struct WindowScores {
    pub n: usize,
    /// Mean CRPS per horizon step across the windows.
    pub crps_per_h_mean: Vec<f64>,
    series: Vec<(ScoreKind, Result<Vec<f64>, ScoreError>)>,
}

impl WindowScores {
    pub fn series(&self, kind: ScoreKind) -> Result<&[f64], ScoreError> {
        self.series
            .iter()
            .find(|(k, _)| *k == kind)
            .map(|(_, r)| r.as_ref().map(Vec::as_slice).map_err(Clone::clone))
            .expect("all score kinds present")
    }

    /// Study aggregate: the sample mean, or for the combined scores the
    /// covariance-corrected product of means.
    pub fn aggregate(&self, kind: ScoreKind) -> Result<f64, ScoreError> {
        match kind {
            ScoreKind::CrpsCopulaEnergy => Ok(combine_marginal_copula(
                self.series(ScoreKind::Crps)?,
                self.series(ScoreKind::CopulaEnergy)?,
            )?
            .aggregate),
            ScoreKind::CrpsCopulaVariogram => Ok(combine_marginal_copula(
                self.series(ScoreKind::Crps)?,
                self.series(ScoreKind::CopulaVariogram)?,
            )?
            .aggregate),
            _ => score_average(self.series(kind)?),
        }
    }
}

/// Scores `n` windows of one model with all nine measures.
///
/// `scope` supplies the tie-breaking streams: one per window for ensemble
/// ranks, one per study for the observation adjustment. `copula_hook`, when
/// given, sees each window's rank ensemble and adjusted copula observation
/// (for low-dimensional score curves).
pub fn score_windows(
    n: usize,
    make_window: &(dyn Fn(usize) -> (EnsembleForecast, ObservationPath) + Sync),
    scope: &StreamScope,
    opts: &ScoreOptions,
    mut copula_hook: Option<&mut dyn FnMut(usize, &CopulaEnsemble, &[f64])>,
) -> Result<WindowScores, ScoreError> {
    if n < 2 {
        return Err(ScoreError::DegenerateSeries);
    }

    let mut crps = Vec::with_capacity(n);
    let mut es = Vec::with_capacity(n);
    let mut vs = Vec::with_capacity(n);
    let mut dss: Result<Vec<f64>, ScoreError> = Ok(Vec::with_capacity(n));
    let mut raw_obs = Vec::with_capacity(n);
    let mut crps_per_h_sum: Vec<f64> = Vec::new();

    for i in 0..n {
        let (ens, obs) = make_window(i);
        crate::forecast::validate_pairing(&ens, &obs)?;
        let weights = MarginalWeights::uniform(ens.h());
        let per_h = crps_per_horizon(&ens, &obs)?;
        if crps_per_h_sum.is_empty() {
            crps_per_h_sum = vec![0.0; per_h.len()];
        }
        for (acc, v) in crps_per_h_sum.iter_mut().zip(&per_h) {
            *acc += v;
        }
        crps.push(marginal_score(&per_h, &weights)?);
        es.push(energy_score(&ens, &obs, &opts.energy)?);
        vs.push(variogram_score(
            &ens,
            &obs,
            &WeightMatrix::ones(ens.h()),
            opts.vs_p,
        )?);
        if let Ok(values) = dss.as_mut() {
            match dawid_sebastiani_score(&ens, &obs) {
                Ok(v) => values.push(v),
                Err(e @ (ScoreError::SingularCovariance | ScoreError::SampleTooSmall { .. })) => {
                    dss = Err(e)
                }
                Err(e) => return Err(e),
            }
        }
        raw_obs.push(copula_observation(&ens, &obs, opts.midpoint_ecdf)?);
    }

    let mut obs_rng = scope.rng("copula-obs-tie");
    let adjusted = adjust_copula_observations(&raw_obs, &mut obs_rng)?;

    let mut ces = Vec::with_capacity(n);
    let mut cvs = Vec::with_capacity(n);
    let mut cdss: Result<Vec<f64>, ScoreError> = Ok(Vec::with_capacity(n));

    for i in 0..n {
        let (ens, _) = make_window(i);
        let mut rank_rng = scope.child(i as u64).rng("rank-tie");
        let cop = rank_transform(&ens, &mut rank_rng);
        let u = adjusted.row(i);
        ces.push(copula_energy_score(&cop, u, &opts.copula_energy)?);
        cvs.push(copula_variogram_score(
            &cop,
            u,
            &WeightMatrix::ones(cop.h()),
            opts.cvs_p,
        )?);
        if let Ok(values) = cdss.as_mut() {
            match copula_dss(&cop, u) {
                Ok(v) => values.push(v),
                Err(e @ (ScoreError::SingularCovariance | ScoreError::SampleTooSmall { .. })) => {
                    cdss = Err(e)
                }
                Err(e) => return Err(e),
            }
        }
        if let Some(hook) = copula_hook.as_deref_mut() {
            hook(i, &cop, u);
        }
    }

    let crps_ces: Vec<f64> = crps.iter().zip(&ces).map(|(a, b)| a * b).collect();
    let crps_cvs: Vec<f64> = crps.iter().zip(&cvs).map(|(a, b)| a * b).collect();

    for acc in &mut crps_per_h_sum {
        *acc /= n as f64;
    }

    Ok(WindowScores {
        n,
        crps_per_h_mean: crps_per_h_sum,
        series: vec![
            (ScoreKind::EnergyScore, Ok(es)),
            (ScoreKind::VariogramScore, Ok(vs)),
            (ScoreKind::DawidSebastiani, dss),
            (ScoreKind::CrpsCopulaEnergy, Ok(crps_ces)),
            (ScoreKind::CrpsCopulaVariogram, Ok(crps_cvs)),
            (ScoreKind::Crps, Ok(crps)),
            (ScoreKind::CopulaEnergy, Ok(ces)),
            (ScoreKind::CopulaVariogram, Ok(cvs)),
            (ScoreKind::CopulaDawidSebastiani, cdss),
        ],
    })
}

/// Scores a materialized ledger (thin adapter over [`score_windows`]).
pub fn score_ledger(
    ledger: &StudyLedger,
    scope: &StreamScope,
    opts: &ScoreOptions,
) -> Result<WindowScores, ScoreError> {
    score_windows(
        ledger.n(),
        &|i| ledger.window(i).clone(),
        scope,
        opts,
        None,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedSpec;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn gaussian_window(seed: &SeedSpec, i: usize, m: usize, h: usize) -> (EnsembleForecast, ObservationPath) {
        let mut rng = seed.stream("pipeline-test", "window", &[i as u64]);
        let values: Vec<f64> = (0..m * h).map(|_| rng.sample(StandardNormal)).collect();
        let obs: Vec<f64> = (0..h).map(|_| rng.sample(StandardNormal)).collect();
        (
            EnsembleForecast::new(values, m, h).unwrap(),
            ObservationPath::new(obs).unwrap(),
        )
    }

    #[test]
    fn all_nine_scores_are_produced() {
        let seed = SeedSpec::new(55);
        let scope = seed.scope("pipeline-test");
        let scores = score_windows(
            8,
            &|i| gaussian_window(&seed, i, 64, 3),
            &scope,
            &ScoreOptions::default(),
            None,
        )
        .unwrap();
        for kind in ScoreKind::ALL {
            let series = scores.series(kind).unwrap();
            assert_eq!(series.len(), 8, "{kind}");
            assert!(series.iter().all(|v| v.is_finite()));
            assert!(scores.aggregate(kind).unwrap().is_finite());
        }
    }

    #[test]
    fn combined_aggregate_matches_direct_combination() {
        let seed = SeedSpec::new(56);
        let scope = seed.scope("pipeline-test");
        let scores = score_windows(
            6,
            &|i| gaussian_window(&seed, i, 32, 2),
            &scope,
            &ScoreOptions::default(),
            None,
        )
        .unwrap();
        let direct = combine_marginal_copula(
            scores.series(ScoreKind::Crps).unwrap(),
            scores.series(ScoreKind::CopulaEnergy).unwrap(),
        )
        .unwrap();
        assert_eq!(
            scores.aggregate(ScoreKind::CrpsCopulaEnergy).unwrap(),
            direct.aggregate
        );
        assert_eq!(
            scores.series(ScoreKind::CrpsCopulaEnergy).unwrap(),
            direct.per_window.as_slice()
        );
    }

    #[test]
    fn scoring_is_deterministic_given_the_scope() {
        let seed = SeedSpec::new(57);
        let scope = seed.scope("pipeline-test");
        let run = || {
            score_windows(
                5,
                &|i| gaussian_window(&seed, i, 24, 2),
                &scope,
                &ScoreOptions::default(),
                None,
            )
            .unwrap()
        };
        let a = run();
        let b = run();
        for kind in ScoreKind::ALL {
            assert_eq!(a.series(kind).unwrap(), b.series(kind).unwrap());
        }
    }

    #[test]
    fn degenerate_dependency_disables_only_the_dss_family() {
        // comonotone two-column ensembles: DSS and CDSS are singular, the rest fine
        let seed = SeedSpec::new(58);
        let scope = seed.scope("pipeline-test");
        let make = |i: usize| {
            let mut rng = seed.stream("pipeline-test", "window", &[i as u64]);
            let rows: Vec<Vec<f64>> = (0..16)
                .map(|_| {
                    let v: f64 = rng.sample(StandardNormal);
                    vec![v, v]
                })
                .collect();
            let obs: Vec<f64> = (0..2).map(|_| rng.sample(StandardNormal)).collect();
            (
                EnsembleForecast::from_rows(&rows).unwrap(),
                ObservationPath::new(obs).unwrap(),
            )
        };
        let scores = score_windows(4, &make, &scope, &ScoreOptions::default(), None).unwrap();
        assert_eq!(
            scores.series(ScoreKind::DawidSebastiani).unwrap_err(),
            ScoreError::SingularCovariance
        );
        assert_eq!(
            scores.series(ScoreKind::CopulaDawidSebastiani).unwrap_err(),
            ScoreError::SingularCovariance
        );
        assert!(scores.series(ScoreKind::EnergyScore).is_ok());
        assert!(scores.series(ScoreKind::CrpsCopulaEnergy).is_ok());
    }
}
