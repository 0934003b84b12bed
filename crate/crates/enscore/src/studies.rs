//! Synthetic study harnesses: bivariate-normal sensitivity studies, the
//! random peak study, and the ensemble-size sweep.

use crate::error::ScoreError;
use crate::evaluation::{dm_test, DmVariance};
use crate::forecast::{EnsembleForecast, ObservationPath};
use crate::pipeline::{score_windows, ScoreKind, ScoreOptions, WindowScores};
use crate::report::{StudyReport, TidyRow};
use crate::rng::{SeedSpec, StreamScope};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::collections::BTreeMap;

/// Bivariate normal with common variance `scale` and correlation `rho`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BivariateNormalSpec {
    pub rho: f64,
    pub mean: [f64; 2],
    pub scale: f64,
}

impl BivariateNormalSpec {
    pub fn new(rho: f64, mean: [f64; 2], scale: f64) -> Result<Self, ScoreError> {
        if !(rho.is_finite() && rho.abs() <= 1.0) {
            return Err(ScoreError::InvalidParameter(format!(
                "correlation must lie in [-1, 1], got {rho}"
            )));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(ScoreError::InvalidParameter(format!(
                "scale must be positive, got {scale}"
            )));
        }
        Ok(Self { rho, mean, scale })
    }

    pub fn standard(rho: f64) -> Result<Self, ScoreError> {
        Self::new(rho, [0.0, 0.0], 1.0)
    }

    /// One draw. The linear construction is exact at `rho = ±1`.
    pub fn draw(&self, rng: &mut impl Rng) -> [f64; 2] {
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        let tail = (1.0 - self.rho * self.rho).max(0.0).sqrt();
        let s = self.scale.sqrt();
        [
            self.mean[0] + s * z1,
            self.mean[1] + s * (self.rho * z1 + tail * z2),
        ]
    }
}

/// Ensemble of `m` iid draws from a bivariate normal.
pub fn sample_bivariate_normal(
    spec: &BivariateNormalSpec,
    m: usize,
    rng: &mut impl Rng,
) -> Result<EnsembleForecast, ScoreError> {
    let mut values = Vec::with_capacity(m * 2);
    for _ in 0..m {
        let [a, b] = spec.draw(rng);
        values.push(a);
        values.push(b);
    }
    EnsembleForecast::new(values, m, 2)
}

/// Likelihood-matched distortion constants for the seven-setting sensitivity
/// study: mean shifts `a1`, `a2`, variance scales `a3 < 1 < a4`, and
/// correlations `a5 = 0`, `a6 > rho`, all tuned so every distorted setting
/// loses the same expected log-likelihood `delta` against the true model.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Study2Constants {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub a5: f64,
    pub a6: f64,
}

/// Expected log-likelihood gap of a symmetric mean shift `a * (1, 1)`.
pub fn likelihood_gap_mean_sym(a: f64, rho: f64) -> f64 {
    a * a / (1.0 + rho)
}

/// Expected log-likelihood gap of an asymmetric mean shift `(a, -a)`.
pub fn likelihood_gap_mean_asym(a: f64, rho: f64) -> f64 {
    a * a / (1.0 - rho)
}

/// Expected log-likelihood gap of scaling the covariance by `a` (dimension 2).
pub fn likelihood_gap_variance_scale(a: f64) -> f64 {
    a.ln() + 1.0 / a - 1.0
}

/// Expected log-likelihood gap of forecasting correlation `r` when the truth
/// has correlation `rho`.
pub fn likelihood_gap_correlation(r: f64, rho: f64) -> f64 {
    0.5 * (((1.0 - r * r) / (1.0 - rho * rho)).ln() + 2.0 * (1.0 - r * rho) / (1.0 - r * r) - 2.0)
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> Result<f64, ScoreError> {
    let flo = f(lo);
    let fhi = f(hi);
    if !(flo.is_finite() && fhi.is_finite()) || flo * fhi > 0.0 {
        return Err(ScoreError::NoRoot);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 || (hi - lo) < 1e-14 {
            return Ok(mid);
        }
        if fm * flo <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if (hi - lo) < 1e-12 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Solves for the distortion constants at likelihood reduction `delta`.
///
/// `a1`, `a2` have closed forms; `a3`, `a4`, `a6` are bisection roots of the
/// corresponding gap functions; `a5 = 0` fixes the free degree of freedom.
pub fn solve_study2_constants(delta: f64, rho: f64) -> Result<Study2Constants, ScoreError> {
    if !(delta > 0.0) {
        return Err(ScoreError::InvalidParameter(format!(
            "delta must be positive, got {delta}"
        )));
    }
    if !(rho.abs() < 1.0) {
        return Err(ScoreError::InvalidParameter(format!(
            "rho must lie strictly inside (-1, 1), got {rho}"
        )));
    }
    let a1 = (delta / (2.0 - std::f64::consts::SQRT_2)).sqrt();
    let a2 = (delta / (2.0 + std::f64::consts::SQRT_2)).sqrt();
    let a3 = bisect(1e-9, 1.0, |a| likelihood_gap_variance_scale(a) - delta)?;
    let mut hi = 2.0;
    while likelihood_gap_variance_scale(hi) < delta {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(ScoreError::NoRoot);
        }
    }
    let a4 = bisect(1.0, hi, |a| likelihood_gap_variance_scale(a) - delta)?;
    let a6 = bisect(rho, 1.0 - 1e-12, |r| likelihood_gap_correlation(r, rho) - delta)?;
    Ok(Study2Constants {
        a1,
        a2,
        a3,
        a4,
        a5: 0.0,
        a6,
    })
}

/// Forecast model for the random peak experiment.
///
/// Model 1 is the truth (standard normal plus a peak of size `q` at one
/// uniformly chosen coordinate); models 2-8 are the plausible-but-wrong
/// alternatives. Model 5's peak position cycles with the window index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakModelSpec {
    pub model_id: u8,
    pub h: usize,
    pub q: f64,
}

impl PeakModelSpec {
    pub fn new(model_id: u8, h: usize, q: f64) -> Result<Self, ScoreError> {
        if !(1..=8).contains(&model_id) {
            return Err(ScoreError::UnknownModel { id: model_id });
        }
        if h < 2 {
            return Err(ScoreError::InvalidParameter(format!(
                "peak study needs dimension >= 2, got {h}"
            )));
        }
        if !q.is_finite() {
            return Err(ScoreError::NonFiniteValue);
        }
        Ok(Self { model_id, h, q })
    }

    pub fn name(&self) -> &'static str {
        peak_model_name(self.model_id)
    }

    /// One path; `window_index` is 1-based and drives the rolling peak.
    pub fn draw(&self, window_index: usize, rng: &mut impl Rng) -> Vec<f64> {
        let h = self.h;
        let q = self.q;
        match self.model_id {
            1 => {
                let mut x: Vec<f64> = (0..h).map(|_| rng.sample(StandardNormal)).collect();
                let j = rng.random_range(0..h);
                x[j] += q;
                x
            }
            2 => (0..h)
                .map(|_| rng.sample::<f64, _>(StandardNormal) + q / h as f64)
                .collect(),
            3 => (0..h).map(|_| rng.sample(StandardNormal)).collect(),
            4 => {
                let mut x: Vec<f64> = (0..h).map(|_| rng.sample(StandardNormal)).collect();
                x[0] += q;
                x
            }
            5 => {
                let mut x: Vec<f64> = (0..h).map(|_| rng.sample(StandardNormal)).collect();
                x[(window_index - 1) % h] += q;
                x
            }
            6 => {
                let threshold = (h - 1) as f64 / h as f64;
                (0..h)
                    .map(|_| {
                        let z: f64 = rng.sample(StandardNormal);
                        let u: f64 = rng.random();
                        if u <= threshold {
                            z
                        } else {
                            z + q
                        }
                    })
                    .collect()
            }
            7 => {
                let mut x: Vec<f64> = (0..h)
                    .map(|_| rng.sample::<f64, _>(StandardNormal) + q / h as f64)
                    .collect();
                let j = rng.random_range(0..h);
                x[j] += q;
                x
            }
            8 => {
                // N(mu, S) with mu = (q/h) 1 and S = (h+q^2)/h I - q^2/h^2 11',
                // the exact first two moments of model 1. S has eigenvalue 1
                // on span(1) and (h+q^2)/h on its complement.
                let alpha = ((h as f64) + q * q) / h as f64;
                let w: Vec<f64> = (0..h).map(|_| rng.sample(StandardNormal)).collect();
                let wbar = w.iter().sum::<f64>() / h as f64;
                let mu = q / h as f64;
                w.iter()
                    .map(|wi| mu + alpha.sqrt() * (wi - wbar) + wbar)
                    .collect()
            }
            _ => unreachable!("validated at construction"),
        }
    }
}

pub fn peak_model_name(model_id: u8) -> &'static str {
    match model_id {
        1 => "true",
        2 => "average_mean",
        3 => "zero_mean",
        4 => "fixed_peak",
        5 => "rolling_peak",
        6 => "mixture_normal",
        7 => "shifted_mean",
        8 => "moment_matched",
        _ => "unknown",
    }
}

/// Ensemble of `m` iid draws from a peak model for one window.
pub fn sample_peak_model(
    spec: &PeakModelSpec,
    window_index: usize,
    m: usize,
    rng: &mut impl Rng,
) -> Result<EnsembleForecast, ScoreError> {
    if window_index == 0 {
        return Err(ScoreError::InvalidParameter(
            "window index is 1-based".into(),
        ));
    }
    let mut values = Vec::with_capacity(m * spec.h);
    for _ in 0..m {
        values.extend(spec.draw(window_index, rng));
    }
    EnsembleForecast::new(values, m, spec.h)
}

// ---------------------------------------------------------------------------
// study harnesses
// ---------------------------------------------------------------------------

const DEFAULT_DELTA: f64 = std::f64::consts::LN_2 / 2.0;

fn default_rho() -> f64 {
    std::f64::consts::SQRT_2 / 2.0
}

/// Correlation-grid sensitivity study configuration.
#[derive(Debug, Clone)]
pub struct Sens1Config {
    pub m: usize,
    pub n: usize,
    pub rho_true_grid: Vec<f64>,
    pub rho_forecast_grid: Vec<f64>,
    pub seed: SeedSpec,
}

impl Sens1Config {
    pub fn desk_scale(seed: SeedSpec) -> Self {
        Self {
            m: 1 << 12,
            n: 1 << 7,
            rho_true_grid: grid_steps(-1.0, 1.0, 0.2),
            rho_forecast_grid: grid_steps(-1.0, 1.0, 0.1),
            seed,
        }
    }

    pub fn paper_scale(seed: SeedSpec) -> Self {
        Self {
            m: 1 << 14,
            n: 1 << 9,
            ..Self::desk_scale(seed)
        }
    }
}

fn grid_steps(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let count = ((hi - lo) / step).round() as i64;
    (0..=count)
        .map(|i| {
            let v = lo + i as f64 * step;
            (v * 1e9).round() / 1e9
        })
        .collect()
}

fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

type SeriesPair<'a> = (&'a WindowScores, &'a WindowScores);

/// RelCh and DM rows of a candidate against a reference, one row triple per
/// score. Scores unavailable on either side render as NA.
fn relch_dm_rows(
    study: &str,
    cell: &str,
    (candidate, reference): SeriesPair<'_>,
    rows: &mut Vec<TidyRow>,
) {
    for kind in ScoreKind::ALL {
        let relch = match (candidate.aggregate(kind), reference.aggregate(kind)) {
            (Ok(c), Ok(r)) if r != 0.0 => Some((c - r) / r),
            _ => None,
        };
        let dm = match (candidate.series(kind), reference.series(kind)) {
            (Ok(c), Ok(r)) => dm_test(c, r, DmVariance::Plain).ok(),
            _ => None,
        };
        rows.push(TidyRow::new(study, cell, kind.name(), "relch", relch));
        rows.push(TidyRow::new(
            study,
            cell,
            kind.name(),
            "dm_stat",
            dm.as_ref().map(|d| d.statistic),
        ));
        rows.push(TidyRow::new(
            study,
            cell,
            kind.name(),
            "dm_p",
            dm.as_ref().map(|d| d.p_one_sided),
        ));
    }
}

/// Scores one model and the true model on shared observation windows.
fn score_candidate_and_reference(
    n: usize,
    obs: &[ObservationPath],
    make_candidate: &(dyn Fn(usize) -> EnsembleForecast + Sync),
    make_reference: &(dyn Fn(usize) -> EnsembleForecast + Sync),
    scope: &StreamScope,
    opts: &ScoreOptions,
) -> Result<(WindowScores, WindowScores), ScoreError> {
    let candidate = score_windows(
        n,
        &|i| (make_candidate(i), obs[i].clone()),
        &scope.child(1),
        opts,
        None,
    )?;
    let reference = score_windows(
        n,
        &|i| (make_reference(i), obs[i].clone()),
        &scope.child(0),
        opts,
        None,
    )?;
    Ok((candidate, reference))
}

/// Correlation-grid sensitivity study: for every (true rho, forecast rho)
/// cell, RelCh and the DM statistic of the forecast model against the true
/// model over `n` windows.
pub fn run_sensitivity_study_1(cfg: &Sens1Config) -> Result<StudyReport, ScoreError> {
    let opts = ScoreOptions::default();
    let mut cells = Vec::new();
    for (ci, &rho_true) in cfg.rho_true_grid.iter().enumerate() {
        for (fi, &rho_fc) in cfg.rho_forecast_grid.iter().enumerate() {
            cells.push((ci, rho_true, fi, rho_fc));
        }
    }
    let chunks: Result<Vec<Vec<TidyRow>>, ScoreError> = cells
        .par_iter()
        .map(|&(ci, rho_true, fi, rho_fc)| {
            let truth = BivariateNormalSpec::standard(rho_true)?;
            let forecast = BivariateNormalSpec::standard(rho_fc)?;
            let scope = cfg.seed.scope("sens1").child(ci as u64).child(fi as u64);
            let obs: Vec<ObservationPath> = (0..cfg.n)
                .map(|i| {
                    let mut rng = scope.child(i as u64).rng("obs");
                    ObservationPath::new(truth.draw(&mut rng).to_vec())
                })
                .collect::<Result<_, _>>()?;
            let make_fc = |i: usize| {
                let mut rng = scope.child(i as u64).rng("fcst-ens");
                sample_bivariate_normal(&forecast, cfg.m, &mut rng).expect("valid spec")
            };
            let make_true = |i: usize| {
                let mut rng = scope.child(i as u64).rng("true-ens");
                sample_bivariate_normal(&truth, cfg.m, &mut rng).expect("valid spec")
            };
            let (candidate, reference) =
                score_candidate_and_reference(cfg.n, &obs, &make_fc, &make_true, &scope, &opts)?;
            let cell = format!("rho_true={};rho_fcst={}", fmt_f64(rho_true), fmt_f64(rho_fc));
            let mut rows = Vec::new();
            relch_dm_rows("sens1", &cell, (&candidate, &reference), &mut rows);
            Ok(rows)
        })
        .collect();

    let mut params = BTreeMap::new();
    params.insert("m".into(), cfg.m.into());
    params.insert("n".into(), cfg.n.into());
    params.insert("seed".into(), cfg.seed.master_seed.into());
    params.insert(
        "rho_true_grid".into(),
        serde_json::to_value(&cfg.rho_true_grid).unwrap(),
    );
    params.insert(
        "rho_forecast_grid".into(),
        serde_json::to_value(&cfg.rho_forecast_grid).unwrap(),
    );
    Ok(StudyReport::new(
        "sens1",
        params,
        chunks?.into_iter().flatten().collect(),
    ))
}

/// Distorted-setting sensitivity study configuration.
#[derive(Debug, Clone)]
pub struct Sens2Config {
    pub m: usize,
    pub n: usize,
    pub l: usize,
    pub delta: f64,
    pub rho: f64,
    pub seed: SeedSpec,
}

impl Sens2Config {
    pub fn desk_scale(seed: SeedSpec) -> Self {
        Self {
            m: 1 << 12,
            n: 1 << 7,
            l: 1 << 4,
            delta: DEFAULT_DELTA,
            rho: default_rho(),
            seed,
        }
    }

    pub fn paper_scale(seed: SeedSpec) -> Self {
        Self {
            m: 1 << 13,
            n: 1 << 8,
            l: 1 << 6,
            ..Self::desk_scale(seed)
        }
    }
}

pub const SENS2_SETTINGS: [&str; 7] = [
    "true",
    "mean_sym",
    "mean_asym",
    "var_small",
    "var_large",
    "corr_small",
    "corr_large",
];

fn sens2_setting_spec(
    setting: usize,
    rho: f64,
    c: &Study2Constants,
) -> Result<BivariateNormalSpec, ScoreError> {
    match setting {
        0 => BivariateNormalSpec::standard(rho),
        1 => BivariateNormalSpec::new(rho, [c.a1, c.a1], 1.0),
        2 => BivariateNormalSpec::new(rho, [c.a2, -c.a2], 1.0),
        3 => BivariateNormalSpec::new(rho, [0.0, 0.0], c.a3),
        4 => BivariateNormalSpec::new(rho, [0.0, 0.0], c.a4),
        5 => BivariateNormalSpec::standard(c.a5),
        6 => BivariateNormalSpec::standard(c.a6),
        _ => unreachable!(),
    }
}

/// Five-number summary (type-7 quantiles) or all-NA when no values exist.
fn five_number(values: &mut Vec<f64>) -> [Option<f64>; 5] {
    if values.is_empty() {
        return [None; 5];
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q = |p: f64| -> f64 {
        let pos = p * (values.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let frac = pos - lo as f64;
        if lo + 1 < values.len() {
            values[lo] + frac * (values[lo + 1] - values[lo])
        } else {
            values[lo]
        }
    };
    [Some(q(0.0)), Some(q(0.25)), Some(q(0.5)), Some(q(0.75)), Some(q(1.0))]
}

fn summary_rows(
    study: &str,
    cell: &str,
    score: &str,
    metric: &str,
    values: &mut Vec<f64>,
    rows: &mut Vec<TidyRow>,
) {
    let summary = five_number(values);
    for (suffix, value) in ["min", "q1", "median", "q3", "max"].iter().zip(summary) {
        rows.push(TidyRow::new(
            study,
            cell,
            score,
            &format!("{metric}_{suffix}"),
            value,
        ));
    }
}

/// Distorted-setting study: per setting, the distribution of RelCh and DM
/// statistics against the true model over `l` replications.
pub fn run_sensitivity_study_2(cfg: &Sens2Config) -> Result<StudyReport, ScoreError> {
    let constants = solve_study2_constants(cfg.delta, cfg.rho)?;
    let opts = ScoreOptions::default();
    let truth = BivariateNormalSpec::standard(cfg.rho)?;

    let mut jobs = Vec::new();
    for setting in 0..SENS2_SETTINGS.len() {
        for rep in 0..cfg.l {
            jobs.push((setting, rep));
        }
    }
    let results: Result<Vec<_>, ScoreError> = jobs
        .par_iter()
        .map(|&(setting, rep)| {
            let spec = sens2_setting_spec(setting, cfg.rho, &constants)?;
            let scope = cfg
                .seed
                .scope("sens2")
                .child(setting as u64)
                .child(rep as u64);
            let obs: Vec<ObservationPath> = (0..cfg.n)
                .map(|i| {
                    let mut rng = scope.child(i as u64).rng("obs");
                    ObservationPath::new(truth.draw(&mut rng).to_vec())
                })
                .collect::<Result<_, _>>()?;
            let make_setting = |i: usize| {
                let mut rng = scope.child(i as u64).rng("setting-ens");
                sample_bivariate_normal(&spec, cfg.m, &mut rng).expect("valid spec")
            };
            let make_true = |i: usize| {
                let mut rng = scope.child(i as u64).rng("true-ens");
                sample_bivariate_normal(&truth, cfg.m, &mut rng).expect("valid spec")
            };
            let (candidate, reference) = score_candidate_and_reference(
                cfg.n,
                &obs,
                &make_setting,
                &make_true,
                &scope,
                &opts,
            )?;
            let mut per_score = Vec::new();
            for kind in ScoreKind::ALL {
                let relch = match (candidate.aggregate(kind), reference.aggregate(kind)) {
                    (Ok(c), Ok(r)) if r != 0.0 => Some((c - r) / r),
                    _ => None,
                };
                let dm = match (candidate.series(kind), reference.series(kind)) {
                    (Ok(c), Ok(r)) => dm_test(c, r, DmVariance::Plain)
                        .ok()
                        .map(|d| d.statistic),
                    _ => None,
                };
                per_score.push((kind, relch, dm));
            }
            Ok((setting, per_score))
        })
        .collect();
    let results = results?;

    let mut rows = Vec::new();
    for setting in 0..SENS2_SETTINGS.len() {
        let cell = SENS2_SETTINGS[setting];
        for kind in ScoreKind::ALL {
            let mut relch_values: Vec<f64> = results
                .iter()
                .filter(|(s, _)| *s == setting)
                .filter_map(|(_, per)| {
                    per.iter().find(|(k, _, _)| *k == kind).and_then(|x| x.1)
                })
                .collect();
            let mut dm_values: Vec<f64> = results
                .iter()
                .filter(|(s, _)| *s == setting)
                .filter_map(|(_, per)| {
                    per.iter().find(|(k, _, _)| *k == kind).and_then(|x| x.2)
                })
                .collect();
            summary_rows("sens2", cell, kind.name(), "relch", &mut relch_values, &mut rows);
            summary_rows("sens2", cell, kind.name(), "dm", &mut dm_values, &mut rows);
        }
    }

    let mut params = BTreeMap::new();
    params.insert("m".into(), cfg.m.into());
    params.insert("n".into(), cfg.n.into());
    params.insert("l".into(), cfg.l.into());
    params.insert("delta".into(), cfg.delta.into());
    params.insert("rho".into(), cfg.rho.into());
    params.insert("seed".into(), cfg.seed.master_seed.into());
    params.insert(
        "constants".into(),
        serde_json::to_value(constants).unwrap(),
    );
    Ok(StudyReport::new("sens2", params, rows))
}

/// Random peak study configuration.
#[derive(Debug, Clone)]
pub struct PeakConfig {
    pub m: usize,
    pub n: usize,
    pub l: usize,
    pub h: usize,
    pub q: f64,
    pub seed: SeedSpec,
}

impl PeakConfig {
    pub fn desk_scale(seed: SeedSpec) -> Self {
        Self {
            m: 1 << 12,
            n: 1 << 5,
            l: 1 << 4,
            h: 3,
            q: 5.0,
            seed,
        }
    }

    pub fn paper_scale(seed: SeedSpec) -> Self {
        Self {
            m: 1 << 14,
            l: 1 << 6,
            ..Self::desk_scale(seed)
        }
    }
}

/// One replication of the peak study: DM statistic of every alternative
/// model against the true model, per score.
fn peak_replication(
    scope: &StreamScope,
    m: usize,
    n: usize,
    h: usize,
    q: f64,
    opts: &ScoreOptions,
) -> Result<Vec<(u8, ScoreKind, Option<f64>)>, ScoreError> {
    let truth = PeakModelSpec::new(1, h, q)?;
    let obs: Vec<ObservationPath> = (0..n)
        .map(|i| {
            let mut rng = scope.child(i as u64).rng("obs");
            ObservationPath::new(truth.draw(i + 1, &mut rng))
        })
        .collect::<Result<_, _>>()?;
    let make_ref = |i: usize| {
        let mut rng = scope.child(i as u64).rng("ens-model-1");
        sample_peak_model(&truth, i + 1, m, &mut rng).expect("valid spec")
    };
    let reference = score_windows(
        n,
        &|i| (make_ref(i), obs[i].clone()),
        &scope.child(1),
        opts,
        None,
    )?;

    let mut out = Vec::new();
    for model_id in 2u8..=8 {
        let spec = PeakModelSpec::new(model_id, h, q)?;
        let purpose = format!("ens-model-{model_id}");
        let make_alt = |i: usize| {
            let mut rng = scope.child(i as u64).rng(&purpose);
            sample_peak_model(&spec, i + 1, m, &mut rng).expect("valid spec")
        };
        let candidate = score_windows(
            n,
            &|i| (make_alt(i), obs[i].clone()),
            &scope.child(model_id as u64),
            opts,
            None,
        )?;
        for kind in ScoreKind::ALL {
            let dm = match (candidate.series(kind), reference.series(kind)) {
                (Ok(c), Ok(r)) => dm_test(c, r, DmVariance::Plain)
                    .ok()
                    .map(|d| d.statistic),
                _ => None,
            };
            out.push((model_id, kind, dm));
        }
    }
    Ok(out)
}

/// Random peak study: for each alternative model, the distribution of DM
/// statistics against the true model over `l` replications.
pub fn run_random_peak_study(cfg: &PeakConfig) -> Result<StudyReport, ScoreError> {
    let opts = ScoreOptions::default();
    let replications: Result<Vec<_>, ScoreError> = (0..cfg.l)
        .into_par_iter()
        .map(|rep| {
            let scope = cfg.seed.scope("peak").child(rep as u64);
            peak_replication(&scope, cfg.m, cfg.n, cfg.h, cfg.q, &opts)
        })
        .collect();
    let replications = replications?;

    let mut rows = Vec::new();
    for model_id in 2u8..=8 {
        let cell = peak_model_name(model_id);
        for kind in ScoreKind::ALL {
            let mut dm_values: Vec<f64> = replications
                .iter()
                .flatten()
                .filter(|(mid, k, _)| *mid == model_id && *k == kind)
                .filter_map(|(_, _, v)| *v)
                .collect();
            summary_rows("peak", cell, kind.name(), "dm", &mut dm_values, &mut rows);
        }
    }

    let mut params = BTreeMap::new();
    params.insert("m".into(), cfg.m.into());
    params.insert("n".into(), cfg.n.into());
    params.insert("l".into(), cfg.l.into());
    params.insert("h".into(), cfg.h.into());
    params.insert("q".into(), cfg.q.into());
    params.insert("seed".into(), cfg.seed.master_seed.into());
    Ok(StudyReport::new("peak", params, rows))
}

/// Ensemble-size sweep configuration.
#[derive(Debug, Clone)]
pub struct EnsembleSizeConfig {
    pub m_grid: Vec<usize>,
    pub n: usize,
    pub l: usize,
    pub h: usize,
    pub q: f64,
    pub seed: SeedSpec,
}

impl EnsembleSizeConfig {
    pub fn desk_scale(seed: SeedSpec) -> Self {
        Self {
            m_grid: (4..=10).map(|e| 1 << e).collect(),
            n: 1 << 4,
            l: 1 << 3,
            h: 3,
            q: 5.0,
            seed,
        }
    }

    pub fn paper_scale(seed: SeedSpec) -> Self {
        Self {
            m_grid: (4..=14).map(|e| 1 << e).collect(),
            n: 1 << 4,
            l: 1 << 7,
            h: 3,
            q: 5.0,
            seed,
        }
    }
}

/// Ensemble-size sweep of the peak study: mean DM statistic per ensemble
/// size, model, and score.
pub fn run_ensemble_size_study(cfg: &EnsembleSizeConfig) -> Result<StudyReport, ScoreError> {
    let opts = ScoreOptions::default();
    let mut jobs = Vec::new();
    for (gi, &m) in cfg.m_grid.iter().enumerate() {
        for rep in 0..cfg.l {
            jobs.push((gi, m, rep));
        }
    }
    let results: Result<Vec<_>, ScoreError> = jobs
        .par_iter()
        .map(|&(gi, m, rep)| {
            let scope = cfg
                .seed
                .scope("ensemble-size")
                .child(gi as u64)
                .child(rep as u64);
            let stats = peak_replication(&scope, m, cfg.n, cfg.h, cfg.q, &opts)?;
            Ok((gi, stats))
        })
        .collect();
    let results = results?;

    let mut rows = Vec::new();
    for (gi, &m) in cfg.m_grid.iter().enumerate() {
        for model_id in 2u8..=8 {
            let cell = format!("M={m};model={}", peak_model_name(model_id));
            for kind in ScoreKind::ALL {
                let values: Vec<f64> = results
                    .iter()
                    .filter(|(g, _)| *g == gi)
                    .flat_map(|(_, stats)| {
                        stats
                            .iter()
                            .filter(|(mid, k, _)| *mid == model_id && *k == kind)
                            .filter_map(|(_, _, v)| *v)
                    })
                    .collect();
                let mean = if values.is_empty() {
                    None
                } else {
                    Some(values.iter().sum::<f64>() / values.len() as f64)
                };
                rows.push(TidyRow::new(
                    "ensemble-size",
                    &cell,
                    kind.name(),
                    "dm_mean",
                    mean,
                ));
            }
        }
    }

    let mut params = BTreeMap::new();
    params.insert(
        "m_grid".into(),
        serde_json::to_value(&cfg.m_grid).unwrap(),
    );
    params.insert("n".into(), cfg.n.into());
    params.insert("l".into(), cfg.l.into());
    params.insert("h".into(), cfg.h.into());
    params.insert("q".into(), cfg.q.into());
    params.insert("seed".into(), cfg.seed.master_seed.into());
    Ok(StudyReport::new("ensemble-size", params, rows))
}
