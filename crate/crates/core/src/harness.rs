//! Monte Carlo experiments: rejection rates of the max-overlap test under
//! both hypotheses across a grid of correlation levels.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{er_s2_threshold, gaussian_rho2_threshold};
use crate::error::{Error, Result};
use crate::models::{sample, ErSpec, GaussianSpec, Hypothesis, ModelSpec};
use crate::rng::{stream, Domain, StreamKey};
use crate::statistics::{
    asymptotic_threshold, compute_statistic, null_statistic, upper_quantile, StatisticMethod,
    ThresholdKind, MIN_CALIBRATION_TRIALS,
};

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ThresholdConfig {
    Asymptotic,
    Calibrated { level: f64, null_trials: usize },
}

impl ThresholdConfig {
    pub fn kind(&self) -> ThresholdKind {
        match self {
            ThresholdConfig::Asymptotic => ThresholdKind::Asymptotic,
            ThresholdConfig::Calibrated { .. } => ThresholdKind::Calibrated,
        }
    }
}

/// Grid over the model's correlation parameter (ρ for Gaussian, s for ER).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sweep {
    /// Multiples `c` of the detection threshold on ρ² (or s²).
    Multiples(Vec<f64>),
    /// Parameter values given directly.
    Values(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub trials: usize,
    pub statistic: StatisticMethod,
    pub threshold: ThresholdConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    pub master_seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

fn default_workers() -> usize {
    1
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::param("trials must be at least 1"));
        }
        if self.workers < 1 {
            return Err(Error::param("workers must be at least 1"));
        }
        if let ThresholdConfig::Calibrated { level, null_trials } = self.threshold {
            if !(level > 0.0 && level < 1.0) {
                return Err(Error::param(format!(
                    "calibrated level must lie in (0, 1), got {level}"
                )));
            }
            if null_trials < MIN_CALIBRATION_TRIALS {
                return Err(Error::param(format!(
                    "null_trials must be at least {MIN_CALIBRATION_TRIALS}, got {null_trials}"
                )));
            }
        }
        match &self.sweep {
            Some(Sweep::Multiples(cs)) => {
                if let Some(c) = cs.iter().find(|c| !(**c > 0.0 && c.is_finite())) {
                    return Err(Error::param(format!(
                        "grid multiples must be positive, got {c}"
                    )));
                }
            }
            Some(Sweep::Values(vs)) => {
                if let Some(v) = vs.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
                    return Err(Error::param(format!(
                        "grid values must be nonnegative, got {v}"
                    )));
                }
            }
            None => {}
        }
        if let StatisticMethod::Exact { limit } = self.statistic {
            if self.model.n() > limit {
                return Err(Error::Refused(format!(
                    "exact statistic needs n <= {limit}, got n = {}",
                    self.model.n()
                )));
            }
        }
        self.model.validate()
    }

    /// Detection threshold on ρ² (Gaussian) or s² (ER), when defined.
    fn squared_threshold(&self) -> Option<f64> {
        let (n, m) = (self.model.n(), self.model.m());
        let eval = match self.model {
            ModelSpec::Gaussian(_) => gaussian_rho2_threshold(n, m),
            ModelSpec::Er(e) => er_s2_threshold(n, m, e.p),
        };
        eval.ok()
            .map(|e| e.value)
            .filter(|v| v.is_finite() && *v > 0.0)
    }

    fn parameter(&self) -> f64 {
        match self.model {
            ModelSpec::Gaussian(g) => g.rho,
            ModelSpec::Er(e) => e.s,
        }
    }
}

/// Copy of `model` with its correlation parameter replaced.
fn with_parameter(model: &ModelSpec, x: f64) -> ModelSpec {
    match *model {
        ModelSpec::Gaussian(g) => ModelSpec::Gaussian(GaussianSpec { rho: x, ..g }),
        ModelSpec::Er(e) => ModelSpec::Er(ErSpec { s: x, ..e }),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisSummary {
    pub trials: usize,
    pub rejections: usize,
    pub rejection_rate: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    pub mean_statistic: f64,
    pub sd_statistic: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub index: usize,
    /// Multiple of the squared detection threshold; derived from the
    /// parameter when the grid lists values.
    pub c: Option<f64>,
    /// ρ for Gaussian, s for ER.
    pub parameter: f64,
    pub skipped: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skip_reason: Option<String>,
    pub threshold: Option<f64>,
    pub threshold_kind: ThresholdKind,
    pub degenerate: bool,
    pub h0: Option<HypothesisSummary>,
    pub h1: Option<HypothesisSummary>,
    /// `|rate_H1 − rate_H0|`, a plug-in lower bound on total variation.
    pub tv_lower_bound: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub points: Vec<GridPoint>,
    pub runtime_seconds: f64,
}

impl ExperimentReport {
    /// True when no grid point produced a usable test.
    pub fn only_infeasible(&self) -> bool {
        self.points.iter().all(|p| p.skipped || p.degenerate)
    }
}

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    (
        (center - half).min(p).max(0.0),
        (center + half).max(p).min(1.0),
    )
}

fn summarize(stats: &[f64], threshold: f64) -> HypothesisSummary {
    let trials = stats.len();
    let rejections = stats.iter().filter(|&&t| t >= threshold).count();
    let mean = stats.iter().sum::<f64>() / trials as f64;
    let sd = if trials > 1 {
        (stats.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (trials - 1) as f64).sqrt()
    } else {
        0.0
    };
    let (wilson_low, wilson_high) = wilson_interval(rejections, trials);
    HypothesisSummary {
        trials,
        rejections,
        rejection_rate: rejections as f64 / trials as f64,
        wilson_low,
        wilson_high,
        mean_statistic: mean,
        sd_statistic: sd,
    }
}

struct Planned {
    c: Option<f64>,
    parameter: f64,
    model: Option<ModelSpec>,
    skip_reason: Option<String>,
}

fn plan(config: &ExperimentConfig) -> Vec<Planned> {
    let threshold = config.squared_threshold();
    let upper_ok = |x: f64| match config.model {
        ModelSpec::Gaussian(_) => x < 1.0,
        ModelSpec::Er(_) => x <= 1.0,
    };
    let build = |c: Option<f64>, x: f64| {
        let candidate = with_parameter(&config.model, x);
        let skip_reason = if !upper_ok(x) {
            Some(format!("parameter {x} outside the admissible range"))
        } else {
            candidate.validate().err().map(|e| e.to_string())
        };
        Planned {
            c,
            parameter: x,
            model: skip_reason.is_none().then_some(candidate),
            skip_reason,
        }
    };
    let implied = |x: f64| threshold.map(|t| x * x / t);
    match &config.sweep {
        None => vec![build(implied(config.parameter()), config.parameter())],
        Some(Sweep::Values(vs)) => vs.iter().map(|&x| build(implied(x), x)).collect(),
        Some(Sweep::Multiples(cs)) => cs
            .iter()
            .map(|&c| match threshold {
                Some(t) if c * t >= 1.0 && matches!(config.model, ModelSpec::Gaussian(_)) => {
                    Planned {
                        c: Some(c),
                        parameter: (c * t).sqrt(),
                        model: None,
                        skip_reason: Some(format!("rho^2 = {} >= 1", c * t)),
                    }
                }
                Some(t) if c * t > 1.0 => Planned {
                    c: Some(c),
                    parameter: (c * t).sqrt(),
                    model: None,
                    skip_reason: Some(format!("s^2 = {} > 1", c * t)),
                },
                Some(t) => build(Some(c), (c * t).sqrt()),
                None => Planned {
                    c: Some(c),
                    parameter: f64::NAN,
                    model: None,
                    skip_reason: Some("detection threshold undefined for this (n, m)".into()),
                },
            })
            .collect(),
    }
}

/// Runs every grid point. Each draw comes from its own stream keyed by
/// `(domain, grid index, trial)`, and records are reduced in
/// `(grid, hypothesis, trial)` order, so the report does not depend on the
/// worker count.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let started = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::param(format!("cannot build worker pool: {e}")))?;
    let planned = plan(config);
    let seed = config.master_seed;
    let method = config.statistic;

    let points = pool.install(|| -> Result<Vec<GridPoint>> {
        // Thresholds first: one per feasible grid point.
        let thresholds: Vec<Option<(f64, bool)>> = match config.threshold {
            ThresholdConfig::Asymptotic => planned
                .iter()
                .map(|p| {
                    p.model
                        .as_ref()
                        .map(|m| asymptotic_threshold(m).map(|t| (t.value, t.degenerate)))
                        .transpose()
                })
                .collect::<Result<_>>()?,
            ThresholdConfig::Calibrated { level, null_trials } => {
                let tasks: Vec<(usize, &ModelSpec, u64)> = planned
                    .iter()
                    .enumerate()
                    .filter_map(|(g, p)| p.model.as_ref().map(|m| (g, m)))
                    .flat_map(|(g, m)| (0..null_trials as u64).map(move |t| (g, m, t)))
                    .collect();
                let stats: Vec<f64> = tasks
                    .par_iter()
                    .map(|&(g, m, t)| null_statistic(m, method, seed, g as u64, t))
                    .collect::<Result<_>>()?;
                let mut chunks = stats.chunks(null_trials);
                planned
                    .iter()
                    .map(|p| match p.model {
                        Some(_) => {
                            let chunk = chunks.next().expect("one chunk per feasible point");
                            upper_quantile(chunk, level).map(|q| Some((q, false)))
                        }
                        None => Ok(None),
                    })
                    .collect::<Result<_>>()?
            }
        };

        let trials = config.trials as u64;
        let tasks: Vec<(usize, Hypothesis, u64)> = planned
            .iter()
            .enumerate()
            .filter(|(_, p)| p.model.is_some())
            .flat_map(|(g, _)| {
                [Hypothesis::H0, Hypothesis::H1]
                    .into_iter()
                    .flat_map(move |h| (0..trials).map(move |t| (g, h, t)))
            })
            .collect();
        let stats: Vec<f64> = tasks
            .par_iter()
            .map(|&(g, hyp, t)| {
                let domain = match hyp {
                    Hypothesis::H0 => Domain::Null,
                    Hypothesis::H1 => Domain::Alternative,
                };
                let mut rng = stream(seed, StreamKey::new(domain, g as u64, t));
                let model = planned[g].model.as_ref().expect("feasible point");
                let pair = sample(model, hyp, &mut rng)?;
                Ok(compute_statistic(&pair, method, &mut rng)?.value)
            })
            .collect::<Result<_>>()?;

        let per_point = config.trials * 2;
        let mut chunks = stats.chunks(per_point);
        let kind = config.threshold.kind();
        Ok(planned
            .iter()
            .enumerate()
            .map(|(index, p)| match (&p.model, thresholds[index]) {
                (Some(_), Some((threshold, degenerate))) => {
                    let chunk = chunks.next().expect("one chunk per feasible point");
                    let (null, alt) = chunk.split_at(config.trials);
                    let h0 = summarize(null, threshold);
                    let h1 = summarize(alt, threshold);
                    let tv = (h1.rejection_rate - h0.rejection_rate).abs();
                    GridPoint {
                        index,
                        c: p.c,
                        parameter: p.parameter,
                        skipped: false,
                        skip_reason: None,
                        threshold: Some(threshold),
                        threshold_kind: kind,
                        degenerate,
                        h0: Some(h0),
                        h1: Some(h1),
                        tv_lower_bound: Some(tv),
                    }
                }
                _ => GridPoint {
                    index,
                    c: p.c,
                    parameter: p.parameter,
                    skipped: true,
                    skip_reason: p.skip_reason.clone(),
                    threshold: None,
                    threshold_kind: kind,
                    degenerate: true,
                    h0: None,
                    h1: None,
                    tv_lower_bound: None,
                },
            })
            .collect())
    })?;

    Ok(ExperimentReport {
        config: config.clone(),
        points,
        runtime_seconds: started.elapsed().as_secs_f64(),
    })
}

/// One line of the sweep CSV. Rates are empty for skipped points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub model: String,
    pub n: usize,
    pub m: usize,
    pub c: Option<f64>,
    pub rho_or_s: f64,
    pub threshold_kind: ThresholdKind,
    pub reject_rate_h0: Option<f64>,
    pub reject_rate_h1: Option<f64>,
    pub ci_lo_h1: Option<f64>,
    pub ci_hi_h1: Option<f64>,
    pub degenerate: bool,
}

const SWEEP_HEADER: [&str; 11] = [
    "model",
    "n",
    "m",
    "c",
    "rho_or_s",
    "threshold_kind",
    "reject_rate_h0",
    "reject_rate_h1",
    "ci_lo_h1",
    "ci_hi_h1",
    "degenerate",
];

pub fn sweep_rows(report: &ExperimentReport) -> Vec<SweepRow> {
    let model = &report.config.model;
    report
        .points
        .iter()
        .map(|p| SweepRow {
            model: model.name().to_string(),
            n: model.n(),
            m: model.m(),
            c: p.c,
            rho_or_s: p.parameter,
            threshold_kind: p.threshold_kind,
            reject_rate_h0: p.h0.as_ref().map(|h| h.rejection_rate),
            reject_rate_h1: p.h1.as_ref().map(|h| h.rejection_rate),
            ci_lo_h1: p.h1.as_ref().map(|h| h.wilson_low),
            ci_hi_h1: p.h1.as_ref().map(|h| h.wilson_high),
            degenerate: p.degenerate,
        })
        .collect()
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Format {
            path: path.to_path_buf(),
            message: format!("{other:?}"),
        },
    }
}

pub fn write_sweep_rows(rows: &[SweepRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    writer
        .write_record(SWEEP_HEADER)
        .map_err(|e| csv_err(path, e))?;
    for row in rows {
        writer.serialize(row).map_err(|e| csv_err(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

pub fn sweep_to_csv(report: &ExperimentReport, path: impl AsRef<Path>) -> Result<()> {
    write_sweep_rows(&sweep_rows(report), path)
}

pub fn read_sweep_csv(path: impl AsRef<Path>) -> Result<Vec<SweepRow>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header = reader.headers().map_err(|e| csv_err(path, e))?.clone();
    if header.iter().ne(SWEEP_HEADER) {
        return Err(Error::Format {
            path: path.to_path_buf(),
            message: format!("unexpected header {header:?}"),
        });
    }
    reader
        .deserialize()
        .map(|r| r.map_err(|e| csv_err(path, e)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_config(rho: f64, trials: usize, sweep: Option<Sweep>) -> ExperimentConfig {
        ExperimentConfig {
            model: ModelSpec::Gaussian(GaussianSpec::new(5, 3, rho).unwrap()),
            trials,
            statistic: StatisticMethod::exact(),
            threshold: ThresholdConfig::Calibrated {
                level: 0.05,
                null_trials: 40,
            },
            sweep,
            master_seed: 17,
            workers: 1,
        }
    }

    #[test]
    fn wilson_contains_estimate() {
        for trials in [1, 5, 40, 200] {
            for k in 0..=trials {
                let (lo, hi) = wilson_interval(k, trials);
                let p = k as f64 / trials as f64;
                assert!(0.0 <= lo && lo <= p && p <= hi && hi <= 1.0);
            }
        }
        let (lo, hi) = wilson_interval(10, 20);
        assert!((lo - 0.299_298_6).abs() < 1e-6 && (hi - 0.700_701_4).abs() < 1e-6);
    }

    #[test]
    fn smoke_single_trial() {
        let report =
            run_experiment(&gaussian_config(0.0, 1, Some(Sweep::Values(vec![0.0])))).unwrap();
        assert_eq!(report.points.len(), 1);
        let p = &report.points[0];
        for h in [p.h0.as_ref().unwrap(), p.h1.as_ref().unwrap()] {
            assert!(h.rejection_rate == 0.0 || h.rejection_rate == 1.0);
            assert!(h.wilson_low <= h.rejection_rate && h.rejection_rate <= h.wilson_high);
        }
    }

    #[test]
    fn infeasible_points_are_skipped() {
        let report = run_experiment(&gaussian_config(
            0.0,
            2,
            Some(Sweep::Multiples(vec![0.1, 5.0])),
        ))
        .unwrap();
        // Threshold at (5,3) is 2·5·ln5/10 ≈ 1.609, so c = 5 overshoots.
        assert!(!report.points[0].skipped);
        assert!(report.points[1].skipped);
        assert!(report.points[1].h1.is_none());
        let all_bad =
            run_experiment(&gaussian_config(0.0, 2, Some(Sweep::Multiples(vec![5.0])))).unwrap();
        assert!(all_bad.only_infeasible());
    }

    #[test]
    fn config_validation() {
        assert!(run_experiment(&gaussian_config(0.0, 0, None)).is_err());
        let mut c = gaussian_config(0.0, 1, Some(Sweep::Multiples(vec![-1.0])));
        assert!(matches!(run_experiment(&c), Err(Error::Parameter(_))));
        c.sweep = None;
        c.threshold = ThresholdConfig::Calibrated {
            level: 1.0,
            null_trials: 40,
        };
        assert!(run_experiment(&c).is_err());
        c.threshold = ThresholdConfig::Calibrated {
            level: 0.05,
            null_trials: 10,
        };
        assert!(run_experiment(&c).is_err());
        let big = ExperimentConfig {
            model: ModelSpec::Gaussian(GaussianSpec::new(10, 3, 0.5).unwrap()),
            ..gaussian_config(0.0, 1, None)
        };
        assert!(matches!(run_experiment(&big), Err(Error::Refused(_))));
    }

    #[test]
    fn config_json_shape() {
        let text = r#"{
            "model": {"kind": "er", "n": 6, "m": 3, "p": 0.5, "s": 0.8},
            "trials": 10,
            "statistic": {"kind": "heuristic", "restarts": 2},
            "threshold": {"kind": "asymptotic"},
            "sweep": {"values": [0.2, 0.9]},
            "master_seed": 3,
            "workers": 2
        }"#;
        let config: ExperimentConfig = serde_json::from_str(text).unwrap();
        assert_eq!(config.statistic, StatisticMethod::Heuristic { restarts: 2 });
        assert_eq!(config.sweep, Some(Sweep::Values(vec![0.2, 0.9])));
        let back: ExperimentConfig =
            serde_json::from_str(&serde_json::to_string(&config).unwrap()).unwrap();
        assert_eq!(back, config);
        let report = run_experiment(&config).unwrap();
        assert_eq!(report.points.len(), 2);
        assert_eq!(report.points[0].threshold_kind, ThresholdKind::Asymptotic);
    }

    #[test]
    fn csv_shapes_and_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let empty = ExperimentReport {
            config: gaussian_config(0.0, 1, None),
            points: vec![],
            runtime_seconds: 0.0,
        };
        let path = dir.path().join("empty.csv");
        sweep_to_csv(&empty, &path).unwrap();
        assert_eq!(
            std::fs::read_to_string(&path).unwrap(),
            "model,n,m,c,rho_or_s,threshold_kind,reject_rate_h0,reject_rate_h1,ci_lo_h1,ci_hi_h1,degenerate\n"
        );

        let config = gaussian_config(
            0.0,
            3,
            Some(Sweep::Multiples(vec![0.1, 0.2, 0.4, 0.6, 5.0])),
        );
        let report = run_experiment(&config).unwrap();
        let path = dir.path().join("five.csv");
        sweep_to_csv(&report, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 6);
        let rows = read_sweep_csv(&path).unwrap();
        assert_eq!(rows, sweep_rows(&report));
        let again = dir.path().join("again.csv");
        write_sweep_rows(&rows, &again).unwrap();
        assert_eq!(std::fs::read(&again).unwrap(), text.as_bytes());

        let missing = dir.path().join("no/such/dir/out.csv");
        let err = sweep_to_csv(&report, &missing).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        assert!(err.to_string().contains("out.csv"));
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let mut config = gaussian_config(0.0, 8, Some(Sweep::Values(vec![0.0, 0.6, 0.9])));
        config.statistic = StatisticMethod::Heuristic { restarts: 2 };
        let one = run_experiment(&config).unwrap();
        config.workers = 4;
        let four = run_experiment(&config).unwrap();
        assert_eq!(one.points, four.points);
    }
}
