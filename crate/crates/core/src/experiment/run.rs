use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::Result;
use crate::estimators::{
    bc_estimate, default_horizon, estimation_errors, ho_kalman_estimate, iv_estimate, ls_estimate, Estimate, Method,
};
use crate::numerics::{Matrix, RngStream};
use crate::system::{simulate, Trajectory};

/// Outcome of one estimator on one trajectory. Error fields are `None` when
/// the estimator failed (and `err_b` also for autonomous systems).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub estimator: Method,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub trial: usize,
    #[serde(rename = "err_A")]
    pub err_a: Option<f64>,
    #[serde(rename = "err_B")]
    pub err_b: Option<f64>,
    pub err_max: Option<f64>,
    pub gram_condition: Option<f64>,
    pub failed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub estimator: Method,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub n_ok: usize,
    pub n_failed: usize,
    /// `None` when every trial failed.
    pub median: Option<f64>,
    pub q1: Option<f64>,
    pub q3: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    /// Sorted by (estimator position in the config, T, trial).
    pub records: Vec<TrialRecord>,
    pub summary: Vec<SummaryRow>,
    pub config: ExperimentConfig,
}

impl ExperimentResult {
    pub fn summary_for(&self, estimator: Method, horizon: usize) -> Option<&SummaryRow> {
        self.summary.iter().find(|s| s.estimator == estimator && s.horizon == horizon)
    }

    /// Median `err_max` for the given estimator and horizon.
    pub fn median(&self, estimator: Method, horizon: usize) -> Option<f64> {
        self.summary_for(estimator, horizon).and_then(|s| s.median)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Trials spread over the rayon pool; identical to `Sequential` when the
    /// `parallel` feature is off.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    run_experiment_with(cfg, Execution::default())
}

/// Runs every requested estimator on one trajectory per `(trial, T)`.
///
/// Each trial draws its noise from streams keyed by `(master_seed, trial)`,
/// and shorter horizons reuse the prefix of the longest one, so all
/// estimators and all horizons within a trial see the same sample path.
/// Estimator failures are recorded, never propagated.
pub fn run_experiment_with(cfg: &ExperimentConfig, execution: Execution) -> Result<ExperimentResult> {
    cfg.validate()?;
    let sigma_eta_hat = cfg.sigma_eta_hat.resolve(&cfg.system)?;
    let unit = |trial: usize| run_trial(cfg, &sigma_eta_hat, trial);

    let per_trial: Vec<Result<Vec<TrialRecord>>> = match execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..cfg.trials).into_par_iter().map(unit).collect()
        }
        _ => (0..cfg.trials).map(unit).collect(),
    };
    let mut records = Vec::with_capacity(cfg.trials * cfg.t_grid.len() * cfg.estimators.len());
    for trial in per_trial {
        records.extend(trial?);
    }
    let position = |m: Method| cfg.estimators.iter().position(|&e| e == m).unwrap_or(usize::MAX);
    records.sort_by_key(|r| (position(r.estimator), r.horizon, r.trial));

    let summary = summarize(cfg, &records);
    Ok(ExperimentResult { records, summary, config: cfg.clone() })
}

fn run_trial(cfg: &ExperimentConfig, sigma_eta_hat: &Matrix, trial: usize) -> Result<Vec<TrialRecord>> {
    let longest = *cfg.t_grid.last().expect("validated non-empty grid");
    let stream = RngStream::new(cfg.master_seed, "", trial as u64);
    let full = simulate(&cfg.system, longest, &stream)?;
    let mut out = Vec::with_capacity(cfg.t_grid.len() * cfg.estimators.len());
    for &horizon in &cfg.t_grid {
        let traj = if horizon == longest { full.clone() } else { full.truncated(horizon)? };
        for &method in &cfg.estimators {
            out.push(evaluate(cfg, &traj, sigma_eta_hat, method, horizon, trial));
        }
    }
    Ok(out)
}

fn estimate(cfg: &ExperimentConfig, traj: &Trajectory, sigma_eta_hat: &Matrix, method: Method) -> Result<Estimate> {
    match method {
        Method::LeastSquares => ls_estimate(traj),
        Method::InstrumentalVariable => iv_estimate(traj),
        Method::BiasCompensation => bc_estimate(traj, sigma_eta_hat),
        Method::HoKalman => {
            ho_kalman_estimate(traj, cfg.ho_kalman_k.unwrap_or_else(|| default_horizon(traj.state_dim())))
        }
    }
}

fn evaluate(
    cfg: &ExperimentConfig,
    traj: &Trajectory,
    sigma_eta_hat: &Matrix,
    method: Method,
    horizon: usize,
    trial: usize,
) -> TrialRecord {
    let outcome = estimate(cfg, traj, sigma_eta_hat, method)
        .and_then(|est| estimation_errors(&est, &cfg.system).map(|errs| (errs, est.gram_condition)));
    match outcome {
        Ok((errs, condition)) => TrialRecord {
            estimator: method,
            horizon,
            trial,
            err_a: Some(errs.a),
            err_b: errs.b,
            err_max: Some(errs.max()),
            gram_condition: Some(condition),
            failed: false,
        },
        Err(_) => TrialRecord {
            estimator: method,
            horizon,
            trial,
            err_a: None,
            err_b: None,
            err_max: None,
            gram_condition: None,
            failed: true,
        },
    }
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub(crate) fn summarize(cfg: &ExperimentConfig, records: &[TrialRecord]) -> Vec<SummaryRow> {
    let mut rows = Vec::new();
    for &estimator in &cfg.estimators {
        for &horizon in &cfg.t_grid {
            let group = records.iter().filter(|r| r.estimator == estimator && r.horizon == horizon);
            let mut errors: Vec<f64> = group.clone().filter_map(|r| r.err_max).collect();
            let n_failed = group.filter(|r| r.failed).count();
            errors.sort_by(f64::total_cmp);
            let stat = |p| (!errors.is_empty()).then(|| quantile(&errors, p));
            rows.push(SummaryRow {
                estimator,
                horizon,
                n_ok: errors.len(),
                n_failed,
                median: stat(0.5),
                q1: stat(0.25),
                q3: stat(0.75),
            });
        }
    }
    rows
}
