//! Verdicts on worker reports.
//!
//! Three tiers, from most to least reliable:
//!
//! * ground truth collected by employees, radius `eps1`;
//! * the first estimated truth, an authenticity-weighted mean over highly
//!   trustworthy reporters only, radius `eps2`;
//! * the second estimated truth, the same estimator over every recruited
//!   reporter on the task, radius `eps3`.
//!
//! The estimator alternates a weighted mean with an authenticity update
//! `λ_i = n / (v_i − û)²`, where `n` counts participating reporters. λ starts
//! at the reporter's sample-mean SR and is clamped to `[lambda_min,
//! lambda_max]` so that a report equal to the estimate stays finite.

use std::collections::BTreeMap;

use crate::bandit::{Profiles, TrustSet};
use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::types::{TaskId, WorkerId};
use crate::world::{GroundTruth, RoundReport, RoundTruths};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tier {
    Gtd,
    FirstEtd,
    SecondEtd,
}

impl Tier {
    pub fn as_str(self) -> &'static str {
        match self {
            Tier::Gtd => "gtd",
            Tier::FirstEtd => "first-etd",
            Tier::SecondEtd => "second-etd",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub eps1: f64,
    pub eps2: f64,
    pub eps3: f64,
}

impl Thresholds {
    pub fn from_config(config: &SimConfig) -> Self {
        Thresholds {
            eps1: config.eps1,
            eps2: config.eps2,
            eps3: config.eps3,
        }
    }

    pub fn for_tier(&self, tier: Tier) -> f64 {
        match tier {
            Tier::Gtd => self.eps1,
            Tier::FirstEtd => self.eps2,
            Tier::SecondEtd => self.eps3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtdParams {
    pub tol: f64,
    pub max_iters: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

impl EtdParams {
    pub fn from_config(config: &SimConfig) -> Self {
        EtdParams {
            tol: config.etd_tol,
            max_iters: config.etd_max_iters,
            lambda_min: config.lambda_min,
            lambda_max: config.lambda_max,
        }
    }
}

impl Default for EtdParams {
    fn default() -> Self {
        EtdParams::from_config(&SimConfig::default())
    }
}

/// One report entering an estimate, with its initial authenticity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reporter {
    pub worker: WorkerId,
    pub value: f64,
    pub prior: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EtdEstimate {
    pub task: TaskId,
    pub round: u32,
    pub value: f64,
    pub tier: Tier,
    pub authenticity: Vec<(WorkerId, f64)>,
    /// Authenticity updates performed.
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub worker: WorkerId,
    pub task: TaskId,
    pub round: u32,
    pub accepted: bool,
    pub tier: Tier,
    pub reference: f64,
    pub reported: f64,
    pub threshold: f64,
}

fn verdict(report: &RoundReport, tier: Tier, reference: f64, threshold: f64) -> Verdict {
    Verdict {
        worker: report.worker,
        task: report.task,
        round: report.round,
        accepted: (report.reported_value - reference).abs() < threshold,
        tier,
        reference,
        reported: report.reported_value,
        threshold,
    }
}

pub fn verify_supervised(report: &RoundReport, gtd: &GroundTruth, eps1: f64) -> Verdict {
    verdict(report, Tier::Gtd, gtd.value, eps1)
}

/// Weighted mean, shifted by the minimum so that identical values come back
/// exactly and the result cannot leave the reports' hull through rounding.
fn weighted_mean(values: &[f64], weights: &[f64], lo: f64, hi: f64) -> f64 {
    let (num, den) = values
        .iter()
        .zip(weights)
        .fold((0.0, 0.0), |(n, d), (v, w)| (n + w * (v - lo), d + w));
    (lo + num / den).clamp(lo, hi)
}

/// Runs the alternating estimator over `reporters`.
fn fixed_point(reporters: &[Reporter], params: &EtdParams) -> (f64, Vec<f64>, usize, bool) {
    let values: Vec<f64> = reporters.iter().map(|r| r.value).collect();
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let count = reporters.len() as f64;
    let clamp = |x: f64| x.clamp(params.lambda_min, params.lambda_max);

    let mut lambdas: Vec<f64> = reporters.iter().map(|r| clamp(r.prior)).collect();
    let mut estimate = weighted_mean(&values, &lambdas, lo, hi);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < params.max_iters {
        for (lambda, v) in lambdas.iter_mut().zip(&values) {
            let sq = (v - estimate) * (v - estimate);
            *lambda = if sq > 0.0 { clamp(count / sq) } else { params.lambda_max };
        }
        iterations += 1;
        let next = weighted_mean(&values, &lambdas, lo, hi);
        let delta = (next - estimate).abs();
        estimate = next;
        if delta < params.tol {
            converged = true;
            break;
        }
    }
    (estimate, lambdas, iterations, converged)
}

fn estimate(task: TaskId, round: u32, tier: Tier, reporters: &[Reporter], params: &EtdParams) -> Result<EtdEstimate> {
    if reporters.is_empty() {
        return Err(Error::Precondition(format!(
            "{} for task {task} round {round} has no reporters",
            tier.as_str()
        )));
    }
    let (value, lambdas, iterations, converged) = fixed_point(reporters, params);
    Ok(EtdEstimate {
        task,
        round,
        value,
        tier,
        authenticity: reporters.iter().map(|r| r.worker).zip(lambdas).collect(),
        iterations,
        converged,
    })
}

/// Estimate over the highly trustworthy reporters of one task.
pub fn estimate_first_etd(task: TaskId, round: u32, reporters: &[Reporter], params: &EtdParams) -> Result<EtdEstimate> {
    estimate(task, round, Tier::FirstEtd, reporters, params)
}

/// Estimate over every recruited reporter of one task.
pub fn estimate_second_etd(task: TaskId, round: u32, reporters: &[Reporter], params: &EtdParams) -> Result<EtdEstimate> {
    estimate(task, round, Tier::SecondEtd, reporters, params)
}

/// How a round is verified.
#[derive(Debug, Clone, Copy)]
pub enum JudgeMode<'a> {
    /// Supervised: employees collected ground truth for every task.
    Exploration(&'a RoundTruths),
    /// Self-supervised: estimates only.
    Exploitation,
}

/// Judges every report of a round. Verdicts come back in report order.
pub fn judge_round(
    reports: &[RoundReport],
    mode: JudgeMode<'_>,
    trust: &TrustSet,
    profiles: &Profiles,
    thresholds: &Thresholds,
    params: &EtdParams,
) -> Result<Vec<Verdict>> {
    match mode {
        JudgeMode::Exploration(truths) => reports
            .iter()
            .map(|r| {
                let gtd = crate::world::collect_gtd(r.task, r.round, truths).map_err(|_| {
                    Error::Internal(format!(
                        "exploration round {} lacks ground truth for task {}",
                        r.round, r.task
                    ))
                })?;
                Ok(verify_supervised(r, &gtd, thresholds.eps1))
            })
            .collect(),
        JudgeMode::Exploitation => {
            let mut by_task: BTreeMap<TaskId, Vec<usize>> = BTreeMap::new();
            for (i, r) in reports.iter().enumerate() {
                by_task.entry(r.task).or_default().push(i);
            }
            let mut out: Vec<Option<Verdict>> = vec![None; reports.len()];
            for (task, idx) in by_task {
                let round = reports[idx[0]].round;
                let reporter = |i: &usize| Reporter {
                    worker: reports[*i].worker,
                    value: reports[*i].reported_value,
                    prior: profiles.get(reports[*i].worker).sr_mean(),
                };
                let trusted: Vec<Reporter> = idx
                    .iter()
                    .filter(|i| trust.contains(reports[**i].worker))
                    .map(reporter)
                    .collect();
                let est = if trusted.is_empty() {
                    let all: Vec<Reporter> = idx.iter().map(reporter).collect();
                    estimate_second_etd(task, round, &all, params)?
                } else {
                    estimate_first_etd(task, round, &trusted, params)?
                };
                let threshold = thresholds.for_tier(est.tier);
                for i in idx {
                    out[i] = Some(verdict(&reports[i], est.tier, est.value, threshold));
                }
            }
            Ok(out.into_iter().map(|v| v.expect("every report belongs to a task")).collect())
        }
    }
}
