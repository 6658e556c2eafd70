//! Simulation configuration.
//!
//! The config file is flat TOML: every key maps to one [`SimConfig`] field and
//! every key is optional. Missing keys take the defaults below, which follow
//! the standard simulation setting (M = 40 tasks, 5 to 15 preferred tasks,
//! per-task cost in [0.1, 1], B = 10 000, N = 100, K = 10).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One bucket of the split-bucket sensing-rate generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SrBucket {
    pub lo: f64,
    pub hi: f64,
    pub fraction: f64,
}

impl SrBucket {
    pub const fn new(lo: f64, hi: f64, fraction: f64) -> Self {
        SrBucket { lo, hi, fraction }
    }

    pub fn contains(&self, r: f64) -> bool {
        r >= self.lo && r <= self.hi
    }
}

/// Four equal buckets, highest first: [0.8,1], [0.6,0.8], [0.4,0.6], [0,0.4].
pub fn default_buckets() -> Vec<SrBucket> {
    vec![
        SrBucket::new(0.8, 1.0, 0.25),
        SrBucket::new(0.6, 0.8, 0.25),
        SrBucket::new(0.4, 0.6, 0.25),
        SrBucket::new(0.0, 0.4, 0.25),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Total budget B.
    pub budget: f64,
    /// Number of tasks M.
    pub tasks: usize,
    /// Number of workers N.
    pub workers: usize,
    /// Winners recruited per round, K.
    pub winners: usize,
    pub pref_min: usize,
    pub pref_max: usize,
    pub cost_min: f64,
    pub cost_max: f64,
    /// Exploration weight in the UCB bonus.
    pub delta: f64,
    /// Sample-mean SR above which a worker is highly trustworthy.
    pub theta: f64,
    /// Acceptance radius against ground truth.
    pub eps1: f64,
    /// Acceptance radius against the trusted-worker estimate.
    pub eps2: f64,
    /// Acceptance radius against the all-worker estimate.
    pub eps3: f64,
    pub value_min: f64,
    pub value_max: f64,
    pub base_min: f64,
    pub base_max: f64,
    /// Per-task weights; `None` means uniform weight 1.
    pub task_weights: Option<Vec<f64>>,
    pub sr_buckets: Vec<SrBucket>,
    pub etd_tol: f64,
    pub etd_max_iters: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub seed: u64,
    pub replications: usize,
    /// Optional CSV (`task_id,round,value`) overriding drawn ground truth.
    pub ground_truth_path: Option<PathBuf>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            budget: 10_000.0,
            tasks: 40,
            workers: 100,
            winners: 10,
            pref_min: 5,
            pref_max: 15,
            cost_min: 0.1,
            cost_max: 1.0,
            delta: 2.0,
            theta: 0.8,
            eps1: 1.0,
            eps2: 2.5,
            eps3: 5.0,
            value_min: 0.0,
            value_max: 100.0,
            base_min: 10.0,
            base_max: 90.0,
            task_weights: None,
            sr_buckets: default_buckets(),
            etd_tol: 1e-6,
            etd_max_iters: 100,
            lambda_min: 1e-6,
            lambda_max: 1e6,
            seed: 1,
            replications: 20,
            ground_truth_path: None,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        fn check(ok: bool, field: &'static str, reason: impl FnOnce() -> String) -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::config(field, reason()))
            }
        }

        check(self.budget.is_finite() && self.budget >= 0.0, "budget", || {
            format!("must be a finite nonnegative amount, got {}", self.budget)
        })?;
        check(self.tasks >= 1, "tasks", || "must be at least 1".into())?;
        check(self.winners >= 1, "winners", || "must be at least 1".into())?;
        check(self.workers > self.winners, "workers", || {
            format!(
                "must exceed winners (N > K); got N = {}, K = {}",
                self.workers, self.winners
            )
        })?;
        check(self.pref_min >= 1, "pref_min", || "must be at least 1".into())?;
        check(self.pref_min <= self.pref_max, "pref_min", || {
            format!("{} exceeds pref_max {}", self.pref_min, self.pref_max)
        })?;
        check(self.pref_max <= self.tasks, "pref_max", || {
            format!("{} exceeds the task count {}", self.pref_max, self.tasks)
        })?;
        check(
            self.cost_min > 0.0 && self.cost_min < self.cost_max && self.cost_max.is_finite(),
            "cost_min",
            || {
                format!(
                    "cost range must satisfy 0 < cost_min < cost_max; got [{}, {}]",
                    self.cost_min, self.cost_max
                )
            },
        )?;
        check(self.delta > 0.0 && self.delta.is_finite(), "delta", || {
            format!("must be positive, got {}", self.delta)
        })?;
        check((0.0..=1.0).contains(&self.theta), "theta", || {
            format!("must lie in [0, 1], got {}", self.theta)
        })?;
        check(self.eps1 > 0.0, "eps1", || "must be positive".into())?;
        check(self.eps1 < self.eps2 && self.eps2 < self.eps3, "eps2", || {
            format!(
                "thresholds must be ordered eps1 < eps2 < eps3; got {} / {} / {}",
                self.eps1, self.eps2, self.eps3
            )
        })?;
        check(self.value_min < self.value_max, "value_max", || {
            "value range is empty".into()
        })?;
        check(
            self.value_max - self.value_min > 4.0 * self.eps3,
            "value_max",
            || {
                format!(
                    "value range {} is too narrow to place a fake report 2*eps3 = {} from every truth",
                    self.value_max - self.value_min,
                    2.0 * self.eps3
                )
            },
        )?;
        check(
            self.value_min <= self.base_min && self.base_min <= self.base_max && self.base_max <= self.value_max,
            "base_min",
            || "base value range must lie inside the value range".into(),
        )?;
        if let Some(w) = &self.task_weights {
            check(w.len() == self.tasks, "task_weights", || {
                format!("has {} entries for {} tasks", w.len(), self.tasks)
            })?;
            check(w.iter().all(|x| *x > 0.0 && x.is_finite()), "task_weights", || {
                "every weight must be positive".into()
            })?;
        }
        check(!self.sr_buckets.is_empty(), "sr_buckets", || "must not be empty".into())?;
        for b in &self.sr_buckets {
            check(
                0.0 <= b.lo && b.lo <= b.hi && b.hi <= 1.0 && b.fraction >= 0.0,
                "sr_buckets",
                || format!("bucket [{}, {}] x {} is malformed", b.lo, b.hi, b.fraction),
            )?;
        }
        let total: f64 = self.sr_buckets.iter().map(|b| b.fraction).sum();
        check((total - 1.0).abs() < 1e-9, "sr_buckets", || {
            format!("fractions sum to {total}, expected 1")
        })?;
        check(self.etd_tol > 0.0, "etd_tol", || "must be positive".into())?;
        check(self.etd_max_iters >= 1, "etd_max_iters", || "must be at least 1".into())?;
        check(
            self.lambda_min > 0.0 && self.lambda_min < self.lambda_max,
            "lambda_min",
            || "authenticity clamp must satisfy 0 < lambda_min < lambda_max".into(),
        )?;
        check(self.replications >= 1, "replications", || "must be at least 1".into())?;
        Ok(())
    }

    pub fn weight(&self, task_index: usize) -> f64 {
        self.task_weights.as_ref().map_or(1.0, |w| w[task_index])
    }

    /// Number of exploration rounds needed to visit every worker once.
    pub fn exploration_rounds(&self) -> u32 {
        self.workers.div_ceil(self.winners) as u32
    }
}

/// Parses a flat TOML config and validates it. Missing keys take defaults.
pub fn parse_config(text: &str, origin: &Path) -> Result<SimConfig> {
    let config: SimConfig = toml::from_str(text).map_err(|source| Error::ConfigParse {
        path: origin.to_path_buf(),
        source,
    })?;
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<SimConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text, path)
}
