//! Learned worker profiles: task-level pull counts, the weighted sample-mean
//! sensing rate, and the UCB index used for ranking.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::types::WorkerId;

#[derive(Debug, Clone, PartialEq)]
pub struct WorkerProfile {
    pub worker: WorkerId,
    pulls: u64,
    sr_mean: f64,
    ucb: Option<f64>,
}

/// Pull count after a round: grows by the preference size when recruited.
pub fn update_counts(pulls: u64, recruited: bool, pref_size: usize) -> u64 {
    if recruited {
        pulls + pref_size as u64
    } else {
        pulls
    }
}

/// Sample mean after a round, from the pre-update pull count.
/// `verdicts` holds `(ω_j, ξ̂_j)` for each preferred task.
pub fn update_sr_mean(sr_mean: f64, pulls: u64, recruited: bool, verdicts: &[(f64, bool)]) -> f64 {
    if !recruited || verdicts.is_empty() {
        return sr_mean;
    }
    let gained: f64 = verdicts.iter().filter(|(_, ok)| *ok).map(|(w, _)| w).sum();
    (sr_mean * pulls as f64 + gained) / (pulls + verdicts.len() as u64) as f64
}

/// `sqrt(δ · ln(total_pulls) / pulls)`.
pub fn ucb_bonus(pulls: u64, total_pulls: u64, delta: f64) -> Option<f64> {
    if pulls == 0 || total_pulls < pulls {
        return None;
    }
    Some((delta * (total_pulls as f64).ln() / pulls as f64).sqrt())
}

impl WorkerProfile {
    pub fn new(worker: WorkerId) -> Self {
        WorkerProfile {
            worker,
            pulls: 0,
            sr_mean: 0.0,
            ucb: None,
        }
    }

    /// Restores a profile from recorded state.
    pub fn from_parts(worker: WorkerId, pulls: u64, sr_mean: f64) -> Self {
        WorkerProfile {
            worker,
            pulls,
            sr_mean,
            ucb: None,
        }
    }

    pub fn pulls(&self) -> u64 {
        self.pulls
    }

    pub fn sr_mean(&self) -> f64 {
        self.sr_mean
    }

    /// Last computed UCB index, if the worker has been pulled.
    pub fn ucb(&self) -> Option<f64> {
        self.ucb
    }

    /// Folds one round of verdicts into the mean, then the count.
    pub fn record(&mut self, verdicts: &[(f64, bool)]) {
        self.sr_mean = update_sr_mean(self.sr_mean, self.pulls, true, verdicts);
        self.pulls = update_counts(self.pulls, true, verdicts.len());
    }

    pub fn ucb_bonus(&self, total_pulls: u64, delta: f64) -> Result<f64> {
        ucb_bonus(self.pulls, total_pulls, delta).ok_or(Error::UndefinedProfile(self.worker))
    }

    /// Computes `sr_mean + bonus` and stores it.
    pub fn ucb_index(&mut self, total_pulls: u64, delta: f64) -> Result<f64> {
        let index = self.sr_mean + self.ucb_bonus(total_pulls, delta)?;
        self.ucb = Some(index);
        Ok(index)
    }
}

/// All workers' profiles, indexed by worker id.
#[derive(Debug, Clone, PartialEq)]
pub struct Profiles {
    profiles: Vec<WorkerProfile>,
    total_pulls: u64,
}

impl Profiles {
    pub fn new(workers: usize) -> Self {
        Profiles {
            profiles: (0..workers).map(|i| WorkerProfile::new(WorkerId::from_index(i))).collect(),
            total_pulls: 0,
        }
    }

    pub fn get(&self, worker: WorkerId) -> &WorkerProfile {
        &self.profiles[worker.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = &WorkerProfile> {
        self.profiles.iter()
    }

    pub fn as_slice(&self) -> &[WorkerProfile] {
        &self.profiles
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    pub fn total_pulls(&self) -> u64 {
        self.total_pulls
    }

    pub fn record(&mut self, worker: WorkerId, verdicts: &[(f64, bool)]) {
        self.profiles[worker.index()].record(verdicts);
        self.total_pulls += verdicts.len() as u64;
    }

    /// Recomputes the UCB index of every pulled worker against the current
    /// total pull count.
    pub fn refresh_ucb(&mut self, delta: f64) {
        let total = self.total_pulls;
        for p in &mut self.profiles {
            if p.pulls > 0 {
                p.ucb_index(total, delta).expect("pulled workers have a defined index");
            }
        }
    }

    pub fn explored(&self) -> impl Iterator<Item = &WorkerProfile> {
        self.profiles.iter().filter(|p| p.pulls > 0)
    }
}

/// Workers whose sample-mean SR is strictly above `theta`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrustSet {
    pub round: u32,
    pub members: BTreeSet<WorkerId>,
}

impl TrustSet {
    pub fn contains(&self, worker: WorkerId) -> bool {
        self.members.contains(&worker)
    }
}

pub fn trust_set<'a>(profiles: impl IntoIterator<Item = &'a WorkerProfile>, theta: f64, round: u32) -> TrustSet {
    TrustSet {
        round,
        members: profiles
            .into_iter()
            .filter(|p| p.sr_mean > theta)
            .map(|p| p.worker)
            .collect(),
    }
}
