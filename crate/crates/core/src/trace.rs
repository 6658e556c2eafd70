//! Run traces and their CSV exports.

use std::io::Write;

use crate::bandit::Profiles;
use crate::error::Result;
use crate::types::WorkerId;
use crate::truth::Verdict;
use crate::world::RoundReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    /// Round-robin recruitment paid at `|D|·c_max`, verified against ground truth.
    Exploration,
    /// Ranked auction with critical payments.
    Exploitation,
    /// Uniformly random recruitment paid at `|D|·c_max`.
    Random,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Exploration => "exploration",
            Phase::Exploitation => "exploitation",
            Phase::Random => "random",
        }
    }
}

/// One worker's part in a round: its bid, and what it was paid if recruited.
#[derive(Debug, Clone, PartialEq)]
pub struct BidEntry {
    pub worker: WorkerId,
    pub recruited: bool,
    pub pref_size: usize,
    pub bid: f64,
    pub true_cost: f64,
    pub payment: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub round: u32,
    pub phase: Phase,
    pub entries: Vec<BidEntry>,
    pub reports: Vec<RoundReport>,
    /// Empty when the algorithm does not verify reports this round.
    pub verdicts: Vec<Verdict>,
    pub spend: f64,
    pub budget_remaining: f64,
}

impl RoundRecord {
    pub fn recruited(&self) -> impl Iterator<Item = &BidEntry> {
        self.entries.iter().filter(|e| e.recruited)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub algorithm: String,
    pub seed: u64,
    pub budget: f64,
    pub rounds: Vec<RoundRecord>,
    /// Set when the supervised phase could not visit every worker.
    pub degenerate: bool,
    pub profiles: Profiles,
}

impl RunTrace {
    pub fn total_rounds(&self) -> usize {
        self.rounds.len()
    }

    pub fn total_spend(&self) -> f64 {
        self.rounds.iter().map(|r| r.spend).sum()
    }

    pub fn budget_remaining(&self) -> f64 {
        self.rounds.last().map_or(self.budget, |r| r.budget_remaining)
    }

    pub fn write_trace_csv(&self, out: impl Write, with_algorithm: bool) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec![];
        if with_algorithm {
            header.push("algorithm");
        }
        header.extend(["round", "phase", "worker_id", "recruited", "bid", "payment", "budget_remaining"]);
        w.write_record(&header)?;
        for r in &self.rounds {
            for e in &r.entries {
                let mut row = vec![];
                if with_algorithm {
                    row.push(self.algorithm.clone());
                }
                row.extend([
                    r.round.to_string(),
                    r.phase.as_str().to_string(),
                    e.worker.to_string(),
                    u8::from(e.recruited).to_string(),
                    e.bid.to_string(),
                    e.payment.to_string(),
                    r.budget_remaining.to_string(),
                ]);
                w.write_record(&row)?;
            }
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn write_verdicts_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["round", "worker_id", "task_id", "tier", "reference", "reported", "accepted"])?;
        for r in &self.rounds {
            for v in &r.verdicts {
                w.write_record([
                    v.round.to_string(),
                    v.worker.to_string(),
                    v.task.to_string(),
                    v.tier.as_str().to_string(),
                    v.reference.to_string(),
                    v.reported.to_string(),
                    u8::from(v.accepted).to_string(),
                ])?;
            }
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    /// Final profile snapshot; `ucb` is blank for never-pulled workers.
    pub fn write_profiles_csv(&self, out: impl Write) -> Result<()> {
        write_profiles_csv(&self.profiles, self.total_rounds() as u32, out)
    }
}

pub fn write_profiles_csv(profiles: &Profiles, round: u32, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["worker_id", "round", "pulls", "sr_mean", "ucb"])?;
    for p in profiles.iter() {
        w.write_record([
            p.worker.to_string(),
            round.to_string(),
            p.pulls().to_string(),
            p.sr_mean().to_string(),
            p.ucb().map(|u| u.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
