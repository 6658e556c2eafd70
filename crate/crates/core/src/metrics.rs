//! Ground-truth performance measures computed after a run: revenue from the
//! hidden honesty flags, regret against an omniscient oracle, identification
//! error of the learned sensing rates, and worker utility.

use std::io::Write;

use crate::bandit::WorkerProfile;
use crate::error::Result;
use crate::trace::RunTrace;
use crate::types::WorkerId;
use crate::world::{RoundPreference, World, WorkerSpec};

/// Σ over recruited reports of `ω_j · ξ`, using the world's hidden flags.
pub fn true_revenue(trace: &RunTrace, world: &World) -> f64 {
    let config = world.config();
    trace
        .rounds
        .iter()
        .flat_map(|r| &r.reports)
        .filter(|r| r.hidden_honesty())
        .map(|r| config.weight(r.task.index()))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OracleMode {
    /// Accrue `Σ ω_j r_i` per recruited worker.
    #[default]
    Expected,
    /// Accrue realized honest reports, as an algorithm would.
    Realized,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleRun {
    pub revenue: f64,
    pub rounds: usize,
    pub spend: f64,
}

/// The K workers the oracle recruits in `round`: highest
/// `Σ ω_j r_i / c_{i,t}` using true SRs and true costs, ties to lower id.
pub fn oracle_selection(world: &World, prefs: &[RoundPreference]) -> Vec<WorkerId> {
    let config = world.config();
    let mut scored: Vec<(WorkerId, f64)> = prefs
        .iter()
        .map(|p| {
            let r = world.worker(p.worker).expected_sr;
            (p.worker, p.weight_sum(config) * r / p.true_cost)
        })
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.into_iter().take(config.winners).map(|(w, _)| w).collect()
}

/// Omniscient per-round greedy paying true costs until a round cannot be funded.
pub fn oracle_revenue(world: &World, mode: OracleMode) -> Result<OracleRun> {
    let config = world.config();
    let mut remaining = config.budget;
    let mut run = OracleRun {
        revenue: 0.0,
        rounds: 0,
        spend: 0.0,
    };
    let mut round = 0u32;
    loop {
        round += 1;
        let prefs = world.preferences(round);
        let chosen = oracle_selection(world, &prefs);
        let cost: f64 = chosen.iter().map(|w| prefs[w.index()].true_cost).sum();
        if cost > remaining {
            break;
        }
        remaining -= cost;
        run.spend += cost;
        run.rounds += 1;
        match mode {
            OracleMode::Expected => {
                run.revenue += chosen
                    .iter()
                    .map(|w| prefs[w.index()].weight_sum(config) * world.worker(*w).expected_sr)
                    .sum::<f64>();
            }
            OracleMode::Realized => {
                let truths = world.round_truths(round);
                for w in &chosen {
                    for r in world.round_behavior(&prefs[w.index()], &truths)? {
                        if r.hidden_honesty() {
                            run.revenue += config.weight(r.task.index());
                        }
                    }
                }
            }
        }
    }
    Ok(run)
}

pub fn regret(revenue: f64, oracle_revenue: f64) -> f64 {
    oracle_revenue - revenue
}

/// `(p − c)·φ`.
pub fn utility(payment: f64, true_cost: f64, recruited: bool) -> f64 {
    if recruited {
        payment - true_cost
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Identification {
    /// Mean |r̂ − r| over pulled members of each bucket; `None` if none pulled.
    pub per_bucket: Vec<Option<f64>>,
    pub pulled_per_bucket: Vec<usize>,
    /// Workers never pulled; they carry no estimate.
    pub unpulled: Vec<WorkerId>,
}

pub fn identification_error(profiles: &[WorkerProfile], workers: &[WorkerSpec], buckets: usize) -> Identification {
    let mut sums = vec![0.0; buckets];
    let mut counts = vec![0usize; buckets];
    let mut unpulled = Vec::new();
    for (p, w) in profiles.iter().zip(workers) {
        if p.pulls() == 0 {
            unpulled.push(w.id);
            continue;
        }
        sums[w.bucket] += (p.sr_mean() - w.expected_sr).abs();
        counts[w.bucket] += 1;
    }
    Identification {
        per_bucket: sums
            .iter()
            .zip(&counts)
            .map(|(s, &c)| (c > 0).then(|| s / c as f64))
            .collect(),
        pulled_per_bucket: counts,
        unpulled,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub algorithm: String,
    pub seed: u64,
    pub budget: f64,
    pub workers: usize,
    pub tasks: usize,
    pub winners: usize,
    pub revenue: f64,
    pub regret: f64,
    pub rounds: usize,
    pub spend: f64,
    pub identification: Identification,
}

pub fn summarize(trace: &RunTrace, world: &World, oracle: f64) -> RunSummary {
    let config = world.config();
    let revenue = true_revenue(trace, world);
    RunSummary {
        algorithm: trace.algorithm.clone(),
        seed: trace.seed,
        budget: config.budget,
        workers: config.workers,
        tasks: config.tasks,
        winners: config.winners,
        revenue,
        regret: regret(revenue, oracle),
        rounds: trace.total_rounds(),
        spend: trace.total_spend(),
        identification: identification_error(trace.profiles.as_slice(), world.workers(), config.sr_buckets.len()),
    }
}

pub const SUMMARY_HEADER: [&str; 14] = [
    "algorithm", "seed", "B", "N", "M", "K", "revenue", "regret", "rounds", "spend", "mae_b1", "mae_b2", "mae_b3",
    "mae_b4",
];

pub fn write_summary_csv<'a>(summaries: impl IntoIterator<Item = &'a RunSummary>, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for s in summaries {
        let mut row = vec![
            s.algorithm.clone(),
            s.seed.to_string(),
            s.budget.to_string(),
            s.workers.to_string(),
            s.tasks.to_string(),
            s.winners.to_string(),
            s.revenue.to_string(),
            s.regret.to_string(),
            s.rounds.to_string(),
            s.spend.to_string(),
        ];
        for b in 0..4 {
            row.push(
                s.identification
                    .per_bucket
                    .get(b)
                    .copied()
                    .flatten()
                    .map(|m| m.to_string())
                    .unwrap_or_default(),
            );
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
