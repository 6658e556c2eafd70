//! The bandit-driven reverse auction.
//!
//! A run has two phases sharing one budget ledger:
//!
//! 1. Supervised exploration. For `ceil(N/K)` rounds, K workers are taken in
//!    round-robin order, each paid `|D|·c_max`, and their reports are checked
//!    against employee-collected ground truth.
//! 2. Exploitation. Every worker bids; workers are ranked by
//!    `ρ = Σ ω_j r̂⁺ / b`, the top K win and are paid the critical amount set by
//!    the (K+1)-th ranked worker, capped at `|D|·c_max`. Reports are judged
//!    against estimated truth and fed back into the profiles.
//!
//! Each phase stops the run as soon as a round cannot be funded.

use std::cmp::Ordering;

use crate::bandit::{trust_set, Profiles, TrustSet};
use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::trace::{BidEntry, Phase, RoundRecord, RunTrace};
use crate::truth::{judge_round, EtdParams, JudgeMode, Thresholds, Verdict};
use crate::types::WorkerId;
use crate::world::{RoundPreference, RoundReport, RoundTruths, World};

pub const SCMABA: &str = "SCMABA";

#[derive(Debug, Clone, PartialEq)]
pub struct BudgetLedger {
    initial: f64,
    remaining: f64,
    history: Vec<f64>,
}

impl BudgetLedger {
    pub fn new(budget: f64) -> Self {
        BudgetLedger {
            initial: budget,
            remaining: budget,
            history: Vec::new(),
        }
    }

    pub fn initial(&self) -> f64 {
        self.initial
    }

    pub fn remaining(&self) -> f64 {
        self.remaining
    }

    pub fn spent(&self) -> f64 {
        self.initial - self.remaining
    }

    pub fn history(&self) -> &[f64] {
        &self.history
    }

    pub fn can_afford(&self, amount: f64) -> bool {
        amount <= self.remaining
    }

    pub fn charge(&mut self, amount: f64) -> Result<()> {
        if !self.can_afford(amount) || amount < 0.0 {
            return Err(Error::Internal(format!(
                "charge of {amount} against remaining budget {}",
                self.remaining
            )));
        }
        self.remaining -= amount;
        self.history.push(amount);
        Ok(())
    }
}

/// A worker's position in the ranking of one round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankedBid {
    pub worker: WorkerId,
    pub pref_size: usize,
    /// Σ_j ω_j · score, the quality mass of the preferred task set.
    pub mass: f64,
    pub bid: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuctionOutcome {
    pub round: u32,
    pub phase: Phase,
    pub winners: Vec<WorkerId>,
    /// Aligned with `winners`.
    pub payments: Vec<f64>,
    /// Full ranking (exploitation only).
    pub ranking: Vec<RankedBid>,
}

impl AuctionOutcome {
    pub fn total_payment(&self) -> f64 {
        self.payments.iter().sum()
    }

    pub fn payment_of(&self, worker: WorkerId) -> Option<f64> {
        self.winners.iter().position(|w| *w == worker).map(|i| self.payments[i])
    }
}

/// Workers scheduled in supervised round `t` (1-based): the K ids following
/// on from the previous round, wrapping around N.
pub fn exploration_schedule(t: u32, n: usize, k: usize) -> Vec<WorkerId> {
    let start = (t as usize - 1) * k;
    (1..=k).map(|a| WorkerId((((start + a - 1) % n) + 1) as u32)).collect()
}

pub fn exploration_payment(preference: &RoundPreference, cost_max: f64) -> f64 {
    preference.size() as f64 * cost_max
}

/// One bidder entering the ranking.
#[derive(Debug, Clone, Copy)]
pub struct Candidate<'a> {
    pub preference: &'a RoundPreference,
    /// Per-task quality score: the UCB index for SCMABA, the sample mean for
    /// the greedy baseline.
    pub score: f64,
}

/// Ranks by `ρ` descending, ties to the lower worker id. Non-positive bids
/// are dropped.
pub fn rank_by_ratio(candidates: &[Candidate<'_>], config: &SimConfig) -> Vec<RankedBid> {
    let mut ranking: Vec<RankedBid> = candidates
        .iter()
        .filter(|c| c.preference.claimed_cost > 0.0)
        .map(|c| {
            let mass = c.preference.weight_sum(config) * c.score;
            RankedBid {
                worker: c.preference.worker,
                pref_size: c.preference.size(),
                mass,
                bid: c.preference.claimed_cost,
                rho: mass / c.preference.claimed_cost,
            }
        })
        .collect();
    ranking.sort_by(rank_order);
    ranking
}

fn rank_order(a: &RankedBid, b: &RankedBid) -> Ordering {
    b.rho.total_cmp(&a.rho).then(a.worker.cmp(&b.worker))
}

/// The first K of the ranking. A (K+1)-th bidder must exist to set payments.
pub fn select_winners(ranking: &[RankedBid], k: usize) -> Result<&[RankedBid]> {
    if ranking.len() <= k {
        return Err(Error::Precondition(format!(
            "ranking has {} bidders; {k} winners need a runner-up",
            ranking.len()
        )));
    }
    Ok(&ranking[..k])
}

/// Largest bid with which `winner` would still outrank `runner_up`.
pub fn critical_bid(winner: &RankedBid, runner_up: &RankedBid) -> f64 {
    if runner_up.mass > 0.0 {
        winner.mass / runner_up.mass * runner_up.bid
    } else {
        f64::INFINITY
    }
}

/// Critical payment capped at `|D|·c_max`; the runner-up is `ranking[k]`.
pub fn critical_payment(winner: &RankedBid, ranking: &[RankedBid], k: usize, cost_max: f64) -> Result<f64> {
    let runner_up = ranking.get(k).ok_or_else(|| {
        Error::Precondition(format!("no runner-up at rank {} for critical payment", k + 1))
    })?;
    Ok(critical_bid(winner, runner_up).min(winner.pref_size as f64 * cost_max))
}

/// Rank, select and price one exploitation round.
pub fn run_auction(round: u32, candidates: &[Candidate<'_>], config: &SimConfig) -> Result<AuctionOutcome> {
    let ranking = rank_by_ratio(candidates, config);
    let k = config.winners;
    let winners = select_winners(&ranking, k)?;
    let payments = winners
        .iter()
        .map(|w| critical_payment(w, &ranking, k, config.cost_max))
        .collect::<Result<Vec<_>>>()?;
    Ok(AuctionOutcome {
        round,
        phase: Phase::Exploitation,
        winners: winners.iter().map(|w| w.worker).collect(),
        payments,
        ranking,
    })
}

/// Realizes reports for the recruited workers, in recruitment order.
pub(crate) fn realize_reports(world: &World, recruited: &[&RoundPreference], truths: &RoundTruths) -> Result<Vec<RoundReport>> {
    let mut reports = Vec::new();
    for p in recruited {
        reports.extend(world.round_behavior(p, truths)?);
    }
    Ok(reports)
}

/// Applies verdicts to the profiles of the workers they concern.
pub(crate) fn learn(profiles: &mut Profiles, verdicts: &[Verdict], config: &SimConfig) {
    let mut i = 0;
    while i < verdicts.len() {
        let worker = verdicts[i].worker;
        let mut j = i;
        while j < verdicts.len() && verdicts[j].worker == worker {
            j += 1;
        }
        let observed: Vec<(f64, bool)> = verdicts[i..j]
            .iter()
            .map(|v| (config.weight(v.task.index()), v.accepted))
            .collect();
        profiles.record(worker, &observed);
        i = j;
    }
}

/// Exploration round shared by SCMABA and the greedy baseline. Returns `None`
/// when the ledger cannot fund the scheduled workers.
pub(crate) fn supervised_round(
    world: &World,
    round: u32,
    scheduled: &[WorkerId],
    ledger: &mut BudgetLedger,
    profiles: &mut Profiles,
) -> Result<Option<RoundRecord>> {
    let config = world.config();
    let prefs: Vec<RoundPreference> = scheduled.iter().map(|w| world.preference(*w, round)).collect();
    let payments: Vec<f64> = prefs.iter().map(|p| exploration_payment(p, config.cost_max)).collect();
    let total: f64 = payments.iter().sum();
    if !ledger.can_afford(total) {
        return Ok(None);
    }
    ledger.charge(total)?;
    let truths = world.round_truths(round);
    let recruited: Vec<&RoundPreference> = prefs.iter().collect();
    let reports = realize_reports(world, &recruited, &truths)?;
    let verdicts = judge_round(
        &reports,
        JudgeMode::Exploration(&truths),
        &TrustSet::default(),
        profiles,
        &Thresholds::from_config(config),
        &EtdParams::from_config(config),
    )?;
    learn(profiles, &verdicts, config);
    let entries = prefs
        .iter()
        .zip(&payments)
        .map(|(p, pay)| BidEntry {
            worker: p.worker,
            recruited: true,
            pref_size: p.size(),
            bid: p.claimed_cost,
            true_cost: p.true_cost,
            payment: *pay,
        })
        .collect();
    Ok(Some(RoundRecord {
        round,
        phase: Phase::Exploration,
        entries,
        reports,
        verdicts,
        spend: total,
        budget_remaining: ledger.remaining(),
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stage {
    Exploring,
    Exploiting,
    Finished,
}

/// Round-by-round SCMABA state. Cloning freezes the mechanism at a round
/// boundary, which is how single rounds are replayed with altered bids.
#[derive(Debug, Clone)]
pub struct Scmaba<'w> {
    world: &'w World,
    profiles: Profiles,
    trust: TrustSet,
    ledger: BudgetLedger,
    round: u32,
    stage: Stage,
    trace: RunTrace,
}

impl<'w> Scmaba<'w> {
    pub fn new(world: &'w World) -> Self {
        let config = world.config();
        Scmaba {
            world,
            profiles: Profiles::new(config.workers),
            trust: TrustSet::default(),
            ledger: BudgetLedger::new(config.budget),
            round: 0,
            stage: Stage::Exploring,
            trace: RunTrace {
                algorithm: SCMABA.to_string(),
                seed: world.seed(),
                budget: config.budget,
                rounds: Vec::new(),
                degenerate: false,
                profiles: Profiles::new(config.workers),
            },
        }
    }

    /// Runs to budget exhaustion.
    pub fn run(world: &'w World) -> Result<RunTrace> {
        let mut mech = Scmaba::new(world);
        while mech.step()? {}
        Ok(mech.into_trace())
    }

    pub fn profiles(&self) -> &Profiles {
        &self.profiles
    }

    pub fn trust(&self) -> &TrustSet {
        &self.trust
    }

    pub fn ledger(&self) -> &BudgetLedger {
        &self.ledger
    }

    pub fn trace(&self) -> &RunTrace {
        &self.trace
    }

    pub fn into_trace(mut self) -> RunTrace {
        self.trace.profiles = self.profiles;
        self.trace
    }

    /// Round number the next `step` would play.
    pub fn next_round(&self) -> u32 {
        self.round + 1
    }

    pub fn is_exploiting(&self) -> bool {
        self.stage == Stage::Exploiting
    }

    pub fn is_finished(&self) -> bool {
        self.stage == Stage::Finished
    }

    /// Plays one round. Returns `false` once the run has ended.
    pub fn step(&mut self) -> Result<bool> {
        match self.stage {
            Stage::Finished => Ok(false),
            Stage::Exploring => self.explore(),
            Stage::Exploiting => self.exploit(),
        }
    }

    fn explore(&mut self) -> Result<bool> {
        let config = self.world.config();
        let t = self.round + 1;
        let scheduled = exploration_schedule(t, config.workers, config.winners);
        match supervised_round(self.world, t, &scheduled, &mut self.ledger, &mut self.profiles)? {
            Some(record) => {
                self.profiles.refresh_ucb(config.delta);
                self.trace.rounds.push(record);
                self.round = t;
                if t >= config.exploration_rounds() {
                    self.trust = trust_set(self.profiles.iter(), config.theta, t);
                    self.stage = Stage::Exploiting;
                }
                Ok(true)
            }
            None => {
                self.trace.degenerate = true;
                self.stage = Stage::Finished;
                Ok(false)
            }
        }
    }

    /// The auction the mechanism would run on `prefs` from its current state.
    /// `prefs` holds one preference per worker for the next round.
    pub fn exploitation_auction(&self, prefs: &[RoundPreference]) -> Result<AuctionOutcome> {
        let config = self.world.config();
        let round = self.round + 1;
        let candidates = prefs
            .iter()
            .map(|p| {
                let score = self.profiles.get(p.worker).ucb().ok_or(Error::UndefinedProfile(p.worker))?;
                Ok(Candidate { preference: p, score })
            })
            .collect::<Result<Vec<_>>>()?;
        run_auction(round, &candidates, config)
    }

    fn exploit(&mut self) -> Result<bool> {
        let world = self.world;
        let config = world.config();
        let t = self.round + 1;
        let prefs = world.preferences(t);
        let outcome = self.exploitation_auction(&prefs)?;
        let total = outcome.total_payment();
        if !self.ledger.can_afford(total) {
            self.stage = Stage::Finished;
            return Ok(false);
        }
        self.ledger.charge(total)?;

        let truths = world.round_truths(t);
        let recruited: Vec<&RoundPreference> = outcome.winners.iter().map(|w| &prefs[w.index()]).collect();
        let reports = realize_reports(world, &recruited, &truths)?;
        let verdicts = judge_round(
            &reports,
            JudgeMode::Exploitation,
            &self.trust,
            &self.profiles,
            &Thresholds::from_config(config),
            &EtdParams::from_config(config),
        )?;
        learn(&mut self.profiles, &verdicts, config);
        self.profiles.refresh_ucb(config.delta);
        self.trust = trust_set(self.profiles.iter(), config.theta, t);

        let entries = prefs
            .iter()
            .map(|p| {
                let payment = outcome.payment_of(p.worker);
                BidEntry {
                    worker: p.worker,
                    recruited: payment.is_some(),
                    pref_size: p.size(),
                    bid: p.claimed_cost,
                    true_cost: p.true_cost,
                    payment: payment.unwrap_or(0.0),
                }
            })
            .collect();
        self.trace.rounds.push(RoundRecord {
            round: t,
            phase: Phase::Exploitation,
            entries,
            reports,
            verdicts,
            spend: total,
            budget_remaining: self.ledger.remaining(),
        });
        self.round = t;
        Ok(true)
    }
}

/// Runs SCMABA on `world` to budget exhaustion.
pub fn run_scmaba(world: &World) -> Result<RunTrace> {
    Scmaba::run(world)
}
