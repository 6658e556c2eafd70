//! Comparison algorithms run under the same world and payment accounting
//! as SCMABA.
//!
//! * Random: K workers uniformly at random each round, each paid `|D|·c_max`.
//! * ε-Greedy: each round explores with probability ε (round-robin, paid
//!   `|D|·c_max`, verified against ground truth) or otherwise exploits the
//!   sample means of already explored workers with critical payments. No UCB
//!   bonus and no learning from exploitation rounds.

use rand::seq::index;
use rand::Rng;

use crate::auction::{exploration_payment, exploration_schedule, realize_reports, run_auction, supervised_round, BudgetLedger, Candidate};
use crate::bandit::Profiles;
use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};
use crate::trace::{BidEntry, Phase, RoundRecord, RunTrace};
use crate::types::WorkerId;
use crate::world::{RoundPreference, World};

pub const RANDOM: &str = "Random";

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaselineKind {
    Random,
    EpsGreedy { epsilon: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineConfig {
    pub kind: BaselineKind,
}

impl BaselineConfig {
    pub fn random() -> Self {
        BaselineConfig { kind: BaselineKind::Random }
    }

    pub fn eps_greedy(epsilon: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::config("epsilon", format!("must lie in [0, 1], got {epsilon}")));
        }
        Ok(BaselineConfig {
            kind: BaselineKind::EpsGreedy { epsilon },
        })
    }

    pub fn name(&self) -> String {
        match self.kind {
            BaselineKind::Random => RANDOM.to_string(),
            BaselineKind::EpsGreedy { epsilon } => eps_greedy_name(epsilon),
        }
    }

    pub fn run(&self, world: &World) -> Result<RunTrace> {
        match self.kind {
            BaselineKind::Random => run_random(world),
            BaselineKind::EpsGreedy { epsilon } => run_eps_greedy(world, epsilon),
        }
    }
}

pub fn eps_greedy_name(epsilon: f64) -> String {
    format!("{epsilon}-Greedy")
}

fn empty_trace(world: &World, algorithm: String) -> RunTrace {
    let config = world.config();
    RunTrace {
        algorithm,
        seed: world.seed(),
        budget: config.budget,
        rounds: Vec::new(),
        degenerate: false,
        profiles: Profiles::new(config.workers),
    }
}

pub fn run_random(world: &World) -> Result<RunTrace> {
    let config = world.config();
    let mut rng = stream_rng(world.seed(), Stream::RandomPick, 0, 0);
    let mut ledger = BudgetLedger::new(config.budget);
    let mut trace = empty_trace(world, RANDOM.to_string());
    let mut round = 0u32;
    loop {
        round += 1;
        let mut picked: Vec<WorkerId> = index::sample(&mut rng, config.workers, config.winners)
            .into_iter()
            .map(WorkerId::from_index)
            .collect();
        picked.sort_unstable();
        let prefs: Vec<RoundPreference> = picked.iter().map(|w| world.preference(*w, round)).collect();
        let payments: Vec<f64> = prefs.iter().map(|p| exploration_payment(p, config.cost_max)).collect();
        let total: f64 = payments.iter().sum();
        if !ledger.can_afford(total) {
            break;
        }
        ledger.charge(total)?;
        let truths = world.round_truths(round);
        let recruited: Vec<&RoundPreference> = prefs.iter().collect();
        let reports = realize_reports(world, &recruited, &truths)?;
        trace.rounds.push(RoundRecord {
            round,
            phase: Phase::Random,
            entries: prefs
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
                .collect(),
            reports,
            verdicts: Vec::new(),
            spend: total,
            budget_remaining: ledger.remaining(),
        });
    }
    Ok(trace)
}

/// Exploitation needs a runner-up beyond the K winners, so it only starts
/// once more than K workers have been explored; earlier rounds explore.
pub fn run_eps_greedy(world: &World, epsilon: f64) -> Result<RunTrace> {
    BaselineConfig::eps_greedy(epsilon)?;
    let config = world.config();
    let mut coin = stream_rng(world.seed(), Stream::EpsilonCoin, 0, 0);
    let mut ledger = BudgetLedger::new(config.budget);
    let mut profiles = Profiles::new(config.workers);
    let mut trace = empty_trace(world, eps_greedy_name(epsilon));
    let mut explorations = 0u32;
    let mut round = 0u32;
    loop {
        round += 1;
        let explore_draw = coin.random::<f64>() < epsilon;
        let explored = profiles.explored().count();
        if explore_draw || explored <= config.winners {
            let scheduled = exploration_schedule(explorations + 1, config.workers, config.winners);
            match supervised_round(world, round, &scheduled, &mut ledger, &mut profiles)? {
                Some(record) => {
                    explorations += 1;
                    trace.rounds.push(record);
                }
                None => break,
            }
        } else {
            let prefs = world.preferences(round);
            let candidates: Vec<Candidate> = prefs
                .iter()
                .filter(|p| profiles.get(p.worker).pulls() > 0)
                .map(|p| Candidate {
                    preference: p,
                    score: profiles.get(p.worker).sr_mean(),
                })
                .collect();
            let outcome = run_auction(round, &candidates, config)?;
            let total = outcome.total_payment();
            if !ledger.can_afford(total) {
                break;
            }
            ledger.charge(total)?;
            let truths = world.round_truths(round);
            let recruited: Vec<&RoundPreference> = outcome.winners.iter().map(|w| &prefs[w.index()]).collect();
            let reports = realize_reports(world, &recruited, &truths)?;
            let entries = candidates
                .iter()
                .map(|c| {
                    let p = c.preference;
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
            trace.rounds.push(RoundRecord {
                round,
                phase: Phase::Exploitation,
                entries,
                reports,
                verdicts: Vec::new(),
                spend: total,
                budget_remaining: ledger.remaining(),
            });
        }
    }
    trace.profiles = profiles;
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auction::Scmaba;
    use crate::config::SimConfig;

    fn small() -> SimConfig {
        SimConfig {
            workers: 12,
            winners: 3,
            budget: 800.0,
            ..SimConfig::default()
        }
    }

    #[test]
    fn random_with_everyone_selected() {
        // K = N is rejected by config validation, so check the nearest case:
        // the sampled set always has K distinct members.
        let world = World::new(&small(), 4).unwrap();
        let trace = run_random(&world).unwrap();
        for r in &trace.rounds {
            let mut ws: Vec<_> = r.entries.iter().map(|e| e.worker).collect();
            ws.dedup();
            assert_eq!(ws.len(), 3);
        }
    }

    #[test]
    fn random_is_replayable() {
        let world = World::new(&small(), 4).unwrap();
        assert_eq!(run_random(&world).unwrap(), run_random(&world).unwrap());
    }

    #[test]
    fn random_ignores_bids() {
        let world = World::new(&small(), 4).unwrap();
        let trace = run_random(&world).unwrap();
        for r in &trace.rounds {
            for e in &r.entries {
                assert_eq!(e.payment, e.pref_size as f64 * 1.0);
            }
        }
    }

    #[test]
    fn full_exploration_matches_scmaba_rotation() {
        let config = small();
        let world = World::new(&config, 8).unwrap();
        let greedy = run_eps_greedy(&world, 1.0).unwrap();
        let scmaba = Scmaba::run(&world).unwrap();
        assert!(greedy.rounds.iter().all(|r| r.phase == Phase::Exploration));
        for (g, s) in greedy.rounds.iter().zip(&scmaba.rounds).take(config.exploration_rounds() as usize) {
            let gw: Vec<_> = g.entries.iter().map(|e| e.worker).collect();
            let sw: Vec<_> = s.recruited().map(|e| e.worker).collect();
            assert_eq!(gw, sw);
            assert_eq!(g.reports, s.reports);
        }
    }

    #[test]
    fn zero_epsilon_starts_by_exploring() {
        let world = World::new(&small(), 2).unwrap();
        let trace = run_eps_greedy(&world, 0.0).unwrap();
        assert_eq!(trace.rounds[0].phase, Phase::Exploration);
        assert_eq!(trace.rounds[1].phase, Phase::Exploration);
        assert!(trace.rounds.iter().skip(2).all(|r| r.phase == Phase::Exploitation));
    }

    #[test]
    fn epsilon_out_of_range_is_rejected() {
        assert!(BaselineConfig::eps_greedy(1.5).is_err());
        assert!(BaselineConfig::eps_greedy(-0.1).is_err());
        assert_eq!(BaselineConfig::eps_greedy(0.3).unwrap().name(), "0.3-Greedy");
        assert_eq!(BaselineConfig::eps_greedy(0.7).unwrap().name(), "0.7-Greedy");
    }

    #[test]
    fn baselines_respect_budget_and_cardinality() {
        let config = SimConfig::default();
        let world = World::new(&config, 6).unwrap();
        for b in [BaselineConfig::random(), BaselineConfig::eps_greedy(0.3).unwrap(), BaselineConfig::eps_greedy(0.7).unwrap()] {
            let trace = b.run(&world).unwrap();
            assert!(trace.total_spend() <= config.budget + 1e-9);
            for r in &trace.rounds {
                assert_eq!(r.recruited().count(), config.winners, "{}", b.name());
                assert!(r.recruited().all(|e| e.payment >= e.true_cost));
            }
        }
    }
}
