//! Experiment harness. Everything the CLI exposes lives here.
//!
//! Replication `r` of a config with master seed `s` always runs on the world
//! seeded by `replication_seed(s, r)`, whatever else is run alongside it.
//! Runs may execute in parallel; results are collected in a fixed order
//! before anything is written.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::index;
use rand::Rng;

use crate::auction::{critical_bid, Scmaba, SCMABA};
use crate::baselines::{eps_greedy_name, run_eps_greedy, run_random, RANDOM};
use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::metrics::{
    identification_error, oracle_revenue, summarize, utility, write_summary_csv, Identification, OracleMode, RunSummary,
};
use crate::rng::{replication_seed, stream_rng, Stream};
use crate::trace::{Phase, RunTrace};
use crate::types::WorkerId;
use crate::world::{GroundTruthTable, World};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Algorithm {
    Scmaba,
    EpsGreedy(f64),
    Random,
}

impl Algorithm {
    /// SCMABA, 0.3-Greedy, 0.7-Greedy, Random.
    pub fn standard() -> Vec<Algorithm> {
        vec![
            Algorithm::Scmaba,
            Algorithm::EpsGreedy(0.3),
            Algorithm::EpsGreedy(0.7),
            Algorithm::Random,
        ]
    }

    pub fn name(&self) -> String {
        match self {
            Algorithm::Scmaba => SCMABA.to_string(),
            Algorithm::EpsGreedy(e) => eps_greedy_name(*e),
            Algorithm::Random => RANDOM.to_string(),
        }
    }

    pub fn run(&self, world: &World) -> Result<RunTrace> {
        match self {
            Algorithm::Scmaba => Scmaba::run(world),
            Algorithm::EpsGreedy(e) => run_eps_greedy(world, *e),
            Algorithm::Random => run_random(world),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    /// Accepts `scmaba`, `random`, and `<eps>-greedy` (case-insensitive).
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "scmaba" => return Ok(Algorithm::Scmaba),
            "random" => return Ok(Algorithm::Random),
            _ => {}
        }
        if let Some(eps) = lower.strip_suffix("-greedy") {
            let eps: f64 = eps
                .parse()
                .map_err(|_| Error::config("algorithms", format!("bad epsilon in `{s}`")))?;
            if (0.0..=1.0).contains(&eps) {
                return Ok(Algorithm::EpsGreedy(eps));
            }
        }
        Err(Error::config("algorithms", format!("unknown algorithm `{s}`")))
    }
}

pub fn parse_algorithms(list: &str) -> Result<Vec<Algorithm>> {
    list.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect()
}

#[cfg(feature = "parallel")]
fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    items.iter().map(f).collect()
}

/// Builds the world for `config` and `seed`, loading imported ground truth
/// if the config names a file.
pub fn make_world(config: &SimConfig, seed: u64) -> Result<World> {
    let world = World::new(config, seed)?;
    match &config.ground_truth_path {
        Some(path) => Ok(world.with_imported_truth(Arc::new(GroundTruthTable::load(path)?))),
        None => Ok(world),
    }
}

/// A run and its world, kept together for post-processing.
pub struct Replication {
    pub world: World,
    pub oracle: f64,
    pub traces: Vec<RunTrace>,
    pub summaries: Vec<RunSummary>,
}

pub fn run_replication(config: &SimConfig, rep: u64, algorithms: &[Algorithm]) -> Result<Replication> {
    let seed = replication_seed(config.seed, rep);
    let world = make_world(config, seed)?;
    let oracle = oracle_revenue(&world, OracleMode::Expected)?.revenue;
    let traces = algorithms.iter().map(|a| a.run(&world)).collect::<Result<Vec<_>>>()?;
    let summaries = traces.iter().map(|t| summarize(t, &world, oracle)).collect();
    Ok(Replication {
        world,
        oracle,
        traces,
        summaries,
    })
}

/// Summaries of `config.replications` replications, ordered by replication
/// then algorithm.
pub fn run_replications(config: &SimConfig, algorithms: &[Algorithm]) -> Result<Vec<RunSummary>> {
    config.validate()?;
    let reps: Vec<u64> = (0..config.replications as u64).collect();
    let out = par_map(&reps, |&r| run_replication(config, r, algorithms).map(|x| x.summaries));
    Ok(out.into_iter().collect::<Result<Vec<_>>>()?.into_iter().flatten().collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Budget,
    Workers,
    Winners,
}

impl SweepParam {
    pub fn label(self) -> &'static str {
        match self {
            SweepParam::Budget => "B",
            SweepParam::Workers => "N",
            SweepParam::Winners => "K",
        }
    }

    pub fn apply(self, base: &SimConfig, value: f64) -> Result<SimConfig> {
        let mut c = base.clone();
        let as_count = || -> Result<usize> {
            if value >= 0.0 && value.fract() == 0.0 {
                Ok(value as usize)
            } else {
                Err(Error::config("values", format!("{} needs integer values, got {value}", self.label())))
            }
        };
        match self {
            SweepParam::Budget => c.budget = value,
            SweepParam::Workers => c.workers = as_count()?,
            SweepParam::Winners => c.winners = as_count()?,
        }
        c.validate()?;
        Ok(c)
    }

    pub fn value_of(self, s: &RunSummary) -> f64 {
        match self {
            SweepParam::Budget => s.budget,
            SweepParam::Workers => s.workers as f64,
            SweepParam::Winners => s.winners as f64,
        }
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "B" | "b" | "budget" => Ok(SweepParam::Budget),
            "N" | "n" | "workers" => Ok(SweepParam::Workers),
            "K" | "k" | "winners" => Ok(SweepParam::Winners),
            other => Err(Error::config("param", format!("expected B, N or K, got `{other}`"))),
        }
    }
}

/// Parses `6000,7000,8000` or the inclusive range `6000:12000:1000`.
pub fn parse_values(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::config("values", format!("cannot parse `{spec}`"));
    let parts: Vec<&str> = spec.split(':').collect();
    let values = if parts.len() == 3 {
        let nums: Vec<f64> = parts.iter().map(|p| p.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?;
        let (lo, hi, step) = (nums[0], nums[1], nums[2]);
        if step <= 0.0 || hi < lo {
            return Err(bad());
        }
        let n = ((hi - lo) / step + 1e-9).floor() as usize;
        (0..=n).map(|i| lo + step * i as f64).collect()
    } else {
        spec.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.trim().parse().map_err(|_| bad()))
            .collect::<Result<Vec<f64>>>()?
    };
    if values.is_empty() {
        return Err(Error::config("values", "sweep value list is empty"));
    }
    Ok(values)
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub base: SimConfig,
    pub algorithms: Vec<Algorithm>,
}

impl SweepSpec {
    /// Every instantiated config, validated before anything runs.
    pub fn configs(&self) -> Result<Vec<SimConfig>> {
        if self.values.is_empty() {
            return Err(Error::config("values", "sweep value list is empty"));
        }
        if self.algorithms.is_empty() {
            return Err(Error::config("algorithms", "no algorithms to run"));
        }
        self.values.iter().map(|v| self.param.apply(&self.base, *v)).collect()
    }
}

/// Runs every value x replication x algorithm. Ordered by value, then
/// replication, then algorithm.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<RunSummary>> {
    let configs = spec.configs()?;
    let jobs: Vec<(usize, u64)> = configs
        .iter()
        .enumerate()
        .flat_map(|(i, c)| (0..c.replications as u64).map(move |r| (i, r)))
        .collect();
    let out = par_map(&jobs, |&(i, r)| run_replication(&configs[i], r, &spec.algorithms).map(|x| x.summaries));
    Ok(out.into_iter().collect::<Result<Vec<_>>>()?.into_iter().flatten().collect())
}

/// Mean and standard error of one metric at one sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stat {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

impl Stat {
    pub fn of(xs: &[f64]) -> Stat {
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        Stat {
            mean,
            stderr: (var / n as f64).sqrt(),
            n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointStats {
    pub value: f64,
    pub algorithm: String,
    pub revenue: Stat,
    pub regret: Stat,
    pub rounds: Stat,
}

pub fn aggregate(param: SweepParam, summaries: &[RunSummary]) -> Vec<PointStats> {
    let mut keys: Vec<(f64, String)> = Vec::new();
    for s in summaries {
        let key = (param.value_of(s), s.algorithm.clone());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(value, algorithm)| {
            let members: Vec<&RunSummary> = summaries
                .iter()
                .filter(|s| param.value_of(s) == value && s.algorithm == algorithm)
                .collect();
            let pick = |f: fn(&RunSummary) -> f64| Stat::of(&members.iter().map(|s| f(s)).collect::<Vec<_>>());
            PointStats {
                value,
                algorithm,
                revenue: pick(|s| s.revenue),
                regret: pick(|s| s.regret),
                rounds: pick(|s| s.rounds as f64),
            }
        })
        .collect()
}

fn create(path: &Path) -> Result<fs::File> {
    fs::File::create(path).map_err(|e| Error::io(path, e))
}

/// Writes `<param>_sweep.csv` and a matplotlib script plotting mean ± stderr
/// of revenue and regret against the swept parameter.
pub fn write_sweep(param: SweepParam, summaries: &[RunSummary], out_dir: &Path) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let csv_path = out_dir.join(format!("{}_sweep.csv", param.label()));
    write_summary_csv(summaries, create(&csv_path)?)?;
    let script_path = out_dir.join(format!("{}_sweep_plot.py", param.label()));
    let mut f = create(&script_path)?;
    f.write_all(plot_script(param, &csv_path).as_bytes())
        .map_err(|e| Error::io(&script_path, e))?;
    Ok((csv_path, script_path))
}

fn plot_script(param: SweepParam, csv_path: &Path) -> String {
    let file = csv_path.file_name().and_then(|f| f.to_str()).unwrap_or("sweep.csv");
    let col = param.label();
    format!(
        r#"# Plots mean +/- stderr of revenue and regret against {col}.
# Usage: python3 {col}_sweep_plot.py  (run from the directory holding {file})
import csv
import math
from collections import defaultdict

import matplotlib.pyplot as plt

rows = list(csv.DictReader(open("{file}")))
groups = defaultdict(list)
for r in rows:
    groups[(r["algorithm"], float(r["{col}"]))].append(r)

algorithms = sorted({{a for a, _ in groups}})
fig, axes = plt.subplots(1, 2, figsize=(11, 4))
for ax, metric in zip(axes, ["revenue", "regret"]):
    for a in algorithms:
        xs = sorted(x for b, x in groups if b == a)
        means, errs = [], []
        for x in xs:
            vals = [float(r[metric]) for r in groups[(a, x)]]
            m = sum(vals) / len(vals)
            var = sum((v - m) ** 2 for v in vals) / max(len(vals) - 1, 1)
            means.append(m)
            errs.append(math.sqrt(var / len(vals)))
        ax.errorbar(xs, means, yerr=errs, marker="o", capsize=3, label=a)
    ax.set_xlabel("{col}")
    ax.set_ylabel(metric)
    ax.legend()
fig.tight_layout()
fig.savefig("{col}_sweep.png", dpi=150)
"#
    )
}

/// One grid point of the truthfulness probe.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRow {
    pub seed: u64,
    pub round: u32,
    pub worker: WorkerId,
    pub true_cost: f64,
    /// Highest bid that still wins (before the `|D|·c_max` cap).
    pub critical_bid: f64,
    pub claimed: f64,
    pub recruited: bool,
    pub payment: f64,
    pub utility: f64,
    /// Utility of the same worker bidding its true cost.
    pub truthful_utility: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeSettings {
    pub winners_per_seed: usize,
    pub grid_points: usize,
    /// Grid runs from `lo_factor · c` to `hi_factor · max(critical, c)`.
    pub lo_factor: f64,
    pub hi_factor: f64,
}

impl Default for ProbeSettings {
    fn default() -> Self {
        ProbeSettings {
            winners_per_seed: 2,
            grid_points: 50,
            lo_factor: 0.2,
            hi_factor: 1.5,
        }
    }
}

/// Freezes SCMABA before an exploitation round, overrides one truthful
/// winner's claimed cost across a grid, and records what it would win.
pub fn probe_truthfulness(config: &SimConfig, seed: u64, settings: &ProbeSettings) -> Result<Vec<ProbeRow>> {
    let world = make_world(config, seed)?;
    let full = Scmaba::run(&world)?;
    let exploit_rounds: Vec<u32> = full
        .rounds
        .iter()
        .filter(|r| r.phase == Phase::Exploitation)
        .map(|r| r.round)
        .collect();
    if exploit_rounds.is_empty() {
        return Err(Error::NoExploitationRound);
    }
    let mut rng = stream_rng(seed, Stream::Probe, 0, 0);
    let picks = settings.winners_per_seed.min(exploit_rounds.len());
    let mut chosen: Vec<u32> = index::sample(&mut rng, exploit_rounds.len(), picks)
        .into_iter()
        .map(|i| exploit_rounds[i])
        .collect();
    chosen.sort_unstable();

    let mut rows = Vec::new();
    let mut mech = Scmaba::new(&world);
    for round in chosen {
        while mech.next_round() < round {
            if !mech.step()? {
                return Err(Error::Internal(format!("replay ended before round {round}")));
            }
        }
        let prefs = world.preferences(round);
        let truthful = mech.exploitation_auction(&prefs)?;
        let worker = truthful.winners[rng.random_range(0..truthful.winners.len())];
        let me = *truthful.ranking.iter().find(|b| b.worker == worker).expect("winner is ranked");
        let runner_up = truthful.ranking[config.winners];
        let critical = critical_bid(&me, &runner_up);
        let true_cost = prefs[worker.index()].true_cost;
        let outcome_utility = |claimed: f64| -> Result<(bool, f64, f64)> {
            let mut altered = prefs.clone();
            altered[worker.index()].claimed_cost = claimed;
            let out = mech.exploitation_auction(&altered)?;
            let funded = mech.ledger().can_afford(out.total_payment());
            match out.payment_of(worker) {
                Some(p) if funded => Ok((true, p, utility(p, true_cost, true))),
                _ => Ok((false, 0.0, 0.0)),
            }
        };
        let (_, _, truthful_utility) = outcome_utility(true_cost)?;
        let hi_anchor = if critical.is_finite() {
            critical.max(true_cost)
        } else {
            me.pref_size as f64 * config.cost_max * 2.0
        };
        let lo = settings.lo_factor * true_cost;
        let hi = settings.hi_factor * hi_anchor;
        let n = settings.grid_points.max(2);
        for i in 0..n {
            let claimed = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            let (recruited, payment, u) = outcome_utility(claimed)?;
            rows.push(ProbeRow {
                seed,
                round,
                worker,
                true_cost,
                critical_bid: critical,
                claimed,
                recruited,
                payment,
                utility: u,
                truthful_utility,
            });
        }
    }
    Ok(rows)
}

/// Shape of one probed winner's utility curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProbeVerdict {
    /// No grid point beats truthful bidding.
    pub truthful_dominant: bool,
    /// The curve has both regions: winning points sit exactly on the
    /// truthful plateau, losing points are exactly zero, and it switches
    /// from win to loss once.
    pub plateau_then_zero: bool,
}

pub fn check_probe(rows: &[ProbeRow]) -> ProbeVerdict {
    let truthful_dominant = rows.iter().all(|r| r.utility <= r.truthful_utility);
    let mut plateau_then_zero = true;
    let mut lost = false;
    for r in rows {
        if r.recruited {
            plateau_then_zero &= !lost && r.utility == r.truthful_utility && r.claimed <= r.critical_bid;
        } else {
            lost = true;
            plateau_then_zero &= r.utility == 0.0 && r.claimed >= r.critical_bid;
        }
    }
    plateau_then_zero &= lost && rows.first().is_some_and(|r| r.recruited);
    ProbeVerdict {
        truthful_dominant,
        plateau_then_zero,
    }
}

pub fn write_probe_csv(rows: &[ProbeRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "seed", "round", "worker_id", "true_cost", "critical_bid", "claimed_cost", "recruited", "payment", "utility",
    ])?;
    for r in rows {
        w.write_record([
            r.seed.to_string(),
            r.round.to_string(),
            r.worker.to_string(),
            r.true_cost.to_string(),
            r.critical_bid.to_string(),
            r.claimed.to_string(),
            u8::from(r.recruited).to_string(),
            r.payment.to_string(),
            r.utility.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct IrRow {
    pub seed: u64,
    pub round: u32,
    pub phase: Phase,
    pub worker: WorkerId,
    pub cost: f64,
    pub payment: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IrAudit {
    pub rows: Vec<IrRow>,
    /// Rows paying less than cost.
    pub violations: usize,
    pub exploration_gap: Option<f64>,
    pub exploitation_gap: Option<f64>,
}

impl IrAudit {
    /// Exploration overpays by more than exploitation does.
    pub fn exploration_gap_larger(&self) -> Option<bool> {
        Some(self.exploration_gap? > self.exploitation_gap?)
    }
}

/// One row per recruited worker per round of SCMABA runs on `seeds`.
pub fn audit_ir(config: &SimConfig, seeds: &[u64]) -> Result<IrAudit> {
    let traces = par_map(seeds, |&s| make_world(config, s).and_then(|w| Scmaba::run(&w)));
    let mut rows = Vec::new();
    for (trace, &seed) in traces.into_iter().zip(seeds) {
        for r in &trace?.rounds {
            for e in r.recruited() {
                rows.push(IrRow {
                    seed,
                    round: r.round,
                    phase: r.phase,
                    worker: e.worker,
                    cost: e.true_cost,
                    payment: e.payment,
                });
            }
        }
    }
    Ok(audit_rows(rows))
}

pub fn audit_rows(rows: Vec<IrRow>) -> IrAudit {
    let gap = |phase: Phase| {
        let gaps: Vec<f64> = rows.iter().filter(|r| r.phase == phase).map(|r| r.payment - r.cost).collect();
        (!gaps.is_empty()).then(|| gaps.iter().sum::<f64>() / gaps.len() as f64)
    };
    IrAudit {
        violations: rows.iter().filter(|r| r.payment < r.cost).count(),
        exploration_gap: gap(Phase::Exploration),
        exploitation_gap: gap(Phase::Exploitation),
        rows,
    }
}

pub fn write_ir_csv(audit: &IrAudit, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["seed", "round", "phase", "worker_id", "cost", "payment"])?;
    for r in &audit.rows {
        w.write_record([
            r.seed.to_string(),
            r.round.to_string(),
            r.phase.as_str().to_string(),
            r.worker.to_string(),
            r.cost.to_string(),
            r.payment.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentRow {
    pub worker: WorkerId,
    pub bucket: usize,
    pub true_sr: f64,
    /// `None` for never-pulled workers.
    pub estimate: Option<f64>,
    pub pulls: u64,
}

/// Learned vs. true SR of every worker after one SCMABA run.
pub fn emit_identification(config: &SimConfig, seed: u64) -> Result<(Vec<IdentRow>, Identification)> {
    let world = make_world(config, seed)?;
    let trace = Scmaba::run(&world)?;
    let rows = trace
        .profiles
        .iter()
        .zip(world.workers())
        .map(|(p, w)| IdentRow {
            worker: w.id,
            bucket: w.bucket,
            true_sr: w.expected_sr,
            estimate: (p.pulls() > 0).then(|| p.sr_mean()),
            pulls: p.pulls(),
        })
        .collect();
    let ident = identification_error(trace.profiles.as_slice(), world.workers(), config.sr_buckets.len());
    Ok((rows, ident))
}

pub fn write_identification_csv(rows: &[IdentRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["worker_id", "bucket", "true_sr", "estimated_sr", "pulls"])?;
    for r in rows {
        w.write_record([
            r.worker.to_string(),
            (r.bucket + 1).to_string(),
            r.true_sr.to_string(),
            r.estimate.map(|e| e.to_string()).unwrap_or_default(),
            r.pulls.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::standard() {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("greedy".parse::<Algorithm>().is_err());
        assert!("1.5-greedy".parse::<Algorithm>().is_err());
        assert_eq!(parse_algorithms("scmaba, random").unwrap(), vec![Algorithm::Scmaba, Algorithm::Random]);
    }

    #[test]
    fn value_lists_and_ranges() {
        assert_eq!(parse_values("6000:12000:1000").unwrap().len(), 7);
        assert_eq!(parse_values("5,10,15,20").unwrap(), vec![5.0, 10.0, 15.0, 20.0]);
        assert_eq!(parse_values("40:140:20").unwrap(), vec![40.0, 60.0, 80.0, 100.0, 120.0, 140.0]);
        assert!(parse_values("").is_err());
        assert!(parse_values("1:0:1").is_err());
    }

    #[test]
    fn sweep_validates_before_running() {
        let spec = SweepSpec {
            param: SweepParam::Winners,
            values: vec![5.0, 100.0],
            base: SimConfig::default(),
            algorithms: Algorithm::standard(),
        };
        assert!(matches!(spec.configs(), Err(Error::Config { field: "workers", .. })));
        let spec = SweepSpec {
            param: SweepParam::Winners,
            values: vec![2.5],
            base: SimConfig::default(),
            algorithms: Algorithm::standard(),
        };
        assert!(spec.configs().is_err());
    }

    #[test]
    fn stat_of_constant_has_zero_stderr() {
        let s = Stat::of(&[3.0, 3.0, 3.0]);
        assert_eq!((s.mean, s.stderr, s.n), (3.0, 0.0, 3));
    }

    #[test]
    fn empty_audit_passes() {
        let audit = audit_rows(vec![]);
        assert_eq!(audit.violations, 0);
        assert_eq!(audit.exploration_gap_larger(), None);
    }

    #[test]
    fn degenerate_run_has_no_probe_target() {
        let config = SimConfig {
            budget: 3.0,
            ..SimConfig::default()
        };
        assert!(matches!(
            probe_truthfulness(&config, 1, &ProbeSettings::default()),
            Err(Error::NoExploitationRound)
        ));
    }

    #[test]
    fn never_pulled_workers_have_no_estimate() {
        // Enough budget for the first supervised round only.
        let config = SimConfig {
            budget: 160.0,
            ..SimConfig::default()
        };
        let (rows, ident) = emit_identification(&config, 3).unwrap();
        assert!(rows.iter().any(|r| r.pulls == 0 && r.estimate.is_none()));
        assert!(!ident.unpulled.is_empty());
    }
}
