//! The hidden environment the platform never sees directly, plus the
//! behavior model deciding whether a worker really senses a task.
//!
//! Everything here is a pure function of `(SimConfig, seed)`. Each quantity is
//! drawn from its own derived stream (see [`crate::rng`]), so the value of,
//! say, worker 12's preference in round 30 does not depend on which other
//! quantities were realized first.
//!
//! A report's honesty flag is hidden: mechanisms only see
//! [`RoundReport::reported_value`]. Metrics and test oracles read it through
//! [`RoundReport::hidden_honesty`].

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::Deserialize;

use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};
use crate::types::{TaskId, WorkerId};

/// Half-width of the per-round jitter around a worker's expected SR.
pub const SR_JITTER: f64 = 0.05;
/// Half-width of the relative per-round perturbation of a task's value.
pub const TRUTH_JITTER: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub id: TaskId,
    pub weight: f64,
    pub base_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkerSpec {
    pub id: WorkerId,
    /// Expected sensing rate r_i.
    pub expected_sr: f64,
    /// Index into `SimConfig::sr_buckets`.
    pub bucket: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundPreference {
    pub worker: WorkerId,
    pub round: u32,
    /// Preferred tasks, sorted by id, no duplicates.
    pub tasks: Vec<TaskId>,
    pub true_cost: f64,
    /// The bid. Equal to `true_cost` unless a strategic override is applied.
    pub claimed_cost: f64,
}

impl RoundPreference {
    pub fn size(&self) -> usize {
        self.tasks.len()
    }

    /// Σ ω_j over the preferred tasks.
    pub fn weight_sum(&self, config: &SimConfig) -> f64 {
        self.tasks.iter().map(|t| config.weight(t.index())).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTruth {
    pub task: TaskId,
    pub round: u32,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundReport {
    pub worker: WorkerId,
    pub task: TaskId,
    pub round: u32,
    pub reported_value: f64,
    honest: bool,
}

impl RoundReport {
    /// Whether the worker really performed the task. Only revenue accounting
    /// and test oracles may look at this.
    pub fn hidden_honesty(&self) -> bool {
        self.honest
    }

    /// Builds a report directly, for tests and replays.
    pub fn new(worker: WorkerId, task: TaskId, round: u32, reported_value: f64, honest: bool) -> Self {
        RoundReport {
            worker,
            task,
            round,
            reported_value,
            honest,
        }
    }
}

/// Ground truth of every task in one round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundTruths {
    pub round: u32,
    values: Vec<f64>,
}

impl RoundTruths {
    pub fn new(round: u32, values: Vec<f64>) -> Self {
        RoundTruths { round, values }
    }

    pub fn value(&self, task: TaskId) -> Option<f64> {
        task.0.checked_sub(1).and_then(|i| self.values.get(i as usize)).copied()
    }
}

pub fn generate_tasks(config: &SimConfig, rng: &mut impl Rng) -> Vec<Task> {
    (0..config.tasks)
        .map(|i| Task {
            id: TaskId::from_index(i),
            weight: config.weight(i),
            base_value: rng.random_range(config.base_min..=config.base_max),
        })
        .collect()
}

/// Split-bucket population. Each bucket receives `floor(N * fraction)`
/// workers, the rounding remainder goes to the lowest bucket, and bucket
/// assignments are shuffled over worker ids.
pub fn generate_population(config: &SimConfig, rng: &mut impl Rng) -> Vec<WorkerSpec> {
    let n = config.workers;
    let mut counts: Vec<usize> = config
        .sr_buckets
        .iter()
        .map(|b| (n as f64 * b.fraction + 1e-9).floor() as usize)
        .collect();
    let assigned: usize = counts.iter().sum();
    let lowest = config
        .sr_buckets
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.lo.total_cmp(&b.1.lo))
        .map(|(i, _)| i)
        .unwrap_or(0);
    counts[lowest] += n - assigned;

    let mut labels: Vec<usize> = counts
        .iter()
        .enumerate()
        .flat_map(|(b, &c)| std::iter::repeat_n(b, c))
        .collect();
    // Fisher-Yates with the population stream.
    for i in (1..labels.len()).rev() {
        let j = rng.random_range(0..=i);
        labels.swap(i, j);
    }

    labels
        .into_iter()
        .enumerate()
        .map(|(i, bucket)| {
            let b = config.sr_buckets[bucket];
            let expected_sr = if b.hi > b.lo { rng.random_range(b.lo..=b.hi) } else { b.lo };
            WorkerSpec {
                id: WorkerId::from_index(i),
                expected_sr,
                bucket,
            }
        })
        .collect()
}

pub fn draw_preferences(
    worker: &WorkerSpec,
    round: u32,
    config: &SimConfig,
    rng: &mut impl Rng,
) -> Result<RoundPreference> {
    if config.pref_max > config.tasks || config.pref_min > config.pref_max || config.pref_min == 0 {
        return Err(Error::config(
            "pref_max",
            format!(
                "preference range [{}, {}] does not fit {} tasks",
                config.pref_min, config.pref_max, config.tasks
            ),
        ));
    }
    let size = rng.random_range(config.pref_min..=config.pref_max);
    let mut tasks: Vec<TaskId> = index::sample(rng, config.tasks, size)
        .into_iter()
        .map(TaskId::from_index)
        .collect();
    tasks.sort_unstable();
    let true_cost: f64 = (0..size)
        .map(|_| rng.random_range(config.cost_min..=config.cost_max))
        .sum();
    Ok(RoundPreference {
        worker: worker.id,
        round,
        tasks,
        true_cost,
        claimed_cost: true_cost,
    })
}

pub fn realize_ground_truth(task: &Task, round: u32, config: &SimConfig, rng: &mut impl Rng) -> GroundTruth {
    let u = rng.random_range(-TRUTH_JITTER..=TRUTH_JITTER);
    GroundTruth {
        task: task.id,
        round,
        value: perturbed_truth(task.base_value, u, config),
    }
}

fn perturbed_truth(base: f64, u: f64, config: &SimConfig) -> f64 {
    (base * (1.0 + u)).clamp(config.value_min, config.value_max)
}

/// Draws one report per preferred task. The realized SR for the round is the
/// expected SR plus uniform jitter, and each task is honest independently with
/// that probability. Honest reports land strictly within `eps1` of the truth;
/// fake reports land at least `2 * eps3` away.
pub fn realize_round_behavior(
    worker: &WorkerSpec,
    preference: &RoundPreference,
    truths: &RoundTruths,
    config: &SimConfig,
    rng: &mut impl Rng,
) -> Result<Vec<RoundReport>> {
    let jitter = rng.random_range(-SR_JITTER..=SR_JITTER);
    let realized_sr = (worker.expected_sr + jitter).clamp(0.0, 1.0);
    report_tasks(worker.id, preference, truths, realized_sr, config, rng)
}

/// Reports for every preferred task given the round's realized SR.
pub fn report_tasks(
    worker: WorkerId,
    preference: &RoundPreference,
    truths: &RoundTruths,
    realized_sr: f64,
    config: &SimConfig,
    rng: &mut impl Rng,
) -> Result<Vec<RoundReport>> {
    let noise = Normal::new(0.0, config.eps1 / 3.0)
        .map_err(|e| Error::config("eps1", e.to_string()))?;

    preference
        .tasks
        .iter()
        .map(|&task| {
            let truth = truths.value(task).ok_or(Error::MissingGroundTruth {
                task,
                round: preference.round,
            })?;
            let honest = rng.random::<f64>() < realized_sr;
            let reported_value = if honest {
                loop {
                    let e = noise.sample(rng);
                    if e.abs() < config.eps1 {
                        break truth + e;
                    }
                }
            } else {
                fake_report(truth, config, rng)
            };
            Ok(RoundReport {
                worker,
                task,
                round: preference.round,
                reported_value,
                honest,
            })
        })
        .collect()
}

/// Uniform over the value range minus the open band of radius `2 * eps3`
/// around the truth. Sampled directly from the two remaining intervals, which
/// has the same law as rejection sampling but always terminates.
fn fake_report(truth: f64, config: &SimConfig, rng: &mut impl Rng) -> f64 {
    let gap = 2.0 * config.eps3;
    let below = ((truth - gap) - config.value_min).max(0.0);
    let above = (config.value_max - (truth + gap)).max(0.0);
    let x = rng.random::<f64>() * (below + above);
    if x < below {
        config.value_min + x
    } else {
        (truth + gap + (x - below)).min(config.value_max)
    }
}

/// Employees are noiseless: the collected value is the ground truth itself.
pub fn collect_gtd(task: TaskId, round: u32, truths: &RoundTruths) -> Result<GroundTruth> {
    if truths.round != round {
        return Err(Error::Internal(format!(
            "ground truth for round {} requested from round {} table",
            round, truths.round
        )));
    }
    let value = truths
        .value(task)
        .ok_or(Error::MissingGroundTruth { task, round })?;
    Ok(GroundTruth { task, round, value })
}

/// Ground truth imported from CSV (`task_id,round,value`).
#[derive(Debug, Clone, Default)]
pub struct GroundTruthTable {
    values: HashMap<(TaskId, u32), f64>,
}

#[derive(Deserialize)]
struct GroundTruthRow {
    task_id: u32,
    round: u32,
    value: f64,
}

impl GroundTruthTable {
    pub fn from_reader(reader: impl std::io::Read) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut values = HashMap::new();
        for row in rdr.deserialize() {
            let row: GroundTruthRow = row?;
            if row.task_id == 0 {
                return Err(Error::config("ground_truth_path", "task ids are 1-based"));
            }
            values.insert((TaskId(row.task_id), row.round), row.value);
        }
        Ok(GroundTruthTable { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file)
    }

    pub fn get(&self, task: TaskId, round: u32) -> Option<f64> {
        self.values.get(&(task, round)).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// A fully seeded world.
#[derive(Debug, Clone)]
pub struct World {
    config: SimConfig,
    seed: u64,
    tasks: Vec<Task>,
    workers: Vec<WorkerSpec>,
    imported: Option<Arc<GroundTruthTable>>,
}

impl World {
    pub fn new(config: &SimConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let tasks = generate_tasks(config, &mut stream_rng(seed, Stream::Tasks, 0, 0));
        let workers = generate_population(config, &mut stream_rng(seed, Stream::Population, 0, 0));
        Ok(World {
            config: config.clone(),
            seed,
            tasks,
            workers,
            imported: None,
        })
    }

    /// Ground truth entries present in `table` replace the seeded draw;
    /// absent `(task, round)` pairs still fall back to it.
    pub fn with_imported_truth(mut self, table: Arc<GroundTruthTable>) -> Self {
        self.imported = Some(table);
        self
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn workers(&self) -> &[WorkerSpec] {
        &self.workers
    }

    pub fn worker(&self, id: WorkerId) -> &WorkerSpec {
        &self.workers[id.index()]
    }

    pub fn preference(&self, worker: WorkerId, round: u32) -> RoundPreference {
        let mut rng = stream_rng(self.seed, Stream::Preference, worker.0 as u64, round as u64);
        draw_preferences(self.worker(worker), round, &self.config, &mut rng)
            .expect("preference range validated with the config")
    }

    pub fn preferences(&self, round: u32) -> Vec<RoundPreference> {
        self.workers.iter().map(|w| self.preference(w.id, round)).collect()
    }

    pub fn ground_truth(&self, task: TaskId, round: u32) -> GroundTruth {
        if let Some(value) = self.imported.as_ref().and_then(|t| t.get(task, round)) {
            return GroundTruth { task, round, value };
        }
        let mut rng = stream_rng(self.seed, Stream::GroundTruth, task.0 as u64, round as u64);
        realize_ground_truth(&self.tasks[task.index()], round, &self.config, &mut rng)
    }

    pub fn round_truths(&self, round: u32) -> RoundTruths {
        RoundTruths::new(
            round,
            self.tasks.iter().map(|t| self.ground_truth(t.id, round).value).collect(),
        )
    }

    /// Reports of a recruited worker for its preferred tasks this round.
    pub fn round_behavior(&self, preference: &RoundPreference, truths: &RoundTruths) -> Result<Vec<RoundReport>> {
        if truths.round != preference.round {
            return Err(Error::Internal(format!(
                "behavior for round {} realized against round {} truths",
                preference.round, truths.round
            )));
        }
        let mut rng = stream_rng(
            self.seed,
            Stream::Behavior,
            preference.worker.0 as u64,
            preference.round as u64,
        );
        realize_round_behavior(self.worker(preference.worker), preference, truths, &self.config, &mut rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn forty_uniform_tasks() {
        let config = SimConfig::default();
        let tasks = generate_tasks(&config, &mut rng(1));
        assert_eq!(tasks.len(), 40);
        assert!(tasks.iter().all(|t| t.weight == 1.0));
        assert!(tasks.iter().all(|t| (10.0..=90.0).contains(&t.base_value)));
        assert_eq!(tasks[0].id, TaskId(1));
        assert_eq!(tasks[39].id, TaskId(40));
    }

    #[test]
    fn single_task() {
        let config = SimConfig {
            tasks: 1,
            pref_min: 1,
            pref_max: 1,
            ..SimConfig::default()
        };
        let tasks = generate_tasks(&config, &mut rng(3));
        assert_eq!(tasks.len(), 1);
        assert_eq!(tasks[0].id, TaskId(1));
    }

    #[test]
    fn tasks_are_deterministic_under_seed() {
        let config = SimConfig {
            tasks: 3,
            pref_min: 1,
            pref_max: 3,
            ..SimConfig::default()
        };
        let a = generate_tasks(&config, &mut rng(7));
        let b = generate_tasks(&config, &mut rng(7));
        assert_eq!(a, b);
    }

    fn bucket_counts(workers: &[WorkerSpec], buckets: usize) -> Vec<usize> {
        let mut counts = vec![0; buckets];
        for w in workers {
            counts[w.bucket] += 1;
        }
        counts
    }

    #[test]
    fn hundred_workers_split_evenly() {
        let config = SimConfig::default();
        let workers = generate_population(&config, &mut rng(13));
        assert_eq!(workers.len(), 100);
        assert_eq!(bucket_counts(&workers, 4), vec![25, 25, 25, 25]);
        for (b, bucket) in config.sr_buckets.iter().enumerate() {
            let members: Vec<f64> = workers.iter().filter(|w| w.bucket == b).map(|w| w.expected_sr).collect();
            assert!(members.iter().all(|r| bucket.contains(*r)));
            let mean = members.iter().sum::<f64>() / members.len() as f64;
            assert!(mean >= bucket.lo && mean <= bucket.hi, "bucket {b} mean {mean}");
        }
    }

    #[test]
    fn four_workers_one_per_bucket() {
        let config = SimConfig {
            workers: 4,
            winners: 2,
            ..SimConfig::default()
        };
        let workers = generate_population(&config, &mut rng(2));
        assert_eq!(bucket_counts(&workers, 4), vec![1, 1, 1, 1]);
    }

    #[test]
    fn rounding_remainder_goes_to_lowest_bucket() {
        let config = SimConfig {
            workers: 7,
            winners: 2,
            ..SimConfig::default()
        };
        let workers = generate_population(&config, &mut rng(2));
        assert_eq!(bucket_counts(&workers, 4), vec![1, 1, 1, 4]);
    }

    #[test]
    fn preferences_respect_table_ranges() {
        let config = SimConfig::default();
        let workers = generate_population(&config, &mut rng(5));
        let mut r = rng(6);
        for t in 1..200 {
            let p = draw_preferences(&workers[t as usize % 100], t, &config, &mut r).unwrap();
            assert!((5..=15).contains(&p.size()));
            assert!(p.tasks.windows(2).all(|w| w[0] < w[1]));
            let n = p.size() as f64;
            assert!(p.true_cost >= n * 0.1 && p.true_cost <= n * 1.0);
            assert!(p.true_cost >= 0.5 && p.true_cost <= 15.0);
            assert_eq!(p.claimed_cost, p.true_cost);
        }
    }

    #[test]
    fn forced_single_task_preference() {
        let config = SimConfig {
            tasks: 1,
            pref_min: 1,
            pref_max: 1,
            ..SimConfig::default()
        };
        let w = WorkerSpec {
            id: WorkerId(1),
            expected_sr: 0.5,
            bucket: 2,
        };
        let p = draw_preferences(&w, 1, &config, &mut rng(1)).unwrap();
        assert_eq!(p.tasks, vec![TaskId(1)]);
    }

    #[test]
    fn pref_max_above_m_is_a_config_error() {
        let config = SimConfig {
            tasks: 4,
            ..SimConfig::default()
        };
        let w = WorkerSpec {
            id: WorkerId(1),
            expected_sr: 0.5,
            bucket: 2,
        };
        assert!(matches!(
            draw_preferences(&w, 1, &config, &mut rng(1)),
            Err(Error::Config { field: "pref_max", .. })
        ));
    }

    #[test]
    fn world_preferences_are_replayable() {
        let world = World::new(&SimConfig::default(), 42).unwrap();
        assert_eq!(world.preference(WorkerId(17), 9), world.preference(WorkerId(17), 9));
        assert_ne!(world.preference(WorkerId(17), 9), world.preference(WorkerId(17), 10));
    }

    #[test]
    fn ground_truth_zero_perturbation_and_bounds() {
        let config = SimConfig::default();
        assert_eq!(perturbed_truth(50.0, 0.0, &config), 50.0);
        let task = Task {
            id: TaskId(1),
            weight: 1.0,
            base_value: 100.0,
        };
        let mut r = rng(9);
        for round in 0..500 {
            let v = realize_ground_truth(&task, round, &config, &mut r).value;
            assert!((90.0..=110.0).contains(&v));
        }
        let world = World::new(&config, 3).unwrap();
        assert_eq!(world.ground_truth(TaskId(4), 2), world.ground_truth(TaskId(4), 2));
    }

    #[test]
    fn certain_honesty_and_certain_dishonesty() {
        let config = SimConfig::default();
        for seed in 0..50 {
            let world = World::new(&config, seed).unwrap();
            let truths = world.round_truths(1);
            let pref = world.preference(WorkerId(1), 1);
            let reports = report_tasks(WorkerId(1), &pref, &truths, 1.0, &config, &mut rng(seed)).unwrap();
            assert!(reports.iter().all(|r| r.hidden_honesty()));
            let reports = report_tasks(WorkerId(1), &pref, &truths, 0.0, &config, &mut rng(seed)).unwrap();
            for r in &reports {
                assert!(!r.hidden_honesty());
                let truth = truths.value(r.task).unwrap();
                assert!((r.reported_value - truth).abs() >= 2.0 * config.eps3);
                assert!((config.value_min..=config.value_max).contains(&r.reported_value));
            }
        }
    }

    #[test]
    fn honest_fraction_tracks_expected_sr() {
        let config = SimConfig::default();
        let worker = WorkerSpec {
            id: WorkerId(1),
            expected_sr: 0.7,
            bucket: 1,
        };
        let world = World::new(&config, 1).unwrap();
        let mut honest = 0usize;
        let mut total = 0usize;
        let mut r = rng(77);
        let mut round = 1;
        while total < 10_000 {
            let pref = world.preference(WorkerId(1), round);
            let truths = world.round_truths(round);
            let reports = realize_round_behavior(&worker, &pref, &truths, &config, &mut r).unwrap();
            honest += reports.iter().filter(|x| x.hidden_honesty()).count();
            total += reports.len();
            round += 1;
        }
        let frac = honest as f64 / total as f64;
        assert!((frac - 0.7).abs() <= 0.02, "honest fraction {frac}");
    }

    #[test]
    fn gtd_is_exact_and_separates_reports() {
        let config = SimConfig::default();
        let truths = RoundTruths::new(3, vec![73.2, 10.0]);
        assert_eq!(collect_gtd(TaskId(1), 3, &truths).unwrap().value, 73.2);
        assert!(matches!(
            collect_gtd(TaskId(3), 3, &truths),
            Err(Error::MissingGroundTruth { .. })
        ));
        assert!(collect_gtd(TaskId(1), 4, &truths).is_err());

        let world = World::new(&config, 11).unwrap();
        for w in world.workers().iter().take(30) {
            for round in 1..5 {
                let pref = world.preference(w.id, round);
                let truths = world.round_truths(round);
                for r in world.round_behavior(&pref, &truths).unwrap() {
                    let gtd = collect_gtd(r.task, round, &truths).unwrap().value;
                    let gap = (r.reported_value - gtd).abs();
                    if r.hidden_honesty() {
                        assert!(gap < config.eps1);
                    } else {
                        assert!(gap >= 2.0 * config.eps3 && gap > config.eps1);
                    }
                }
            }
        }
    }

    #[test]
    fn imported_truth_overrides_draws() {
        let csv = "task_id,round,value\n1,1,42.5\n2,1,17\n";
        let table = GroundTruthTable::from_reader(csv.as_bytes()).unwrap();
        assert_eq!(table.len(), 2);
        let world = World::new(&SimConfig::default(), 1)
            .unwrap()
            .with_imported_truth(Arc::new(table));
        assert_eq!(world.ground_truth(TaskId(1), 1).value, 42.5);
        assert_eq!(world.ground_truth(TaskId(2), 1).value, 17.0);
        let drawn = World::new(&SimConfig::default(), 1).unwrap().ground_truth(TaskId(3), 1);
        assert_eq!(world.ground_truth(TaskId(3), 1), drawn);
    }
}
