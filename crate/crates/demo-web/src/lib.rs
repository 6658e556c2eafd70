//! Browser bindings. Each export runs a small simulation and returns JSON.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use scmaba::harness::{aggregate, emit_identification, probe_truthfulness, run_replications, Algorithm, ProbeSettings, SweepParam};
use scmaba::SimConfig;

#[derive(Serialize)]
struct AlgorithmPoint {
    algorithm: String,
    revenue: f64,
    revenue_se: f64,
    regret: f64,
    rounds: f64,
}

#[derive(Serialize)]
struct CurvePoint {
    claimed: f64,
    utility: f64,
    recruited: bool,
}

#[derive(Serialize)]
struct Curve {
    worker: u32,
    round: u32,
    true_cost: f64,
    critical_bid: f64,
    points: Vec<CurvePoint>,
}

#[derive(Serialize)]
struct WorkerPoint {
    worker: u32,
    bucket: usize,
    true_sr: f64,
    estimate: Option<f64>,
    pulls: u64,
}

fn config(budget: f64, workers: usize, winners: usize, seed: u64) -> SimConfig {
    SimConfig {
        budget,
        workers,
        winners,
        seed,
        ..SimConfig::default()
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("plain data serializes")
}

pub fn compare_json(budget: f64, workers: usize, winners: usize, reps: usize, seed: u64) -> scmaba::Result<String> {
    let c = SimConfig {
        replications: reps.max(1),
        ..config(budget, workers, winners, seed)
    };
    let summaries = run_replications(&c, &Algorithm::standard())?;
    let points: Vec<AlgorithmPoint> = aggregate(SweepParam::Budget, &summaries)
        .into_iter()
        .map(|p| AlgorithmPoint {
            algorithm: p.algorithm,
            revenue: p.revenue.mean,
            revenue_se: p.revenue.stderr,
            regret: p.regret.mean,
            rounds: p.rounds.mean,
        })
        .collect();
    Ok(to_json(&points))
}

pub fn truthfulness_json(budget: f64, seed: u64) -> scmaba::Result<String> {
    let settings = ProbeSettings {
        winners_per_seed: 1,
        ..ProbeSettings::default()
    };
    let rows = probe_truthfulness(&config(budget, 100, 10, seed), seed, &settings)?;
    let first = &rows[0];
    let curve = Curve {
        worker: first.worker.0,
        round: first.round,
        true_cost: first.true_cost,
        critical_bid: first.critical_bid,
        points: rows
            .iter()
            .map(|r| CurvePoint {
                claimed: r.claimed,
                utility: r.utility,
                recruited: r.recruited,
            })
            .collect(),
    };
    Ok(to_json(&curve))
}

pub fn identification_json(budget: f64, seed: u64) -> scmaba::Result<String> {
    let (rows, _) = emit_identification(&config(budget, 100, 10, seed), seed)?;
    let points: Vec<WorkerPoint> = rows
        .into_iter()
        .map(|r| WorkerPoint {
            worker: r.worker.0,
            bucket: r.bucket + 1,
            true_sr: r.true_sr,
            estimate: r.estimate,
            pulls: r.pulls,
        })
        .collect();
    Ok(to_json(&points))
}

fn js_err(e: scmaba::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Mean revenue, regret and rounds of the four algorithms.
#[wasm_bindgen]
pub fn compare(budget: f64, workers: usize, winners: usize, reps: usize, seed: u64) -> Result<String, JsError> {
    compare_json(budget, workers, winners, reps, seed).map_err(js_err)
}

/// Utility of one exploitation winner as its claimed cost varies.
#[wasm_bindgen]
pub fn truthfulness(budget: f64, seed: u64) -> Result<String, JsError> {
    truthfulness_json(budget, seed).map_err(js_err)
}

/// Learned against true sensing rate for every worker.
#[wasm_bindgen]
pub fn identification(budget: f64, seed: u64) -> Result<String, JsError> {
    identification_json(budget, seed).map_err(js_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compare_lists_four_algorithms() {
        let json: serde_json::Value = serde_json::from_str(&compare_json(2000.0, 40, 5, 2, 1).unwrap()).unwrap();
        let names: Vec<&str> = json.as_array().unwrap().iter().map(|p| p["algorithm"].as_str().unwrap()).collect();
        assert_eq!(names, ["SCMABA", "0.3-Greedy", "0.7-Greedy", "Random"]);
    }

    #[test]
    fn curve_is_flat_then_zero() {
        let json: serde_json::Value = serde_json::from_str(&truthfulness_json(10_000.0, 3).unwrap()).unwrap();
        let pts = json["points"].as_array().unwrap();
        assert_eq!(pts.len(), 50);
        assert!(pts[0]["recruited"].as_bool().unwrap());
        assert_eq!(pts[49]["utility"].as_f64().unwrap(), 0.0);
    }

    #[test]
    fn tiny_budget_has_no_curve() {
        assert!(truthfulness_json(5.0, 3).is_err());
    }

    #[test]
    fn identification_covers_population() {
        let json: serde_json::Value = serde_json::from_str(&identification_json(10_000.0, 2).unwrap()).unwrap();
        assert_eq!(json.as_array().unwrap().len(), 100);
    }
}
