//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use scmaba::trace::RunTrace;
use scmaba::World;

/// Plain alternating fixed point: weights start at the clamped priors,
/// estimate is the weighted mean, weights become `n / (v − û)²` clamped.
pub fn etd_oracle(values: &[f64], priors: &[f64], tol: f64, max_iters: usize, lam_lo: f64, lam_hi: f64) -> f64 {
    let n = values.len() as f64;
    let mut w: Vec<f64> = priors.iter().map(|p| p.max(lam_lo).min(lam_hi)).collect();
    let mean = |w: &[f64]| {
        let num: f64 = values.iter().zip(w).map(|(v, w)| v * w).sum();
        let den: f64 = w.iter().sum();
        num / den
    };
    let mut u = mean(&w);
    for _ in 0..max_iters {
        for (i, v) in values.iter().enumerate() {
            let d2 = (v - u).powi(2);
            w[i] = if d2 == 0.0 { lam_hi } else { (n / d2).max(lam_lo).min(lam_hi) };
        }
        let next = mean(&w);
        let done = (next - u).abs() < tol;
        u = next;
        if done {
            break;
        }
    }
    u
}

/// Weighted honest reports, recounted by regenerating every recruited
/// worker's behavior from the world instead of reading the stored reports.
pub fn recount_revenue(trace: &RunTrace, world: &World) -> f64 {
    let mut total = 0.0;
    for r in &trace.rounds {
        let truths = world.round_truths(r.round);
        for e in r.entries.iter().filter(|e| e.recruited) {
            let pref = world.preference(e.worker, r.round);
            for rep in world.round_behavior(&pref, &truths).unwrap() {
                if rep.hidden_honesty() {
                    total += world.config().weight(rep.task.index());
                }
            }
        }
    }
    total
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn stderr(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
    (var / xs.len() as f64).sqrt()
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut r = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            r[idx[k]] = avg;
        }
        i = j + 1;
    }
    r
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    pearson(&ranks(a), &ranks(b))
}

/// Least-squares slope of `y` on `x`.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let num: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    num / den
}
