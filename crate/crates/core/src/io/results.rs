use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::selection::Strategy;

/// One (strategy, capacity, seed) run. `wall_time_s` is kept out of the
/// JSON form so records are reproducible byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub run_id: String,
    pub strategy: Strategy,
    pub capacity: usize,
    pub seed: u64,
    /// `A_1, …, A_T`.
    pub a_t: Vec<f64>,
    pub final_a_t: f64,
    #[serde(skip)]
    pub wall_time_s: f64,
}

impl ResultRecord {
    pub fn new(strategy: Strategy, capacity: usize, seed: u64, a_t: Vec<f64>, wall_time_s: f64) -> Result<Self> {
        let final_a_t = *a_t
            .last()
            .ok_or_else(|| Error::invalid("result record needs at least one task"))?;
        if a_t.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(Error::invalid("A_t values must lie in [0, 1]"));
        }
        Ok(ResultRecord {
            run_id: format!("{strategy}-m{capacity}-s{seed}"),
            strategy,
            capacity,
            seed,
            a_t,
            final_a_t,
            wall_time_s,
        })
    }
}

pub fn to_jsonl(records: &[ResultRecord]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn read_jsonl(text: &str) -> Result<Vec<ResultRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                location: format!("line {}", i + 1),
                message: e.to_string(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub strategy: Strategy,
    pub capacity: usize,
    pub runs: usize,
    pub mean_final_a_t: f64,
    /// Sample standard deviation over `sqrt(runs)`; 0 for a single run.
    pub stderr_final_a_t: f64,
}

/// One row per (strategy, capacity) present in `records`, in order of
/// first appearance.
pub fn summarize(records: &[ResultRecord]) -> Vec<SummaryRow> {
    let mut keys: Vec<(Strategy, usize)> = Vec::new();
    for r in records {
        if !keys.contains(&(r.strategy, r.capacity)) {
            keys.push((r.strategy, r.capacity));
        }
    }
    keys.into_iter()
        .map(|(strategy, capacity)| {
            let vals: Vec<f64> = records
                .iter()
                .filter(|r| r.strategy == strategy && r.capacity == capacity)
                .map(|r| r.final_a_t)
                .collect();
            let n = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / n;
            let stderr = if vals.len() > 1 {
                let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
                (var / n).sqrt()
            } else {
                0.0
            };
            SummaryRow { strategy, capacity, runs: vals.len(), mean_final_a_t: mean, stderr_final_a_t: stderr }
        })
        .collect()
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from("strategy,capacity,runs,mean_final_a_t,stderr_final_a_t\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.strategy, r.capacity, r.runs, r.mean_final_a_t, r.stderr_final_a_t
        )
        .expect("writing to a String");
    }
    out
}

pub fn timings_csv(records: &[ResultRecord]) -> String {
    let mut out = String::from("run_id,wall_time_s\n");
    for r in records {
        writeln!(out, "{},{:.3}", r.run_id, r.wall_time_s).expect("writing to a String");
    }
    out
}
