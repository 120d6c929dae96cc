//! Strategy-comparison sweeps over (strategy, capacity, seed) and the
//! statistics used to compare strategies.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::Result;
use crate::io::{summarize, summary_csv, timings_csv, to_jsonl, write_atomic, ResultRecord, SummaryRow};
use crate::selection::Strategy;
use crate::sim::{run_experiment, ExperimentConfig};

pub const RESULTS_FILE: &str = "results.jsonl";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const TIMINGS_FILE: &str = "timings.csv";

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub config: ExperimentConfig,
    pub strategies: Vec<Strategy>,
    pub capacities: Vec<usize>,
    pub seeds: Vec<u64>,
}

impl Sweep {
    /// Runs every combination in parallel. Records come back in
    /// (strategy, capacity, seed) order whatever the scheduling.
    pub fn run(&self) -> Result<Vec<ResultRecord>> {
        let jobs: Vec<(Strategy, usize, u64)> = self
            .strategies
            .iter()
            .flat_map(|&s| {
                self.capacities
                    .iter()
                    .flat_map(move |&c| self.seeds.iter().map(move |&seed| (s, c, seed)))
            })
            .collect();
        jobs.par_iter()
            .map(|&(strategy, capacity, seed)| {
                let start = Instant::now();
                let result = run_experiment(&self.config, strategy, capacity, seed)?;
                ResultRecord::new(
                    strategy,
                    capacity,
                    seed,
                    result.accuracy.averages(),
                    start.elapsed().as_secs_f64(),
                )
            })
            .collect()
    }
}

/// Writes `results.jsonl`, `summary.csv` and `timings.csv` into `dir`.
pub fn write_outputs(dir: &Path, records: &[ResultRecord]) -> Result<Vec<SummaryRow>> {
    std::fs::create_dir_all(dir)?;
    let summary = summarize(records);
    write_atomic(&dir.join(RESULTS_FILE), to_jsonl(records)?.as_bytes())?;
    write_atomic(&dir.join(SUMMARY_FILE), summary_csv(&summary).as_bytes())?;
    write_atomic(&dir.join(TIMINGS_FILE), timings_csv(records).as_bytes())?;
    Ok(summary)
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Result of a one-sided paired sign test of `H1: median difference > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignTest {
    pub wins: usize,
    pub losses: usize,
    pub ties: usize,
    pub p_value: f64,
}

/// Exact binomial sign test; ties are dropped.
pub fn paired_sign_test(differences: &[f64]) -> SignTest {
    let wins = differences.iter().filter(|&&d| d > 0.0).count();
    let losses = differences.iter().filter(|&&d| d < 0.0).count();
    let ties = differences.len() - wins - losses;
    let n = wins + losses;
    let p_value = if n == 0 {
        1.0
    } else {
        (wins..=n).map(|k| binomial(n, k)).sum::<f64>() / 2f64.powi(n as i32)
    };
    SignTest { wins, losses, ties, p_value }
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_test_values() {
        let t = paired_sign_test(&[1.0; 5]);
        assert_eq!(t.wins, 5);
        assert!((t.p_value - 1.0 / 32.0).abs() < 1e-15);
        let mut d = vec![1.0; 15];
        d.extend([-1.0; 5]);
        d.push(0.0);
        let t = paired_sign_test(&d);
        assert_eq!((t.wins, t.losses, t.ties), (15, 5, 1));
        assert!((t.p_value - 0.020_694_732_666_015_625).abs() < 1e-12);
        assert_eq!(paired_sign_test(&[0.0]).p_value, 1.0);
    }

    #[test]
    fn binomial_coefficients() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(20, 0), 1.0);
        assert_eq!(binomial(20, 20), 1.0);
    }
}
