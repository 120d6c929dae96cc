use serde::{Deserialize, Serialize};

use super::learner::Learner;
use super::stream::TaskStream;
use crate::error::{Error, Result};

/// Lower-triangular accuracies: row `t - 1` holds `a[t][1..=t]`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AccuracyMatrix {
    rows: Vec<Vec<f64>>,
}

impl AccuracyMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends the row for the next task; it must have one entry per task
    /// seen so far, each in `[0, 1]`.
    pub fn push_row(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.rows.len() + 1 {
            return Err(Error::invalid(format!(
                "row {} needs {} entries, got {}",
                self.rows.len() + 1,
                self.rows.len() + 1,
                row.len()
            )));
        }
        if row.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(Error::invalid("accuracies must lie in [0, 1]"));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn tasks(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// `a[t][i]`, both 1-based.
    pub fn get(&self, t: usize, i: usize) -> Option<f64> {
        if i == 0 || i > t {
            return None;
        }
        self.rows.get(t.checked_sub(1)?)?.get(i - 1).copied()
    }

    /// `A_t`, the mean of row `t` (1-based).
    pub fn average(&self, t: usize) -> Option<f64> {
        let row = self.rows.get(t.checked_sub(1)?)?;
        Some(row.iter().sum::<f64>() / row.len() as f64)
    }

    /// `A_1, …, A_T`.
    pub fn averages(&self) -> Vec<f64> {
        (1..=self.rows.len()).filter_map(|t| self.average(t)).collect()
    }

    pub fn final_average(&self) -> Option<f64> {
        self.average(self.rows.len())
    }
}

/// Accuracy on each of the test splits of tasks `1..=t` (1-based), with
/// prediction over every class the learner currently knows, and their mean.
pub fn evaluate(learner: &Learner, stream: &TaskStream, t: usize) -> Result<(Vec<f64>, f64)> {
    if t == 0 || t > stream.tasks.len() {
        return Err(Error::invalid(format!(
            "task index {t} outside 1..={}",
            stream.tasks.len()
        )));
    }
    let row = stream.tasks[..t]
        .iter()
        .map(|task| {
            let mut correct = 0usize;
            for s in &task.test {
                if learner.predict(&s.input)? == s.class_id as usize {
                    correct += 1;
                }
            }
            Ok(correct as f64 / task.test.len() as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mean = row.iter().sum::<f64>() / t as f64;
    Ok((row, mean))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_row_average() {
        let mut m = AccuracyMatrix::new();
        m.push_row(vec![0.8]).unwrap();
        assert_eq!(m.average(1), Some(0.8));
        assert_eq!(m.get(1, 1), Some(0.8));
        m.push_row(vec![0.5, 0.7]).unwrap();
        assert!((m.average(2).unwrap() - 0.6).abs() < 1e-15);
        assert_eq!(m.get(1, 2), None);
        assert_eq!(m.averages().len(), 2);
    }

    #[test]
    fn rejects_bad_rows() {
        let mut m = AccuracyMatrix::new();
        assert!(m.push_row(vec![0.5, 0.5]).is_err());
        assert!(m.push_row(vec![1.5]).is_err());
    }
}
