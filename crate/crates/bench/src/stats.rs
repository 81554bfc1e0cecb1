//! Summary statistics over timing samples.

use serde::{Deserialize, Serialize};

use crate::error::BenchError;

/// Order statistics and moments of a sample set, all in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    /// Mean of the middle half after dropping `floor(n/4)` samples from each end.
    pub iqm: f64,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub min: f64,
    pub median: f64,
    /// Maximal observed execution time.
    pub moet: f64,
    pub n: usize,
}

/// One row of a timing table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub label: String,
    pub iqm: f64,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub median: f64,
    pub moet: f64,
    /// Wall time of the excluded first call.
    pub first_call: f64,
    pub n: usize,
}

impl TimingReport {
    pub fn new(label: impl Into<String>, stats: Stats, first_call: f64) -> Self {
        Self {
            label: label.into(),
            iqm: stats.iqm,
            mean: stats.mean,
            std: stats.std,
            min: stats.min,
            median: stats.median,
            moet: stats.moet,
            first_call,
            n: stats.n,
        }
    }
}

pub fn compute_stats(samples: &[f64]) -> Result<Stats, BenchError> {
    if samples.is_empty() {
        return Err(BenchError::EmptySamples);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let trim = n / 4;
    let middle = &sorted[trim..n - trim];
    let iqm = middle.iter().sum::<f64>() / middle.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n as f64;
    let var = sorted.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    Ok(Stats {
        iqm,
        mean,
        std: var.sqrt(),
        min: sorted[0],
        median,
        moet: sorted[n - 1],
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example() {
        let s = compute_stats(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!(s.iqm, 2.5);
        assert_eq!(s.moet, 4.0);
        assert_eq!(s.min, 1.0);
        assert_eq!(s.median, 2.5);
        assert_eq!(s.n, 4);
    }

    #[test]
    fn constant_samples() {
        let s = compute_stats(&[0.25; 7]).unwrap();
        assert_eq!(
            (s.iqm, s.mean, s.median, s.min, s.moet, s.std),
            (0.25, 0.25, 0.25, 0.25, 0.25, 0.0)
        );
    }

    #[test]
    fn single_sample_and_empty() {
        let s = compute_stats(&[3.0]).unwrap();
        assert_eq!((s.iqm, s.median, s.std), (3.0, 3.0, 0.0));
        assert!(matches!(compute_stats(&[]), Err(BenchError::EmptySamples)));
    }
}
