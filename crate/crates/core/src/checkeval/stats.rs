//! Aggregate statistics over a batch of evaluation scores: mean, sample
//! standard deviation (n−1 denominator; zero for a single score), min, max
//! per metric.

use super::{CheckEvalError, EvalScores};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct StatBlock {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct AggregateStats {
    pub precision: StatBlock,
    pub recall: StatBlock,
    pub f1: StatBlock,
}

fn block(values: &[f64]) -> StatBlock {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() < 2 {
        0.0
    } else {
        let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
        (ss / (n - 1.0)).sqrt()
    };
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    StatBlock { mean, std, min, max }
}

pub fn aggregate_stats(scores: &[EvalScores]) -> Result<AggregateStats, CheckEvalError> {
    if scores.is_empty() {
        return Err(CheckEvalError::EmptyInput);
    }
    let collect = |f: fn(&EvalScores) -> f64| scores.iter().map(f).collect::<Vec<_>>();
    Ok(AggregateStats {
        precision: block(&collect(|s| s.precision)),
        recall: block(&collect(|s| s.recall)),
        f1: block(&collect(|s| s.f1)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scores(f1s: &[f64]) -> Vec<EvalScores> {
        f1s.iter()
            .map(|&v| EvalScores {
                precision: v,
                recall: v,
                f1: v,
            })
            .collect()
    }

    #[test]
    fn hand_computed_sample_std() {
        // values 0.2, 0.4, 0.6: mean 0.4; deviations ∓0.2, 0;
        // ss = 0.08, std = sqrt(0.08 / 2) = 0.2
        let stats = aggregate_stats(&scores(&[0.2, 0.4, 0.6])).unwrap();
        assert!((stats.f1.mean - 0.4).abs() < 1e-12);
        assert!((stats.f1.std - 0.2).abs() < 1e-12);
        assert_eq!(stats.f1.min, 0.2);
        assert_eq!(stats.f1.max, 0.6);
    }

    #[test]
    fn single_score_degenerates() {
        let stats = aggregate_stats(&scores(&[0.7])).unwrap();
        assert_eq!(stats.f1.std, 0.0);
        assert_eq!(stats.f1.min, 0.7);
        assert_eq!(stats.f1.max, 0.7);
        assert_eq!(stats.f1.mean, 0.7);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(
            aggregate_stats(&[]),
            Err(CheckEvalError::EmptyInput)
        ));
    }

    #[test]
    fn min_mean_max_ordering_and_zero_std_iff_all_equal() {
        let stats = aggregate_stats(&scores(&[0.3, 0.3, 0.3])).unwrap();
        assert_eq!(stats.f1.std, 0.0);
        let stats = aggregate_stats(&scores(&[0.1, 0.9])).unwrap();
        assert!(stats.f1.std > 0.0);
        assert!(stats.f1.min <= stats.f1.mean && stats.f1.mean <= stats.f1.max);
    }
}
