//! Benchmark harness: correlate checklist scores with human judgments over
//! a dataset of (reference, candidate, per-dimension human scores) rows.
//!
//! For each row the harness scores the pair and uses F1 as the metric
//! value; rows missing a human score for a dimension are skipped for that
//! dimension with a warning. Dimensions with fewer than two usable rows or
//! zero variance are reported as absent.

use super::{kendall_tau, score_pair, spearman, CheckEvalError, EvalScores};
use crate::gateway::Gateway;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub reference: String,
    pub candidate: String,
    #[serde(default)]
    pub human_scores: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct CorrelationResult {
    pub spearman_rho: f64,
    pub kendall_tau: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub per_dimension: BTreeMap<String, CorrelationResult>,
    pub row_scores: Vec<EvalScores>,
    pub warnings: Vec<String>,
}

pub fn benchmark_harness(
    rows: &[BenchmarkRow],
    gateway: &Gateway,
) -> Result<BenchmarkReport, CheckEvalError> {
    if rows.is_empty() {
        return Err(CheckEvalError::EmptyInput);
    }

    let mut warnings = Vec::new();
    let mut row_scores = Vec::with_capacity(rows.len());
    for row in rows {
        row_scores.push(score_pair(&row.reference, &row.candidate, gateway)?);
    }

    let dimensions: BTreeSet<String> = rows
        .iter()
        .flat_map(|r| r.human_scores.keys().cloned())
        .collect();

    let mut per_dimension = BTreeMap::new();
    for dimension in dimensions {
        let mut metric = Vec::new();
        let mut human = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            match row.human_scores.get(&dimension) {
                Some(score) => {
                    metric.push(row_scores[i].f1);
                    human.push(*score);
                }
                None => {
                    let warning = format!(
                        "row {i} has no human score for dimension {dimension}; skipped"
                    );
                    gateway.flag(warning.clone());
                    warnings.push(warning);
                }
            }
        }
        if metric.len() < 2 {
            let warning = format!(
                "dimension {dimension}: only {} usable row(s), correlation skipped",
                metric.len()
            );
            gateway.flag(warning.clone());
            warnings.push(warning);
            continue;
        }
        match (spearman(&metric, &human), kendall_tau(&metric, &human)) {
            (Ok(rho), Ok(tau)) => {
                per_dimension.insert(
                    dimension,
                    CorrelationResult {
                        spearman_rho: rho,
                        kendall_tau: tau,
                        n: metric.len(),
                    },
                );
            }
            (rho, tau) => {
                let warning = format!(
                    "dimension {dimension}: correlation undefined (rho: {}, tau: {})",
                    rho.err().map(|e| e.to_string()).unwrap_or_else(|| "ok".into()),
                    tau.err().map(|e| e.to_string()).unwrap_or_else(|| "ok".into()),
                );
                gateway.flag(warning.clone());
                warnings.push(warning);
            }
        }
    }

    Ok(BenchmarkReport {
        per_dimension,
        row_scores,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::Clock;
    use crate::gateway::ScriptedBackend;

    // Rows are scripted so row i gets F1 = i/(i+1)-ish distinct values by
    // varying the number of yes judgments.
    fn scripted_rows(n: usize) -> (Vec<BenchmarkRow>, Gateway) {
        let mut entries: Vec<(Vec<String>, String)> = Vec::new();
        let mut rows = Vec::new();
        for i in 0..n {
            let reference = format!("reference text {i}");
            let candidate = format!("candidate text {i}");
            // 4-item checklists; row i judges i+1 items present (n <= 3).
            let yes = (i + 1).min(4);
            let items = "1. a\n2. b\n3. c\n4. d".to_string();
            entries.push((
                vec![format!("compose-checklist"), format!("text {i}")],
                items,
            ));
            let verdicts = (1..=4)
                .map(|k| format!("{k}. {}", if k <= yes { "yes" } else { "no" }))
                .collect::<Vec<_>>()
                .join("\n");
            entries.push((
                vec![format!("judge-checklist"), format!("text {i}")],
                verdicts,
            ));
            let mut human_scores = BTreeMap::new();
            human_scores.insert("consistency".to_string(), (i + 1) as f64);
            rows.push(BenchmarkRow {
                reference,
                candidate,
                human_scores,
            });
        }
        let refs: Vec<(Vec<&str>, &str)> = entries
            .iter()
            .map(|(c, r)| (c.iter().map(String::as_str).collect(), r.as_str()))
            .collect();
        let gw = Gateway::builder(Box::new(ScriptedBackend::from_patterns(refs)), 32000)
            .clock(Clock::Fixed(0))
            .build();
        (rows, gw)
    }

    #[test]
    fn metric_equal_to_human_gives_perfect_correlation() {
        let (rows, gw) = scripted_rows(3);
        let report = benchmark_harness(&rows, &gw).unwrap();
        let result = &report.per_dimension["consistency"];
        // F1 rises with the yes-count, matching the human ordering exactly.
        assert_eq!(result.spearman_rho, 1.0);
        assert_eq!(result.kendall_tau, 1.0);
        assert_eq!(result.n, 3);
    }

    #[test]
    fn two_row_dataset_correlates_over_n_2() {
        let (rows, gw) = scripted_rows(2);
        let report = benchmark_harness(&rows, &gw).unwrap();
        assert_eq!(report.per_dimension["consistency"].n, 2);
    }

    #[test]
    fn unmatched_row_decrements_n_with_warning() {
        let (mut rows, gw) = scripted_rows(3);
        rows[1].human_scores.clear();
        let report = benchmark_harness(&rows, &gw).unwrap();
        assert_eq!(report.per_dimension["consistency"].n, 2);
        assert!(!report.warnings.is_empty());
    }

    #[test]
    fn empty_dataset_is_an_error() {
        let gw = Gateway::builder(
            Box::new(ScriptedBackend::from_patterns(vec![])),
            32000,
        )
        .clock(Clock::Fixed(0))
        .build();
        assert!(matches!(
            benchmark_harness(&[], &gw),
            Err(CheckEvalError::EmptyInput)
        ));
    }
}
