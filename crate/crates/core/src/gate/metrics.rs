//! Test-set evaluation: per-class precision/recall/F1, macro averages,
//! accuracy, and ROC AUC by the rank statistic with midranks for ties.

use std::fmt::Write as _;

use serde::Serialize;

use crate::dataset::CorrectionCandidate;
use crate::error::{Error, Result};
use crate::gate::model::GateModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalMetrics {
    pub class0: ClassMetrics,
    pub class1: ClassMetrics,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub accuracy: f64,
    /// Absent when the test set contains a single class.
    pub auc: Option<f64>,
    pub total: usize,
}

/// Score a test set with the model (class = probability > 0.5) and compute
/// the metric table.
pub fn evaluate(model: &GateModel, test: &[CorrectionCandidate]) -> Result<EvalMetrics> {
    if test.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    let scored: Vec<(f64, u8)> = test.iter().map(|c| (model.predict(c), c.label)).collect();
    Ok(metrics_from_scores(&scored))
}

/// Metrics from raw (probability, label) pairs.
pub fn metrics_from_scores(scored: &[(f64, u8)]) -> EvalMetrics {
    let class_metrics = |positive: u8| {
        let mut tp = 0usize;
        let mut fp = 0usize;
        let mut fn_ = 0usize;
        let mut support = 0usize;
        for &(p, label) in scored {
            let predicted = u8::from(p > 0.5);
            if label == positive {
                support += 1;
                if predicted == positive {
                    tp += 1;
                } else {
                    fn_ += 1;
                }
            } else if predicted == positive {
                fp += 1;
            }
        }
        // Zero denominators report as zero rather than NaN.
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        ClassMetrics {
            precision,
            recall,
            f1,
            support,
        }
    };

    let class0 = class_metrics(0);
    let class1 = class_metrics(1);
    let hits = scored
        .iter()
        .filter(|&&(p, label)| u8::from(p > 0.5) == label)
        .count();
    EvalMetrics {
        class0,
        class1,
        macro_precision: (class0.precision + class1.precision) / 2.0,
        macro_recall: (class0.recall + class1.recall) / 2.0,
        macro_f1: (class0.f1 + class1.f1) / 2.0,
        accuracy: hits as f64 / scored.len() as f64,
        auc: roc_auc(scored),
        total: scored.len(),
    }
}

/// AUC as the probability a random positive outranks a random negative,
/// computed from midranks (equivalent to trapezoidal ROC integration).
pub fn roc_auc(scored: &[(f64, u8)]) -> Option<f64> {
    let n1 = scored.iter().filter(|&&(_, l)| l == 1).count();
    let n0 = scored.len() - n1;
    if n0 == 0 || n1 == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scored.len()).collect();
    order.sort_by(|&a, &b| scored[a].0.partial_cmp(&scored[b].0).expect("finite scores"));

    let mut positive_rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end < order.len() && scored[order[end]].0 == scored[order[start]].0 {
            end += 1;
        }
        // Ranks are 1-based; tied scores share the mean rank of their run.
        let midrank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            if scored[i].1 == 1 {
                positive_rank_sum += midrank;
            }
        }
        start = end;
    }
    let n1f = n1 as f64;
    Some((positive_rank_sum - n1f * (n1f + 1.0) / 2.0) / (n0 as f64 * n1f))
}

impl EvalMetrics {
    /// Aligned text table, one row per class plus the macro average, with
    /// accuracy and AUC lines below.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<13} {:>9} {:>9} {:>9} {:>9}",
            "class", "precision", "recall", "f1", "support"
        );
        for (name, m) in [("0", &self.class0), ("1", &self.class1)] {
            let _ = writeln!(
                out,
                "{:<13} {:>9.3} {:>9.3} {:>9.3} {:>9}",
                name, m.precision, m.recall, m.f1, m.support
            );
        }
        let _ = writeln!(
            out,
            "{:<13} {:>9.3} {:>9.3} {:>9.3} {:>9}",
            "macro avg", self.macro_precision, self.macro_recall, self.macro_f1, self.total
        );
        let _ = writeln!(out, "{:<13} {:>9.3}", "accuracy", self.accuracy);
        match self.auc {
            Some(auc) => {
                let _ = writeln!(out, "{:<13} {:>9.3}", "roc auc", auc);
            }
            None => {
                let _ = writeln!(out, "{:<13} {:>9}", "roc auc", "n/a");
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_separation_gives_auc_one() {
        let scored = vec![(0.9, 1), (0.8, 1), (0.2, 0), (0.1, 0)];
        let m = metrics_from_scores(&scored);
        assert_eq!(m.auc, Some(1.0));
        assert_eq!(m.accuracy, 1.0);
        assert_eq!(m.macro_f1, 1.0);
        assert_eq!(m.class1.support, 2);
    }

    #[test]
    fn constant_scores_give_auc_half() {
        let scored = vec![(0.5, 1), (0.5, 0), (0.5, 1), (0.5, 0)];
        let m = metrics_from_scores(&scored);
        assert_eq!(m.auc, Some(0.5));
        // p > 0.5 is false everywhere, so everything predicts class 0.
        assert_eq!(m.class0.recall, 1.0);
        assert_eq!(m.class1.recall, 0.0);
    }

    #[test]
    fn single_class_has_no_auc() {
        let scored = vec![(0.4, 0), (0.6, 0)];
        let m = metrics_from_scores(&scored);
        assert_eq!(m.auc, None);
        assert!(m.render_table().contains("n/a"));
    }

    #[test]
    fn reversed_ranking_gives_auc_zero() {
        let scored = vec![(0.1, 1), (0.9, 0)];
        let m = metrics_from_scores(&scored);
        assert_eq!(m.auc, Some(0.0));
    }

    #[test]
    fn table_mirrors_expected_columns() {
        let scored = vec![(0.9, 1), (0.1, 0), (0.2, 0)];
        let table = metrics_from_scores(&scored).render_table();
        assert!(table.contains("precision"));
        assert!(table.contains("recall"));
        assert!(table.contains("f1"));
        assert!(table.contains("support"));
        assert!(table.contains("macro avg"));
        assert!(table.contains("accuracy"));
    }
}
