//! The hybrid decision rule — apply a phonetic correction only when the
//! trained gate predicts above 0.5 — and the evaluation harness that compares
//! baseline, corrector-only, and hybrid WER per threshold.

use std::fmt::Write as _;
use std::io::{BufWriter, Write as IoWrite};
use std::path::Path;

use serde::Serialize;

use crate::corrector::{correct, Context, PhocoConfig};
use crate::dataset::{threshold_index, CorrectionCandidate};
use crate::error::{Error, Result};
use crate::gate::GateModel;
use crate::phonetics::G2pTables;

/// An accept/reject policy over proposed corrections. The trained model is
/// the production policy; the oracle and the constant policies bound it in
/// tests and reports.
pub trait Gate {
    fn accept(&self, candidate: &CorrectionCandidate) -> bool;
}

/// Accept when the classifier's probability is strictly greater than 0.5.
pub struct NeuralGate<'a> {
    pub model: &'a GateModel,
}

impl Gate for NeuralGate<'_> {
    fn accept(&self, candidate: &CorrectionCandidate) -> bool {
        self.model.predict(candidate) > 0.5
    }
}

/// Accept exactly the corrections that lower the WER (upper bound).
pub struct OracleGate;

impl Gate for OracleGate {
    fn accept(&self, candidate: &CorrectionCandidate) -> bool {
        candidate.is_positive()
    }
}

/// Accept everything: the hybrid degenerates to the plain corrector.
pub struct AlwaysAccept;

impl Gate for AlwaysAccept {
    fn accept(&self, _: &CorrectionCandidate) -> bool {
        true
    }
}

/// Reject everything: the hybrid degenerates to the raw ASR output.
pub struct NeverAccept;

impl Gate for NeverAccept {
    fn accept(&self, _: &CorrectionCandidate) -> bool {
        false
    }
}

/// Correct one hypothesis with the corrector, then keep the result only if
/// the gate predicts strictly above 0.5. When the corrector proposes no
/// change the classifier is not consulted.
pub fn hybrid_correct(
    hypothesis: &str,
    ctx: &Context,
    cfg: &PhocoConfig,
    model: &GateModel,
    tables: &G2pTables,
) -> Result<String> {
    let (corrected, replacements) = correct(hypothesis, ctx, cfg, tables)?;
    if replacements.is_empty() || corrected == hypothesis {
        return Ok(hypothesis.to_string());
    }
    if model.predict_parts(hypothesis, &corrected, cfg) > 0.5 {
        Ok(corrected)
    } else {
        Ok(hypothesis.to_string())
    }
}

/// (base − improved) / base; base must be positive.
pub fn relative_reduction(base: f64, improved: f64) -> Result<f64> {
    if base <= 0.0 {
        return Err(Error::NonPositiveBase(base));
    }
    Ok((base - improved) / base)
}

/// One aggregate row of the report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReportRow {
    pub threshold: f64,
    pub mean_phoco_wer: f64,
    pub mean_hybrid_wer: f64,
    pub rel_vs_asr: f64,
    pub rel_vs_phoco: f64,
}

/// Per-threshold mean WERs with relative reductions, the unweighted averages
/// row, and the ASR baseline they are compared to.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub baseline_asr_wer: f64,
    pub rows: Vec<ReportRow>,
    pub avg_phoco_wer: f64,
    pub avg_hybrid_wer: f64,
    pub avg_rel_vs_asr: f64,
    pub avg_rel_vs_phoco: f64,
}

/// Aggregate a candidate set under a gate policy. Per threshold: the mean
/// corrector WER, and the mean hybrid WER where each candidate contributes
/// its corrected WER if the gate accepts it and its hypothesis WER
/// otherwise. The baseline pools the hypothesis WER over every candidate.
pub fn build_report(candidates: &[CorrectionCandidate], gate: &dyn Gate) -> Result<EvalReport> {
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates);
    }

    let baseline_asr_wer =
        candidates.iter().map(|c| c.wer_hyp).sum::<f64>() / candidates.len() as f64;

    // Bucket by grid position; thresholds arrive as floats.
    let mut buckets: Vec<(usize, f64, Vec<&CorrectionCandidate>)> = Vec::new();
    for c in candidates {
        let idx = threshold_index(c.cfg.threshold);
        match buckets.iter_mut().find(|(i, _, _)| *i == idx) {
            Some((_, _, bucket)) => bucket.push(c),
            None => buckets.push((idx, c.cfg.threshold, vec![c])),
        }
    }
    buckets.sort_by_key(|(i, _, _)| *i);

    let mut rows = Vec::with_capacity(buckets.len());
    for (_, threshold, bucket) in &buckets {
        let n = bucket.len() as f64;
        let mean_phoco_wer = bucket.iter().map(|c| c.wer_cand).sum::<f64>() / n;
        let mean_hybrid_wer = bucket
            .iter()
            .map(|c| {
                // An unchanged candidate has wer_cand == wer_hyp; skip the
                // gate exactly as the online decision rule does.
                if c.candidate == c.hypothesis() {
                    c.wer_hyp
                } else if gate.accept(c) {
                    c.wer_cand
                } else {
                    c.wer_hyp
                }
            })
            .sum::<f64>()
            / n;
        rows.push(ReportRow {
            threshold: *threshold,
            mean_phoco_wer,
            mean_hybrid_wer,
            rel_vs_asr: relative_reduction(baseline_asr_wer, mean_hybrid_wer)?,
            rel_vs_phoco: relative_reduction(mean_phoco_wer, mean_hybrid_wer)?,
        });
    }

    let k = rows.len() as f64;
    Ok(EvalReport {
        baseline_asr_wer,
        avg_phoco_wer: rows.iter().map(|r| r.mean_phoco_wer).sum::<f64>() / k,
        avg_hybrid_wer: rows.iter().map(|r| r.mean_hybrid_wer).sum::<f64>() / k,
        avg_rel_vs_asr: rows.iter().map(|r| r.rel_vs_asr).sum::<f64>() / k,
        avg_rel_vs_phoco: rows.iter().map(|r| r.rel_vs_phoco).sum::<f64>() / k,
        rows,
    })
}

/// [`build_report`] with the trained classifier as the gate.
pub fn build_neural_report(
    candidates: &[CorrectionCandidate],
    model: &GateModel,
) -> Result<EvalReport> {
    build_report(candidates, &NeuralGate { model })
}

impl EvalReport {
    /// Aligned text table: WERs with three decimals, reductions as
    /// one-decimal percentages.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<9} {:>9} {:>10} {:>10} {:>12}",
            "threshold", "phoco_wer", "hybrid_wer", "rel_vs_asr", "rel_vs_phoco"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<9.2} {:>9.3} {:>10.3} {:>9.1}% {:>11.1}%",
                r.threshold,
                r.mean_phoco_wer,
                r.mean_hybrid_wer,
                100.0 * r.rel_vs_asr,
                100.0 * r.rel_vs_phoco
            );
        }
        let _ = writeln!(
            out,
            "{:<9} {:>9.3} {:>10.3} {:>9.1}% {:>11.1}%",
            "average",
            self.avg_phoco_wer,
            self.avg_hybrid_wer,
            100.0 * self.avg_rel_vs_asr,
            100.0 * self.avg_rel_vs_phoco
        );
        let _ = writeln!(out, "baseline asr wer {:.3}", self.baseline_asr_wer);
        out
    }

    /// Machine-readable rows: one JSON object per line, tagged by kind.
    pub fn to_jsonl(&self) -> String {
        #[derive(Serialize)]
        #[serde(tag = "kind", rename_all = "snake_case")]
        enum Line<'a> {
            Baseline {
                baseline_asr_wer: f64,
            },
            Row {
                #[serde(flatten)]
                row: &'a ReportRow,
            },
            Average {
                mean_phoco_wer: f64,
                mean_hybrid_wer: f64,
                rel_vs_asr: f64,
                rel_vs_phoco: f64,
            },
        }
        let mut lines = Vec::with_capacity(self.rows.len() + 2);
        lines.push(serde_json::to_string(&Line::Baseline {
            baseline_asr_wer: self.baseline_asr_wer,
        }));
        for row in &self.rows {
            lines.push(serde_json::to_string(&Line::Row { row }));
        }
        lines.push(serde_json::to_string(&Line::Average {
            mean_phoco_wer: self.avg_phoco_wer,
            mean_hybrid_wer: self.avg_hybrid_wer,
            rel_vs_asr: self.avg_rel_vs_asr,
            rel_vs_phoco: self.avg_rel_vs_phoco,
        }));
        let mut out = String::new();
        for line in lines {
            out.push_str(&line.expect("serializable report line"));
            out.push('\n');
        }
        out
    }

    pub fn write_jsonl(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        w.write_all(self.to_jsonl().as_bytes())
            .and_then(|()| w.flush())
            .map_err(|e| Error::io(path, e))
    }
}
