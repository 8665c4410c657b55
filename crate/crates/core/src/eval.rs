//! Confusion-matrix metrics.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::PipelineId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, tn: u64, fp: u64, fn_: u64) -> Self {
        ConfusionMatrix { tp, tn, fp, fn_ }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn record(&mut self, label: u8, pred: u8) {
        match (label != 0, pred != 0) {
            (true, true) => self.tp += 1,
            (false, false) => self.tn += 1,
            (false, true) => self.fp += 1,
            (true, false) => self.fn_ += 1,
        }
    }
}

pub fn confusion(labels: &[u8], preds: &[u8]) -> Result<ConfusionMatrix> {
    if labels.len() != preds.len() {
        return Err(Error::LengthMismatch(labels.len(), preds.len()));
    }
    if labels.is_empty() {
        return Err(Error::Empty);
    }
    let mut m = ConfusionMatrix::default();
    for (&l, &p) in labels.iter().zip(preds) {
        m.record(l, p);
    }
    Ok(m)
}

/// Matthews correlation coefficient; 0 when any marginal is empty.
pub fn mcc(m: &ConfusionMatrix) -> f64 {
    let (tp, tn, fp, fn_) = (m.tp as i128, m.tn as i128, m.fp as i128, m.fn_ as i128);
    let num = (tp * tn - fp * fn_) as f64;
    let factors = [tp + fp, tp + fn_, tn + fp, tn + fn_];
    if factors.contains(&0) {
        return 0.0;
    }
    // Pairing the factors keeps a perfect classifier at exactly 1.
    let den = ((factors[0] * factors[1]) as f64).sqrt() * ((factors[2] * factors[3]) as f64).sqrt();
    (num / den).clamp(-1.0, 1.0)
}

/// Sensitivity, specificity and precision. A ratio with a zero denominator
/// is reported as 0 and flagged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub se: f64,
    pub es: f64,
    pub pr: f64,
    pub se_degenerate: bool,
    pub es_degenerate: bool,
    pub pr_degenerate: bool,
}

fn ratio(num: u64, den: u64) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

pub fn se_es_pr(m: &ConfusionMatrix) -> Rates {
    let (se, se_degenerate) = ratio(m.tp, m.tp + m.fn_);
    let (es, es_degenerate) = ratio(m.tn, m.tn + m.fp);
    let (pr, pr_degenerate) = ratio(m.tp, m.tp + m.fp);
    Rates {
        se,
        es,
        pr,
        se_degenerate,
        es_degenerate,
        pr_degenerate,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub pipeline: Option<PipelineId>,
    pub matrix: ConfusionMatrix,
    pub mcc: f64,
    pub se: f64,
    pub es: f64,
    pub pr: f64,
}

impl EvalReport {
    pub fn from_matrix(pipeline: Option<PipelineId>, matrix: ConfusionMatrix) -> Self {
        let r = se_es_pr(&matrix);
        EvalReport {
            pipeline,
            matrix,
            mcc: mcc(&matrix),
            se: r.se,
            es: r.es,
            pr: r.pr,
        }
    }

    pub fn from_predictions(
        pipeline: Option<PipelineId>,
        labels: &[u8],
        preds: &[u8],
    ) -> Result<Self> {
        Ok(Self::from_matrix(pipeline, confusion(labels, preds)?))
    }
}

/// One line of the machine-readable report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub pipeline: String,
    pub position: String,
    pub scheme: String,
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub mcc: f64,
    pub se: f64,
    pub es: f64,
    pub pr: f64,
    pub seed: u64,
    pub wall_time_s: f64,
}

impl ReportRow {
    pub fn new(pipeline: PipelineId, report: &EvalReport, seed: u64, wall_time_s: f64) -> Self {
        let m = report.matrix;
        ReportRow {
            pipeline: pipeline.to_string(),
            position: pipeline.position.dir_name().to_string(),
            scheme: pipeline.scheme.to_string(),
            tp: m.tp,
            tn: m.tn,
            fp: m.fp,
            fn_: m.fn_,
            mcc: report.mcc,
            se: report.se,
            es: report.es,
            pr: report.pr,
            seed,
            wall_time_s,
        }
    }

    pub fn matrix(&self) -> ConfusionMatrix {
        ConfusionMatrix::new(self.tp, self.tn, self.fp, self.fn_)
    }
}

pub fn write_report_csv(path: &Path, rows: &[ReportRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_report_jsonl(path: &Path, rows: &[ReportRow]) -> Result<()> {
    let mut out = Vec::new();
    for row in rows {
        serde_json::to_writer(&mut out, row)?;
        out.push(b'\n');
    }
    std::fs::File::create(path)
        .and_then(|mut f| f.write_all(&out))
        .map_err(|e| Error::io(path, e))
}
