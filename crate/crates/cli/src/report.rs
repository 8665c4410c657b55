//! Report tables.
//!
//! Per (position, scheme), mirroring the layout of published result tables:
//! `best_configs_<pos>_<scheme>.csv` (selected hyperparameters),
//! `metrics_<pos>_<scheme>.csv` (`Pipeline,MCC,SE,ES,PR`) and
//! `confusion_<pos>_<scheme>.csv` (`Pipeline,TP,TN,FP,FN`). Failed pipelines
//! get a `FAILED` row in each. Matrix-wide: `report.csv`/`report.jsonl`
//! (one row per successful pipeline), `retrain_summary.csv` and `failures.csv`.
//!
//! Metrics are written at full precision so they recompute exactly from the
//! confusion counts next to them.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use falldet_core::eval::{write_report_csv, write_report_jsonl, ReportRow};
use falldet_core::features::PipelineId;
use serde::Serialize;

use crate::pipeline::StudySummary;

pub const FAILED: &str = "FAILED";

pub fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()
        .with_context(|| format!("writing {}", path.display()))
}

fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()
        .with_context(|| format!("writing {}", path.display()))
}

fn failed_row(pipeline: &PipelineId, columns: usize) -> Vec<String> {
    let mut row = vec![pipeline.short_name(), FAILED.to_string()];
    row.resize(columns, String::new());
    row
}

pub fn write_study_reports(dir: &Path, summary: &StudySummary) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut groups: Vec<(String, String)> = Vec::new();
    for o in &summary.outcomes {
        let key = (
            o.pipeline.position.dir_name().to_string(),
            o.pipeline.scheme.to_string(),
        );
        if !groups.contains(&key) {
            groups.push(key);
        }
    }
    for (position, scheme) in &groups {
        let members = summary.outcomes.iter().filter(|o| {
            o.pipeline.position.dir_name() == position && o.pipeline.scheme.as_str() == scheme
        });
        let (mut configs, mut metrics, mut confusion) = (Vec::new(), Vec::new(), Vec::new());
        for o in members {
            let name = o.pipeline.short_name();
            match &o.result {
                Ok(s) => {
                    let c = s.best.config;
                    configs.push(vec![
                        name.clone(),
                        c.feature_maps.to_string(),
                        c.kernel_size.to_string(),
                        c.conv_layers.to_string(),
                        c.dense_layers.to_string(),
                        c.dense_neurons.to_string(),
                        c.dropout.to_string(),
                        c.learning_rate.to_string(),
                        c.threshold.to_string(),
                        s.best.objective.to_string(),
                    ]);
                    let r = &s.headline;
                    metrics.push(vec![
                        name.clone(),
                        r.mcc.to_string(),
                        r.se.to_string(),
                        r.es.to_string(),
                        r.pr.to_string(),
                    ]);
                    let m = r.matrix;
                    confusion.push(vec![
                        name,
                        m.tp.to_string(),
                        m.tn.to_string(),
                        m.fp.to_string(),
                        m.fn_.to_string(),
                    ]);
                }
                Err(_) => {
                    configs.push(failed_row(&o.pipeline, 10));
                    metrics.push(failed_row(&o.pipeline, 5));
                    confusion.push(failed_row(&o.pipeline, 5));
                }
            }
        }
        let suffix = format!("{position}_{scheme}");
        write_table(
            &dir.join(format!("best_configs_{suffix}.csv")),
            &[
                "Pipeline",
                "feature_maps",
                "kernel_size",
                "conv_layers",
                "dense_layers",
                "dense_neurons",
                "dropout",
                "learning_rate",
                "threshold",
                "val_mcc",
            ],
            &configs,
        )?;
        write_table(
            &dir.join(format!("metrics_{suffix}.csv")),
            &["Pipeline", "MCC", "SE", "ES", "PR"],
            &metrics,
        )?;
        write_table(
            &dir.join(format!("confusion_{suffix}.csv")),
            &["Pipeline", "TP", "TN", "FP", "FN"],
            &confusion,
        )?;
    }

    let rows: Vec<ReportRow> = summary
        .outcomes
        .iter()
        .filter_map(|o| {
            o.result
                .as_ref()
                .ok()
                .map(|s| ReportRow::new(o.pipeline, &s.headline, s.study_seed, s.wall_time_s))
        })
        .collect();
    write_report_csv(&dir.join("report.csv"), &rows)?;
    write_report_jsonl(&dir.join("report.jsonl"), &rows)?;

    let retrain: Vec<Vec<String>> = summary
        .outcomes
        .iter()
        .filter_map(|o| {
            o.result.as_ref().ok().map(|s| {
                vec![
                    o.pipeline.to_string(),
                    s.n_retrain.to_string(),
                    s.summary.mean_mcc.to_string(),
                    s.summary.std_mcc.to_string(),
                    s.summary.best_index.to_string(),
                    s.best_retrain_seed.to_string(),
                    s.failed_trials.to_string(),
                    s.test_reads_at_selection.to_string(),
                ]
            })
        })
        .collect();
    write_table(
        &dir.join("retrain_summary.csv"),
        &[
            "pipeline",
            "n_retrain",
            "mean_mcc",
            "std_mcc",
            "best_index",
            "best_seed",
            "failed_trials",
            "test_reads_at_selection",
        ],
        &retrain,
    )?;

    let failures: Vec<Vec<String>> = summary
        .failures()
        .map(|(p, e)| vec![p.to_string(), e.to_string()])
        .collect();
    write_table(&dir.join("failures.csv"), &["pipeline", "error"], &failures)
}
