//! Dataset preparation, studies, single trainings and evaluation.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use falldet_core::eval::EvalReport;
use falldet_core::features::{
    assemble, read_dataset, split, write_dataset, PipelineId, ScenarioDataset, SplitOptions,
};
use falldet_core::hpo::{
    best_trial, read_study_log, run_study, RetrainSummary, Trial, TrialStatus,
};
use falldet_core::ingest::{generate_synthetic, load_dataset, LoadReport, SensorRecording};
use falldet_core::model::{
    build, load_checkpoint, save_checkpoint, train, Cnn1dConfig, TrainOptions, TrainedModel,
};
use falldet_core::seed::{derive_seed, stream};
use falldet_core::segment::{positive_fraction, segment_all};
use log::{error, info, warn};
use serde::Serialize;

use crate::config::{DataSource, Experiment};
use crate::report;

pub fn load_recordings(data: &DataSource) -> Result<(Vec<SensorRecording>, Option<LoadReport>)> {
    match data {
        DataSource::Root(root) => {
            let loaded =
                load_dataset(root).with_context(|| format!("loading {}", root.display()))?;
            Ok((loaded.recordings, Some(loaded.report)))
        }
        DataSource::Synthetic(spec) => Ok((generate_synthetic(spec)?, None)),
    }
}

/// Segment count and positive share of one (position, scheme).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassBalance {
    pub position: String,
    pub scheme: String,
    pub segments: usize,
    pub positives: usize,
    pub positive_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PreparedDataset {
    pub pipeline: String,
    pub channels: usize,
    pub length: usize,
    pub train: usize,
    pub val: usize,
    pub test: usize,
    pub train_positives: usize,
    pub val_positives: usize,
    pub test_positives: usize,
}

#[derive(Debug, Clone, Default)]
pub struct PrepareSummary {
    pub balances: Vec<ClassBalance>,
    pub datasets: Vec<PreparedDataset>,
    pub load_report: Option<LoadReport>,
    pub segment_warnings: usize,
}

/// Ingest → segment → features → split for every selected pipeline, written
/// to `datasets/<pipeline>.fdds`. Deterministic, so reruns rewrite identical files.
pub fn prepare(exp: &Experiment) -> Result<PrepareSummary> {
    let (recordings, load_report) = load_recordings(&exp.data)?;
    let dir = exp.out.join("datasets");
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut summary = PrepareSummary {
        load_report,
        ..PrepareSummary::default()
    };
    for &position in &exp.positions {
        let at_position: Vec<SensorRecording> = recordings
            .iter()
            .filter(|r| r.position == position)
            .cloned()
            .collect();
        if at_position.is_empty() {
            bail!("no recordings for position {position}");
        }
        for &scheme in &exp.schemes {
            let segmented = segment_all(&at_position, scheme)
                .with_context(|| format!("segmenting {position}/{scheme}"))?;
            summary.segment_warnings += segmented.warnings.len();
            let segments = segmented.vectors;
            let positives = segments.iter().filter(|s| s.label == 1).count();
            let fraction = positive_fraction(&segments);
            info!(
                "{position}/{scheme}: {} segments, {:.2}% positive",
                segments.len(),
                100.0 * fraction
            );
            summary.balances.push(ClassBalance {
                position: position.to_string(),
                scheme: scheme.to_string(),
                segments: segments.len(),
                positives,
                positive_fraction: fraction,
            });
            let options = SplitOptions {
                seed: exp.split_seed(position, scheme),
                by_subject: exp.split_by_subject,
            };
            for &scenario in &exp.scenarios {
                for &domain in &exp.domains {
                    let pipeline = PipelineId {
                        position,
                        scheme,
                        scenario,
                        domain,
                    };
                    let ds = assemble(&segments, scenario, domain)
                        .and_then(|examples| split(examples, pipeline, options))
                        .with_context(|| format!("preparing {pipeline}"))?;
                    for w in &ds.warnings {
                        warn!("{pipeline}: {w}");
                    }
                    let path = exp.dataset_path(pipeline);
                    write_dataset(&path, &ds).with_context(|| format!("writing {pipeline}"))?;
                    let test = ds.test();
                    summary.datasets.push(PreparedDataset {
                        pipeline: pipeline.to_string(),
                        channels: ds.channels,
                        length: ds.length,
                        train: ds.train.len(),
                        val: ds.val.len(),
                        test: test.len(),
                        train_positives: ScenarioDataset::positives(&ds.train),
                        val_positives: ScenarioDataset::positives(&ds.val),
                        test_positives: ScenarioDataset::positives(test),
                    });
                }
            }
        }
    }
    report::write_rows(&dir.join("manifest.csv"), &summary.datasets)?;
    let reports = exp.reports_dir();
    fs::create_dir_all(&reports).with_context(|| format!("creating {}", reports.display()))?;
    report::write_rows(&reports.join("class_balance.csv"), &summary.balances)?;
    Ok(summary)
}

#[derive(Debug, Clone)]
pub struct PipelineSuccess {
    pub best: Trial,
    pub failed_trials: usize,
    /// Test metrics of the best retraining.
    pub headline: EvalReport,
    pub summary: RetrainSummary,
    pub n_retrain: usize,
    pub best_retrain_seed: u64,
    pub study_seed: u64,
    pub test_reads_at_selection: usize,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub pipeline: PipelineId,
    pub result: std::result::Result<PipelineSuccess, String>,
}

#[derive(Debug, Clone, Default)]
pub struct StudySummary {
    pub outcomes: Vec<PipelineOutcome>,
}

impl StudySummary {
    pub fn all_ok(&self) -> bool {
        self.outcomes.iter().all(|o| o.result.is_ok())
    }

    pub fn failures(&self) -> impl Iterator<Item = (&PipelineId, &str)> {
        self.outcomes
            .iter()
            .filter_map(|o| o.result.as_ref().err().map(|e| (&o.pipeline, e.as_str())))
    }
}

/// One study per pipeline, preparing missing datasets first. A failing
/// pipeline is reported and the matrix carries on.
pub fn study(exp: &Experiment) -> Result<StudySummary> {
    let pipelines = exp.pipelines();
    if pipelines.iter().any(|&p| !exp.dataset_path(p).is_file()) {
        info!("preparing datasets");
        prepare(exp)?;
    }
    for dir in ["studies", "models"] {
        let d = exp.out.join(dir);
        fs::create_dir_all(&d).with_context(|| format!("creating {}", d.display()))?;
    }
    let mut summary = StudySummary::default();
    for pipeline in pipelines {
        let result = study_pipeline(exp, pipeline).map_err(|e| format!("{e:#}"));
        if let Err(e) = &result {
            error!("{pipeline} failed: {e}");
        }
        summary.outcomes.push(PipelineOutcome { pipeline, result });
    }
    report::write_study_reports(&exp.reports_dir(), &summary)?;
    Ok(summary)
}

fn study_pipeline(exp: &Experiment, pipeline: PipelineId) -> Result<PipelineSuccess> {
    let start = Instant::now();
    let ds = read_dataset(&exp.dataset_path(pipeline))?;
    if ds.pipeline != pipeline {
        bail!("dataset file holds {}, expected {pipeline}", ds.pipeline);
    }
    let opts = exp.study_options(pipeline);
    let result = run_study(&ds, &opts)?;
    let summary = result
        .summary
        .context("no retrainings requested (n_retrain = 0)")?;
    let headline = result
        .headline()
        .expect("summary implies a headline")
        .clone();
    let model = result
        .best_model
        .as_ref()
        .expect("summary implies a best model");
    save_checkpoint(&exp.model_path(pipeline), model)?;
    info!(
        "{pipeline}: best trial {} (val MCC {:.4}), test MCC {:.4}",
        result.best.index, result.best.objective, headline.mcc
    );
    Ok(PipelineSuccess {
        failed_trials: result
            .trials
            .iter()
            .filter(|t| t.status == TrialStatus::Failed)
            .count(),
        best: result.best,
        headline,
        summary,
        n_retrain: result.retrain_reports.len(),
        best_retrain_seed: result.retrain_seeds[summary.best_index],
        study_seed: opts.seed,
        test_reads_at_selection: result.test_reads_at_selection,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Hyperparameters for a single training: an explicit file, else the best
/// logged trial of the pipeline's study, else the defaults.
pub fn resolve_hparams(
    exp: &Experiment,
    pipeline: PipelineId,
    file: Option<&Path>,
) -> Result<Cnn1dConfig> {
    if let Some(path) = file {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let config: Cnn1dConfig = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text)?
        } else {
            toml::from_str(&text)?
        };
        config.validate()?;
        return Ok(config);
    }
    let log = exp.study_log(pipeline);
    if log.is_file() {
        let trials = read_study_log(&log)?;
        if let Some(best) = best_trial(&trials) {
            info!("using trial {} of {}", best.index, log.display());
            return Ok(best.config);
        }
    }
    Ok(Cnn1dConfig::default())
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: TrainedModel,
    pub path: PathBuf,
    pub val_mcc: Option<f64>,
    pub test: EvalReport,
}

/// Trains one model with the seeds of the study's first retraining.
pub fn train_one(
    exp: &Experiment,
    pipeline: PipelineId,
    config: Cnn1dConfig,
    out: Option<&Path>,
) -> Result<TrainOutcome> {
    let ds = read_dataset(&exp.dataset_path(pipeline)).context("run `falldet prepare` first")?;
    let seed = exp.study_seed(pipeline);
    let model = build(
        config,
        ds.channels,
        ds.length,
        derive_seed(seed, stream::RETRAIN, 0),
    )?;
    let opts = TrainOptions {
        seed: derive_seed(seed, stream::RETRAIN, 1),
        ..exp.training.train_options()
    };
    let model = train(&model, &ds, &opts)?;
    let val_mcc = model
        .history
        .best_epoch
        .and_then(|e| model.history.epochs[e - 1].val_mcc);
    let test = evaluate(&model, &ds)?;
    let path = out.map_or_else(|| exp.model_path(pipeline), Path::to_path_buf);
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    save_checkpoint(&path, &model)?;
    Ok(TrainOutcome {
        model,
        path,
        val_mcc,
        test,
    })
}

pub fn evaluate(model: &TrainedModel, ds: &ScenarioDataset) -> Result<EvalReport> {
    if model.pipeline.is_some_and(|p| p != ds.pipeline) {
        bail!(
            "model was trained on {}, dataset is {}",
            model.pipeline.expect("checked"),
            ds.pipeline
        );
    }
    let test = ds.test();
    let preds = model.classify_batch(test)?;
    let labels: Vec<u8> = test.iter().map(|e| e.label).collect();
    Ok(EvalReport::from_predictions(
        Some(ds.pipeline),
        &labels,
        &preds,
    )?)
}

/// Test-split metrics of a checkpoint, on an explicit dataset file or the
/// prepared dataset of the checkpoint's pipeline.
pub fn eval_checkpoint(
    model_path: &Path,
    dataset: Option<&Path>,
    exp_out: Option<&Path>,
) -> Result<EvalReport> {
    let model = load_checkpoint(model_path)?;
    let path = match (dataset, model.pipeline, exp_out) {
        (Some(p), _, _) => p.to_path_buf(),
        (None, Some(pipeline), Some(out)) => out.join("datasets").join(format!("{pipeline}.fdds")),
        _ => bail!("no dataset given and the checkpoint does not name a prepared pipeline"),
    };
    let ds = read_dataset(&path)?;
    evaluate(&model, &ds)
}
