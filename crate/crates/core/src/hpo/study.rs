use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use serde::{Deserialize, Serialize};

use super::{all_failed, best_trial, optimize, Sampler, SearchSpace, Trial};
use crate::error::{Error, Result};
use crate::eval::EvalReport;
use crate::features::ScenarioDataset;
use crate::model::{build, train, Cnn1dConfig, TrainOptions, TrainedModel};
use crate::seed::{derive_seed, stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyOptions {
    pub n_trials: usize,
    pub n_retrain: usize,
    pub train: TrainOptions,
    pub sampler: Sampler,
    pub space: SearchSpace,
    /// Configs whose single-example forward pass exceeds this many
    /// multiply-accumulates are never proposed.
    pub max_forward_macs: Option<u64>,
    /// Append-only JSON-lines trial log; an existing log is resumed.
    pub log_path: Option<PathBuf>,
    pub seed: u64,
}

impl Default for StudyOptions {
    fn default() -> Self {
        StudyOptions {
            n_trials: 20,
            n_retrain: 20,
            train: TrainOptions::default(),
            sampler: Sampler::Tpe,
            space: SearchSpace::default(),
            max_forward_macs: None,
            log_path: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RetrainSummary {
    pub mean_mcc: f64,
    pub std_mcc: f64,
    /// Retraining with the highest test MCC (earliest on ties).
    pub best_index: usize,
}

#[derive(Debug, Clone)]
pub struct StudyResult {
    pub trials: Vec<Trial>,
    pub best: Trial,
    /// Reads of the test split observed when the best trial was selected.
    pub test_reads_at_selection: usize,
    pub retrain_reports: Vec<EvalReport>,
    pub retrain_seeds: Vec<u64>,
    pub summary: Option<RetrainSummary>,
    /// The retraining behind `summary.best_index`.
    pub best_model: Option<TrainedModel>,
}

impl StudyResult {
    pub fn headline(&self) -> Option<&EvalReport> {
        self.summary.map(|s| &self.retrain_reports[s.best_index])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct LogHeader {
    pipeline: String,
    seed: u64,
    sampler: Sampler,
    space: SearchSpace,
    max_forward_macs: Option<u64>,
}

/// Reads a trial log. A truncated final line (interrupted write) is dropped.
pub fn read_study_log(path: &Path) -> Result<Vec<Trial>> {
    Ok(read_log(path)?.map(|(_, t)| t).unwrap_or_default())
}

fn read_log(path: &Path) -> Result<Option<(LogHeader, Vec<Trial>)>> {
    if !path.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    let Some(first) = lines.first() else {
        return Ok(None);
    };
    let header: LogHeader =
        serde_json::from_str(first).map_err(|e| Error::format(path, format!("header: {e}")))?;
    let mut trials = Vec::new();
    for (i, line) in lines.iter().enumerate().skip(1) {
        match serde_json::from_str::<Trial>(line) {
            Ok(t) if t.index == trials.len() => trials.push(t),
            Ok(t) => {
                return Err(Error::format(
                    path,
                    format!("trial {} out of sequence", t.index),
                ))
            }
            Err(_) if i + 1 == lines.len() && !text.ends_with('\n') => {
                warn!("{}: dropping truncated final record", path.display());
            }
            Err(e) => return Err(Error::format(path, format!("line {}: {e}", i + 1))),
        }
    }
    Ok(Some((header, trials)))
}

fn append_line(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut line = serde_json::to_vec(value)?;
    line.push(b'\n');
    OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .and_then(|mut f| f.write_all(&line))
        .map_err(|e| Error::io(path, e))
}

fn fit(
    config: &Cnn1dConfig,
    ds: &ScenarioDataset,
    opts: &TrainOptions,
    stream_id: u64,
    index: usize,
    root: u64,
) -> Result<TrainedModel> {
    let model = build(
        *config,
        ds.channels,
        ds.length,
        derive_seed(root, stream_id, 2 * index as u64),
    )?;
    let train_opts = TrainOptions {
        seed: derive_seed(root, stream_id, 2 * index as u64 + 1),
        ..*opts
    };
    train(&model, ds, &train_opts)
}

fn selected_val_mcc(model: &TrainedModel) -> f64 {
    let h = &model.history;
    h.best_epoch
        .and_then(|e| h.epochs.get(e - 1))
        .and_then(|r| r.val_mcc)
        .unwrap_or(0.0)
}

/// Sequential search on the validation split, then `n_retrain` retrainings
/// of the best config evaluated on the test split.
pub fn run_study(ds: &ScenarioDataset, opts: &StudyOptions) -> Result<StudyResult> {
    opts.space.validate()?;
    if ds.train.is_empty() || ds.val.is_empty() || ds.test_len() == 0 {
        return Err(Error::TooFewExamples {
            needed: 3,
            got: ds.total(),
        });
    }
    let header = LogHeader {
        pipeline: ds.pipeline.to_string(),
        seed: opts.seed,
        sampler: opts.sampler,
        space: opts.space.clone(),
        max_forward_macs: opts.max_forward_macs,
    };
    let mut history = Vec::new();
    if let Some(path) = &opts.log_path {
        match read_log(path)? {
            Some((logged, trials)) => {
                if logged != header {
                    return Err(Error::Config(format!(
                        "{} belongs to a different study",
                        path.display()
                    )));
                }
                info!(
                    "{}: resuming after {} logged trials",
                    ds.pipeline,
                    trials.len()
                );
                history = trials;
                history.truncate(opts.n_trials);
            }
            None => append_line(path, &header)?,
        }
    }

    let (channels, length) = (ds.channels, ds.length);
    let budget = opts.max_forward_macs;
    let feasible = move |c: &Cnn1dConfig| match (budget, c.forward_macs(channels, length)) {
        (Some(max), Ok(macs)) => macs <= max,
        _ => true,
    };
    let mut fatal = None;
    while history.len() < opts.n_trials && fatal.is_none() {
        let next = history.len() + 1;
        history = optimize(
            history,
            next,
            opts.sampler,
            &opts.space,
            opts.seed,
            &feasible,
            |index, config| {
                let start = Instant::now();
                let result = fit(config, ds, &opts.train, stream::TRIAL, index, opts.seed)
                    .map(|m| selected_val_mcc(&m));
                let result = match result {
                    Err(e @ (Error::ShapeUnderflow { .. } | Error::NonFiniteLoss { .. })) => Err(e),
                    Err(e) => {
                        let msg = e.to_string();
                        fatal = Some(e);
                        Err(Error::Config(msg))
                    }
                    ok => ok,
                };
                (result, start.elapsed().as_secs_f64())
            },
        );
        let t = history.last().expect("trial just run");
        info!(
            "{} trial {}: objective {:.4} ({:.1}s) {:?}",
            ds.pipeline, t.index, t.objective, t.duration_s, t.config
        );
        if fatal.is_none() {
            if let Some(path) = &opts.log_path {
                append_line(path, t)?;
            }
        }
    }
    if let Some(e) = fatal {
        return Err(e);
    }
    all_failed(&history)?;
    let best = best_trial(&history).expect("non-empty history").clone();
    let test_reads_at_selection = ds.test_access_count();

    let mut retrain_reports = Vec::with_capacity(opts.n_retrain);
    let mut retrain_seeds = Vec::with_capacity(opts.n_retrain);
    let mut best_model: Option<(f64, usize, TrainedModel)> = None;
    for r in 0..opts.n_retrain {
        let model = fit(&best.config, ds, &opts.train, stream::RETRAIN, r, opts.seed)?;
        let test = ds.test();
        let preds = model.classify_batch(test)?;
        let labels: Vec<u8> = test.iter().map(|e| e.label).collect();
        let report = EvalReport::from_predictions(Some(ds.pipeline), &labels, &preds)?;
        info!("{} retraining {r}: test MCC {:.4}", ds.pipeline, report.mcc);
        if best_model.as_ref().is_none_or(|b| report.mcc > b.0) {
            best_model = Some((report.mcc, r, model));
        }
        retrain_seeds.push(derive_seed(opts.seed, stream::RETRAIN, 2 * r as u64));
        retrain_reports.push(report);
    }
    let summary = best_model.as_ref().map(|&(_, best_index, _)| {
        let n = retrain_reports.len() as f64;
        let mean = retrain_reports.iter().map(|r| r.mcc).sum::<f64>() / n;
        let var = if n > 1.0 {
            retrain_reports
                .iter()
                .map(|r| (r.mcc - mean).powi(2))
                .sum::<f64>()
                / (n - 1.0)
        } else {
            0.0
        };
        RetrainSummary {
            mean_mcc: mean,
            std_mcc: var.sqrt(),
            best_index,
        }
    });
    Ok(StudyResult {
        trials: history,
        best,
        test_reads_at_selection,
        retrain_reports,
        retrain_seeds,
        summary,
        best_model: best_model.map(|b| b.2),
    })
}
