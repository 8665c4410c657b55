use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use falldet_cli::config::{ExperimentConfig, Overrides};
use falldet_cli::pipeline::{eval_checkpoint, prepare, resolve_hparams, study, train_one};
use falldet_cli::replay::{
    read_onsets, replay, source_from_feed, sources_from_recordings, ReplaySource,
};
use falldet_cli::report::write_rows;
use falldet_cli::synth::{synth_feed, synth_tree};
use falldet_core::features::PipelineId;
use falldet_core::ingest::{ActivityCode, BodyPosition, StreamSpec, SyntheticSpec};
use falldet_core::model::load_checkpoint;
use log::info;

#[derive(Parser)]
#[command(
    name = "falldet",
    version,
    about = "Fall detection from wearable inertial sensors"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Built-in experiment used when no --config is given.
    #[arg(long, global = true, value_enum)]
    preset: Option<ExperimentPreset>,
    /// Recording tree; replaces the configured data source.
    #[arg(long, global = true)]
    root: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = "FALLDET_OUT")]
    out: Option<PathBuf>,
    /// Root seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Comma-separated: chest, left, right.
    #[arg(long, global = true, value_delimiter = ',')]
    positions: Vec<String>,
    /// Comma-separated: Sc1Acc, Sc1Gyr, Sc2Acc, Sc2Gyr, Sc3, Sc4.
    #[arg(long, global = true, value_delimiter = ',')]
    scenarios: Vec<String>,
    /// Comma-separated: T, F.
    #[arg(long, global = true, value_delimiter = ',')]
    domains: Vec<String>,
    /// Comma-separated: l1, l2.
    #[arg(long, global = true, value_delimiter = ',')]
    schemes: Vec<String>,
    #[arg(long, global = true)]
    n_trials: Option<usize>,
    /// Detections at most this many seconds apart form one incident.
    #[arg(long, global = true)]
    merge_gap: Option<f64>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentPreset {
    /// Synthetic chest corpus, Chest/Sc4T/l2, compute-budgeted search.
    Desk,
}

#[derive(Clone, Copy, ValueEnum)]
enum CorpusPreset {
    Desk,
    Catalogue,
}

#[derive(Subcommand)]
enum Command {
    /// Build the train/validation/test datasets of every selected pipeline.
    Prepare,
    /// Run one hyperparameter study per pipeline and write the report tables.
    Study,
    /// Train a single model on a prepared dataset.
    Train {
        #[arg(long)]
        pipeline: PipelineId,
        /// Hyperparameters (TOML or JSON); defaults to the study's best trial.
        #[arg(long)]
        hparams: Option<PathBuf>,
        /// Checkpoint path; defaults to <out>/models/<pipeline>.fdck.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Evaluate a checkpoint on a test split.
    Eval {
        #[arg(long)]
        model: PathBuf,
        /// Dataset file; defaults to the prepared dataset of the model's pipeline.
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Stream recordings or a sample feed through the sliding-window detector.
    /// Detection events go to stdout as JSON lines.
    Replay {
        #[arg(long)]
        model: PathBuf,
        /// Recording tree to replay trial by trial.
        #[arg(long, conflicts_with = "feed")]
        recordings: Option<PathBuf>,
        /// Feed file of `timestamp_ms,ax,ay,az,gx,gy,gz` lines; `-` or absent reads stdin.
        #[arg(long)]
        feed: Option<PathBuf>,
        /// Fall onsets (seconds, one per line) for scoring a feed.
        #[arg(long, requires = "feed")]
        onsets: Option<PathBuf>,
    },
    /// Generate synthetic data.
    Synth {
        #[command(subcommand)]
        what: SynthCommand,
    },
}

#[derive(Subcommand)]
enum SynthCommand {
    /// A recording tree (`<dir>/<subject>/<position>/*.csv`).
    Tree {
        dir: PathBuf,
        #[arg(long, value_enum, default_value = "desk")]
        corpus: CorpusPreset,
        /// Subjects for the catalogue corpus.
        #[arg(long, default_value_t = 4)]
        subjects: u32,
    },
    /// A continuous feed with falls at given onsets.
    Feed {
        path: PathBuf,
        /// Onset file; defaults to `<path>.onsets`.
        #[arg(long)]
        onsets: Option<PathBuf>,
        #[arg(long, default_value_t = 120.0)]
        duration: f64,
        /// Comma-separated fall onsets in seconds.
        #[arg(long, value_delimiter = ',')]
        falls: Vec<f64>,
        #[arg(long, default_value = "chest")]
        position: BodyPosition,
        #[arg(long, default_value = "ADL1")]
        background: ActivityCode,
    },
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            root: self.root.clone(),
            out: self.out.clone(),
            seed: self.seed,
            positions: self.positions.clone(),
            scenarios: self.scenarios.clone(),
            domains: self.domains.clone(),
            schemes: self.schemes.clone(),
            n_trials: self.n_trials,
            merge_gap_s: self.merge_gap,
        }
    }

    fn experiment_config(&self) -> Result<ExperimentConfig> {
        let mut config = match (&self.config, self.preset) {
            (Some(path), None) => ExperimentConfig::load(path)?,
            (None, Some(ExperimentPreset::Desk)) => ExperimentConfig::desk(self.seed.unwrap_or(0)),
            (None, None) => ExperimentConfig::default(),
            (Some(_), Some(_)) => bail!("--config and --preset are mutually exclusive"),
        };
        config.apply(&self.overrides());
        Ok(config)
    }
}

/// Resolves the experiment and records the effective configuration in the output directory.
fn experiment(common: &Common) -> Result<falldet_cli::Experiment> {
    let config = common.experiment_config()?;
    let exp = config.resolve()?;
    fs::create_dir_all(&exp.out).with_context(|| format!("creating {}", exp.out.display()))?;
    let path = exp.out.join("config.toml");
    fs::write(&path, config.to_toml()?).with_context(|| format!("writing {}", path.display()))?;
    Ok(exp)
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    let common = &cli.common;
    match cli.command {
        Command::Prepare => {
            let exp = experiment(common)?;
            let summary = prepare(&exp)?;
            for b in &summary.balances {
                println!(
                    "{} {}: {} segments, {:.2}% positive",
                    b.position,
                    b.scheme,
                    b.segments,
                    100.0 * b.positive_fraction
                );
            }
            println!(
                "{} datasets in {}",
                summary.datasets.len(),
                exp.out.join("datasets").display()
            );
        }
        Command::Study => {
            let exp = experiment(common)?;
            let summary = study(&exp)?;
            for o in &summary.outcomes {
                match &o.result {
                    Ok(s) => println!(
                        "{}: test MCC {:.4} (SE {:.4} ES {:.4} PR {:.4}); retrain mean {:.4} ± {:.4}",
                        o.pipeline, s.headline.mcc, s.headline.se, s.headline.es, s.headline.pr, s.summary.mean_mcc, s.summary.std_mcc
                    ),
                    Err(e) => println!("{}: FAILED: {e}", o.pipeline),
                }
            }
            println!("reports in {}", exp.reports_dir().display());
            if !summary.all_ok() {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Train {
            pipeline,
            hparams,
            model,
        } => {
            let exp = experiment(common)?;
            let config = resolve_hparams(&exp, pipeline, hparams.as_deref())?;
            info!("training {pipeline} with {config:?}");
            let outcome = train_one(&exp, pipeline, config, model.as_deref())?;
            println!("saved {}", outcome.path.display());
            print_json(&outcome.test)?;
        }
        Command::Eval { model, dataset } => {
            let report = eval_checkpoint(&model, dataset.as_deref(), common.out.as_deref())?;
            print_json(&report)?;
        }
        Command::Replay {
            model: model_path,
            recordings,
            feed,
            onsets,
        } => {
            let config = common.experiment_config()?;
            if !(config.merge_gap_s >= 0.0) {
                bail!("--merge-gap must be non-negative");
            }
            let model = load_checkpoint(&model_path)?;
            let pipeline = model
                .pipeline
                .context("checkpoint does not record its pipeline")?;
            let onsets = onsets.as_deref().map(read_onsets).transpose()?;
            let sources: Vec<ReplaySource> = match (recordings, feed) {
                (Some(root), _) => sources_from_recordings(&root, pipeline.position)?,
                (None, Some(path)) if path != Path::new("-") => {
                    let file = fs::File::open(&path)
                        .with_context(|| format!("opening {}", path.display()))?;
                    vec![source_from_feed(
                        &path.display().to_string(),
                        BufReader::new(file),
                        onsets,
                    )?]
                }
                (None, _) => vec![source_from_feed("stdin", io::stdin().lock(), onsets)?],
            };
            let mut events = io::stdout().lock();
            let mut incidents = Vec::new();
            let summary = replay(
                &model,
                &sources,
                config.merge_gap_s,
                &mut events,
                &mut incidents,
            )?;
            events.flush()?;
            for s in &summary {
                info!(
                    "{}: {} windows, {} events, {} incidents",
                    s.source, s.windows, s.events, s.incidents
                );
            }
            if let Some(out) = &config.out {
                let dir = out.join("replay");
                fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
                fs::write(dir.join("incidents.jsonl"), &incidents)?;
                write_rows(&dir.join("summary.csv"), &summary)?;
            } else {
                let mut w = csv::Writer::from_writer(io::stderr());
                for s in &summary {
                    w.serialize(s)?;
                }
                w.flush()?;
            }
        }
        Command::Synth { what } => {
            let seed = common.seed.unwrap_or(0);
            match what {
                SynthCommand::Tree {
                    dir,
                    corpus,
                    subjects,
                } => {
                    let spec = match corpus {
                        CorpusPreset::Desk => SyntheticSpec::desk_benchmark(seed),
                        CorpusPreset::Catalogue => SyntheticSpec::catalogue(subjects, seed),
                    };
                    let n = synth_tree(&dir, &spec)?;
                    println!("wrote {n} recordings to {}", dir.display());
                }
                SynthCommand::Feed {
                    path,
                    onsets,
                    duration,
                    falls,
                    position,
                    background,
                } => {
                    let spec = StreamSpec {
                        duration_s: duration,
                        position,
                        rate_hz: None,
                        fall_onsets_s: falls,
                        background,
                        seed,
                    };
                    let onsets = onsets.unwrap_or_else(|| {
                        let mut p = path.clone().into_os_string();
                        p.push(".onsets");
                        p.into()
                    });
                    let n = synth_feed(&path, &onsets, &spec)?;
                    println!(
                        "wrote {n} samples to {} and onsets to {}",
                        path.display(),
                        onsets.display()
                    );
                }
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.common.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
