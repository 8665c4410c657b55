//! Experiment configuration: a TOML file, overridable by flags.
//!
//! ```toml
//! seed = 7
//! out = "runs/desk"
//! positions = ["chest"]
//! scenarios = ["Sc4"]
//! domains = ["T"]
//! schemes = ["l2"]
//! n_trials = 20
//!
//! [data.synthetic]
//! preset = "desk"
//!
//! [training]
//! max_epochs = 30
//! max_forward_macs = 50_000_000
//! ```

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use falldet_core::features::{FeatureDomain, PipelineId, Scenario};
use falldet_core::hpo::{Sampler, SearchSpace, StudyOptions};
use falldet_core::ingest::{BodyPosition, SyntheticSpec};
use falldet_core::model::{EarlyStopping, TrainOptions};
use falldet_core::seed::{derive_seed, stream};
use falldet_core::segment::LabelingScheme;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// Chest-only corpus of 1000 segments, 10% falls.
    Desk,
    /// One repetition of every activity at every position.
    Catalogue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSource {
    pub preset: Preset,
    /// Subjects for the catalogue preset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subjects: Option<u32>,
    /// Generator seed; defaults to the experiment seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<SyntheticSource>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingSection {
    pub max_epochs: usize,
    pub batch_size: usize,
    /// Zero disables early stopping.
    pub patience: usize,
    pub stop_on_perfect: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_forward_macs: Option<u64>,
}

impl Default for TrainingSection {
    fn default() -> Self {
        let t = TrainOptions::default();
        let es = EarlyStopping::default();
        TrainingSection {
            max_epochs: t.max_epochs,
            batch_size: t.batch_size,
            patience: es.patience,
            stop_on_perfect: es.stop_on_perfect,
            max_forward_macs: None,
        }
    }
}

impl TrainingSection {
    pub fn train_options(&self) -> TrainOptions {
        let early_stopping = (self.patience > 0).then_some(EarlyStopping {
            patience: self.patience,
            stop_on_perfect: self.stop_on_perfect,
        });
        TrainOptions {
            max_epochs: self.max_epochs,
            batch_size: self.batch_size,
            early_stopping,
            seed: 0,
        }
    }
}

/// The experiment file as written; list entries are the usual spellings
/// (`chest`, `Sc1Acc`, `T`, `l2`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub data: DataSection,
    #[serde(default = "all_positions")]
    pub positions: Vec<String>,
    #[serde(default = "all_scenarios")]
    pub scenarios: Vec<String>,
    #[serde(default = "all_domains")]
    pub domains: Vec<String>,
    #[serde(default = "all_schemes")]
    pub schemes: Vec<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "twenty")]
    pub n_trials: usize,
    #[serde(default = "twenty")]
    pub n_retrain: usize,
    #[serde(default)]
    pub sampler: Sampler,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Keep each subject within one split.
    #[serde(default)]
    pub split_by_subject: bool,
    #[serde(default)]
    pub training: TrainingSection,
    #[serde(default = "five")]
    pub merge_gap_s: f64,
}

fn all_positions() -> Vec<String> {
    BodyPosition::ALL
        .iter()
        .map(|p| p.dir_name().to_string())
        .collect()
}

fn all_scenarios() -> Vec<String> {
    Scenario::ALL
        .iter()
        .map(|s| s.as_str().to_string())
        .collect()
}

fn all_domains() -> Vec<String> {
    vec!["T".into(), "F".into()]
}

fn all_schemes() -> Vec<String> {
    LabelingScheme::ALL
        .iter()
        .map(|s| s.as_str().to_string())
        .collect()
}

fn twenty() -> usize {
    20
}

fn five() -> f64 {
    5.0
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            data: DataSection::default(),
            positions: all_positions(),
            scenarios: all_scenarios(),
            domains: all_domains(),
            schemes: all_schemes(),
            seed: 0,
            n_trials: 20,
            n_retrain: 20,
            sampler: Sampler::Tpe,
            out: None,
            split_by_subject: false,
            training: TrainingSection::default(),
            merge_gap_s: 5.0,
        }
    }
}

/// Forward-pass budget of the desk preset, in multiply-accumulates per example.
pub const DESK_MAX_FORWARD_MACS: u64 = 50_000_000;

impl ExperimentConfig {
    /// The single-core benchmark: synthetic chest corpus, Chest/Sc4T/ℓ2,
    /// 20 trials and 20 retrainings under a compute budget.
    pub fn desk(seed: u64) -> Self {
        ExperimentConfig {
            data: DataSection {
                root: None,
                synthetic: Some(SyntheticSource {
                    preset: Preset::Desk,
                    subjects: None,
                    seed: None,
                }),
            },
            positions: vec!["chest".into()],
            scenarios: vec!["Sc4".into()],
            domains: vec!["T".into()],
            schemes: vec!["l2".into()],
            seed,
            training: TrainingSection {
                max_epochs: 30,
                batch_size: 32,
                patience: 5,
                stop_on_perfect: true,
                max_forward_macs: Some(DESK_MAX_FORWARD_MACS),
            },
            ..ExperimentConfig::default()
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// Checks the file and resolves it into an [`Experiment`].
    pub fn resolve(&self) -> Result<Experiment> {
        let data = match (&self.data.root, &self.data.synthetic) {
            (Some(root), None) => {
                if !root.is_dir() {
                    bail!("data root {} is not a directory", root.display());
                }
                DataSource::Root(root.clone())
            }
            (None, Some(s)) => {
                let seed = s.seed.unwrap_or(self.seed);
                DataSource::Synthetic(match s.preset {
                    Preset::Desk => {
                        if s.subjects.is_some() {
                            bail!("the desk preset has a fixed subject count");
                        }
                        SyntheticSpec::desk_benchmark(seed)
                    }
                    Preset::Catalogue => SyntheticSpec::catalogue(s.subjects.unwrap_or(4), seed),
                })
            }
            (Some(_), Some(_)) => bail!("give either data.root or data.synthetic, not both"),
            (None, None) => {
                bail!("no data source: set data.root or data.synthetic (or pass --root)")
            }
        };
        let out = self
            .out
            .clone()
            .context("no output directory: set `out`, --out or FALLDET_OUT")?;
        if self.n_trials == 0 {
            bail!("n_trials must be at least 1");
        }
        if !(self.merge_gap_s >= 0.0 && self.merge_gap_s.is_finite()) {
            bail!(
                "merge_gap_s must be a non-negative number, got {}",
                self.merge_gap_s
            );
        }
        let t = &self.training;
        if t.max_epochs == 0 || t.batch_size == 0 {
            bail!("training.max_epochs and training.batch_size must be positive");
        }
        Ok(Experiment {
            data,
            positions: parse_subset("positions", &self.positions)?,
            scenarios: parse_subset("scenarios", &self.scenarios)?,
            domains: parse_subset("domains", &self.domains)?,
            schemes: parse_subset("schemes", &self.schemes)?,
            seed: self.seed,
            n_trials: self.n_trials,
            n_retrain: self.n_retrain,
            sampler: self.sampler,
            out,
            split_by_subject: self.split_by_subject,
            training: self.training.clone(),
            merge_gap_s: self.merge_gap_s,
        })
    }
}

/// Command-line values that replace file values when given.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub root: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub positions: Vec<String>,
    pub scenarios: Vec<String>,
    pub domains: Vec<String>,
    pub schemes: Vec<String>,
    pub n_trials: Option<usize>,
    pub merge_gap_s: Option<f64>,
}

impl ExperimentConfig {
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(root) = &o.root {
            self.data = DataSection {
                root: Some(root.clone()),
                synthetic: None,
            };
        }
        if o.out.is_some() {
            self.out.clone_from(&o.out);
        }
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        for (field, value) in [
            (&mut self.positions, &o.positions),
            (&mut self.scenarios, &o.scenarios),
            (&mut self.domains, &o.domains),
            (&mut self.schemes, &o.schemes),
        ] {
            if !value.is_empty() {
                field.clone_from(value);
            }
        }
        if let Some(n) = o.n_trials {
            self.n_trials = n;
        }
        if let Some(g) = o.merge_gap_s {
            self.merge_gap_s = g;
        }
    }
}

fn parse_subset<T: FromStr + PartialEq>(name: &str, raw: &[String]) -> Result<Vec<T>>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    if raw.is_empty() {
        bail!("{name} subset is empty");
    }
    let mut out = Vec::new();
    for s in raw {
        let v: T = s.parse().with_context(|| format!("in {name}"))?;
        if !out.contains(&v) {
            out.push(v);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Root(PathBuf),
    Synthetic(SyntheticSpec),
}

/// A validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub data: DataSource,
    pub positions: Vec<BodyPosition>,
    pub scenarios: Vec<Scenario>,
    pub domains: Vec<FeatureDomain>,
    pub schemes: Vec<LabelingScheme>,
    pub seed: u64,
    pub n_trials: usize,
    pub n_retrain: usize,
    pub sampler: Sampler,
    pub out: PathBuf,
    pub split_by_subject: bool,
    pub training: TrainingSection,
    pub merge_gap_s: f64,
}

impl Experiment {
    /// Selected pipelines in table order: position, scheme, scenario, domain.
    pub fn pipelines(&self) -> Vec<PipelineId> {
        let mut out = Vec::new();
        for &position in &self.positions {
            for &scheme in &self.schemes {
                for &scenario in &self.scenarios {
                    for &domain in &self.domains {
                        out.push(PipelineId {
                            position,
                            scheme,
                            scenario,
                            domain,
                        });
                    }
                }
            }
        }
        out
    }

    /// Split seed shared by all pipelines of one (position, scheme), so their
    /// example splits coincide.
    pub fn split_seed(&self, position: BodyPosition, scheme: LabelingScheme) -> u64 {
        let s = match scheme {
            LabelingScheme::L1 => 0,
            LabelingScheme::L2 => 1,
        };
        derive_seed(self.seed, stream::SPLIT, (position.index() * 2 + s) as u64)
    }

    pub fn study_seed(&self, pipeline: PipelineId) -> u64 {
        derive_seed(self.seed, stream::PIPELINE, pipeline.ordinal())
    }

    pub fn study_options(&self, pipeline: PipelineId) -> StudyOptions {
        StudyOptions {
            n_trials: self.n_trials,
            n_retrain: self.n_retrain,
            train: self.training.train_options(),
            sampler: self.sampler,
            space: SearchSpace::default(),
            max_forward_macs: self.training.max_forward_macs,
            log_path: Some(self.study_log(pipeline)),
            seed: self.study_seed(pipeline),
        }
    }

    pub fn dataset_path(&self, pipeline: PipelineId) -> PathBuf {
        self.out.join("datasets").join(format!("{pipeline}.fdds"))
    }

    pub fn study_log(&self, pipeline: PipelineId) -> PathBuf {
        self.out.join("studies").join(format!("{pipeline}.jsonl"))
    }

    pub fn model_path(&self, pipeline: PipelineId) -> PathBuf {
        self.out.join("models").join(format!("{pipeline}.fdck"))
    }

    pub fn reports_dir(&self) -> PathBuf {
        self.out.join("reports")
    }
}
