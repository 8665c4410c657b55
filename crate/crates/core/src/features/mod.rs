//! Scenario datasets.
//!
//! A pipeline is identified by body position, labeling scheme, scenario
//! (which channels) and feature domain (time samples or DC-stripped
//! spectrum), e.g. `chest-l2-Sc4T`.

mod dataset_io;
mod spectrum;

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};

use log::warn;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

pub use dataset_io::{export_csv, read_dataset, write_dataset, DATASET_MAGIC, DATASET_VERSION};
pub use spectrum::{spectral_energy, spectrum};

use crate::error::{Error, Result};
use crate::ingest::{ActivityCode, BodyPosition};
use crate::segment::{LabelingScheme, SegmentVector};

/// Euclidean norm of a 3-axis sample.
pub fn magnitude(x: f64, y: f64, z: f64) -> f64 {
    (x * x + y * y + z * z).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scenario {
    Sc1Acc,
    Sc1Gyr,
    Sc2Acc,
    Sc2Gyr,
    Sc3,
    Sc4,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::Sc1Acc,
        Scenario::Sc1Gyr,
        Scenario::Sc2Acc,
        Scenario::Sc2Gyr,
        Scenario::Sc3,
        Scenario::Sc4,
    ];

    pub fn channel_count(self) -> usize {
        match self {
            Scenario::Sc1Acc | Scenario::Sc1Gyr => 1,
            Scenario::Sc2Acc | Scenario::Sc2Gyr => 3,
            Scenario::Sc3 => 2,
            Scenario::Sc4 => 6,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Sc1Acc => "Sc1Acc",
            Scenario::Sc1Gyr => "Sc1Gyr",
            Scenario::Sc2Acc => "Sc2Acc",
            Scenario::Sc2Gyr => "Sc2Gyr",
            Scenario::Sc3 => "Sc3",
            Scenario::Sc4 => "Sc4",
        }
    }

    pub fn index(self) -> usize {
        Scenario::ALL
            .iter()
            .position(|&s| s == self)
            .expect("listed scenario")
    }

    /// Selects (and for Sc1/Sc3 reduces to magnitudes) the scenario's
    /// time-domain channels.
    pub fn select(self, acc: [&[f64]; 3], gyr: [&[f64]; 3]) -> Vec<Vec<f64>> {
        let mag = |c: [&[f64]; 3]| -> Vec<f64> {
            (0..c[0].len())
                .map(|i| magnitude(c[0][i], c[1][i], c[2][i]))
                .collect()
        };
        let copy = |c: [&[f64]; 3]| c.iter().map(|v| v.to_vec()).collect::<Vec<_>>();
        match self {
            Scenario::Sc1Acc => vec![mag(acc)],
            Scenario::Sc1Gyr => vec![mag(gyr)],
            Scenario::Sc2Acc => copy(acc),
            Scenario::Sc2Gyr => copy(gyr),
            Scenario::Sc3 => vec![mag(acc), mag(gyr)],
            Scenario::Sc4 => {
                let mut v = copy(acc);
                v.extend(copy(gyr));
                v
            }
        }
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidSpec(format!("unknown scenario {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FeatureDomain {
    Time,
    Frequency,
}

impl FeatureDomain {
    pub const ALL: [FeatureDomain; 2] = [FeatureDomain::Time, FeatureDomain::Frequency];

    pub fn suffix(self) -> &'static str {
        match self {
            FeatureDomain::Time => "T",
            FeatureDomain::Frequency => "F",
        }
    }

    /// Feature length for a segment of `window` samples.
    pub fn feature_len(self, window: usize) -> usize {
        match self {
            FeatureDomain::Time => window,
            FeatureDomain::Frequency => window / 2,
        }
    }
}

impl FromStr for FeatureDomain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "t" | "time" => Ok(FeatureDomain::Time),
            "f" | "freq" | "frequency" => Ok(FeatureDomain::Frequency),
            _ => Err(Error::InvalidSpec(format!("unknown feature domain {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PipelineId {
    pub position: BodyPosition,
    pub scheme: LabelingScheme,
    pub scenario: Scenario,
    pub domain: FeatureDomain,
}

impl PipelineId {
    /// The short table name, e.g. `Sc1AccT`.
    pub fn short_name(&self) -> String {
        format!("{}{}", self.scenario.as_str(), self.domain.suffix())
    }

    pub fn window_len(&self) -> usize {
        self.position.window_len()
    }

    pub fn feature_len(&self) -> usize {
        self.domain.feature_len(self.window_len())
    }

    pub fn channels(&self) -> usize {
        self.scenario.channel_count()
    }

    /// Dense index in `0..72`, used to derive per-pipeline seeds.
    pub fn ordinal(&self) -> u64 {
        let scheme = match self.scheme {
            LabelingScheme::L1 => 0,
            LabelingScheme::L2 => 1,
        };
        let domain = match self.domain {
            FeatureDomain::Time => 0,
            FeatureDomain::Frequency => 1,
        };
        (self.position.index() * 24 + scheme * 12 + self.scenario.index() * 2 + domain) as u64
    }
}

impl fmt::Display for PipelineId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}-{}-{}",
            self.position.dir_name(),
            self.scheme,
            self.short_name()
        )
    }
}

impl FromStr for PipelineId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::InvalidSpec(format!(
                "bad pipeline id {s:?}, expected e.g. chest-l2-Sc4T"
            ))
        };
        let mut parts = s.trim().splitn(3, '-');
        let position: BodyPosition = parts.next().ok_or_else(bad)?.parse()?;
        let scheme: LabelingScheme = parts.next().ok_or_else(bad)?.parse()?;
        let name = parts.next().ok_or_else(bad)?;
        if name.len() < 2 {
            return Err(bad());
        }
        let (scenario, domain) = name.split_at(name.len() - 1);
        Ok(PipelineId {
            position,
            scheme,
            scenario: scenario.parse()?,
            domain: domain.parse()?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub subject_id: u32,
    pub activity: ActivityCode,
}

/// One network input: `channels × length` values, row-major by channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub channels: usize,
    pub length: usize,
    pub data: Vec<f64>,
    pub label: u8,
    pub provenance: Provenance,
}

impl Example {
    pub fn channel(&self, c: usize) -> &[f64] {
        &self.data[c * self.length..(c + 1) * self.length]
    }
}

/// Feature channels for one window of raw acc/gyr samples.
pub fn window_features(
    scenario: Scenario,
    domain: FeatureDomain,
    acc: [&[f64]; 3],
    gyr: [&[f64]; 3],
) -> Result<Vec<Vec<f64>>> {
    let time = scenario.select(acc, gyr);
    match domain {
        FeatureDomain::Time => Ok(time),
        FeatureDomain::Frequency => time.iter().map(|c| spectrum(c)).collect(),
    }
}

pub fn assemble(
    segments: &[SegmentVector],
    scenario: Scenario,
    domain: FeatureDomain,
) -> Result<Vec<Example>> {
    let Some(first) = segments.first() else {
        return Ok(Vec::new());
    };
    let window = first.len();
    segments
        .iter()
        .map(|seg| {
            if seg.len() != window {
                return Err(Error::HeterogeneousLength(window, seg.len()));
            }
            let acc = [
                seg.acc[0].as_slice(),
                seg.acc[1].as_slice(),
                seg.acc[2].as_slice(),
            ];
            let gyr = [
                seg.gyr[0].as_slice(),
                seg.gyr[1].as_slice(),
                seg.gyr[2].as_slice(),
            ];
            let chans = window_features(scenario, domain, acc, gyr)?;
            let length = chans[0].len();
            Ok(Example {
                channels: chans.len(),
                length,
                data: chans.concat(),
                label: seg.label,
                provenance: Provenance {
                    subject_id: seg.subject_id,
                    activity: seg.activity,
                },
            })
        })
        .collect()
}

/// Per-channel standardization fitted on the training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Normalization {
    pub fn identity(channels: usize) -> Self {
        Normalization {
            mean: vec![0.0; channels],
            std: vec![1.0; channels],
        }
    }

    pub fn fit(examples: &[Example]) -> Self {
        let channels = examples.first().map_or(0, |e| e.channels);
        let mut mean = vec![0.0; channels];
        let mut std = vec![1.0; channels];
        for c in 0..channels {
            let count = examples.iter().map(|e| e.length).sum::<usize>() as f64;
            if count == 0.0 {
                continue;
            }
            let m = examples.iter().flat_map(|e| e.channel(c)).sum::<f64>() / count;
            let var = examples
                .iter()
                .flat_map(|e| e.channel(c))
                .map(|v| (v - m) * (v - m))
                .sum::<f64>()
                / count;
            mean[c] = m;
            std[c] = if var.sqrt() > 1e-12 { var.sqrt() } else { 1.0 };
        }
        Normalization { mean, std }
    }

    pub fn apply_in_place(&self, data: &mut [f64], length: usize) {
        for (c, chunk) in data.chunks_mut(length).enumerate() {
            let (m, s) = (self.mean[c], self.std[c]);
            for v in chunk {
                *v = (*v - m) / s;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SplitOptions {
    pub seed: u64,
    /// Keep each subject's examples within one split.
    #[serde(default)]
    pub by_subject: bool,
}

/// A pipeline's train/validation/test examples, standardized with
/// train-fitted statistics.
///
/// Reads of the test split are counted so that callers can prove it was
/// not touched during model selection.
#[derive(Debug)]
pub struct ScenarioDataset {
    pub pipeline: PipelineId,
    pub channels: usize,
    pub length: usize,
    pub train: Vec<Example>,
    pub val: Vec<Example>,
    test: Vec<Example>,
    pub normalization: Normalization,
    pub warnings: Vec<String>,
    test_reads: AtomicUsize,
}

impl Clone for ScenarioDataset {
    fn clone(&self) -> Self {
        ScenarioDataset {
            pipeline: self.pipeline,
            channels: self.channels,
            length: self.length,
            train: self.train.clone(),
            val: self.val.clone(),
            test: self.test.clone(),
            normalization: self.normalization.clone(),
            warnings: self.warnings.clone(),
            test_reads: AtomicUsize::new(self.test_reads.load(Ordering::Relaxed)),
        }
    }
}

impl ScenarioDataset {
    /// Builds a dataset from already-standardized splits.
    pub fn from_parts(
        pipeline: PipelineId,
        train: Vec<Example>,
        val: Vec<Example>,
        test: Vec<Example>,
        normalization: Normalization,
    ) -> Result<Self> {
        let first = train
            .first()
            .or(val.first())
            .or(test.first())
            .ok_or(Error::TooFewExamples { needed: 1, got: 0 })?;
        let (channels, length) = (first.channels, first.length);
        for e in train.iter().chain(&val).chain(&test) {
            if e.channels != channels || e.length != length {
                return Err(Error::ShapeMismatch {
                    expected: format!("{channels}x{length}"),
                    found: format!("{}x{}", e.channels, e.length),
                });
            }
        }
        Ok(ScenarioDataset {
            pipeline,
            channels,
            length,
            train,
            val,
            test,
            normalization,
            warnings: Vec::new(),
            test_reads: AtomicUsize::new(0),
        })
    }

    /// The held-out split. Every call is counted.
    pub fn test(&self) -> &[Example] {
        self.test_reads.fetch_add(1, Ordering::SeqCst);
        &self.test
    }

    pub fn test_access_count(&self) -> usize {
        self.test_reads.load(Ordering::SeqCst)
    }

    pub fn test_len(&self) -> usize {
        self.test.len()
    }

    pub fn total(&self) -> usize {
        self.train.len() + self.val.len() + self.test.len()
    }

    pub fn positives(examples: &[Example]) -> usize {
        examples.iter().filter(|e| e.label == 1).count()
    }

    pub(crate) fn test_unaudited(&self) -> &[Example] {
        &self.test
    }
}

fn round_share(n: usize, share: f64) -> usize {
    (n as f64 * share).round() as usize
}

/// Stratified 60/20/20 split, standardized with train statistics.
pub fn split(
    examples: Vec<Example>,
    pipeline: PipelineId,
    options: SplitOptions,
) -> Result<ScenarioDataset> {
    const MIN: usize = 5;
    if examples.len() < MIN {
        return Err(Error::TooFewExamples {
            needed: MIN,
            got: examples.len(),
        });
    }
    let mut rng = crate::seed::rng(options.seed);
    let n = examples.len();
    let mut warnings = Vec::new();

    let assignment: Vec<u8> = if options.by_subject {
        subject_assignment(&examples, &mut rng)
    } else {
        let n_train = round_share(n, 0.6);
        let n_val = round_share(n, 0.2);
        let pos: Vec<usize> = (0..n).filter(|&i| examples[i].label == 1).collect();
        let neg: Vec<usize> = (0..n).filter(|&i| examples[i].label != 1).collect();
        let p = pos.len();
        let (p_train, p_val) = (round_share(p, 0.6), round_share(p, 0.2));
        let p_test = p - p_train - p_val;
        let fits = p_train <= n_train && p_val <= n_val && p_test <= n - n_train - n_val;
        let mut assignment = vec![0u8; n];
        if p_train > 0 && p_val > 0 && p_test > 0 && fits {
            for (group, counts) in [
                (pos, [p_train, p_val]),
                (neg, [n_train - p_train, n_val - p_val]),
            ] {
                let mut group = group;
                group.shuffle(&mut rng);
                for (k, idx) in group.into_iter().enumerate() {
                    assignment[idx] = if k < counts[0] {
                        0
                    } else if k < counts[0] + counts[1] {
                        1
                    } else {
                        2
                    };
                }
            }
        } else {
            let msg = format!("{pipeline}: {p} positives cannot be stratified over three splits; using a plain shuffle");
            warn!("{msg}");
            warnings.push(msg);
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(&mut rng);
            for (k, i) in idx.into_iter().enumerate() {
                assignment[i] = if k < n_train {
                    0
                } else if k < n_train + n_val {
                    1
                } else {
                    2
                };
            }
        }
        assignment
    };

    let mut splits: [Vec<Example>; 3] = Default::default();
    for (e, a) in examples.into_iter().zip(assignment) {
        splits[a as usize].push(e);
    }
    let [mut train, mut val, mut test] = splits;
    let normalization = Normalization::fit(&train);
    for e in train
        .iter_mut()
        .chain(val.iter_mut())
        .chain(test.iter_mut())
    {
        normalization.apply_in_place(&mut e.data, e.length);
    }
    let mut ds = ScenarioDataset::from_parts(pipeline, train, val, test, normalization)?;
    ds.warnings = warnings;
    Ok(ds)
}

/// Whole subjects go to train until it holds ≥ 60% of the examples, then to
/// validation until ≥ 80%, the rest to test.
fn subject_assignment(examples: &[Example], rng: &mut rand_chacha::ChaCha8Rng) -> Vec<u8> {
    let mut subjects: Vec<u32> = examples.iter().map(|e| e.provenance.subject_id).collect();
    subjects.sort_unstable();
    subjects.dedup();
    subjects.shuffle(rng);
    let n = examples.len() as f64;
    let mut split_of = std::collections::HashMap::new();
    let mut cumulative = 0usize;
    for s in subjects {
        let share = cumulative as f64 / n;
        let split = if share < 0.6 {
            0u8
        } else if share < 0.8 {
            1
        } else {
            2
        };
        split_of.insert(s, split);
        cumulative += examples
            .iter()
            .filter(|e| e.provenance.subject_id == s)
            .count();
    }
    examples
        .iter()
        .map(|e| split_of[&e.provenance.subject_id])
        .collect()
}
