//! Fixed-length labeled segments.
//!
//! Each trial becomes zero or more segments of `L` samples per channel
//! (`L` = 1025 on the chest, 450 on the wrists). Which part of the trial is
//! kept depends on the activity:
//!
//! | rule | activities | segments |
//! |------|------------|----------|
//! | head | falls, chair transitions ADL7/ADL8 | first `L` samples |
//! | stairs | ADL5, ADL6, ADL15 | first `L` samples |
//! | peak | OM3–OM8 | `L` samples around the acceleration-magnitude peak |
//! | tile | everything else | consecutive non-overlapping `L`-blocks |

use std::fs;
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::magnitude;
use crate::ingest::{
    pair_recordings, ActivityCode, ActivityFamily, BodyPosition, SensorKind, SensorRecording,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LabelingScheme {
    /// Prone-position transitions OM6–OM8 count as falls.
    L1,
    /// OM6–OM8 count as non-falls.
    L2,
}

impl LabelingScheme {
    pub const ALL: [LabelingScheme; 2] = [LabelingScheme::L1, LabelingScheme::L2];

    pub fn as_str(self) -> &'static str {
        match self {
            LabelingScheme::L1 => "l1",
            LabelingScheme::L2 => "l2",
        }
    }

    pub fn label(self, activity: ActivityCode) -> u8 {
        match (activity.family, activity.index) {
            (ActivityFamily::Fall, _) => 1,
            (ActivityFamily::Om, 6..=8) => match self {
                LabelingScheme::L1 => 1,
                LabelingScheme::L2 => 0,
            },
            _ => 0,
        }
    }
}

impl std::fmt::Display for LabelingScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for LabelingScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "l1" | "ℓ1" | "1" => Ok(LabelingScheme::L1),
            "l2" | "ℓ2" | "2" => Ok(LabelingScheme::L2),
            _ => Err(Error::InvalidSpec(format!("unknown labeling scheme {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentRule {
    Head,
    Stairs,
    PeakCentered,
    Tile,
}

pub fn rule_for(activity: ActivityCode) -> SegmentRule {
    match (activity.family, activity.index) {
        (ActivityFamily::Fall, _) => SegmentRule::Head,
        (ActivityFamily::Adl, 7 | 8) => SegmentRule::Head,
        (ActivityFamily::Adl, 5 | 6 | 15) => SegmentRule::Stairs,
        (ActivityFamily::Om, 3..=8) => SegmentRule::PeakCentered,
        _ => SegmentRule::Tile,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentVector {
    pub subject_id: u32,
    pub position: BodyPosition,
    pub activity: ActivityCode,
    pub label: u8,
    pub source_id: String,
    /// Index of the first source sample (before any padding).
    pub start_index: usize,
    pub acc: [Vec<f64>; 3],
    pub gyr: [Vec<f64>; 3],
}

impl SegmentVector {
    pub fn len(&self) -> usize {
        self.acc[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn acc_magnitude(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| magnitude(self.acc[0][i], self.acc[1][i], self.acc[2][i]))
            .collect()
    }

    pub fn gyr_magnitude(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| magnitude(self.gyr[0][i], self.gyr[1][i], self.gyr[2][i]))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SegmentWarning {
    /// Sample counts differ by more than 20%; the shorter common prefix was used.
    ChannelMismatch {
        source_id: String,
        acc: usize,
        gyr: usize,
    },
    /// Fewer than `L/2` samples: no segment.
    TooShort {
        source_id: String,
        samples: usize,
        needed: usize,
    },
}

#[derive(Debug, Clone, Default)]
pub struct Segmented {
    pub vectors: Vec<SegmentVector>,
    pub warnings: Vec<SegmentWarning>,
}

/// Extends a channel of `n` samples (`L/2 ≤ n ≤ L`) to `L` by repeating the
/// last value.
pub fn padding_policy(samples: &[f64], target: usize) -> Vec<f64> {
    debug_assert!(!samples.is_empty() && samples.len() <= target);
    let mut out = samples.to_vec();
    let last = *samples.last().expect("non-empty channel");
    out.resize(target, last);
    out
}

fn channels(rec: &SensorRecording, n: usize) -> [Vec<f64>; 3] {
    let s = &rec.samples[..n];
    [
        s.iter().map(|v| v.x).collect(),
        s.iter().map(|v| v.y).collect(),
        s.iter().map(|v| v.z).collect(),
    ]
}

/// Start index of the peak-centered block: `floor(L/2)` samples before the
/// peak, shifted inward at the boundaries.
pub fn peak_window_start(peak: usize, n: usize, window: usize) -> usize {
    let half = window / 2;
    peak.saturating_sub(half).min(n.saturating_sub(window))
}

pub fn segment_recording(
    acc: &SensorRecording,
    gyr: &SensorRecording,
    scheme: LabelingScheme,
) -> Result<Segmented> {
    if acc.kind != SensorKind::LinearAcceleration || gyr.kind != SensorKind::AngularSpeed {
        return Err(Error::UnpairedRecordings(format!(
            "{}: expected an acceleration and an angular-speed recording",
            acc.sampling_id
        )));
    }
    if acc.subject_id != gyr.subject_id
        || acc.position != gyr.position
        || acc.activity != gyr.activity
    {
        return Err(Error::UnpairedRecordings(format!(
            "{} / {}: subject, position or activity differ",
            acc.sampling_id, gyr.sampling_id
        )));
    }
    let window = acc.position.window_len();
    let mut out = Segmented::default();
    let (na, ng) = (acc.len(), gyr.len());
    let n = na.min(ng);
    if (na.max(ng) - n) as f64 > 0.2 * na.max(ng) as f64 {
        warn!(
            "{}: acc/gyr sample counts {na} vs {ng}, using common prefix",
            acc.sampling_id
        );
        out.warnings.push(SegmentWarning::ChannelMismatch {
            source_id: acc.sampling_id.clone(),
            acc: na,
            gyr: ng,
        });
    }
    let needed = window.div_ceil(2);
    if n < needed {
        warn!("{}: {n} samples, need at least {needed}", acc.sampling_id);
        out.warnings.push(SegmentWarning::TooShort {
            source_id: acc.sampling_id.clone(),
            samples: n,
            needed,
        });
        return Ok(out);
    }

    let a = channels(acc, n);
    let g = channels(gyr, n);
    let label = scheme.label(acc.activity);
    let make = |start: usize| {
        let end = (start + window).min(n);
        let cut = |c: &Vec<f64>| padding_policy(&c[start..end], window);
        SegmentVector {
            subject_id: acc.subject_id,
            position: acc.position,
            activity: acc.activity,
            label,
            source_id: acc.sampling_id.clone(),
            start_index: start,
            acc: [cut(&a[0]), cut(&a[1]), cut(&a[2])],
            gyr: [cut(&g[0]), cut(&g[1]), cut(&g[2])],
        }
    };

    match rule_for(acc.activity) {
        SegmentRule::Head | SegmentRule::Stairs => out.vectors.push(make(0)),
        SegmentRule::PeakCentered => {
            let peak = (0..n)
                .map(|i| magnitude(a[0][i], a[1][i], a[2][i]))
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (i, m)| {
                    if m > best.1 {
                        (i, m)
                    } else {
                        best
                    }
                })
                .0;
            out.vectors.push(make(peak_window_start(peak, n, window)));
        }
        SegmentRule::Tile => {
            if n < window {
                out.vectors.push(make(0));
            } else {
                out.vectors
                    .extend((0..n / window).map(|k| make(k * window)));
            }
        }
    }
    Ok(out)
}

/// Segments every acc/gyr pair; recordings without a partner are skipped
/// with a warning.
pub fn segment_all(recordings: &[SensorRecording], scheme: LabelingScheme) -> Result<Segmented> {
    let (pairs, unpaired) = pair_recordings(recordings);
    for rec in unpaired {
        warn!(
            "{}: no matching {:?} partner, skipped",
            rec.sampling_id, rec.kind
        );
    }
    let mut out = Segmented::default();
    for pair in pairs {
        let s = segment_recording(pair.acc, pair.gyr, scheme)?;
        out.vectors.extend(s.vectors);
        out.warnings.extend(s.warnings);
    }
    Ok(out)
}

/// Debug dump: `segment_<n>.csv` (six columns, `L` rows) per segment and a
/// `manifest.csv`.
pub fn dump_segments(dir: impl AsRef<Path>, segments: &[SegmentVector]) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut manifest = csv::Writer::from_path(dir.join("manifest.csv"))?;
    manifest.write_record([
        "file",
        "subject",
        "position",
        "activity",
        "rifle",
        "label",
        "source_id",
        "start_index",
    ])?;
    for (i, seg) in segments.iter().enumerate() {
        let name = format!("segment_{i:06}.csv");
        let mut w = csv::Writer::from_path(dir.join(&name))?;
        w.write_record(["acc_x", "acc_y", "acc_z", "gyr_x", "gyr_y", "gyr_z"])?;
        for j in 0..seg.len() {
            w.write_record(
                [
                    &seg.acc[0],
                    &seg.acc[1],
                    &seg.acc[2],
                    &seg.gyr[0],
                    &seg.gyr[1],
                    &seg.gyr[2],
                ]
                .map(|c| c[j].to_string()),
            )?;
        }
        w.flush().map_err(|e| Error::io(dir.join(&name), e))?;
        manifest.write_record([
            name,
            seg.subject_id.to_string(),
            seg.position.to_string(),
            seg.activity.base_label(),
            u8::from(seg.activity.with_rifle).to_string(),
            seg.label.to_string(),
            seg.source_id.clone(),
            seg.start_index.to_string(),
        ])?;
    }
    manifest.flush().map_err(|e| Error::io(dir, e))?;
    Ok(())
}

/// Positive-class fraction of a segment set.
pub fn positive_fraction(segments: &[SegmentVector]) -> f64 {
    if segments.is_empty() {
        return 0.0;
    }
    segments.iter().filter(|s| s.label == 1).count() as f64 / segments.len() as f64
}
