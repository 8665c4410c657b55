//! Recording trees and synthetic data.
//!
//! A dataset root holds one directory per subject, each with `chest`, `left`
//! and `right` subdirectories. Every position directory carries
//! `sampling.csv` (one row per trial) and two sensor files,
//! `acceleration.csv` and `angular_speed.csv`, whose `sampling` column
//! references `sampling.csv`'s `id`.

mod activity;
mod io;
pub mod synthetic;

use serde::{Deserialize, Serialize};

pub use activity::{ActivityCode, ActivityFamily};
pub use io::{load_dataset, write_dataset, LoadReport, LoadedDataset, RowIssue};
pub use synthetic::{
    generate_stream, generate_synthetic, ActivityPlan, StreamSpec, SyntheticSpec, SyntheticStream,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BodyPosition {
    Chest,
    LeftWrist,
    RightWrist,
}

impl BodyPosition {
    pub const ALL: [BodyPosition; 3] = [
        BodyPosition::Chest,
        BodyPosition::LeftWrist,
        BodyPosition::RightWrist,
    ];

    /// Subdirectory name in a dataset tree.
    pub fn dir_name(self) -> &'static str {
        match self {
            BodyPosition::Chest => "chest",
            BodyPosition::LeftWrist => "left",
            BodyPosition::RightWrist => "right",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "chest" => Some(BodyPosition::Chest),
            "left" | "left_wrist" | "leftwrist" | "left wrist" => Some(BodyPosition::LeftWrist),
            "right" | "right_wrist" | "rightwrist" | "right wrist" => {
                Some(BodyPosition::RightWrist)
            }
            _ => None,
        }
    }

    /// Samples in one 5 s segment: 1025 for the phone on the chest, 450 for
    /// the watches.
    pub fn window_len(self) -> usize {
        match self {
            BodyPosition::Chest => 1025,
            BodyPosition::LeftWrist | BodyPosition::RightWrist => 450,
        }
    }

    /// Nominal sampling rate that makes 5 s equal [`Self::window_len`] samples.
    pub fn nominal_rate_hz(self) -> f64 {
        self.window_len() as f64 / 5.0
    }

    pub fn index(self) -> usize {
        match self {
            BodyPosition::Chest => 0,
            BodyPosition::LeftWrist => 1,
            BodyPosition::RightWrist => 2,
        }
    }
}

impl std::fmt::Display for BodyPosition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.dir_name())
    }
}

impl std::str::FromStr for BodyPosition {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        BodyPosition::from_name(s)
            .ok_or_else(|| crate::Error::InvalidSpec(format!("unknown body position {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SensorKind {
    LinearAcceleration,
    AngularSpeed,
}

impl SensorKind {
    pub fn file_name(self) -> &'static str {
        match self {
            SensorKind::LinearAcceleration => "acceleration.csv",
            SensorKind::AngularSpeed => "angular_speed.csv",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorSample {
    pub timestamp_ms: i64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl SensorSample {
    pub fn magnitude(&self) -> f64 {
        crate::features::magnitude(self.x, self.y, self.z)
    }
}

/// One trial from one device for one sensor kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorRecording {
    pub sampling_id: String,
    pub subject_id: u32,
    pub position: BodyPosition,
    pub kind: SensorKind,
    pub activity: ActivityCode,
    pub start_ts: i64,
    pub end_ts: i64,
    pub samples: Vec<SensorSample>,
}

impl SensorRecording {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.samples.iter().map(SensorSample::magnitude).collect()
    }

    pub fn max_magnitude(&self) -> f64 {
        self.samples
            .iter()
            .map(SensorSample::magnitude)
            .fold(0.0, f64::max)
    }
}

/// Acceleration and angular-speed recordings of the same trial.
#[derive(Debug, Clone, Copy)]
pub struct RecordingPair<'a> {
    pub acc: &'a SensorRecording,
    pub gyr: &'a SensorRecording,
}

/// Pairs recordings by `(subject, position, sampling_id)`. Trials missing one
/// of the two kinds are returned separately.
pub fn pair_recordings(
    recordings: &[SensorRecording],
) -> (Vec<RecordingPair<'_>>, Vec<&SensorRecording>) {
    use std::collections::BTreeMap;
    let mut by_key: BTreeMap<
        (u32, BodyPosition, &str),
        (Option<&SensorRecording>, Option<&SensorRecording>),
    > = BTreeMap::new();
    let mut order = Vec::new();
    for rec in recordings {
        let key = (rec.subject_id, rec.position, rec.sampling_id.as_str());
        let slot = by_key.entry(key).or_insert_with(|| {
            order.push(key);
            (None, None)
        });
        match rec.kind {
            SensorKind::LinearAcceleration => slot.0 = Some(rec),
            SensorKind::AngularSpeed => slot.1 = Some(rec),
        }
    }
    let mut pairs = Vec::new();
    let mut unpaired = Vec::new();
    for key in order {
        match by_key[&key] {
            (Some(acc), Some(gyr)) => pairs.push(RecordingPair { acc, gyr }),
            (Some(r), None) | (None, Some(r)) => unpaired.push(r),
            (None, None) => {}
        }
    }
    (pairs, unpaired)
}
