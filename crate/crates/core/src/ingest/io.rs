use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use log::warn;

use super::{ActivityCode, BodyPosition, SensorKind, SensorRecording, SensorSample};
use crate::error::{Error, Result};

const SAMPLING_FILE: &str = "sampling.csv";
const SAMPLING_HEADER: [&str; 6] = ["id", "exercise", "position", "start", "end", "withRifle"];
const SENSOR_HEADER: [&str; 5] = ["sampling", "timestamp", "x", "y", "z"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowIssue {
    pub file: PathBuf,
    pub line: u64,
    pub reason: String,
}

/// Non-fatal problems met while loading.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadReport {
    /// Sensor rows whose sampling id is not in `sampling.csv`.
    pub orphan_rows: usize,
    pub malformed_rows: Vec<RowIssue>,
    /// Recordings whose samples had to be re-sorted by timestamp.
    pub unsorted_recordings: usize,
    /// Recordings whose `[start, end]` was widened to cover their samples.
    pub widened_bounds: usize,
    /// `sampling.csv` rows without any sensor rows for a kind.
    pub empty_samplings: usize,
    /// `sampling.csv` rows whose position column disagrees with the directory.
    pub position_mismatches: usize,
}

impl LoadReport {
    pub fn is_clean(&self) -> bool {
        *self == LoadReport::default()
    }
}

#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub recordings: Vec<SensorRecording>,
    pub report: LoadReport,
}

struct SamplingRow {
    id: String,
    activity: ActivityCode,
    start_ts: i64,
    end_ts: i64,
}

/// Loads every `<root>/<subject>/<position>/` directory.
///
/// Subject ids come from the digits in the subject directory name. Position
/// directories that do not exist are skipped; a position directory missing
/// one of its three CSV files is an error.
pub fn load_dataset(root: impl AsRef<Path>) -> Result<LoadedDataset> {
    let root = root.as_ref();
    let mut subjects = Vec::new();
    for entry in fs::read_dir(root).map_err(|e| Error::io(root, e))? {
        let entry = entry.map_err(|e| Error::io(root, e))?;
        let path = entry.path();
        if !path.is_dir() {
            continue;
        }
        let name = entry.file_name().to_string_lossy().into_owned();
        let digits: String = name.chars().filter(|c| c.is_ascii_digit()).collect();
        match digits.parse::<u32>() {
            Ok(id) => subjects.push((id, path)),
            Err(_) => warn!("skipping non-subject directory {}", path.display()),
        }
    }
    subjects.sort();

    let mut recordings = Vec::new();
    let mut report = LoadReport::default();
    for (subject_id, dir) in subjects {
        for position in BodyPosition::ALL {
            let pos_dir = dir.join(position.dir_name());
            if !pos_dir.is_dir() {
                continue;
            }
            load_position(&pos_dir, subject_id, position, &mut recordings, &mut report)?;
        }
    }
    if recordings.is_empty() {
        return Err(Error::EmptyDataset(root.to_path_buf()));
    }
    if report.orphan_rows > 0 {
        warn!(
            "{} sensor rows reference unknown sampling ids",
            report.orphan_rows
        );
    }
    if !report.malformed_rows.is_empty() {
        warn!("{} malformed rows skipped", report.malformed_rows.len());
    }
    Ok(LoadedDataset { recordings, report })
}

fn required(dir: &Path, file: &str) -> Result<PathBuf> {
    let path = dir.join(file);
    if path.is_file() {
        Ok(path)
    } else {
        Err(Error::MissingFile(path))
    }
}

fn reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::format(path, format!("{other:?}")),
        })
}

fn parse_ts(field: &str) -> std::result::Result<i64, String> {
    field
        .parse::<i64>()
        .or_else(|_| {
            field
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(|v| v.round() as i64)
                .ok_or(())
        })
        .map_err(|_| format!("non-numeric timestamp {field:?}"))
}

fn parse_f64(field: &str) -> std::result::Result<f64, String> {
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("non-numeric value {field:?}")),
    }
}

fn parse_rifle(field: &str) -> std::result::Result<bool, String> {
    match field.to_ascii_lowercase().as_str() {
        "0" | "false" => Ok(false),
        "1" | "true" => Ok(true),
        _ => Err(format!("withRifle must be 0 or 1, got {field:?}")),
    }
}

fn load_position(
    dir: &Path,
    subject_id: u32,
    position: BodyPosition,
    out: &mut Vec<SensorRecording>,
    report: &mut LoadReport,
) -> Result<()> {
    let sampling_path = required(dir, SAMPLING_FILE)?;
    let sensor_paths = [
        (
            SensorKind::LinearAcceleration,
            required(dir, SensorKind::LinearAcceleration.file_name())?,
        ),
        (
            SensorKind::AngularSpeed,
            required(dir, SensorKind::AngularSpeed.file_name())?,
        ),
    ];

    let mut samplings: Vec<SamplingRow> = Vec::new();
    let mut index_of: HashMap<String, usize> = HashMap::new();
    let mut rdr = reader(&sampling_path)?;
    for (i, row) in rdr.records().enumerate() {
        let line = i as u64 + 2;
        let issue = |reason: String| RowIssue {
            file: sampling_path.clone(),
            line,
            reason,
        };
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                report.malformed_rows.push(issue(e.to_string()));
                continue;
            }
        };
        if row.len() != SAMPLING_HEADER.len() {
            report.malformed_rows.push(issue(format!(
                "expected {} columns, found {}",
                SAMPLING_HEADER.len(),
                row.len()
            )));
            continue;
        }
        let parsed = (|| -> std::result::Result<SamplingRow, String> {
            let id = row[0].to_string();
            if id.is_empty() {
                return Err("empty sampling id".into());
            }
            let rifle = parse_rifle(&row[5])?;
            let activity: ActivityCode = row[1].parse().map_err(|e: Error| e.to_string())?;
            let activity = activity
                .with_rifle(activity.with_rifle || rifle)
                .map_err(|e| e.to_string())?;
            Ok(SamplingRow {
                id,
                activity,
                start_ts: parse_ts(&row[3])?,
                end_ts: parse_ts(&row[4])?,
            })
        })();
        match parsed {
            Ok(s) => {
                if index_of.contains_key(&s.id) {
                    report
                        .malformed_rows
                        .push(issue(format!("duplicate sampling id {:?}", s.id)));
                    continue;
                }
                if BodyPosition::from_name(&row[2]) != Some(position) {
                    report.position_mismatches += 1;
                }
                index_of.insert(s.id.clone(), samplings.len());
                samplings.push(s);
            }
            Err(reason) => report.malformed_rows.push(issue(reason)),
        }
    }

    for (kind, path) in sensor_paths {
        let mut per_sampling: Vec<Vec<SensorSample>> = vec![Vec::new(); samplings.len()];
        let mut rdr = reader(&path)?;
        for (i, row) in rdr.records().enumerate() {
            let line = i as u64 + 2;
            let row = match row {
                Ok(r) => r,
                Err(e) => {
                    report.malformed_rows.push(RowIssue {
                        file: path.clone(),
                        line,
                        reason: e.to_string(),
                    });
                    continue;
                }
            };
            if row.len() != SENSOR_HEADER.len() {
                report.malformed_rows.push(RowIssue {
                    file: path.clone(),
                    line,
                    reason: format!(
                        "expected {} columns, found {}",
                        SENSOR_HEADER.len(),
                        row.len()
                    ),
                });
                continue;
            }
            let sample = (|| -> std::result::Result<SensorSample, String> {
                Ok(SensorSample {
                    timestamp_ms: parse_ts(&row[1])?,
                    x: parse_f64(&row[2])?,
                    y: parse_f64(&row[3])?,
                    z: parse_f64(&row[4])?,
                })
            })();
            match sample {
                Ok(s) => match index_of.get(&row[0]) {
                    Some(&idx) => per_sampling[idx].push(s),
                    None => report.orphan_rows += 1,
                },
                Err(reason) => report.malformed_rows.push(RowIssue {
                    file: path.clone(),
                    line,
                    reason,
                }),
            }
        }

        for (sampling, mut samples) in samplings.iter().zip(per_sampling) {
            if samples.is_empty() {
                report.empty_samplings += 1;
                continue;
            }
            if samples
                .windows(2)
                .any(|w| w[1].timestamp_ms < w[0].timestamp_ms)
            {
                // stable: equal timestamps keep file order
                samples.sort_by_key(|s| s.timestamp_ms);
                report.unsorted_recordings += 1;
            }
            let (mut start_ts, mut end_ts) = (sampling.start_ts, sampling.end_ts);
            let first = samples[0].timestamp_ms;
            let last = samples[samples.len() - 1].timestamp_ms;
            if first < start_ts || last > end_ts {
                start_ts = start_ts.min(first);
                end_ts = end_ts.max(last);
                report.widened_bounds += 1;
            }
            out.push(SensorRecording {
                sampling_id: sampling.id.clone(),
                subject_id,
                position,
                kind,
                activity: sampling.activity,
                start_ts,
                end_ts,
                samples,
            });
        }
    }
    Ok(())
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::format(path, format!("{other:?}")),
    })
}

/// Writes recordings as a dataset tree under `root`. Existing files for the
/// touched subject/position directories are replaced.
pub fn write_dataset(root: impl AsRef<Path>, recordings: &[SensorRecording]) -> Result<()> {
    use std::collections::BTreeMap;
    let root = root.as_ref();
    let mut groups: BTreeMap<(u32, BodyPosition), Vec<&SensorRecording>> = BTreeMap::new();
    for rec in recordings {
        groups
            .entry((rec.subject_id, rec.position))
            .or_default()
            .push(rec);
    }
    for ((subject, position), recs) in groups {
        let dir = root.join(subject.to_string()).join(position.dir_name());
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;

        let path = dir.join(SAMPLING_FILE);
        let mut w = writer(&path)?;
        w.write_record(SAMPLING_HEADER)?;
        let mut seen = std::collections::HashSet::new();
        for rec in &recs {
            if seen.insert(rec.sampling_id.as_str()) {
                w.write_record([
                    rec.sampling_id.clone(),
                    rec.activity.base_label(),
                    position.dir_name().to_string(),
                    rec.start_ts.to_string(),
                    rec.end_ts.to_string(),
                    u8::from(rec.activity.with_rifle).to_string(),
                ])?;
            }
        }
        w.flush().map_err(|e| Error::io(&path, e))?;

        for kind in [SensorKind::LinearAcceleration, SensorKind::AngularSpeed] {
            let path = dir.join(kind.file_name());
            let mut w = writer(&path)?;
            w.write_record(SENSOR_HEADER)?;
            for rec in recs.iter().filter(|r| r.kind == kind) {
                for s in &rec.samples {
                    w.write_record([
                        rec.sampling_id.clone(),
                        s.timestamp_ms.to_string(),
                        s.x.to_string(),
                        s.y.to_string(),
                        s.z.to_string(),
                    ])?;
                }
            }
            w.flush().map_err(|e| Error::io(&path, e))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(path: &Path, body: &str) {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(path, body).unwrap();
    }

    fn minimal_tree(root: &Path, rifle: u8, extra_acc: &str) {
        let d = root.join("1").join("left");
        write(
            &d.join("sampling.csv"),
            &format!(
                "id,exercise,position,start,end,withRifle\ns1,FALL_3,left,1000,1100,{rifle}\n"
            ),
        );
        write(
            &d.join("acceleration.csv"),
            &format!(
                "sampling,timestamp,x,y,z\ns1,1000,0.1,9.8,0.2\ns1,1011,0.2,9.7,0.1\n{extra_acc}"
            ),
        );
        write(
            &d.join("angular_speed.csv"),
            "sampling,timestamp,x,y,z\ns1,1000,0.01,0.02,0.03\ns1,1011,0.0,0.0,0.1\n",
        );
    }

    #[test]
    fn minimal_tree_gives_one_recording_per_kind() {
        let tmp = tempfile::tempdir().unwrap();
        minimal_tree(tmp.path(), 0, "");
        let ds = load_dataset(tmp.path()).unwrap();
        assert_eq!(ds.recordings.len(), 2);
        assert!(ds.report.is_clean(), "{:?}", ds.report);
        assert_eq!(ds.recordings[0].kind, SensorKind::LinearAcceleration);
        assert_eq!(ds.recordings[1].kind, SensorKind::AngularSpeed);
        assert_eq!(ds.recordings[0].subject_id, 1);
        assert_eq!(ds.recordings[0].position, BodyPosition::LeftWrist);
        assert_eq!(ds.recordings[0].samples.len(), 2);
    }

    #[test]
    fn rifle_flag_is_carried_into_activity() {
        let tmp = tempfile::tempdir().unwrap();
        minimal_tree(tmp.path(), 1, "");
        let ds = load_dataset(tmp.path()).unwrap();
        assert_eq!(
            ds.recordings[0].activity,
            ActivityCode::fall(3).with_rifle(true).unwrap()
        );
    }

    #[test]
    fn orphan_rows_are_counted_and_dropped() {
        let tmp = tempfile::tempdir().unwrap();
        minimal_tree(tmp.path(), 0, "s99,1020,1.0,1.0,1.0\n");
        let ds = load_dataset(tmp.path()).unwrap();
        assert_eq!(ds.report.orphan_rows, 1);
        assert_eq!(ds.recordings[0].samples.len(), 2);
    }

    #[test]
    fn malformed_rows_are_reported_with_line_and_skipped() {
        let tmp = tempfile::tempdir().unwrap();
        minimal_tree(tmp.path(), 0, "s1,1020,abc,1.0,1.0\ns1,1030,1.0\n");
        let ds = load_dataset(tmp.path()).unwrap();
        assert_eq!(ds.report.malformed_rows.len(), 2);
        assert_eq!(ds.report.malformed_rows[0].line, 4);
        assert_eq!(ds.report.malformed_rows[1].line, 5);
        assert!(ds.report.malformed_rows[0]
            .file
            .ends_with("acceleration.csv"));
        assert_eq!(ds.recordings[0].samples.len(), 2);
    }

    #[test]
    fn missing_sensor_file_is_an_error() {
        let tmp = tempfile::tempdir().unwrap();
        minimal_tree(tmp.path(), 0, "");
        fs::remove_file(tmp.path().join("1/left/angular_speed.csv")).unwrap();
        match load_dataset(tmp.path()) {
            Err(Error::MissingFile(p)) => assert!(p.ends_with("angular_speed.csv")),
            other => panic!("expected MissingFile, got {other:?}"),
        }
    }

    #[test]
    fn empty_root_is_empty_dataset() {
        let tmp = tempfile::tempdir().unwrap();
        assert!(matches!(
            load_dataset(tmp.path()),
            Err(Error::EmptyDataset(_))
        ));
    }

    #[test]
    fn out_of_order_timestamps_are_sorted() {
        let tmp = tempfile::tempdir().unwrap();
        minimal_tree(tmp.path(), 0, "s1,1005,5.0,5.0,5.0\n");
        let ds = load_dataset(tmp.path()).unwrap();
        let ts: Vec<i64> = ds.recordings[0]
            .samples
            .iter()
            .map(|s| s.timestamp_ms)
            .collect();
        assert_eq!(ts, vec![1000, 1005, 1011]);
        assert_eq!(ds.report.unsorted_recordings, 1);
    }
}
