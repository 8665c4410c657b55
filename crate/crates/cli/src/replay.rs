//! Replaying recordings or sample feeds through the sliding-window detector.

use std::fs;
use std::io::{BufRead, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use falldet_core::detector::{
    evaluate_stream, feed_from_recordings, merge_incidents, parse_feed, stream_detect,
    AnnotatedFeed, DetectionEvent, DetectorWarning, FeedSample, Incident, WindowConfig,
};
use falldet_core::ingest::{load_dataset, pair_recordings, BodyPosition};
use falldet_core::model::TrainedModel;
use serde::Serialize;

/// One feed to replay, optionally with annotated fall onsets (seconds from
/// its first sample).
#[derive(Debug, Clone, PartialEq)]
pub struct ReplaySource {
    pub name: String,
    pub feed: Vec<FeedSample>,
    pub onsets_s: Option<Vec<f64>>,
}

/// Every acc/gyr trial at `position` under a recording tree.
pub fn sources_from_recordings(root: &Path, position: BodyPosition) -> Result<Vec<ReplaySource>> {
    let loaded = load_dataset(root).with_context(|| format!("loading {}", root.display()))?;
    let (pairs, _) = pair_recordings(&loaded.recordings);
    let sources: Vec<ReplaySource> = pairs
        .iter()
        .filter(|p| p.acc.position == position)
        .map(|p| ReplaySource {
            name: format!("{}/{}", p.acc.subject_id, p.acc.sampling_id),
            feed: feed_from_recordings(p.acc, p.gyr),
            onsets_s: None,
        })
        .collect();
    if sources.is_empty() {
        bail!("no {position} recordings under {}", root.display());
    }
    Ok(sources)
}

pub fn source_from_feed(
    name: &str,
    reader: impl BufRead,
    onsets_s: Option<Vec<f64>>,
) -> Result<ReplaySource> {
    let feed = parse_feed(reader).with_context(|| format!("parsing feed {name}"))?;
    Ok(ReplaySource {
        name: name.to_string(),
        feed,
        onsets_s,
    })
}

/// One onset in seconds per line; blank lines and `#` comments are skipped.
pub fn read_onsets(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.lines()
        .map(str::trim)
        .enumerate()
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(i, l)| {
            l.parse::<f64>()
                .with_context(|| format!("{}:{}: bad onset {l:?}", path.display(), i + 1))
        })
        .collect()
}

pub fn write_onsets(path: &Path, onsets_s: &[f64]) -> Result<()> {
    let mut text = String::from("# fall onsets, seconds from the first sample\n");
    for o in onsets_s {
        text.push_str(&format!("{o}\n"));
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourceSummary {
    pub source: String,
    pub samples: usize,
    pub windows: usize,
    pub events: usize,
    pub incidents: usize,
    pub gap_warnings: usize,
    pub sparse_warnings: usize,
    pub hours: f64,
    pub falls: Option<usize>,
    pub detected: Option<usize>,
    pub false_alarms: Option<usize>,
    pub false_alarms_per_hour: Option<f64>,
    pub mean_latency_s: Option<f64>,
}

#[derive(Serialize)]
struct EventLine<'a> {
    source: &'a str,
    #[serde(flatten)]
    event: &'a DetectionEvent,
}

#[derive(Serialize)]
struct IncidentLine<'a> {
    source: &'a str,
    #[serde(flatten)]
    incident: &'a Incident,
}

fn feed_hours(feed: &[FeedSample]) -> f64 {
    match (feed.first(), feed.last()) {
        (Some(a), Some(b)) => {
            let n = feed.len();
            let dt = if n > 1 {
                (b.timestamp_ms - a.timestamp_ms) as f64 / (n - 1) as f64
            } else {
                0.0
            };
            ((b.timestamp_ms - a.timestamp_ms) as f64 + dt) / 3_600_000.0
        }
        _ => 0.0,
    }
}

/// Streams each source through the model, writing one JSON line per
/// detection to `events` and per merged incident to `incidents`.
pub fn replay(
    model: &TrainedModel,
    sources: &[ReplaySource],
    merge_gap_s: f64,
    events: &mut dyn Write,
    incidents: &mut dyn Write,
) -> Result<Vec<SourceSummary>> {
    let pipeline = model
        .pipeline
        .context("checkpoint does not record its pipeline")?;
    let cfg = WindowConfig::for_position(pipeline.position);
    let mut out = Vec::with_capacity(sources.len());
    for src in sources {
        let detected = stream_detect(&src.feed, model, &cfg)
            .with_context(|| format!("replaying {}", src.name))?;
        let mut summary = SourceSummary {
            source: src.name.clone(),
            samples: src.feed.len(),
            windows: detected.windows.len(),
            events: detected.events.len(),
            incidents: 0,
            gap_warnings: detected
                .warnings
                .iter()
                .filter(|w| matches!(w, DetectorWarning::FeedGap { .. }))
                .count(),
            sparse_warnings: detected
                .warnings
                .iter()
                .filter(|w| matches!(w, DetectorWarning::Sparse { .. }))
                .count(),
            hours: feed_hours(&src.feed),
            falls: None,
            detected: None,
            false_alarms: None,
            false_alarms_per_hour: None,
            mean_latency_s: None,
        };
        let mut emitted = detected.events;
        if let Some(onsets) = &src.onsets_s {
            let annotated = AnnotatedFeed {
                feed: src.feed.clone(),
                onsets_s: Some(onsets.clone()),
            };
            let report = evaluate_stream(std::slice::from_ref(&annotated), model, &cfg)?;
            let latencies: Vec<f64> = report.falls.iter().filter_map(|f| f.latency_s).collect();
            summary.falls = Some(report.falls.len());
            summary.detected = Some(report.detected);
            summary.false_alarms = Some(report.false_alarms);
            summary.false_alarms_per_hour = Some(report.false_alarms_per_hour);
            summary.mean_latency_s = (!latencies.is_empty())
                .then(|| latencies.iter().sum::<f64>() / latencies.len() as f64);
            emitted = report.events.into_iter().next().unwrap_or_default();
        }
        for e in &emitted {
            serde_json::to_writer(
                &mut *events,
                &EventLine {
                    source: &src.name,
                    event: e,
                },
            )?;
            events.write_all(b"\n")?;
        }
        let merged = merge_incidents(&emitted, merge_gap_s);
        summary.incidents = merged.len();
        for inc in &merged {
            serde_json::to_writer(
                &mut *incidents,
                &IncidentLine {
                    source: &src.name,
                    incident: inc,
                },
            )?;
            incidents.write_all(b"\n")?;
        }
        out.push(summary);
    }
    Ok(out)
}
