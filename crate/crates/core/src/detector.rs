//! Sliding-window fall detection over a sample feed.
//!
//! Window `k` covers `[t0 + k·step, t0 + k·step + window)` where `t0` is the
//! first sample's timestamp. A window keeps its most recent
//! `samples_per_window` samples, padded by repeating the last one when at
//! least half are present. The online [`StreamDetector`] and the offline
//! [`enumerate_windows`] share one window builder, so both classify
//! bit-identical inputs.

use std::collections::VecDeque;
use std::io::BufRead;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::window_features;
use crate::ingest::{BodyPosition, SensorRecording};
use crate::model::TrainedModel;
use crate::segment::padding_policy;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowConfig {
    pub window_seconds: f64,
    pub step_seconds: f64,
    pub samples_per_window: usize,
}

impl WindowConfig {
    pub fn for_position(position: BodyPosition) -> Self {
        WindowConfig {
            window_seconds: 5.0,
            step_seconds: 1.0,
            samples_per_window: position.window_len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.step_seconds > 0.0
            && self.step_seconds < self.window_seconds
            && self.samples_per_window >= 2;
        if !ok {
            return Err(Error::InvalidSpec(format!("bad window config {self:?}")));
        }
        Ok(())
    }

    fn start_ms(&self, t0: i64, k: usize) -> i64 {
        t0 + (k as f64 * self.step_seconds * 1000.0).round() as i64
    }

    fn end_ms(&self, t0: i64, k: usize) -> i64 {
        self.start_ms(t0, k) + (self.window_seconds * 1000.0).round() as i64
    }

    pub fn window_start_s(&self, k: usize) -> f64 {
        (k as f64 * self.step_seconds * 1000.0).round() / 1000.0
    }
}

/// One synchronized six-axis reading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeedSample {
    pub timestamp_ms: i64,
    pub acc: [f64; 3],
    pub gyr: [f64; 3],
}

/// Pairs accelerometer and gyroscope samples by index over their common
/// prefix, using accelerometer timestamps.
pub fn feed_from_recordings(acc: &SensorRecording, gyr: &SensorRecording) -> Vec<FeedSample> {
    acc.samples
        .iter()
        .zip(&gyr.samples)
        .map(|(a, g)| FeedSample {
            timestamp_ms: a.timestamp_ms,
            acc: [a.x, a.y, a.z],
            gyr: [g.x, g.y, g.z],
        })
        .collect()
}

/// Parses `timestamp_ms, ax, ay, az, gx, gy, gz` lines. Blank lines, `#`
/// comments and a leading header line are skipped.
pub fn parse_feed(reader: impl BufRead) -> Result<Vec<FeedSample>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<feed>", e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line
            .split([',', ' ', '\t'])
            .filter(|f| !f.is_empty())
            .collect();
        if i == 0 && fields.first().is_some_and(|f| f.parse::<f64>().is_err()) {
            continue;
        }
        let bad = |reason: String| Error::MalformedRow {
            file: "<feed>".into(),
            line: i as u64 + 1,
            reason,
        };
        if fields.len() != 7 {
            return Err(bad(format!("expected 7 fields, found {}", fields.len())));
        }
        let timestamp_ms = fields[0]
            .parse::<i64>()
            .map_err(|e| bad(format!("timestamp: {e}")))?;
        let mut v = [0.0; 6];
        for (slot, f) in v.iter_mut().zip(&fields[1..]) {
            *slot = f.parse::<f64>().map_err(|e| bad(format!("{f:?}: {e}")))?;
        }
        out.push(FeedSample {
            timestamp_ms,
            acc: [v[0], v[1], v[2]],
            gyr: [v[3], v[4], v[5]],
        });
    }
    Ok(out)
}

/// A complete window ready for classification.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub index: usize,
    pub start_s: f64,
    pub end_s: f64,
    /// Samples that fell inside the window before padding or truncation.
    pub samples: usize,
    pub acc: [Vec<f64>; 3],
    pub gyr: [Vec<f64>; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DetectorWarning {
    /// No samples at all in the window.
    FeedGap { window: usize, start_s: f64 },
    /// Fewer than half the required samples.
    Sparse {
        window: usize,
        samples: usize,
        needed: usize,
    },
}

fn build_window(
    cfg: &WindowConfig,
    k: usize,
    samples: &[FeedSample],
) -> std::result::Result<Window, DetectorWarning> {
    let start_s = cfg.window_start_s(k);
    let l = cfg.samples_per_window;
    if samples.is_empty() {
        return Err(DetectorWarning::FeedGap { window: k, start_s });
    }
    if samples.len() * 2 < l {
        return Err(DetectorWarning::Sparse {
            window: k,
            samples: samples.len(),
            needed: l.div_ceil(2),
        });
    }
    let recent = &samples[samples.len().saturating_sub(l)..];
    let axis = |f: &dyn Fn(&FeedSample) -> f64| {
        padding_policy(&recent.iter().map(f).collect::<Vec<_>>(), l)
    };
    Ok(Window {
        index: k,
        start_s,
        end_s: start_s + cfg.window_seconds,
        samples: samples.len(),
        acc: [
            axis(&|s| s.acc[0]),
            axis(&|s| s.acc[1]),
            axis(&|s| s.acc[2]),
        ],
        gyr: [
            axis(&|s| s.gyr[0]),
            axis(&|s| s.gyr[1]),
            axis(&|s| s.gyr[2]),
        ],
    })
}

/// Anything that can score a window.
pub trait WindowClassifier {
    fn probability(&self, window: &Window) -> Result<f64>;
    fn threshold(&self) -> f64;
    /// Input length the classifier needs, when it has one.
    fn samples_per_window(&self) -> Option<usize> {
        None
    }
}

impl WindowClassifier for TrainedModel {
    fn probability(&self, window: &Window) -> Result<f64> {
        let pipeline = self
            .pipeline
            .ok_or_else(|| Error::Config("model has no pipeline id".into()))?;
        let acc = [
            window.acc[0].as_slice(),
            window.acc[1].as_slice(),
            window.acc[2].as_slice(),
        ];
        let gyr = [
            window.gyr[0].as_slice(),
            window.gyr[1].as_slice(),
            window.gyr[2].as_slice(),
        ];
        let channels = window_features(pipeline.scenario, pipeline.domain, acc, gyr)?;
        let length = channels[0].len();
        let mut data = channels.concat();
        if let Some(norm) = &self.normalization {
            norm.apply_in_place(&mut data, length);
        }
        self.predict_raw(&data)
    }

    fn threshold(&self) -> f64 {
        self.config.threshold
    }

    fn samples_per_window(&self) -> Option<usize> {
        self.pipeline.map(|p| p.window_len())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowResult {
    pub index: usize,
    pub start_s: f64,
    pub end_s: f64,
    pub samples: usize,
    pub probability: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionEvent {
    pub window_index: usize,
    pub window_start_s: f64,
    pub window_end_s: f64,
    pub probability: f64,
    pub detected_at_s: f64,
    /// Filled in by [`evaluate_stream`] for events matched to a fall.
    pub latency_s: Option<f64>,
}

fn check_classifier(
    cfg: &WindowConfig,
    classifier: &(impl WindowClassifier + ?Sized),
) -> Result<()> {
    cfg.validate()?;
    if let Some(needed) = classifier.samples_per_window() {
        if needed != cfg.samples_per_window {
            return Err(Error::ShapeMismatch {
                expected: format!("{needed} samples per window"),
                found: format!("{} samples per window", cfg.samples_per_window),
            });
        }
    }
    Ok(())
}

/// Online detector: push samples as they arrive, collect window results.
pub struct StreamDetector<'a, C: WindowClassifier + ?Sized> {
    cfg: WindowConfig,
    classifier: &'a C,
    t0: Option<i64>,
    next: usize,
    buffer: VecDeque<FeedSample>,
    last_ts: i64,
    seen: usize,
    warnings: Vec<DetectorWarning>,
}

impl<'a, C: WindowClassifier + ?Sized> StreamDetector<'a, C> {
    pub fn new(cfg: WindowConfig, classifier: &'a C) -> Result<Self> {
        check_classifier(&cfg, classifier)?;
        Ok(StreamDetector {
            cfg,
            classifier,
            t0: None,
            next: 0,
            buffer: VecDeque::new(),
            last_ts: 0,
            seen: 0,
            warnings: Vec::new(),
        })
    }

    fn close_window(&mut self, t0: i64, out: &mut Vec<WindowResult>) -> Result<()> {
        let k = self.next;
        let start = self.cfg.start_ms(t0, k);
        while self.buffer.front().is_some_and(|s| s.timestamp_ms < start) {
            self.buffer.pop_front();
        }
        let samples = self.buffer.make_contiguous();
        match build_window(&self.cfg, k, samples) {
            Ok(w) => out.push(WindowResult {
                index: k,
                start_s: w.start_s,
                end_s: w.end_s,
                samples: w.samples,
                probability: self.classifier.probability(&w)?,
            }),
            Err(warning) => {
                warn!("window {k} skipped: {warning:?}");
                self.warnings.push(warning);
            }
        }
        self.next += 1;
        let next_start = self.cfg.start_ms(t0, self.next);
        while self
            .buffer
            .front()
            .is_some_and(|s| s.timestamp_ms < next_start)
        {
            self.buffer.pop_front();
        }
        Ok(())
    }

    /// Feeds one sample; returns the windows it completed.
    pub fn push(&mut self, sample: FeedSample) -> Result<Vec<WindowResult>> {
        let t0 = *self.t0.get_or_insert(sample.timestamp_ms);
        if self.seen > 0 && sample.timestamp_ms < self.last_ts {
            return Err(Error::InvalidSpec(format!(
                "feed timestamps go backwards ({} after {})",
                sample.timestamp_ms, self.last_ts
            )));
        }
        let mut out = Vec::new();
        while sample.timestamp_ms >= self.cfg.end_ms(t0, self.next) {
            self.close_window(t0, &mut out)?;
        }
        self.buffer.push_back(sample);
        self.last_ts = sample.timestamp_ms;
        self.seen += 1;
        Ok(out)
    }

    /// Closes the windows that end within one sample interval of the last sample.
    pub fn finish(mut self) -> Result<(Vec<WindowResult>, Vec<DetectorWarning>)> {
        let mut out = Vec::new();
        if let Some(t0) = self.t0 {
            let horizon = flush_horizon(t0, self.last_ts, self.seen);
            while (self.cfg.end_ms(t0, self.next) as f64) <= horizon {
                self.close_window(t0, &mut out)?;
            }
        }
        Ok((out, self.warnings))
    }
}

/// Last timestamp plus the mean sample interval, with half a millisecond of
/// slack for timestamps rounded to whole milliseconds.
fn flush_horizon(t0: i64, last: i64, n: usize) -> f64 {
    let dt = if n > 1 {
        (last - t0) as f64 / (n - 1) as f64
    } else {
        0.0
    };
    last as f64 + dt + 0.5
}

/// Offline window enumeration over a whole feed.
pub fn enumerate_windows(
    feed: &[FeedSample],
    cfg: &WindowConfig,
) -> Result<(Vec<Window>, Vec<DetectorWarning>)> {
    cfg.validate()?;
    if feed
        .windows(2)
        .any(|w| w[1].timestamp_ms < w[0].timestamp_ms)
    {
        return Err(Error::InvalidSpec("feed timestamps go backwards".into()));
    }
    let (Some(first), Some(last)) = (feed.first(), feed.last()) else {
        return Ok((Vec::new(), Vec::new()));
    };
    let t0 = first.timestamp_ms;
    let horizon = flush_horizon(t0, last.timestamp_ms, feed.len());
    let (mut windows, mut warnings) = (Vec::new(), Vec::new());
    let mut k = 0;
    while (cfg.end_ms(t0, k) as f64) <= horizon {
        let lo = feed.partition_point(|s| s.timestamp_ms < cfg.start_ms(t0, k));
        let hi = feed.partition_point(|s| s.timestamp_ms < cfg.end_ms(t0, k));
        match build_window(cfg, k, &feed[lo..hi]) {
            Ok(w) => windows.push(w),
            Err(w) => warnings.push(w),
        }
        k += 1;
    }
    Ok((windows, warnings))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamOutput {
    pub windows: Vec<WindowResult>,
    pub events: Vec<DetectionEvent>,
    pub warnings: Vec<DetectorWarning>,
}

fn events_from(windows: &[WindowResult], threshold: f64) -> Vec<DetectionEvent> {
    windows
        .iter()
        .filter(|w| w.probability >= threshold)
        .map(|w| DetectionEvent {
            window_index: w.index,
            window_start_s: w.start_s,
            window_end_s: w.end_s,
            probability: w.probability,
            detected_at_s: w.end_s,
            latency_s: None,
        })
        .collect()
}

/// Runs a whole feed through the online detector.
pub fn stream_detect(
    feed: &[FeedSample],
    classifier: &(impl WindowClassifier + ?Sized),
    cfg: &WindowConfig,
) -> Result<StreamOutput> {
    let mut det = StreamDetector::new(*cfg, classifier)?;
    let mut windows = Vec::new();
    for &s in feed {
        windows.extend(det.push(s)?);
    }
    let (tail, warnings) = det.finish()?;
    windows.extend(tail);
    let events = events_from(&windows, classifier.threshold());
    Ok(StreamOutput {
        windows,
        events,
        warnings,
    })
}

/// Classifies the offline window enumeration of a feed.
pub fn offline_detect(
    feed: &[FeedSample],
    classifier: &(impl WindowClassifier + ?Sized),
    cfg: &WindowConfig,
) -> Result<StreamOutput> {
    check_classifier(cfg, classifier)?;
    let (ws, warnings) = enumerate_windows(feed, cfg)?;
    let windows = ws
        .iter()
        .map(|w| {
            Ok(WindowResult {
                index: w.index,
                start_s: w.start_s,
                end_s: w.end_s,
                samples: w.samples,
                probability: classifier.probability(w)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let events = events_from(&windows, classifier.threshold());
    Ok(StreamOutput {
        windows,
        events,
        warnings,
    })
}

/// Consecutive detections no more than `merge_gap_s` apart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Incident {
    pub first_window_start_s: f64,
    pub first_detected_at_s: f64,
    pub last_detected_at_s: f64,
    pub windows: usize,
    pub max_probability: f64,
}

pub fn merge_incidents(events: &[DetectionEvent], merge_gap_s: f64) -> Vec<Incident> {
    let mut out: Vec<Incident> = Vec::new();
    for e in events {
        match out.last_mut() {
            Some(inc) if e.detected_at_s - inc.last_detected_at_s <= merge_gap_s => {
                inc.last_detected_at_s = e.detected_at_s;
                inc.windows += 1;
                inc.max_probability = inc.max_probability.max(e.probability);
            }
            _ => out.push(Incident {
                first_window_start_s: e.window_start_s,
                first_detected_at_s: e.detected_at_s,
                last_detected_at_s: e.detected_at_s,
                windows: 1,
                max_probability: e.probability,
            }),
        }
    }
    out
}

/// A feed with annotated fall onsets, in seconds from its first sample.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedFeed {
    pub feed: Vec<FeedSample>,
    pub onsets_s: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FallOutcome {
    pub stream: usize,
    pub onset_s: f64,
    pub detected: bool,
    pub first_detection_s: Option<f64>,
    pub latency_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamReport {
    pub falls: Vec<FallOutcome>,
    pub detected: usize,
    pub false_alarms: usize,
    pub windows: usize,
    pub hours: f64,
    pub false_alarms_per_hour: f64,
    pub events: Vec<Vec<DetectionEvent>>,
}

/// A fall counts as detected when some event window overlaps
/// `[onset, onset + window_seconds]`; events overlapping no fall are false alarms.
pub fn evaluate_stream(
    feeds: &[AnnotatedFeed],
    classifier: &(impl WindowClassifier + ?Sized),
    cfg: &WindowConfig,
) -> Result<StreamReport> {
    if feeds.is_empty() || feeds.iter().any(|f| f.onsets_s.is_none()) {
        return Err(Error::NoGroundTruth);
    }
    let mut report = StreamReport {
        falls: Vec::new(),
        detected: 0,
        false_alarms: 0,
        windows: 0,
        hours: 0.0,
        false_alarms_per_hour: 0.0,
        events: Vec::new(),
    };
    for (stream, f) in feeds.iter().enumerate() {
        let onsets = f.onsets_s.as_deref().unwrap_or_default();
        let mut out = stream_detect(&f.feed, classifier, cfg)?;
        report.windows += out.windows.len();
        if let (Some(a), Some(b)) = (f.feed.first(), f.feed.last()) {
            let n = f.feed.len();
            let dt = if n > 1 {
                (b.timestamp_ms - a.timestamp_ms) as f64 / (n - 1) as f64
            } else {
                0.0
            };
            report.hours += ((b.timestamp_ms - a.timestamp_ms) as f64 + dt) / 3_600_000.0;
        }
        let overlaps = |e: &DetectionEvent, onset: f64| {
            e.window_start_s <= onset + cfg.window_seconds && e.window_end_s > onset
        };
        for &onset in onsets {
            let first = out
                .events
                .iter()
                .filter(|e| overlaps(e, onset))
                .map(|e| e.detected_at_s)
                .reduce(f64::min);
            report.falls.push(FallOutcome {
                stream,
                onset_s: onset,
                detected: first.is_some(),
                first_detection_s: first,
                latency_s: first.map(|t| t - onset),
            });
        }
        for e in &mut out.events {
            match onsets
                .iter()
                .copied()
                .filter(|&o| overlaps(e, o))
                .reduce(f64::max)
            {
                Some(onset) => e.latency_s = Some(e.detected_at_s - onset),
                None => report.false_alarms += 1,
            }
        }
        report.events.push(out.events);
    }
    report.detected = report.falls.iter().filter(|f| f.detected).count();
    report.false_alarms_per_hour = if report.hours > 0.0 {
        report.false_alarms as f64 / report.hours
    } else {
        0.0
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Positive iff the window fully contains some `[onset, onset + 5)`.
    struct Oracle(Vec<f64>);

    impl WindowClassifier for Oracle {
        fn probability(&self, w: &Window) -> Result<f64> {
            Ok(
                if self
                    .0
                    .iter()
                    .any(|&o| w.start_s <= o + 1e-9 && o + 5.0 <= w.end_s + 1e-9)
                {
                    1.0
                } else {
                    0.0
                },
            )
        }
        fn threshold(&self) -> f64 {
            0.5
        }
    }

    struct Constant(f64);

    impl WindowClassifier for Constant {
        fn probability(&self, _: &Window) -> Result<f64> {
            Ok(self.0)
        }
        fn threshold(&self) -> f64 {
            0.5
        }
    }

    /// Content-dependent scores so that online/offline comparisons see data.
    struct Energy;

    impl WindowClassifier for Energy {
        fn probability(&self, w: &Window) -> Result<f64> {
            let e: f64 = w
                .acc
                .iter()
                .chain(&w.gyr)
                .flat_map(|c| c.iter())
                .map(|v| v * v)
                .sum();
            Ok(e.sin().abs())
        }
        fn threshold(&self) -> f64 {
            0.7
        }
    }

    fn feed(seconds: f64, rate_hz: f64) -> Vec<FeedSample> {
        let n = (seconds * rate_hz).round() as usize;
        (0..n)
            .map(|i| {
                let t = i as f64 / rate_hz;
                FeedSample {
                    timestamp_ms: (t * 1000.0).round() as i64,
                    acc: [t.sin(), (2.0 * t).cos(), 9.81],
                    gyr: [0.1 * t, 0.0, -(t * 0.3).sin()],
                }
            })
            .collect()
    }

    fn cfg() -> WindowConfig {
        WindowConfig::for_position(BodyPosition::LeftWrist)
    }

    #[test]
    fn window_starts_step_by_one_second() {
        let (ws, warnings) = enumerate_windows(&feed(12.0, 90.0), &cfg()).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(ws.len(), 8);
        for (k, w) in ws.iter().enumerate() {
            assert_eq!(w.start_s, k as f64);
            assert_eq!(w.end_s - w.start_s, 5.0);
            assert_eq!(w.samples, 450);
        }
    }

    #[test]
    fn third_window_catches_onset_at_two_seconds() {
        let out = stream_detect(&feed(30.0, 90.0), &Oracle(vec![2.0]), &cfg()).unwrap();
        let first = out.events.first().unwrap();
        assert_eq!(
            (
                first.window_start_s,
                first.window_end_s,
                first.detected_at_s
            ),
            (2.0, 7.0, 7.0)
        );
        assert_eq!(first.window_index, 2);
    }

    #[test]
    fn two_falls_two_clusters() {
        let out = stream_detect(&feed(40.0, 90.0), &Oracle(vec![2.0, 20.0]), &cfg()).unwrap();
        let incidents = merge_incidents(&out.events, 5.0);
        assert_eq!(incidents.len(), 2);
        assert_eq!(incidents[0].first_detected_at_s, 7.0);
        assert_eq!(incidents[1].first_detected_at_s, 25.0);
    }

    #[test]
    fn quiet_feed_has_no_events() {
        let out = stream_detect(&feed(60.0, 90.0), &Oracle(vec![]), &cfg()).unwrap();
        assert!(out.events.is_empty());
        assert_eq!(out.windows.len(), 56);
    }

    #[test]
    fn online_equals_offline() {
        let mut f = feed(45.0, 93.0);
        // Jitter and a short dropout make window sample counts uneven.
        for (i, s) in f.iter_mut().enumerate() {
            s.timestamp_ms += (i % 7) as i64;
        }
        f.retain(|s| !(20_000..21_500).contains(&s.timestamp_ms));
        let online = stream_detect(&f, &Energy, &cfg()).unwrap();
        let offline = offline_detect(&f, &Energy, &cfg()).unwrap();
        assert_eq!(online.windows.len(), offline.windows.len());
        for (a, b) in online.windows.iter().zip(&offline.windows) {
            assert_eq!(a.index, b.index);
            assert_eq!(a.probability.to_bits(), b.probability.to_bits());
        }
        assert_eq!(online.events, offline.events);
    }

    #[test]
    fn gaps_and_sparse_windows_are_skipped() {
        let mut f = feed(30.0, 90.0);
        f.retain(|s| !(8_000..16_000).contains(&s.timestamp_ms));
        let out = stream_detect(&f, &Constant(0.0), &cfg()).unwrap();
        assert!(out
            .warnings
            .iter()
            .any(|w| matches!(w, DetectorWarning::FeedGap { .. })));
        assert!(out
            .warnings
            .iter()
            .any(|w| matches!(w, DetectorWarning::Sparse { .. })));
        assert_eq!(out.windows.len() + out.warnings.len(), 26);
    }

    #[test]
    fn backwards_time_is_rejected() {
        let mut f = feed(10.0, 90.0);
        f.swap(100, 101);
        assert!(stream_detect(&f, &Constant(0.0), &cfg()).is_err());
        assert!(enumerate_windows(&f, &cfg()).is_err());
    }

    #[test]
    fn window_length_must_match_classifier() {
        struct Needs(usize);
        impl WindowClassifier for Needs {
            fn probability(&self, _: &Window) -> Result<f64> {
                Ok(0.0)
            }
            fn threshold(&self) -> f64 {
                0.5
            }
            fn samples_per_window(&self) -> Option<usize> {
                Some(self.0)
            }
        }
        assert!(matches!(
            stream_detect(&feed(10.0, 90.0), &Needs(1025), &cfg()),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn evaluation_counts() {
        let onsets: Vec<f64> = (0..10).map(|i| 10.0 + 30.0 * i as f64).collect();
        let feeds = [AnnotatedFeed {
            feed: feed(320.0, 90.0),
            onsets_s: Some(onsets.clone()),
        }];
        let r = evaluate_stream(&feeds, &Oracle(onsets), &cfg()).unwrap();
        assert_eq!(r.detected, 10);
        assert_eq!(r.false_alarms, 0);
        assert!(r.falls.iter().all(|f| f.latency_s == Some(5.0)));

        let quiet = [AnnotatedFeed {
            feed: feed(3600.0, 100.0),
            onsets_s: Some(vec![]),
        }];
        let r = evaluate_stream(&quiet, &Constant(1.0), &cfg()).unwrap();
        assert_eq!(r.false_alarms, r.windows);
        assert!((r.hours - 1.0).abs() < 1e-9);
        assert!((r.false_alarms_per_hour - r.windows as f64).abs() < 1e-6);

        let unlabeled = [AnnotatedFeed {
            feed: feed(10.0, 90.0),
            onsets_s: None,
        }];
        assert!(matches!(
            evaluate_stream(&unlabeled, &Constant(1.0), &cfg()),
            Err(Error::NoGroundTruth)
        ));
    }

    #[test]
    fn feed_parsing() {
        let text = "timestamp,ax,ay,az,gx,gy,gz\n0,1,2,3,4,5,6\n\n# note\n5, 1.5, 2, 3, 4, 5, 6\n";
        let f = parse_feed(text.as_bytes()).unwrap();
        assert_eq!(f.len(), 2);
        assert_eq!(f[1].acc[0], 1.5);
        assert!(matches!(
            parse_feed("0,1,2\n".as_bytes()),
            Err(Error::MalformedRow { line: 1, .. })
        ));
    }
}
