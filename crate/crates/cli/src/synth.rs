//! Synthetic recording trees and replay feeds.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use falldet_core::detector::{feed_from_recordings, FeedSample};
use falldet_core::ingest::{
    generate_stream, generate_synthetic, write_dataset, StreamSpec, SyntheticSpec,
};

use crate::replay::write_onsets;

/// Writes a recording tree; returns the number of recordings.
pub fn synth_tree(dir: &Path, spec: &SyntheticSpec) -> Result<usize> {
    let recordings = generate_synthetic(spec)?;
    write_dataset(dir, &recordings).with_context(|| format!("writing {}", dir.display()))?;
    Ok(recordings.len())
}

pub fn write_feed(path: &Path, feed: &[FeedSample]) -> Result<()> {
    let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "timestamp_ms,ax,ay,az,gx,gy,gz")?;
    for s in feed {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            s.timestamp_ms, s.acc[0], s.acc[1], s.acc[2], s.gyr[0], s.gyr[1], s.gyr[2]
        )?;
    }
    w.flush()
        .with_context(|| format!("writing {}", path.display()))
}

/// Writes a continuous feed and its fall onsets; returns the sample count.
pub fn synth_feed(feed_path: &Path, onsets_path: &Path, spec: &StreamSpec) -> Result<usize> {
    let stream = generate_stream(spec)?;
    let feed = feed_from_recordings(&stream.acc, &stream.gyr);
    write_feed(feed_path, &feed)?;
    write_onsets(onsets_path, &stream.onsets_s)?;
    Ok(feed.len())
}
