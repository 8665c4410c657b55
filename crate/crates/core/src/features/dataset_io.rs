//! Binary container for a split scenario dataset.
//!
//! Layout: 4-byte magic, `u32` version, `u32` header length, a JSON header,
//! then every example's values as little-endian `f64` in header order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use serde::{Deserialize, Serialize};

use super::{Example, Normalization, PipelineId, Provenance, ScenarioDataset};
use crate::error::{Error, Result};

fn io(path: &Path, e: std::io::Error) -> Error {
    Error::io(path, e)
}

fn format(path: &Path, reason: &str) -> Error {
    Error::format(path, reason)
}

pub const DATASET_MAGIC: &[u8; 4] = b"FDDS";
pub const DATASET_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    pipeline: PipelineId,
    channels: usize,
    length: usize,
    normalization: Normalization,
    warnings: Vec<String>,
    /// (split, label, provenance) per example; split is 0/1/2.
    examples: Vec<(u8, u8, Provenance)>,
}

pub fn write_dataset(path: &Path, ds: &ScenarioDataset) -> Result<()> {
    let splits = [&ds.train[..], &ds.val[..], ds.test_unaudited()];
    let header = Header {
        pipeline: ds.pipeline,
        channels: ds.channels,
        length: ds.length,
        normalization: ds.normalization.clone(),
        warnings: ds.warnings.clone(),
        examples: splits
            .iter()
            .enumerate()
            .flat_map(|(s, xs)| xs.iter().map(move |e| (s as u8, e.label, e.provenance)))
            .collect(),
    };
    let json = serde_json::to_vec(&header)?;
    let file = File::create(path).map_err(|e| io(path, e))?;
    let mut w = BufWriter::new(file);
    let result: std::io::Result<()> = (|| {
        w.write_all(DATASET_MAGIC)?;
        w.write_u32::<LittleEndian>(DATASET_VERSION)?;
        w.write_u32::<LittleEndian>(json.len() as u32)?;
        w.write_all(&json)?;
        for e in splits.iter().flat_map(|xs| xs.iter()) {
            for &v in &e.data {
                w.write_f64::<LittleEndian>(v)?;
            }
        }
        w.flush()
    })();
    result.map_err(|e| io(path, e))
}

pub fn read_dataset(path: &Path) -> Result<ScenarioDataset> {
    let file = File::open(path).map_err(|e| io(path, e))?;
    let mut r = BufReader::new(file);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| format(path, "truncated header"))?;
    if &magic != DATASET_MAGIC {
        return Err(format(path, "not a dataset file"));
    }
    let version = r
        .read_u32::<LittleEndian>()
        .map_err(|_| format(path, "truncated header"))?;
    if version != DATASET_VERSION {
        return Err(format(path, &format!("unsupported version {version}")));
    }
    let len = r
        .read_u32::<LittleEndian>()
        .map_err(|_| format(path, "truncated header"))? as usize;
    let mut json = vec![0u8; len];
    r.read_exact(&mut json)
        .map_err(|_| format(path, "truncated header"))?;
    let header: Header = serde_json::from_slice(&json)?;
    let stride = header.channels * header.length;
    let mut splits: [Vec<Example>; 3] = Default::default();
    for (split, label, provenance) in header.examples {
        let mut data = vec![0.0; stride];
        r.read_f64_into::<LittleEndian>(&mut data)
            .map_err(|_| format(path, "truncated data"))?;
        let slot = splits
            .get_mut(split as usize)
            .ok_or_else(|| format(path, "bad split index"))?;
        slot.push(Example {
            channels: header.channels,
            length: header.length,
            data,
            label,
            provenance,
        });
    }
    let [train, val, test] = splits;
    let mut ds =
        ScenarioDataset::from_parts(header.pipeline, train, val, test, header.normalization)?;
    ds.warnings = header.warnings;
    Ok(ds)
}

/// One row per example: split, label, subject, activity, then the values.
pub fn export_csv(path: &Path, ds: &ScenarioDataset) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(err) => io(path, err),
        other => Error::Config(format!("{other:?}")),
    })?;
    let mut head = vec![
        "split".to_string(),
        "label".into(),
        "subject".into(),
        "activity".into(),
    ];
    for c in 0..ds.channels {
        for i in 0..ds.length {
            head.push(format!("c{c}_{i}"));
        }
    }
    w.write_record(&head)?;
    for (name, xs) in [
        ("train", &ds.train[..]),
        ("val", &ds.val[..]),
        ("test", ds.test_unaudited()),
    ] {
        for e in xs {
            let mut row = vec![
                name.to_string(),
                e.label.to_string(),
                e.provenance.subject_id.to_string(),
                e.provenance.activity.to_string(),
            ];
            row.extend(e.data.iter().map(|v| v.to_string()));
            w.write_record(&row)?;
        }
    }
    w.flush().map_err(|e| io(path, e))
}
