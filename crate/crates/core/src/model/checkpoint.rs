//! Checkpoint file: 4-byte magic, `u32` version, `u32` header length, JSON
//! header, then the parameters as little-endian `f64`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use serde::{Deserialize, Serialize};

use super::{build, Cnn1dConfig, TrainHistory, TrainedModel};
use crate::error::{Error, Result};
use crate::features::{Normalization, PipelineId};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"FDCK";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    config: Cnn1dConfig,
    channels: usize,
    length: usize,
    parameters: usize,
    pipeline: Option<PipelineId>,
    normalization: Option<Normalization>,
    history: TrainHistory,
}

pub fn save_checkpoint(path: &Path, model: &TrainedModel) -> Result<()> {
    let header = Header {
        config: model.config,
        channels: model.channels,
        length: model.length,
        parameters: model.parameters().len(),
        pipeline: model.pipeline,
        normalization: model.normalization.clone(),
        history: model.history.clone(),
    };
    let json = serde_json::to_vec(&header)?;
    let write = || -> std::io::Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(CHECKPOINT_MAGIC)?;
        w.write_u32::<LittleEndian>(CHECKPOINT_VERSION)?;
        w.write_u32::<LittleEndian>(json.len() as u32)?;
        w.write_all(&json)?;
        for &p in model.parameters() {
            w.write_f64::<LittleEndian>(p)?;
        }
        w.flush()
    };
    write().map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<TrainedModel> {
    let mut r = BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?);
    let truncated = |_| Error::format(path, "truncated checkpoint");
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(truncated)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(Error::format(path, "not a checkpoint"));
    }
    let version = r.read_u32::<LittleEndian>().map_err(truncated)?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::format(
            path,
            format!("unsupported checkpoint version {version}"),
        ));
    }
    let len = r.read_u32::<LittleEndian>().map_err(truncated)? as usize;
    let mut json = vec![0u8; len];
    r.read_exact(&mut json).map_err(truncated)?;
    let header: Header = serde_json::from_slice(&json)?;
    header.config.validate()?;

    let mut model = build(header.config, header.channels, header.length, 0)?;
    if header.parameters != model.parameters().len() {
        return Err(Error::format(
            path,
            "parameter count does not match the configuration",
        ));
    }
    let mut params = vec![0.0; header.parameters];
    r.read_f64_into::<LittleEndian>(&mut params)
        .map_err(truncated)?;
    let mut rest = Vec::new();
    r.read_to_end(&mut rest).map_err(|e| Error::io(path, e))?;
    if !rest.is_empty() {
        return Err(Error::format(path, "trailing bytes after parameters"));
    }
    model
        .set_parameters(params)
        .map_err(|_| Error::format(path, "non-finite parameter"))?;
    model.pipeline = header.pipeline;
    model.normalization = header.normalization;
    model.history = header.history;
    Ok(model)
}
