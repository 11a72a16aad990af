//! Dataset files.
//!
//! Binary layout (little-endian):
//!
//! ```text
//! "TFND" | version u8 (=1) | record count u32
//! per record: id length u16 | id UTF-8 | 768 f64 video | 768 f64 audio | label u8
//! FNV-1a 64 checksum of all preceding bytes
//! ```
//!
//! JSONL: one `{"id": "...", "video": [...], "audio": [...], "label": 0|1}`
//! object per line.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::record::{Dataset, FeatureRecord, Label, FEATURE_DIM};
use crate::codec::{self, Reader};
use crate::error::{Error, Result};
use crate::numkit::Vector;

const MAGIC: &[u8; 4] = b"TFND";
pub const DATASET_VERSION: u8 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataFormat {
    Binary,
    Jsonl,
}

impl FromStr for DataFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" | "bin" => Ok(DataFormat::Binary),
            "jsonl" => Ok(DataFormat::Jsonl),
            other => Err(Error::Configuration(format!(
                "unknown dataset format '{other}'; expected binary or jsonl"
            ))),
        }
    }
}

pub fn encode_binary(ds: &Dataset) -> Result<Vec<u8>> {
    if ds.feature_dim() != FEATURE_DIM {
        return Err(Error::dim(format!(
            "binary datasets hold {FEATURE_DIM} features per modality, dataset has {}",
            ds.feature_dim()
        )));
    }
    ds.validate()?;
    let count = u32::try_from(ds.len()).map_err(|_| Error::Input("too many records".into()))?;
    let mut buf = Vec::with_capacity(13 + ds.len() * (2 * FEATURE_DIM * 8 + 16));
    buf.extend_from_slice(MAGIC);
    buf.push(DATASET_VERSION);
    buf.extend_from_slice(&count.to_le_bytes());
    for r in &ds.records {
        let id_len = u16::try_from(r.id.len())
            .map_err(|_| Error::Input(format!("id '{}…' longer than 65535 bytes", &r.id[..16])))?;
        buf.extend_from_slice(&id_len.to_le_bytes());
        buf.extend_from_slice(r.id.as_bytes());
        codec::put_f64s(&mut buf, r.video.iter().copied());
        codec::put_f64s(&mut buf, r.audio.iter().copied());
        buf.push(r.label.into());
    }
    Ok(codec::seal(buf))
}

pub fn decode_binary(bytes: &[u8]) -> Result<Dataset> {
    let body = codec::open(bytes, MAGIC, DATASET_VERSION)?;
    let mut r = Reader::new(body);
    let count = r.u32("record count")? as usize;
    let mut records = Vec::with_capacity(count.min(1 << 20));
    for k in 0..count {
        let field = format!("record {k}");
        let id_len = r.u16(&field)? as usize;
        let id = String::from_utf8(r.take(id_len, &field)?.to_vec())
            .map_err(|_| Error::format(&field, "id is not UTF-8"))?;
        let video = Vector::new(r.f64s(FEATURE_DIM, &field)?);
        let audio = Vector::new(r.f64s(FEATURE_DIM, &field)?);
        let label = Label::try_from(r.u8(&field)?).map_err(|e| Error::format(&field, e))?;
        records.push(FeatureRecord {
            id,
            video,
            audio,
            label,
        });
    }
    if !r.is_empty() {
        return Err(Error::format(
            "trailer",
            "unexpected bytes after the last record",
        ));
    }
    Dataset::new(records, "binary file")
}

pub fn encode_jsonl(ds: &Dataset) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    for r in &ds.records {
        serde_json::to_writer(&mut buf, r).map_err(|e| Error::Input(e.to_string()))?;
        buf.push(b'\n');
    }
    Ok(buf)
}

/// Parses one JSONL record; `line` is 1-based and only used in errors.
pub fn parse_jsonl_record(text: &str, line: usize) -> Result<FeatureRecord> {
    serde_json::from_str(text).map_err(|e| Error::format(format!("line {line}"), e.to_string()))
}

pub fn decode_jsonl(text: &str) -> Result<Dataset> {
    let mut records = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        records.push(parse_jsonl_record(line, n + 1)?);
    }
    Dataset::new(records, "jsonl file")
}

pub fn save_dataset(ds: &Dataset, path: impl AsRef<Path>, format: DataFormat) -> Result<()> {
    let bytes = match format {
        DataFormat::Binary => encode_binary(ds)?,
        DataFormat::Jsonl => encode_jsonl(ds)?,
    };
    let mut f = fs::File::create(path)?;
    f.write_all(&bytes)?;
    Ok(())
}

/// Loads either format, recognising binary files by their magic bytes.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let bytes = fs::read(path.as_ref())?;
    let mut ds = if bytes.starts_with(MAGIC) {
        decode_binary(&bytes)?
    } else {
        let text = std::str::from_utf8(&bytes).map_err(|_| Error::format("file", "not UTF-8"))?;
        decode_jsonl(text)?
    };
    ds.provenance = format!("{} ({})", ds.provenance, path.as_ref().display());
    Ok(ds)
}
