//! Checkpoint file layout:
//!
//! ```text
//! "TFNM" | version u8 (=1) | variant tag u8
//! per tensor: rank u32 | dims u32 × rank | values f64 × Π dims (row-major)
//! FNV-1a 64 checksum of all preceding bytes
//! ```
//!
//! All integers and floats are little-endian. Tensors follow
//! [`ModelParams::layers`] order with each layer's weight matrix (rank 2)
//! before its bias vector (rank 1).

use std::fs;
use std::path::Path;

use super::params::{Dense, EmbedNet, Head, HeadNet, ModelParams, DEFAULT_DROPOUT};
use super::ModelVariant;
use crate::codec::{self, Reader};
use crate::error::{Error, Result};
use crate::numkit::{Matrix, Scalar, Vector};

const MAGIC: &[u8; 4] = b"TFNM";
pub const CHECKPOINT_VERSION: u8 = 1;

pub fn encode_params<T: Scalar>(params: &ModelParams<T>) -> Vec<u8> {
    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.push(CHECKPOINT_VERSION);
    buf.push(params.variant.tag());
    for layer in params.layers() {
        let (r, c) = layer.w.shape();
        for d in [2u32, r as u32, c as u32] {
            buf.extend_from_slice(&d.to_le_bytes());
        }
        codec::put_f64s(&mut buf, layer.w.as_slice().iter().map(|v| v.as_f64()));
        for d in [1u32, layer.b.len() as u32] {
            buf.extend_from_slice(&d.to_le_bytes());
        }
        codec::put_f64s(&mut buf, layer.b.iter().map(|v| v.as_f64()));
    }
    codec::seal(buf)
}

pub fn decode_params<T: Scalar>(bytes: &[u8]) -> Result<ModelParams<T>> {
    let body = codec::open(bytes, MAGIC, CHECKPOINT_VERSION)?;
    let mut r = Reader::new(body);
    let tag = r.u8("variant")?;
    let variant = ModelVariant::from_tag(tag)
        .ok_or_else(|| Error::format("variant", format!("unknown variant tag {tag}")))?;

    let mut next = |name: &str| -> Result<Dense<T>> {
        let w = read_tensor(&mut r, &format!("{name}.w"), 2)?;
        let b = read_tensor(&mut r, &format!("{name}.b"), 1)?;
        let (dims, values) = w;
        let w = Matrix::from_vec(dims[0], dims[1], values.into_iter().map(T::of).collect())?;
        let b = Vector::new(b.1.into_iter().map(T::of).collect());
        Ok(Dense { w, b })
    };
    let mut embed = |name: &str| -> Result<EmbedNet<T>> {
        Ok(EmbedNet {
            l1: next(&format!("{name}.l1"))?,
            l2: next(&format!("{name}.l2"))?,
        })
    };
    let video_embed = variant
        .uses_video_embed()
        .then(|| embed("video_embed"))
        .transpose()?;
    let audio_embed = variant
        .uses_audio_embed()
        .then(|| embed("audio_embed"))
        .transpose()?;
    let mut head = |name: &str| -> Result<HeadNet<T>> {
        Ok(HeadNet {
            l1: next(&format!("{name}.l1"))?,
            l2: next(&format!("{name}.l2"))?,
            l3: next(&format!("{name}.l3"))?,
            dropout_p: DEFAULT_DROPOUT,
        })
    };
    let head = if variant == ModelVariant::LateFusion {
        Head::Late {
            video: head("video_head")?,
            audio: head("audio_head")?,
        }
    } else {
        Head::Single(head("head")?)
    };
    if !r.is_empty() {
        return Err(Error::format(
            "trailer",
            "unexpected bytes after the last tensor",
        ));
    }
    let params = ModelParams {
        variant,
        video_embed,
        audio_embed,
        head,
        init_seed: 0,
    };
    params
        .validate()
        .map_err(|e| Error::format("shape", e.to_string()))?;
    Ok(params)
}

fn read_tensor(r: &mut Reader<'_>, field: &str, rank: u32) -> Result<(Vec<usize>, Vec<f64>)> {
    let found = r.u32(field)?;
    if found != rank {
        return Err(Error::format(
            field,
            format!("rank {found}, expected {rank}"),
        ));
    }
    let dims = (0..rank)
        .map(|_| r.u32(field).map(|d| d as usize))
        .collect::<Result<Vec<_>>>()?;
    let count = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::format(field, "shape overflow"))?;
    let values = r.f64s(count, field)?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::format(field, "non-finite value"));
    }
    Ok((dims, values))
}

pub fn save_params<T: Scalar>(params: &ModelParams<T>, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_params(params))?;
    Ok(())
}

pub fn load_params<T: Scalar>(path: impl AsRef<Path>) -> Result<ModelParams<T>> {
    decode_params(&fs::read(path)?)
}
