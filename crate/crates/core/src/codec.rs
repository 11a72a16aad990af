//! Little-endian byte helpers shared by the checkpoint and dataset formats.
//! Both formats end with a 64-bit FNV-1a checksum of every preceding byte.

use std::hash::Hasher;

use fnv::FnvHasher;

use crate::error::{Error, Result};

pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = FnvHasher::default();
    h.write(bytes);
    h.finish()
}

pub(crate) fn seal(mut buf: Vec<u8>) -> Vec<u8> {
    let sum = fnv1a(&buf);
    buf.extend_from_slice(&sum.to_le_bytes());
    buf
}

/// Checks magic, version and trailing checksum; returns the body between
/// the version byte and the checksum.
pub(crate) fn open<'a>(bytes: &'a [u8], magic: &[u8; 4], version: u8) -> Result<&'a [u8]> {
    if bytes.len() < 4 || &bytes[..4] != magic {
        return Err(Error::format(
            "magic",
            format!("expected {:?}", String::from_utf8_lossy(magic)),
        ));
    }
    let found = *bytes
        .get(4)
        .ok_or_else(|| Error::format("version", "file ends before the version byte"))?;
    if found != version {
        return Err(Error::UnsupportedVersion {
            found,
            expected: version,
        });
    }
    if bytes.len() < 13 {
        return Err(Error::format(
            "checksum",
            "file too short to hold a checksum",
        ));
    }
    let (body, tail) = bytes.split_at(bytes.len() - 8);
    let stored = u64::from_le_bytes(tail.try_into().expect("8 bytes"));
    if fnv1a(body) != stored {
        return Err(Error::format(
            "checksum",
            "stored checksum does not match contents",
        ));
    }
    Ok(&body[5..])
}

pub(crate) struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub(crate) fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    pub(crate) fn take(&mut self, n: usize, field: &str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::format(field, "unexpected end of data"));
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    pub(crate) fn u8(&mut self, field: &str) -> Result<u8> {
        Ok(self.take(1, field)?[0])
    }

    pub(crate) fn u16(&mut self, field: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(
            self.take(2, field)?.try_into().expect("2 bytes"),
        ))
    }

    pub(crate) fn u32(&mut self, field: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(
            self.take(4, field)?.try_into().expect("4 bytes"),
        ))
    }

    pub(crate) fn f64s(&mut self, n: usize, field: &str) -> Result<Vec<f64>> {
        let raw = self.take(
            n.checked_mul(8)
                .ok_or_else(|| Error::format(field, "length overflow"))?,
            field,
        )?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }

    pub(crate) fn is_empty(&self) -> bool {
        self.pos == self.bytes.len()
    }
}

pub(crate) fn put_f64s(buf: &mut Vec<u8>, values: impl IntoIterator<Item = f64>) {
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
}
