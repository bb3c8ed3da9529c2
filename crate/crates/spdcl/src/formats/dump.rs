//! Binary embedding dump.
//!
//! ```text
//! magic "SPDCLEMB" | version u32 | sample count u64
//! per sample: id length u32 | id bytes (UTF-8) | rows u32 | cols u32 | rows·cols f32
//! ```
//! All integers and floats are little-endian; matrices are row-major.

use std::path::Path;

use spdcl_core::EmbeddingMatrix;

use crate::error::{Error, Result};
use crate::fsutil::{read_bytes, write_atomic};

pub const DUMP_MAGIC: &[u8; 8] = b"SPDCLEMB";
pub const DUMP_VERSION: u32 = 1;

pub fn encode_dump(dump: &[EmbeddingMatrix]) -> Vec<u8> {
    let payload: usize = dump
        .iter()
        .map(|m| 12 + m.sample_id().len() + 4 * m.values().len())
        .sum();
    let mut out = Vec::with_capacity(20 + payload);
    out.extend_from_slice(DUMP_MAGIC);
    out.extend_from_slice(&DUMP_VERSION.to_le_bytes());
    out.extend_from_slice(&(dump.len() as u64).to_le_bytes());
    for m in dump {
        let id = m.sample_id().as_bytes();
        out.extend_from_slice(&(id.len() as u32).to_le_bytes());
        out.extend_from_slice(id);
        out.extend_from_slice(&(m.rows() as u32).to_le_bytes());
        out.extend_from_slice(&(m.cols() as u32).to_le_bytes());
        for &v in m.values() {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8], String> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&end| end <= self.bytes.len())
            .ok_or_else(|| format!("truncated while reading {what} at byte {}", self.pos))?;
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u32(&mut self, what: &str) -> Result<u32, String> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64, String> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}

pub fn decode_dump(bytes: &[u8]) -> Result<Vec<EmbeddingMatrix>, String> {
    let mut c = Cursor { bytes, pos: 0 };
    if c.take(8, "magic")? != DUMP_MAGIC {
        return Err("bad magic, not an embedding dump".into());
    }
    let version = c.u32("version")?;
    if version != DUMP_VERSION {
        return Err(format!("unsupported dump version {version}"));
    }
    let count = c.u64("sample count")?;
    // Each sample takes at least 16 bytes, so a larger count cannot be honest.
    if count > (bytes.len() as u64) / 16 {
        return Err(format!("declared {count} samples exceed the file size"));
    }
    let mut dump = Vec::with_capacity(count as usize);
    for i in 0..count {
        let id_len = c.u32("id length")? as usize;
        let id = std::str::from_utf8(c.take(id_len, "sample id")?)
            .map_err(|_| format!("sample {i} id is not UTF-8"))?
            .to_owned();
        let rows = c.u32("rows")? as usize;
        let cols = c.u32("cols")? as usize;
        let n = rows
            .checked_mul(cols)
            .and_then(|n| n.checked_mul(4))
            .ok_or_else(|| format!("sample `{id}` shape {rows}x{cols} overflows"))?;
        let raw = c.take(n, "matrix values")?;
        let values = raw
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64)
            .collect();
        dump.push(EmbeddingMatrix::new(id, rows, cols, values).map_err(|e| e.to_string())?);
    }
    if c.pos != bytes.len() {
        return Err(format!(
            "{} trailing bytes after {count} samples",
            bytes.len() - c.pos
        ));
    }
    Ok(dump)
}

pub fn write_dump(path: &Path, dump: &[EmbeddingMatrix]) -> Result<()> {
    write_atomic(path, &encode_dump(dump))
}

pub fn read_dump(path: &Path) -> Result<Vec<EmbeddingMatrix>> {
    decode_dump(&read_bytes(path)?).map_err(|m| Error::format(path, m))
}
