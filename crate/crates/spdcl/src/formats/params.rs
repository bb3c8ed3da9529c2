//! Flat parameter dump.
//!
//! ```text
//! magic "SPDCLPRM" | version u32 | task u8 (0 multiclass, 1 multilabel)
//! vocab u32 | dim u32 | labels u32 | embedding, head weights, head bias as f64
//! ```
//! Little-endian throughout.

use std::path::Path;

use spdcl_core::{ModelParams, TaskKind};

use crate::error::{Error, Result};
use crate::fsutil::{read_bytes, write_atomic};

pub const PARAMS_MAGIC: &[u8; 8] = b"SPDCLPRM";
const PARAMS_VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 1 + 12;

pub fn encode_params(p: &ModelParams) -> Vec<u8> {
    let mut out = Vec::with_capacity(
        HEADER_LEN + 8 * (p.embedding.len() + p.head_weights.len() + p.n_labels),
    );
    out.extend_from_slice(PARAMS_MAGIC);
    out.extend_from_slice(&PARAMS_VERSION.to_le_bytes());
    out.push(match p.task {
        TaskKind::Multiclass => 0,
        TaskKind::Multilabel => 1,
    });
    for n in [p.vocab_size, p.dim, p.n_labels] {
        out.extend_from_slice(&(n as u32).to_le_bytes());
    }
    for v in p
        .embedding
        .iter()
        .chain(&p.head_weights)
        .chain(&p.head_bias)
    {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_params(bytes: &[u8]) -> Result<ModelParams, String> {
    if bytes.len() < HEADER_LEN || &bytes[..8] != PARAMS_MAGIC {
        return Err("not a parameter file".into());
    }
    let u32_at = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as usize;
    if u32_at(8) as u32 != PARAMS_VERSION {
        return Err(format!("unsupported parameter file version {}", u32_at(8)));
    }
    let task = match bytes[12] {
        0 => TaskKind::Multiclass,
        1 => TaskKind::Multilabel,
        other => return Err(format!("unknown task byte {other}")),
    };
    let (vocab, dim, labels) = (u32_at(13), u32_at(17), u32_at(21));
    let mut p = ModelParams::zeros(task, vocab, dim, labels).map_err(|e| e.to_string())?;
    let expected = HEADER_LEN + 8 * (p.embedding.len() + p.head_weights.len() + p.head_bias.len());
    if bytes.len() != expected {
        return Err(format!("expected {expected} bytes, found {}", bytes.len()));
    }
    let mut values = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().unwrap()));
    for v in p
        .embedding
        .iter_mut()
        .chain(p.head_weights.iter_mut())
        .chain(p.head_bias.iter_mut())
    {
        *v = values.next().unwrap();
    }
    Ok(p)
}

pub fn write_params(path: &Path, params: &ModelParams) -> Result<()> {
    write_atomic(path, &encode_params(params))
}

pub fn read_params(path: &Path) -> Result<ModelParams> {
    decode_params(&read_bytes(path)?).map_err(|m| Error::format(path, m))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let p = ModelParams::init(TaskKind::Multilabel, 7, 3, 4, 11).unwrap();
        let bytes = encode_params(&p);
        assert_eq!(decode_params(&bytes).unwrap(), p);
        assert!(decode_params(&bytes[..bytes.len() - 8]).is_err());
        let mut bad = bytes;
        bad[12] = 7;
        assert!(decode_params(&bad).is_err());
    }
}
