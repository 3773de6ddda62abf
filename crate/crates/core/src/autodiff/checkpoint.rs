//! Named-tensor container.
//!
//! Layout: the 8-byte magic `RATNCKPT`, a little-endian `u64` index length,
//! the JSON index, then every tensor's data as little-endian `f64` in index
//! order.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{NamedTensors, Tensor};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"RATNCKPT";

#[derive(Serialize, Deserialize)]
struct Index {
    meta: serde_json::Value,
    tensors: Vec<Entry>,
}

#[derive(Serialize, Deserialize)]
struct Entry {
    name: String,
    shape: Vec<usize>,
    offset: usize,
}

/// Serializes `tensors` plus free-form metadata.
pub fn write_checkpoint<W: Write>(mut w: W, tensors: &NamedTensors, meta: &serde_json::Value) -> Result<()> {
    let mut offset = 0;
    let entries = tensors
        .iter()
        .map(|(name, t)| {
            let e = Entry {
                name: name.clone(),
                shape: t.shape().to_vec(),
                offset,
            };
            offset += t.numel();
            e
        })
        .collect();
    let index = serde_json::to_vec(&Index {
        meta: meta.clone(),
        tensors: entries,
    })?;
    w.write_all(MAGIC)?;
    w.write_all(&(index.len() as u64).to_le_bytes())?;
    w.write_all(&index)?;
    for t in tensors.values() {
        for v in t.data() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Reads a checkpoint back, returning the tensors and the metadata.
pub fn read_checkpoint<R: Read>(mut r: R) -> Result<(NamedTensors, serde_json::Value)> {
    let bad = |d: &str| Error::format("checkpoint", d);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(bad("bad magic"));
    }
    let mut len = [0u8; 8];
    r.read_exact(&mut len)?;
    let len = usize::try_from(u64::from_le_bytes(len)).map_err(|_| bad("index too large"))?;
    let mut index = vec![0u8; len];
    r.read_exact(&mut index)?;
    let index: Index = serde_json::from_slice(&index)?;
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    if body.len() % 8 != 0 {
        return Err(bad("truncated data"));
    }
    let values: Vec<f64> = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();

    let mut out = NamedTensors::new();
    for e in index.tensors {
        let n: usize = e.shape.iter().product();
        let data = values
            .get(e.offset..e.offset + n)
            .ok_or_else(|| bad(&format!("tensor {} out of range", e.name)))?;
        out.insert(e.name, Tensor::new(e.shape, data.to_vec())?);
    }
    Ok((out, index.meta))
}

pub fn save_checkpoint(path: &Path, tensors: &NamedTensors, meta: &serde_json::Value) -> Result<()> {
    let f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_checkpoint(f, tensors, meta)
}

pub fn load_checkpoint(path: &Path) -> Result<(NamedTensors, serde_json::Value)> {
    read_checkpoint(std::io::BufReader::new(std::fs::File::open(path)?))
}
