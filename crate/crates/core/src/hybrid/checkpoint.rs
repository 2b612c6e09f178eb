//! Binary checkpoint container.
//!
//! ```text
//! "QGCM" | version u32 | block count u32 | per block: rank u32, dims u32×rank
//! | f64 LE values of every block, in order
//! | config length u64 | config JSON (UTF-8)
//! ```
//! All integers little-endian. The JSON holds the [`ModelConfig`].

use std::path::Path;

use super::model::{HybridModel, ModelConfig};
use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"QGCM";
pub const VERSION: u32 = 1;

pub fn to_bytes(model: &HybridModel) -> Result<Vec<u8>> {
    let blocks = model.blocks();
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(blocks.len() as u32).to_le_bytes());
    for b in &blocks {
        out.extend_from_slice(&(b.dims.len() as u32).to_le_bytes());
        for &d in &b.dims {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
    }
    for b in &blocks {
        for v in b.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    let json = serde_json::to_vec(&model.config())?;
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    Ok(out)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let Some(end) = end else {
            return Err(Error::Checkpoint(format!("truncated while reading {what}")));
        };
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().expect("8 bytes")))
    }
}

pub fn from_bytes(bytes: &[u8]) -> Result<HybridModel> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4, "magic")? != MAGIC {
        return Err(Error::Checkpoint("not a checkpoint (bad magic)".into()));
    }
    let version = r.u32("version")?;
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}, expected {VERSION}")));
    }
    let count = r.u32("block count")? as usize;
    let mut dims = Vec::with_capacity(count.min(1024));
    for _ in 0..count {
        let rank = r.u32("block rank")? as usize;
        let d = (0..rank).map(|_| r.u32("block dims").map(|v| v as usize)).collect::<Result<Vec<_>>>()?;
        dims.push(d);
    }
    let mut values = Vec::with_capacity(count.min(1024));
    for d in &dims {
        let len: usize = d.iter().product();
        let raw = r.take(len.checked_mul(8).ok_or_else(|| Error::Checkpoint("block too large".into()))?, "weights")?;
        values.push(raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect::<Vec<_>>());
    }
    let json_len = r.u64("config length")? as usize;
    let config: ModelConfig = serde_json::from_slice(r.take(json_len, "config")?)
        .map_err(|e| Error::Checkpoint(format!("config JSON: {e}")))?;
    if r.pos != bytes.len() {
        return Err(Error::Checkpoint(format!("{} trailing bytes", bytes.len() - r.pos)));
    }

    let mut model = HybridModel::new(&config, 0).map_err(|e| Error::Checkpoint(format!("config: {e}")))?;
    let expected: Vec<Vec<usize>> = model.blocks().iter().map(|b| b.dims.clone()).collect();
    if expected != dims {
        return Err(Error::Checkpoint(format!("dimension table {dims:?} does not match config {expected:?}")));
    }
    for (dst, src) in model.blocks_mut().into_iter().zip(values) {
        dst.copy_from_slice(&src);
    }
    Ok(model)
}

pub fn save(model: &HybridModel, path: &Path) -> Result<()> {
    std::fs::write(path, to_bytes(model)?).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<HybridModel> {
    from_bytes(&std::fs::read(path).map_err(|e| Error::io(path, e))?)
}
