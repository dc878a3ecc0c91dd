//! Binary persistence of [`GreenTable`] contents.
//!
//! Layout, all little-endian:
//!
//! ```text
//! magic      8 bytes  "BRWGREEN"
//! version    u32      1
//! law hash   u64      StepLaw::fingerprint
//! lambda     f64
//! resolution u32      heat-kernel grid nodes per unit of log time
//! dim        u32
//! entries    u64
//! records    entries x (dim x i32 canonical point, f64 value), sorted by point
//! ```

use std::io::{Read, Write};
use std::path::Path;

use super::{GreenError, GreenFunction, GreenTable};
use crate::point::Point;

const MAGIC: &[u8; 8] = b"BRWGREEN";
const VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CacheHeader {
    pub law_hash: u64,
    pub lambda: f64,
    pub resolution: u32,
    pub dim: u32,
    pub entries: u64,
}

pub fn write_cache(path: &Path, table: &GreenTable) -> Result<(), GreenError> {
    let io = |e: std::io::Error| GreenError::Cache(e.to_string());
    let h = table.header();
    let mut buf = Vec::with_capacity(40 + h.entries as usize * (4 * h.dim as usize + 8));
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&h.law_hash.to_le_bytes());
    buf.extend_from_slice(&h.lambda.to_le_bytes());
    buf.extend_from_slice(&h.resolution.to_le_bytes());
    buf.extend_from_slice(&h.dim.to_le_bytes());
    buf.extend_from_slice(&h.entries.to_le_bytes());
    for (k, v) in table.entries() {
        for c in k.coords(h.dim as usize) {
            buf.extend_from_slice(&c.to_le_bytes());
        }
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let mut f = std::fs::File::create(path).map_err(io)?;
    f.write_all(&buf).map_err(io)
}

/// Loads a cache written for the same law and `lambda` as `func`.
pub fn read_cache(path: &Path, func: GreenFunction) -> Result<GreenTable, GreenError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| GreenError::Cache(e.to_string()))?;
    let mut r = Reader { bytes: &bytes, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err(GreenError::Cache("bad magic".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(GreenError::Cache(format!("unsupported version {version}")));
    }
    let header = CacheHeader {
        law_hash: r.u64()?,
        lambda: f64::from_bits(r.u64()?),
        resolution: r.u32()?,
        dim: r.u32()?,
        entries: r.u64()?,
    };
    if header.law_hash != func.kernel().fingerprint() {
        return Err(GreenError::Cache("cache was written for a different step law".into()));
    }
    if header.lambda != func.lambda() {
        return Err(GreenError::Cache(format!("cache lambda {} differs from {}", header.lambda, func.lambda())));
    }
    let dim = header.dim as usize;
    let mut table = GreenTable::new(func);
    let mut entries = Vec::with_capacity(header.entries as usize);
    for _ in 0..header.entries {
        let mut p = Point::ORIGIN;
        for k in 0..dim {
            p.0[k] = r.u32()? as i32;
        }
        entries.push((p, f64::from_bits(r.u64()?)));
    }
    if r.pos != bytes.len() {
        return Err(GreenError::Cache("trailing bytes".into()));
    }
    table.insert_entries(entries);
    Ok(table)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], GreenError> {
        let end = self.pos + n;
        if end > self.bytes.len() {
            return Err(GreenError::Cache("truncated file".into()));
        }
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, GreenError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, GreenError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}
