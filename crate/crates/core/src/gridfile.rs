//! Binary container for gridded data.
//!
//! Layout, all integers and floats little-endian unless the flag says
//! otherwise:
//!
//! ```text
//! "WGRD1"            5 bytes
//! endian flag        u8   (0 = little, 1 = big)
//! rank               u32
//! dims               rank × u64
//! axes               dims[0] + … + dims[rank−1] f64
//! payload            dims[0]·…·dims[rank−1] f64, row-major
//! metadata length    u64
//! metadata           UTF-8 JSON object of string values
//! ```

use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

pub const MAGIC: &[u8; 5] = b"WGRD1";

#[derive(Debug, Clone, PartialEq)]
pub struct GridFile {
    pub dims: Vec<usize>,
    pub axes: Vec<Vec<f64>>,
    pub payload: Vec<f64>,
    pub metadata: BTreeMap<String, String>,
}

impl GridFile {
    pub fn new(
        axes: Vec<Vec<f64>>,
        payload: Vec<f64>,
        metadata: BTreeMap<String, String>,
    ) -> Result<Self> {
        let dims: Vec<usize> = axes.iter().map(Vec::len).collect();
        let cells: usize = dims.iter().product();
        if axes.is_empty() || cells != payload.len() {
            return Err(Error::Shape(format!(
                "payload has {} values, axes {dims:?} need {cells}",
                payload.len()
            )));
        }
        Ok(GridFile {
            dims,
            axes,
            payload,
            metadata,
        })
    }

    /// Size in bytes of the encoded file, metadata excluded.
    pub fn fixed_size(dims: &[usize]) -> usize {
        5 + 1
            + 4
            + 8 * dims.len()
            + 8 * dims.iter().sum::<usize>()
            + 8 * dims.iter().product::<usize>()
            + 8
    }

    pub fn encoded_len(&self) -> usize {
        Self::fixed_size(&self.dims) + self.metadata_json().len()
    }

    fn metadata_json(&self) -> String {
        serde_json::to_string(&self.metadata).expect("string map serializes")
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let meta = self.metadata_json();
        let mut out = Vec::with_capacity(self.encoded_len());
        out.extend_from_slice(MAGIC);
        out.push(0);
        out.extend_from_slice(&(self.dims.len() as u32).to_le_bytes());
        for &d in &self.dims {
            out.extend_from_slice(&(d as u64).to_le_bytes());
        }
        for v in self.axes.iter().flatten().chain(&self.payload) {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&(meta.len() as u64).to_le_bytes());
        out.extend_from_slice(meta.as_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader {
            bytes,
            pos: 0,
            big: false,
        };
        if r.take(5)? != MAGIC {
            return Err(Error::Format("bad magic tag".into()));
        }
        r.big = match r.take(1)?[0] {
            0 => false,
            1 => true,
            f => return Err(Error::Format(format!("unknown endian flag {f}"))),
        };
        let rank = r.u32()? as usize;
        if rank == 0 || rank > 16 {
            return Err(Error::Format(format!("unsupported rank {rank}")));
        }
        let dims = (0..rank)
            .map(|_| r.u64().map(|d| d as usize))
            .collect::<Result<Vec<_>>>()?;
        let cells = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .filter(|&c| c.checked_mul(8).is_some_and(|b| b <= bytes.len()))
            .ok_or_else(|| Error::Format(format!("dims {dims:?} exceed the file size")))?;
        let axes = dims
            .iter()
            .map(|&d| r.f64s(d))
            .collect::<Result<Vec<_>>>()?;
        let payload = r.f64s(cells)?;
        let meta_len = r.u64()? as usize;
        let meta = r.take(meta_len)?;
        if r.pos != bytes.len() {
            return Err(Error::Format(format!(
                "{} trailing bytes",
                bytes.len() - r.pos
            )));
        }
        let text =
            std::str::from_utf8(meta).map_err(|e| Error::Format(format!("metadata: {e}")))?;
        let metadata =
            serde_json::from_str(text).map_err(|e| Error::Format(format!("metadata: {e}")))?;
        Ok(GridFile {
            dims,
            axes,
            payload,
            metadata,
        })
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    big: bool,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Format(format!("truncated at byte {}", self.pos)))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        let b: [u8; 4] = self.take(4)?.try_into().unwrap();
        Ok(if self.big {
            u32::from_be_bytes(b)
        } else {
            u32::from_le_bytes(b)
        })
    }

    fn u64(&mut self) -> Result<u64> {
        let b: [u8; 8] = self.take(8)?.try_into().unwrap();
        Ok(if self.big {
            u64::from_be_bytes(b)
        } else {
            u64::from_le_bytes(b)
        })
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(
            n.checked_mul(8)
                .ok_or_else(|| Error::Format("size overflow".into()))?,
        )?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| {
                let b: [u8; 8] = c.try_into().unwrap();
                if self.big {
                    f64::from_be_bytes(b)
                } else {
                    f64::from_le_bytes(b)
                }
            })
            .collect())
    }
}

pub fn write_grid(path: &Path, grid: &GridFile) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&grid.to_bytes())?;
    f.sync_all()?;
    Ok(())
}

pub fn read_grid(path: &Path) -> Result<GridFile> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    GridFile::from_bytes(&bytes)
}
