//! Self-describing binary grid files.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! magic    4 B    b"SDGF"
//! version  u32    1
//! n_axes   u8
//! per axis:
//!   name_len u8, name bytes (ASCII),
//!   count    u64,
//!   min, max f64
//! payload  f64 × Π count   (row-major over the axes in listed order,
//!                           last axis fastest)
//! ```

use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: String,
    pub count: usize,
    pub min: f64,
    pub max: f64,
}

impl Axis {
    pub fn new(name: &str, count: usize, min: f64, max: f64) -> Self {
        Self {
            name: name.to_string(),
            count,
            min,
            max,
        }
    }

    /// Coordinate of node `i` (uniform spacing).
    pub fn coord(&self, i: usize) -> f64 {
        if self.count == 1 {
            self.min
        } else {
            self.min + (self.max - self.min) * i as f64 / (self.count - 1) as f64
        }
    }
}

/// A dense field sampled on a tensor grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFile {
    pub axes: Vec<Axis>,
    pub values: Vec<f64>,
}

impl GridFile {
    pub fn new(axes: Vec<Axis>, values: Vec<f64>) -> Result<Self> {
        let expect: usize = axes.iter().map(|a| a.count).product();
        if values.len() != expect {
            return Err(Error::Format(format!(
                "payload holds {} values but axes describe {expect}",
                values.len()
            )));
        }
        Ok(Self { axes, values })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::with_capacity(64 + self.values.len() * 8);
        buf.extend_from_slice(b"SDGF");
        buf.extend_from_slice(&1u32.to_le_bytes());
        buf.push(self.axes.len() as u8);
        for axis in &self.axes {
            let name = axis.name.as_bytes();
            assert!(name.len() <= 255 && name.is_ascii());
            buf.push(name.len() as u8);
            buf.extend_from_slice(name);
            buf.extend_from_slice(&(axis.count as u64).to_le_bytes());
            buf.extend_from_slice(&axis.min.to_le_bytes());
            buf.extend_from_slice(&axis.max.to_le_bytes());
        }
        for &v in &self.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        std::fs::write(path, buf)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let buf = std::fs::read(path)?;
        let take = |pos: &mut usize, n: usize| -> Result<&[u8]> {
            if *pos + n > buf.len() {
                return Err(Error::Format("truncated grid file".into()));
            }
            let s = &buf[*pos..*pos + n];
            *pos += n;
            Ok(s)
        };
        let mut pos = 0usize;
        if take(&mut pos, 4)? != b"SDGF" {
            return Err(Error::Format("not a grid file (bad magic)".into()));
        }
        let version = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap());
        if version != 1 {
            return Err(Error::Format(format!("unsupported grid file version {version}")));
        }
        let n_axes = take(&mut pos, 1)?[0] as usize;
        let mut axes = Vec::with_capacity(n_axes);
        for _ in 0..n_axes {
            let len = take(&mut pos, 1)?[0] as usize;
            let name = String::from_utf8(take(&mut pos, len)?.to_vec())
                .map_err(|_| Error::Format("axis name is not UTF-8".into()))?;
            let count = u64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap()) as usize;
            let min = f64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap());
            let max = f64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap());
            axes.push(Axis {
                name,
                count,
                min,
                max,
            });
        }
        let total: usize = axes.iter().map(|a| a.count).product();
        let mut values = Vec::with_capacity(total);
        for _ in 0..total {
            values.push(f64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap()));
        }
        if pos != buf.len() {
            return Err(Error::Format("trailing bytes in grid file".into()));
        }
        Ok(Self { axes, values })
    }
}
