//! Flat binary field snapshots.
//!
//! Layout (little endian): magic `FRAKFLD1` (8 bytes), `d` as u32, `N` as u32,
//! dtype tag as u8 (0 = f64, 1 = f32), 7 zero bytes, then `N^d` values in the
//! grid's row-major order. A JSON sidecar `<path>.json` repeats the header.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::field::ScalarField;
use super::grid::TorusGrid;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const MAGIC: &[u8; 8] = b"FRAKFLD1";
pub const HEADER_LEN: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    F64,
    F32,
}

impl Dtype {
    fn tag(self) -> u8 {
        match self {
            Dtype::F64 => 0,
            Dtype::F32 => 1,
        }
    }

    fn width(self) -> usize {
        match self {
            Dtype::F64 => 8,
            Dtype::F32 => 4,
        }
    }
}

/// Contents of the JSON sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub format: String,
    pub d: usize,
    pub n: usize,
    pub dtype: Dtype,
    pub domain: [f64; 2],
    pub half_shifted: bool,
    pub values: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<serde_json::Value>,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Encodes a field in the binary layout.
pub fn encode<T: Real>(u: &ScalarField<T>, dtype: Dtype) -> Vec<u8> {
    let g = u.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + u.len() * dtype.width());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(g.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(g.n() as u32).to_le_bytes());
    out.push(dtype.tag());
    out.extend_from_slice(&[0u8; 7]);
    for v in u.values() {
        match dtype {
            Dtype::F64 => out.extend_from_slice(&v.as_f64().to_le_bytes()),
            Dtype::F32 => out.extend_from_slice(&(v.as_f64() as f32).to_le_bytes()),
        }
    }
    out
}

/// Decodes the binary layout, building a fresh grid.
pub fn decode<T: Real>(bytes: &[u8]) -> Result<ScalarField<T>> {
    if bytes.len() < HEADER_LEN || &bytes[..8] != MAGIC {
        return Err(Error::Format("missing FRAKFLD1 header".into()));
    }
    let word = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes")) as usize;
    let (d, n) = (word(8), word(12));
    let dtype = match bytes[16] {
        0 => Dtype::F64,
        1 => Dtype::F32,
        t => return Err(Error::Format(format!("unknown dtype tag {t}"))),
    };
    let grid: Arc<TorusGrid<T>> = TorusGrid::new(d, n)?;
    let body = &bytes[HEADER_LEN..];
    if body.len() != grid.len() * dtype.width() {
        return Err(Error::Format(format!(
            "expected {} value bytes, found {}",
            grid.len() * dtype.width(),
            body.len()
        )));
    }
    let values = match dtype {
        Dtype::F64 => body
            .chunks_exact(8)
            .map(|c| T::lit(f64::from_le_bytes(c.try_into().expect("8 bytes"))))
            .collect(),
        Dtype::F32 => body
            .chunks_exact(4)
            .map(|c| T::lit(f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64))
            .collect(),
    };
    ScalarField::from_values(&grid, values)
}

/// Writes the field and its sidecar.
pub fn write_field<T: Real>(
    path: &Path,
    u: &ScalarField<T>,
    dtype: Dtype,
    manifest: Option<serde_json::Value>,
) -> Result<()> {
    fs::write(path, encode(u, dtype))?;
    let side = Sidecar {
        format: "FRAKFLD1".into(),
        d: u.grid().dim(),
        n: u.grid().n(),
        dtype,
        domain: [-2.0, 2.0],
        half_shifted: true,
        values: u.len(),
        manifest,
    };
    let text = serde_json::to_string_pretty(&side).map_err(|e| Error::Format(e.to_string()))?;
    fs::write(sidecar_path(path), text + "\n")?;
    Ok(())
}

pub fn read_field<T: Real>(path: &Path) -> Result<ScalarField<T>> {
    decode(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_both_dtypes() {
        let g = TorusGrid::<f64>::new(2, 8).unwrap();
        let u = ScalarField::from_fn(&g, |x| x[0] * 0.3 - x[1]);
        let back: ScalarField<f64> = decode(&encode(&u, Dtype::F64)).unwrap();
        assert_eq!(back.values(), u.values());
        let bytes = encode(&u, Dtype::F32);
        assert_eq!(bytes.len(), HEADER_LEN + 64 * 4);
        let back: ScalarField<f64> = decode(&bytes).unwrap();
        assert!(back.sub(&u).unwrap().norm_inf() < 1e-6);
    }

    #[test]
    fn rejects_corrupt_input() {
        assert!(decode::<f64>(b"short").is_err());
        let g = TorusGrid::<f64>::new(2, 4).unwrap();
        let mut bytes = encode(&ScalarField::constant(&g, 1.0), Dtype::F64);
        bytes.pop();
        assert!(matches!(decode::<f64>(&bytes), Err(Error::Format(_))));
    }
}
