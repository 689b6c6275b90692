//! Row-major rasters and the "CIGR" binary file format.
//!
//! A CIGR file is a 16-byte little-endian header (`b"CIGR"`, version `1`,
//! `n_rows`, `n_cols`, all `u32`) followed by `n_rows * n_cols` IEEE-754
//! `f32` values in row-major order. Rows are depth samples, columns are
//! offset traces.
//!
//! Rasters hold `f64` in memory. Writing quantizes to `f32`, so a raster
//! whose values are all exactly representable as `f32` (including any
//! raster that was read from disk) round-trips bit for bit.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"CIGR";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 16;

/// Dense row-major real raster with finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Raster {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        let len = rows.checked_mul(cols).ok_or(Error::DimensionOverflow {
            rows: rows as u64,
            cols: cols as u64,
        })?;
        if data.len() != len {
            return Err(Error::InvalidDims {
                rows,
                cols,
                reason: "data length does not match rows * cols",
            });
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Raster { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Raster {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Builds a raster by evaluating `f(row, col)` for every cell.
    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Raster::new(rows, cols, data)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Copy of column `col` (one trace, top to bottom).
    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }

    /// Assembles a raster from equal-length columns.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::InvalidDims {
                rows,
                cols,
                reason: "ragged columns",
            });
        }
        Raster::from_fn(rows, cols, |r, c| columns[c][r])
    }

    /// Applies `f` to every value.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Raster::new(
            self.rows,
            self.cols,
            self.data.iter().map(|&v| f(v)).collect(),
        )
    }

    /// Rounds every value through `f32`, producing exactly what a
    /// write/read cycle would return.
    pub fn quantized(&self) -> Self {
        Raster {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| v as f32 as f64).collect(),
        }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let (rows, cols) = (self.rows as u64, self.cols as u64);
        if rows > u32::MAX as u64 || cols > u32::MAX as u64 {
            return Err(Error::DimensionOverflow { rows, cols });
        }
        let mut out = Vec::with_capacity(HEADER_LEN + 4 * self.data.len());
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.rows as u32).to_le_bytes());
        out.extend_from_slice(&(self.cols as u32).to_le_bytes());
        for &v in &self.data {
            let q = v as f32;
            if !q.is_finite() {
                // Finite f64 beyond f32 range.
                return Err(Error::NonFinite {
                    index: out.len() / 4 - 4,
                });
            }
            out.extend_from_slice(&q.to_le_bytes());
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::TruncatedHeader { len: bytes.len() });
        }
        let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
        let magic: [u8; 4] = bytes[0..4].try_into().unwrap();
        if magic != MAGIC {
            return Err(Error::BadMagic { found: magic });
        }
        let version = word(4);
        if version != VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        let (rows, cols) = (word(8) as u64, word(12) as u64);
        let payload = rows
            .checked_mul(cols)
            .and_then(|n| n.checked_mul(4))
            .and_then(|n| usize::try_from(n).ok())
            .ok_or(Error::DimensionOverflow { rows, cols })?;
        let body = &bytes[HEADER_LEN..];
        if body.len() < payload {
            return Err(Error::TruncatedPayload {
                expected: payload,
                found: body.len(),
            });
        }
        if body.len() > payload {
            return Err(Error::TrailingData {
                extra: body.len() - payload,
            });
        }
        let data = body
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64)
            .collect();
        Raster::new(rows as usize, cols as usize, data)
    }
}

pub fn write_raster(raster: &Raster, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = raster.to_bytes()?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_raster(path: impl AsRef<Path>) -> Result<Raster> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Raster::from_bytes(&bytes)
}

/// One common image gather: depth rows by offset columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Gather(Raster);

impl Gather {
    pub fn new(raster: Raster) -> Result<Self> {
        let (rows, cols) = raster.dims();
        if rows < 2 || cols < 2 {
            return Err(Error::InvalidDims {
                rows,
                cols,
                reason: "a gather needs at least 2 depth samples and 2 traces",
            });
        }
        Ok(Gather(raster))
    }

    pub fn n_depth(&self) -> usize {
        self.0.rows()
    }

    pub fn n_offset(&self) -> usize {
        self.0.cols()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.0.dims()
    }

    #[inline]
    pub fn amplitude(&self, depth: usize, offset: usize) -> f64 {
        self.0.get(depth, offset)
    }

    pub fn trace(&self, offset: usize) -> Vec<f64> {
        self.0.column(offset)
    }

    pub fn raster(&self) -> &Raster {
        &self.0
    }

    /// Multiplies every amplitude by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Gather::new(self.0.map(|v| v * factor)?)
    }
}

/// Per-pixel curvature probability, clamped to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SegMap(Raster);

impl SegMap {
    /// Clamps every value into `[0, 1]`.
    pub fn from_raster(raster: Raster) -> Self {
        let (rows, cols) = raster.dims();
        let data = raster
            .into_data()
            .into_iter()
            .map(|v| v.clamp(0.0, 1.0))
            .collect();
        SegMap(Raster { rows, cols, data })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.0.dims()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0.get(row, col)
    }

    pub fn raster(&self) -> &Raster {
        &self.0
    }
}

/// Binary raster (label masks, binarized maps).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

/// Ground-truth curvature pixels of a synthetic gather.
pub type LabelMask = BinaryMask;

impl BinaryMask {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        BinaryMask {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c) as u8);
            }
        }
        BinaryMask { rows, cols, data }
    }

    /// Accepts a raster containing only `0.0` and `1.0`.
    pub fn from_raster(raster: &Raster) -> Result<Self> {
        if let Some(index) = raster.data().iter().position(|&v| v != 0.0 && v != 1.0) {
            return Err(Error::ValueOutOfRange {
                index,
                value: raster.data()[index],
            });
        }
        Ok(BinaryMask {
            rows: raster.rows(),
            cols: raster.cols(),
            data: raster.data().iter().map(|&v| v as u8).collect(),
        })
    }

    pub fn to_raster(&self) -> Raster {
        Raster {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| v as f64).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.data[row * self.cols + col] != 0
    }

    #[inline]
    pub(crate) fn set(&mut self, row: usize, col: usize, value: bool) {
        self.data[row * self.cols + col] = value as u8;
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().filter(|&&v| v != 0).count()
    }

    /// Set pixels in raster order.
    pub fn ones(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let cols = self.cols;
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0)
            .map(move |(i, _)| (i / cols, i % cols))
    }
}
