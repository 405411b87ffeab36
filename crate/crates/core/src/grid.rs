//! Dense row-major 2D arrays and portable-graymap export.

use crate::error::{Error, Result};
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Clone> Grid<T> {
    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }
}

impl<T> Grid<T> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "grid data length mismatch");
        Self { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
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
    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    #[inline]
    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut T {
        &mut self.data[i * self.cols + j]
    }

    /// Bounds-checked access with signed coordinates.
    #[inline]
    pub fn at(&self, i: isize, j: isize) -> Option<&T> {
        if i < 0 || j < 0 || i as usize >= self.rows || j as usize >= self.cols {
            None
        } else {
            Some(self.get(i as usize, j as usize))
        }
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn iter_indexed(&self) -> impl Iterator<Item = ((usize, usize), &T)> {
        let cols = self.cols;
        self.data
            .iter()
            .enumerate()
            .map(move |(k, v)| ((k / cols, k % cols), v))
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Grid<U> {
        Grid {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl Grid<f64> {
    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Min-max rescale to `[0, 1]`; a constant grid maps to all zeros.
    pub fn normalized(&self) -> Grid<f64> {
        let (lo, hi) = self.min_max();
        if hi > lo {
            let span = hi - lo;
            self.map(|&v| (v - lo) / span)
        } else {
            self.map(|_| 0.0)
        }
    }

    /// 8-bit samples of a `[0, 1]` grid: `round(v * 255)`.
    pub fn to_gray8(&self) -> Vec<u8> {
        self.data
            .iter()
            .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
            .collect()
    }
}

pub fn encode_pgm(width: usize, height: usize, pixels: &[u8]) -> Vec<u8> {
    assert_eq!(pixels.len(), width * height);
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    out
}

/// Writes a `[0, 1]`-valued grid as a binary PGM.
pub fn write_pgm(path: impl AsRef<Path>, grid: &Grid<f64>) -> Result<()> {
    write_pgm_bytes(path, grid.cols(), grid.rows(), &grid.to_gray8())
}

pub fn write_pgm_bytes(path: impl AsRef<Path>, width: usize, height: usize, px: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&encode_pgm(width, height, px))
        .map_err(|e| Error::io(path, e))
}

/// Parses a binary PGM with maxval 255.
pub fn decode_pgm(bytes: &[u8]) -> Option<(usize, usize, Vec<u8>)> {
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return None;
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).ok()?.to_owned());
    }
    if fields[0] != "P5" || fields[3] != "255" {
        return None;
    }
    let w: usize = fields[1].parse().ok()?;
    let h: usize = fields[2].parse().ok()?;
    let body = bytes.get(pos + 1..)?;
    (body.len() == w * h).then(|| (w, h, body.to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_constant_is_zero() {
        let g = Grid::filled(3, 3, 2.5);
        assert!(g.normalized().as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn pgm_round_trip() {
        let g = Grid::from_vec(1, 3, vec![0.0, 0.5, 1.0]);
        let px = g.to_gray8();
        assert_eq!(px, vec![0, 128, 255]);
        let bytes = encode_pgm(3, 1, &px);
        assert_eq!(decode_pgm(&bytes), Some((3, 1, px)));
    }
}
