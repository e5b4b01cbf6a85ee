//! Additive fields `f(x) = Σ_k g_k(x_k)` and their excursion masks.
//!
//! A field keeps only its one-dimensional components, so an `N×N` field costs
//! `O(N)` memory; masks are materialized per window on demand.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::sampler::ProcessPath;

/// Sum of independent stationary processes, one per coordinate axis.
#[derive(Debug, Clone, PartialEq)]
pub struct AdditiveField {
    components: Vec<ProcessPath>,
}

impl AdditiveField {
    pub fn new(components: Vec<ProcessPath>) -> Result<Self> {
        if components.len() < 2 {
            return Err(Error::Domain(format!(
                "an additive field needs at least two components, got {}",
                components.len()
            )));
        }
        Ok(Self { components })
    }

    pub fn planar(g1: ProcessPath, g2: ProcessPath) -> Self {
        Self {
            components: vec![g1, g2],
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, axis: usize) -> &ProcessPath {
        &self.components[axis]
    }

    pub fn components(&self) -> &[ProcessPath] {
        &self.components
    }

    /// Extent (grid point count) along each axis.
    pub fn shape(&self) -> Vec<usize> {
        self.components.iter().map(ProcessPath::len).collect()
    }

    /// `f` at a grid index tuple, summed in axis order.
    pub fn value(&self, index: &[usize]) -> Result<f64> {
        if index.len() != self.dim() {
            return Err(Error::OutOfBounds(format!(
                "index of length {} for a {}-dimensional field",
                index.len(),
                self.dim()
            )));
        }
        let mut total = 0.0;
        for (axis, (&i, g)) in index.iter().zip(&self.components).enumerate() {
            let v = g.values().get(i).ok_or_else(|| {
                Error::OutOfBounds(format!("index {i} on axis {axis} of length {}", g.len()))
            })?;
            total += v;
        }
        Ok(total)
    }

    /// The field `−f`.
    pub fn negated(&self) -> Self {
        Self {
            components: self.components.iter().map(ProcessPath::negated).collect(),
        }
    }

    /// Reorders axes: axis `k` of the result is axis `order[k]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.dim()];
        if order.len() != self.dim() || order.iter().any(|&k| k >= self.dim() || std::mem::replace(&mut seen[k], true)) {
            return Err(Error::Domain(format!("{order:?} is not a permutation of the axes")));
        }
        Ok(Self {
            components: order.iter().map(|&k| self.components[k].clone()).collect(),
        })
    }

    /// Mask of `{f ≤ level}` over a planar window (two-dimensional fields only).
    pub fn excursion_mask(&self, level: f64, window: Window) -> Result<ExcursionMask> {
        if self.dim() != 2 {
            return Err(Error::Domain(format!(
                "excursion_mask needs a planar field; use level_mask for d = {}",
                self.dim()
            )));
        }
        self.level_mask(level, Side::AtMost, window, &[])
    }

    /// Mask of `{f ⋚ level}` on the plane of axes 0 and 1, with the remaining
    /// axes fixed at the indices in `fixed` (empty for planar fields).
    pub fn level_mask(&self, level: f64, side: Side, window: Window, fixed: &[usize]) -> Result<ExcursionMask> {
        if fixed.len() + 2 != self.dim() {
            return Err(Error::OutOfBounds(format!(
                "{} fixed indices for a {}-dimensional field",
                fixed.len(),
                self.dim()
            )));
        }
        let g1 = self.components[0].values();
        let g2 = self.components[1].values();
        window.check(g1.len(), g2.len())?;
        let mut tail = Vec::with_capacity(fixed.len());
        for (k, &i) in fixed.iter().enumerate() {
            let g = self.components[k + 2].values();
            tail.push(*g.get(i).ok_or_else(|| {
                Error::OutOfBounds(format!("index {i} on axis {} of length {}", k + 2, g.len()))
            })?);
        }
        let xs = &g1[window.x0..window.x0 + window.width];
        let mut bits = Vec::with_capacity(window.width * window.height);
        let rows = &g2[window.y0..window.y0 + window.height];
        match side {
            Side::AtMost => fill_rows(&mut bits, xs, rows, &tail, |v| v <= level),
            Side::Below => fill_rows(&mut bits, xs, rows, &tail, |v| v < level),
            Side::AtLeast => fill_rows(&mut bits, xs, rows, &tail, |v| v >= level),
            Side::Above => fill_rows(&mut bits, xs, rows, &tail, |v| v > level),
        }
        Ok(ExcursionMask {
            width: window.width,
            height: window.height,
            level,
            side,
            bits,
        })
    }
}

fn fill_rows<F: Fn(f64) -> bool>(bits: &mut Vec<bool>, xs: &[f64], rows: &[f64], tail: &[f64], test: F) {
    for &row in rows {
        if tail.is_empty() {
            bits.extend(xs.iter().map(|&x| test(x + row)));
        } else {
            bits.extend(xs.iter().map(|&x| test(tail.iter().fold(x + row, |v, t| v + t))));
        }
    }
}

/// Rectangle of grid indices: columns `x0..x0+width` along axis 0 and rows
/// `y0..y0+height` along axis 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub x0: usize,
    pub y0: usize,
    pub width: usize,
    pub height: usize,
}

impl Window {
    pub fn new(x0: usize, y0: usize, width: usize, height: usize) -> Self {
        Self {
            x0,
            y0,
            width,
            height,
        }
    }

    /// Inclusive index ranges `[x_lo, x_hi] × [y_lo, y_hi]`.
    pub fn from_ranges((x_lo, x_hi): (usize, usize), (y_lo, y_hi): (usize, usize)) -> Self {
        Self::new(x_lo, y_lo, x_hi - x_lo + 1, y_hi - y_lo + 1)
    }

    /// Window anchored at the origin.
    pub fn square(side: usize) -> Self {
        Self::new(0, 0, side, side)
    }

    fn check(&self, cols: usize, rows: usize) -> Result<()> {
        if self.x0 + self.width > cols || self.y0 + self.height > rows {
            return Err(Error::OutOfBounds(format!(
                "window {self:?} exceeds field extent {cols}×{rows}"
            )));
        }
        Ok(())
    }
}

/// Which side of the level a mask selects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `f ≤ ℓ`, the excursion set.
    AtMost,
    /// `f < ℓ`
    Below,
    /// `f ≥ ℓ`
    AtLeast,
    /// `f > ℓ`
    Above,
}

impl Side {
    #[inline]
    pub fn holds(self, value: f64, level: f64) -> bool {
        match self {
            Side::AtMost => value <= level,
            Side::Below => value < level,
            Side::AtLeast => value >= level,
            Side::Above => value > level,
        }
    }

    pub fn complement(self) -> Self {
        match self {
            Side::AtMost => Side::Above,
            Side::Above => Side::AtMost,
            Side::Below => Side::AtLeast,
            Side::AtLeast => Side::Below,
        }
    }
}

/// Boolean grid, row-major, `true` where the field lies on `side` of `level`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcursionMask {
    width: usize,
    height: usize,
    level: f64,
    side: Side,
    bits: Vec<bool>,
}

impl ExcursionMask {
    /// Builds a mask from raw bits; meant for synthetic inputs.
    pub fn from_bits(width: usize, height: usize, level: f64, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::OutOfBounds(format!(
                "{} bits for a {width}×{height} mask",
                bits.len()
            )));
        }
        Ok(Self {
            width,
            height,
            level,
            side: Side::AtMost,
            bits,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn count_true(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn complement(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            level: self.level,
            side: self.side.complement(),
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    /// Transposed mask: rows become columns.
    pub fn transposed(&self) -> Self {
        let mut bits = Vec::with_capacity(self.bits.len());
        for x in 0..self.width {
            for y in 0..self.height {
                bits.push(self.get(x, y));
            }
        }
        Self {
            width: self.height,
            height: self.width,
            level: self.level,
            side: self.side,
            bits,
        }
    }
}

/// Fraction of `true` cells.
pub fn area_fraction(mask: &ExcursionMask) -> Result<f64> {
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    Ok(mask.count_true() as f64 / mask.bits.len() as f64)
}

/// Binary PGM: black (0) where the mask is set, white (255) elsewhere.
pub fn write_pgm<W: Write>(mask: &ExcursionMask, mut out: W) -> Result<()> {
    write!(out, "P5\n{} {}\n255\n", mask.width, mask.height)?;
    let bytes: Vec<u8> = mask.bits.iter().map(|&b| if b { 0 } else { 255 }).collect();
    out.write_all(&bytes)?;
    out.flush()?;
    Ok(())
}

pub fn render_pgm(mask: &ExcursionMask, path: &Path) -> Result<()> {
    write_pgm(mask, BufWriter::new(File::create(path)?))
}

const MASK_MAGIC: &[u8; 4] = b"ANM1";

/// `ANM1`, u32 width, u32 height, f64 level (little-endian), then row-major
/// bits packed eight per byte, most significant bit first.
pub fn write_mask_dump<W: Write>(mask: &ExcursionMask, mut out: W) -> Result<()> {
    let width = u32::try_from(mask.width).map_err(|_| Error::Format("mask too wide".into()))?;
    let height = u32::try_from(mask.height).map_err(|_| Error::Format("mask too tall".into()))?;
    out.write_all(MASK_MAGIC)?;
    out.write_all(&width.to_le_bytes())?;
    out.write_all(&height.to_le_bytes())?;
    out.write_all(&mask.level.to_le_bytes())?;
    let packed: Vec<u8> = mask
        .bits
        .chunks(8)
        .map(|chunk| {
            chunk
                .iter()
                .enumerate()
                .fold(0u8, |byte, (k, &b)| byte | ((b as u8) << (7 - k)))
        })
        .collect();
    out.write_all(&packed)?;
    out.flush()?;
    Ok(())
}

/// Reads a mask dump. The set side is not stored; the result reports `AtMost`.
pub fn read_mask_dump<R: Read>(mut input: R) -> Result<ExcursionMask> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MASK_MAGIC {
        return Err(Error::Format("missing ANM1 magic".into()));
    }
    let mut w = [0u8; 4];
    input.read_exact(&mut w)?;
    let width = u32::from_le_bytes(w) as usize;
    input.read_exact(&mut w)?;
    let height = u32::from_le_bytes(w) as usize;
    let mut l = [0u8; 8];
    input.read_exact(&mut l)?;
    let level = f64::from_le_bytes(l);
    let cells = width * height;
    let mut packed = vec![0u8; cells.div_ceil(8)];
    input.read_exact(&mut packed)?;
    let bits = (0..cells)
        .map(|i| packed[i / 8] & (1 << (7 - i % 8)) != 0)
        .collect();
    ExcursionMask::from_bits(width, height, level, bits)
}
