//! Preliminary curves from a segmentation map: threshold, trace outer
//! borders, fill each border and take the column-wise maximum inside it.

use std::collections::VecDeque;

use crate::curve::{Curve, CurvePoint};
use crate::error::{Error, Result};
use crate::raster::{BinaryMask, SegMap};

/// Clockwise neighbor offsets (row grows downward), starting east.
const NEIGHBORS: [(i64, i64); 8] = [
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
    (-1, 0),
    (-1, 1),
];

/// Closed outer border of one 8-connected component, as `(row, col)` pixels
/// in tracing order. Thin parts are visited once per side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contour(Vec<(usize, usize)>);

impl Contour {
    pub fn new(pixels: Vec<(usize, usize)>) -> Result<Self> {
        if pixels.is_empty() {
            return Err(Error::EmptyInput("contour"));
        }
        Ok(Contour(pixels))
    }

    pub fn pixels(&self) -> &[(usize, usize)] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The starting pixel, which is the top-most then left-most one.
    pub fn start(&self) -> (usize, usize) {
        self.0[0]
    }
}

/// Filled region of one contour.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMask(BinaryMask);

impl RegionMask {
    pub fn mask(&self) -> &BinaryMask {
        &self.0
    }

    pub fn into_mask(self) -> BinaryMask {
        self.0
    }
}

/// 0 below `t_seg`, 1 otherwise.
pub fn binarize(segmap: &SegMap, t_seg: f64) -> BinaryMask {
    let (rows, cols) = segmap.dims();
    BinaryMask::from_fn(rows, cols, |r, c| segmap.get(r, c) >= t_seg)
}

/// Outer borders of every 8-connected component of ones, ordered by their
/// top-left pixel. Hole borders are followed for bookkeeping but not
/// returned.
pub fn find_contours(binary: &BinaryMask) -> Vec<Contour> {
    let (rows, cols) = binary.dims();
    let (pr, pc) = (rows + 2, cols + 2);
    let mut f = vec![0i32; pr * pc];
    for (r, c) in binary.ones() {
        f[(r + 1) * pc + c + 1] = 1;
    }
    let at = |r: i64, c: i64| (r as usize) * pc + c as usize;

    let mut contours = Vec::new();
    let mut nbd = 1i32;
    for i in 1..(pr as i64 - 1) {
        for j in 1..(pc as i64 - 1) {
            let v = f[at(i, j)];
            if v == 0 {
                continue;
            }
            let (outer, from) = if v == 1 && f[at(i, j - 1)] == 0 {
                (true, (i, j - 1))
            } else if v >= 1 && f[at(i, j + 1)] == 0 {
                (false, (i, j + 1))
            } else {
                continue;
            };
            nbd += 1;
            let border = follow_border(&mut f, pc, (i, j), from, nbd);
            if outer {
                let pixels = border
                    .into_iter()
                    .map(|(r, c)| (r as usize - 1, c as usize - 1))
                    .collect();
                contours.push(Contour(pixels));
            }
        }
    }
    contours
}

fn direction(center: (i64, i64), p: (i64, i64)) -> usize {
    let d = (p.0 - center.0, p.1 - center.1);
    NEIGHBORS.iter().position(|&n| n == d).expect("8-neighbor")
}

fn follow_border(
    f: &mut [i32],
    pc: usize,
    start: (i64, i64),
    from: (i64, i64),
    nbd: i32,
) -> Vec<(i64, i64)> {
    let at = |p: (i64, i64)| (p.0 as usize) * pc + p.1 as usize;
    let step = |p: (i64, i64), d: usize| (p.0 + NEIGHBORS[d].0, p.1 + NEIGHBORS[d].1);

    // Clockwise search for the first nonzero neighbor.
    let d0 = direction(start, from);
    let first = (0..8)
        .map(|k| step(start, (d0 + k) % 8))
        .find(|&p| f[at(p)] != 0);
    let Some(first) = first else {
        f[at(start)] = -nbd;
        return vec![start];
    };

    let mut pixels = Vec::new();
    let mut prev = first;
    let mut cur = start;
    loop {
        pixels.push(cur);
        // Counterclockwise search starting after `prev`.
        let dp = direction(cur, prev);
        let mut east_zero = false;
        let mut next = prev;
        for k in 1..=8 {
            let d = (dp + 8 - k) % 8;
            let p = step(cur, d);
            if f[at(p)] != 0 {
                next = p;
                break;
            }
            if d == 0 {
                east_zero = true;
            }
        }
        if east_zero {
            f[at(cur)] = -nbd;
        } else if f[at(cur)] == 1 {
            f[at(cur)] = nbd;
        }
        if next == start && cur == first {
            break;
        }
        prev = cur;
        cur = next;
    }
    pixels
}

/// Contour pixels plus everything they enclose. Enclosed holes are filled.
pub fn region_mask(contour: &Contour, dims: (usize, usize)) -> RegionMask {
    let (rows, cols) = dims;
    let px = contour.pixels();
    let r0 = px.iter().map(|p| p.0).min().unwrap_or(0);
    let r1 = px.iter().map(|p| p.0).max().unwrap_or(0);
    let c0 = px.iter().map(|p| p.1).min().unwrap_or(0);
    let c1 = px.iter().map(|p| p.1).max().unwrap_or(0);

    // Local box with a one-pixel margin; the margin is the flood source.
    let (h, w) = (r1 - r0 + 3, c1 - c0 + 3);
    let mut wall = vec![false; h * w];
    for &(r, c) in px {
        wall[(r - r0 + 1) * w + (c - c0 + 1)] = true;
    }
    let mut outside = vec![false; h * w];
    let mut queue = VecDeque::from([(0usize, 0usize)]);
    outside[0] = true;
    while let Some((r, c)) = queue.pop_front() {
        let mut visit = |rr: usize, cc: usize| {
            let k = rr * w + cc;
            if !wall[k] && !outside[k] {
                outside[k] = true;
                queue.push_back((rr, cc));
            }
        };
        if r > 0 {
            visit(r - 1, c);
        }
        if r + 1 < h {
            visit(r + 1, c);
        }
        if c > 0 {
            visit(r, c - 1);
        }
        if c + 1 < w {
            visit(r, c + 1);
        }
    }

    let mask = BinaryMask::from_fn(rows, cols, |r, c| {
        if r < r0 || r > r1 || c < c0 || c > c1 {
            return false;
        }
        !outside[(r - r0 + 1) * w + (c - c0 + 1)]
    });
    RegionMask(mask)
}

/// One depth per offset column: the arg-max of `segmap * mask`, skipping
/// columns where that product is all zero. Ties go to the shallower depth.
pub fn extract_raw_curve(segmap: &SegMap, region: &RegionMask) -> Result<Curve> {
    let mask = region.mask();
    if mask.dims() != segmap.dims() {
        return Err(Error::DimensionMismatch {
            expected: segmap.dims(),
            found: mask.dims(),
        });
    }
    let (rows, cols) = segmap.dims();
    let mut points = Vec::new();
    for c in 0..cols {
        let mut best: Option<(usize, f64)> = None;
        for r in 0..rows {
            if !mask.get(r, c) {
                continue;
            }
            let v = segmap.get(r, c);
            if v > 0.0 && best.is_none_or(|(_, b)| v > b) {
                best = Some((r, v));
            }
        }
        if let Some((r, _)) = best {
            points.push(CurvePoint::new(c, r as f64));
        }
    }
    Curve::new(points)
}

/// Binarize, trace, fill and extract, one curve per component in contour
/// order. Components whose masked product is all zero give empty curves,
/// which are dropped.
pub fn extract_all(segmap: &SegMap, t_seg: f64) -> Result<Vec<Curve>> {
    if !(t_seg > 0.0 && t_seg < 1.0) {
        return Err(Error::InvalidConfig("t_seg must lie in (0, 1)".into()));
    }
    let binary = binarize(segmap, t_seg);
    let mut curves = Vec::new();
    for contour in find_contours(&binary) {
        let curve = extract_raw_curve(segmap, &region_mask(&contour, segmap.dims()))?;
        if !curve.is_empty() {
            curves.push(curve);
        }
    }
    Ok(curves)
}

/// 8-connected components of ones, each listed in raster order; components
/// are ordered by their first pixel.
pub fn components(mask: &BinaryMask) -> Vec<Vec<(usize, usize)>> {
    let (rows, cols) = mask.dims();
    let mut seen = vec![false; rows * cols];
    let mut out = Vec::new();
    for (r, c) in mask.ones() {
        if seen[r * cols + c] {
            continue;
        }
        seen[r * cols + c] = true;
        let mut blob = Vec::new();
        let mut stack = vec![(r, c)];
        while let Some((pr, pc)) = stack.pop() {
            blob.push((pr, pc));
            for (dr, dc) in NEIGHBORS {
                let (nr, nc) = (pr as i64 + dr, pc as i64 + dc);
                if nr < 0 || nc < 0 || nr >= rows as i64 || nc >= cols as i64 {
                    continue;
                }
                let (nr, nc) = (nr as usize, nc as usize);
                if mask.get(nr, nc) && !seen[nr * cols + nc] {
                    seen[nr * cols + nc] = true;
                    stack.push((nr, nc));
                }
            }
        }
        blob.sort_unstable();
        out.push(blob);
    }
    out
}
