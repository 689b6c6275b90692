//! Slope field by kernel smoothing of local slopes, and point-wise local
//! linear regression pulled toward that field.

use rayon::prelude::*;

use crate::cluster::{local_slopes, LocalSlope};
use crate::config::RefineConfig;
use crate::curve::{Curve, CurvePoint};
use crate::error::{Error, Result};
use crate::raster::Raster;

/// Below this total kernel weight a cell copies its nearest sample.
pub const MIN_FIELD_WEIGHT: f64 = 1e-12;

/// Cell layout of a slope field over an `n_depth` x `n_offset` gather.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlopeGrid {
    pub n_depth: usize,
    pub n_offset: usize,
    pub cell_depth: usize,
    pub cell_offset: usize,
}

impl SlopeGrid {
    pub fn new(dims: (usize, usize), config: &RefineConfig) -> Self {
        SlopeGrid {
            n_depth: dims.0,
            n_offset: dims.1,
            cell_depth: config.cell_depth,
            cell_offset: config.cell_offset,
        }
    }

    /// `(depth cells, offset cells)`.
    pub fn cells(&self) -> (usize, usize) {
        (
            self.n_depth.div_ceil(self.cell_depth),
            self.n_offset.div_ceil(self.cell_offset),
        )
    }

    /// Pixel coordinates `(offset, depth)` of a cell center.
    pub fn center(&self, depth_cell: usize, offset_cell: usize) -> (f64, f64) {
        (
            (offset_cell as f64 + 0.5) * self.cell_offset as f64 - 0.5,
            (depth_cell as f64 + 0.5) * self.cell_depth as f64 - 0.5,
        )
    }

    /// Squared distance in cell units between two pixel positions.
    fn dist2(&self, a: (f64, f64), b: (f64, f64)) -> f64 {
        let dof = (a.0 - b.0) / self.cell_offset as f64;
        let dd = (a.1 - b.1) / self.cell_depth as f64;
        dof * dof + dd * dd
    }
}

/// Smoothed slope per grid cell; rows index depth cells.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeField {
    grid: SlopeGrid,
    values: Raster,
}

impl SlopeField {
    pub fn zeros(grid: SlopeGrid) -> Self {
        let (r, c) = grid.cells();
        SlopeField {
            grid,
            values: Raster::zeros(r, c),
        }
    }

    pub fn grid(&self) -> &SlopeGrid {
        &self.grid
    }

    pub fn raster(&self) -> &Raster {
        &self.values
    }

    /// Value of the cell containing pixel `(offset, depth)`; positions
    /// outside the gather use the nearest edge cell.
    pub fn value_at(&self, offset: f64, depth: f64) -> f64 {
        let (rows, cols) = self.values.dims();
        let cell = |x: f64, size: usize, n: usize| {
            ((x / size as f64).floor().max(0.0) as usize).min(n - 1)
        };
        self.values.get(
            cell(depth, self.grid.cell_depth, rows),
            cell(offset, self.grid.cell_offset, cols),
        )
    }
}

/// Local slope samples pooled over all curves.
pub fn slope_samples(curves: &[Curve], win: usize, stride: usize) -> Vec<LocalSlope> {
    curves
        .iter()
        .flat_map(|c| local_slopes(c, win, stride))
        .collect()
}

/// Nadaraya-Watson estimate with an isotropic Gaussian of bandwidth
/// `h_prior` cell units.
pub fn slope_field(samples: &[LocalSlope], grid: SlopeGrid, h_prior: f64) -> Result<SlopeField> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("slope field needs at least one sample"));
    }
    if !(h_prior > 0.0) {
        return Err(Error::InvalidConfig("h_prior must be positive".into()));
    }
    let (rows, cols) = grid.cells();
    let inv = 1.0 / (2.0 * h_prior * h_prior);
    let data: Vec<f64> = (0..rows * cols)
        .into_par_iter()
        .map(|k| {
            let at = grid.center(k / cols, k % cols);
            let (mut wsum, mut acc) = (0.0, 0.0);
            let mut nearest = (f64::INFINITY, 0.0);
            for s in samples {
                let d2 = grid.dist2(at, (s.mean_offset, s.mean_depth));
                let w = (-d2 * inv).exp();
                wsum += w;
                acc += w * s.slope;
                if d2 < nearest.0 {
                    nearest = (d2, s.slope);
                }
            }
            if wsum < MIN_FIELD_WEIGHT {
                nearest.1
            } else {
                acc / wsum
            }
        })
        .collect();
    Ok(SlopeField {
        grid,
        values: Raster::new(rows, cols, data)?,
    })
}

/// Field from the local slopes of `curves`; an empty set gives zeros.
pub fn field_from_curves(
    curves: &[Curve],
    grid: SlopeGrid,
    h_prior: f64,
    win: usize,
    stride: usize,
) -> Result<SlopeField> {
    let samples = slope_samples(curves, win, stride);
    if samples.is_empty() {
        return Ok(SlopeField::zeros(grid));
    }
    slope_field(&samples, grid, h_prior)
}

/// Minimizer of the kernel-weighted squared residuals plus
/// `prior_weight * (s - m)^2`, reported at `o_star`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFit {
    /// Fitted depth at `o_star`.
    pub depth: f64,
    pub slope: f64,
}

/// Solves the 2x2 normal equations in coordinates centered on `o_star`.
/// Returns `None` when the system is singular.
pub fn fit_local(
    points: &[CurvePoint],
    o_star: f64,
    m: f64,
    h_data: f64,
    prior_weight: f64,
) -> Option<LocalFit> {
    let inv = 1.0 / (2.0 * h_data * h_data);
    let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for p in points {
        let u = p.offset as f64 - o_star;
        let w = (-u * u * inv).exp();
        a11 += w;
        a12 += w * u;
        a22 += w * u * u;
        b1 += w * p.depth;
        b2 += w * u * p.depth;
    }
    a22 += prior_weight;
    b2 += prior_weight * m;
    let det = a11 * a22 - a12 * a12;
    if !(a11 > 0.0) || !(det > 1e-12 * a11 * a22) {
        return None;
    }
    Some(LocalFit {
        depth: (a22 * b1 - a12 * b2) / det,
        slope: (a11 * b2 - a12 * b1) / det,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Refined {
    pub depth: f64,
    /// The system was singular and `d_star` was kept.
    pub singular: bool,
}

/// Refined depth of `(o_star, d_star)` given the other points of its curve.
pub fn refine_point(
    points: &[CurvePoint],
    o_star: usize,
    d_star: f64,
    field: &SlopeField,
    config: &RefineConfig,
) -> Refined {
    let m = field.value_at(o_star as f64, d_star);
    match fit_local(
        points,
        o_star as f64,
        m,
        config.h_data,
        config.prior_weight(),
    ) {
        Some(fit) if fit.depth.is_finite() => Refined {
            depth: fit.depth,
            singular: false,
        },
        _ => Refined {
            depth: d_star,
            singular: true,
        },
    }
}

/// Same offsets, refined depths clamped into the gather. The second value
/// counts singular points.
pub fn refine_curve(
    curve: &Curve,
    field: &SlopeField,
    config: &RefineConfig,
) -> Result<(Curve, usize)> {
    let max_depth = field.grid().n_depth.saturating_sub(1) as f64;
    let pts = curve.points();
    let refined: Vec<Refined> = pts
        .iter()
        .map(|p| refine_point(pts, p.offset, p.depth, field, config))
        .collect();
    let singular = refined.iter().filter(|r| r.singular).count();
    let out = curve.with_depths(refined.iter().map(|r| r.depth.clamp(0.0, max_depth)))?;
    Ok((out, singular))
}

/// Keeps curves with at least `n_min` points, in order.
pub fn filter_short(curves: Vec<Curve>, n_min: usize) -> Vec<Curve> {
    curves.into_iter().filter(|c| c.len() >= n_min).collect()
}
