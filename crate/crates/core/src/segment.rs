//! Segmentation strategies producing a [`SegMap`] for one gather.
//!
//! The learned network lives outside this crate; its maps enter through
//! [`load_segmentation`]. The oracle and baseline strategies let the rest of
//! the cascade run without it.

use std::path::{Path, PathBuf};

use crate::config::FeatureConfig;
use crate::error::{Error, Result};
use crate::extract::components;
use crate::features::{feature_stack, FeatureStack};
use crate::raster::{read_raster, Gather, LabelMask, Raster, SegMap};

/// Suffix that replaces `.cigr` on a gather file name to locate its
/// externally produced segmentation map.
pub const DEFAULT_SEG_SUFFIX: &str = ".seg.cigr";

#[derive(Debug, Clone, PartialEq)]
pub enum SegmenterKind {
    /// Ground-truth labels, optionally blurred by a Gaussian of this std.
    Oracle { blur_sigma: f64 },
    /// Peak mask gated by an AGC-magnitude quantile in `(0, 1)`.
    Baseline { quantile: f64 },
    /// Precomputed map found by suffix substitution on the gather file name.
    External { suffix: String },
}

/// Inputs a strategy may draw on.
pub struct SegmentInput<'a> {
    pub gather: &'a Gather,
    pub gather_path: Option<&'a Path>,
    pub label: Option<&'a LabelMask>,
    pub features: &'a FeatureConfig,
}

impl SegmenterKind {
    pub fn validate(&self) -> Result<()> {
        match self {
            SegmenterKind::Oracle { blur_sigma } if !(*blur_sigma >= 0.0) => Err(
                Error::InvalidConfig("blur_sigma must be non-negative".into()),
            ),
            SegmenterKind::Baseline { quantile } if !(*quantile > 0.0 && *quantile < 1.0) => Err(
                Error::InvalidConfig("baseline quantile must lie in (0, 1)".into()),
            ),
            _ => Ok(()),
        }
    }

    pub fn segment(&self, input: &SegmentInput<'_>) -> Result<SegMap> {
        self.validate()?;
        match self {
            SegmenterKind::Oracle { blur_sigma } => {
                let label = input
                    .label
                    .ok_or(Error::EmptyInput("oracle segmenter needs a label mask"))?;
                if label.dims() != input.gather.dims() {
                    return Err(Error::DimensionMismatch {
                        expected: input.gather.dims(),
                        found: label.dims(),
                    });
                }
                Ok(segment_oracle(label, *blur_sigma))
            }
            SegmenterKind::Baseline { quantile } => {
                let stack = feature_stack(input.gather, input.features)?;
                Ok(segment_baseline_at(&stack, *quantile))
            }
            SegmenterKind::External { suffix } => {
                let path = input.gather_path.ok_or(Error::EmptyInput(
                    "external segmenter needs the gather path",
                ))?;
                load_segmentation(external_map_path(path, suffix), input.gather.dims())
            }
        }
    }
}

/// `dir/name.cigr` becomes `dir/name<suffix>`.
pub fn external_map_path(gather_path: &Path, suffix: &str) -> PathBuf {
    let name = gather_path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let stem = name.strip_suffix(".cigr").unwrap_or(&name);
    gather_path.with_file_name(format!("{stem}{suffix}"))
}

/// Each 8-connected label component is blurred by an isotropic Gaussian
/// (truncated at 4 sigma) and rescaled to peak 1 on its own; overlapping
/// footprints combine by maximum. `blur_sigma == 0` returns the mask.
pub fn segment_oracle(label: &LabelMask, blur_sigma: f64) -> SegMap {
    let (rows, cols) = label.dims();
    if blur_sigma == 0.0 {
        return SegMap::from_raster(label.to_raster());
    }
    let radius = (4.0 * blur_sigma).ceil() as usize;
    let kernel: Vec<f64> = (0..=2 * radius)
        .map(|i| {
            let d = i as f64 - radius as f64;
            (-d * d / (2.0 * blur_sigma * blur_sigma)).exp()
        })
        .collect();

    let mut out = vec![0.0f64; rows * cols];
    for blob in components(label) {
        let r0 = blob
            .iter()
            .map(|p| p.0)
            .min()
            .unwrap()
            .saturating_sub(radius);
        let r1 = (blob.iter().map(|p| p.0).max().unwrap() + radius).min(rows - 1);
        let c0 = blob
            .iter()
            .map(|p| p.1)
            .min()
            .unwrap()
            .saturating_sub(radius);
        let c1 = (blob.iter().map(|p| p.1).max().unwrap() + radius).min(cols - 1);
        let (h, w) = (r1 - r0 + 1, c1 - c0 + 1);

        // Separable pass along depth, then along offset, inside the box.
        let mut tmp = vec![0.0; h * w];
        for &(r, c) in &blob {
            let lo = r.saturating_sub(radius).max(r0);
            let hi = (r + radius).min(r1);
            for rr in lo..=hi {
                tmp[(rr - r0) * w + (c - c0)] += kernel[rr + radius - r];
            }
        }
        let mut local = vec![0.0; h * w];
        for lr in 0..h {
            for lc in 0..w {
                let v = tmp[lr * w + lc];
                if v == 0.0 {
                    continue;
                }
                let c = lc + c0;
                let lo = c.saturating_sub(radius).max(c0);
                let hi = (c + radius).min(c1);
                for cc in lo..=hi {
                    local[lr * w + (cc - c0)] += v * kernel[cc + radius - c];
                }
            }
        }
        let peak = local.iter().copied().fold(0.0, f64::max);
        for lr in 0..h {
            for lc in 0..w {
                let k = (lr + r0) * cols + lc + c0;
                out[k] = out[k].max(local[lr * w + lc] / peak);
            }
        }
    }
    SegMap::from_raster(Raster::new(rows, cols, out).expect("finite blur"))
}

/// Peaks channel gated by `|agc1|` strictly above its 80th percentile.
pub fn segment_baseline(stack: &FeatureStack) -> SegMap {
    segment_baseline_at(stack, 0.8)
}

pub fn segment_baseline_at(stack: &FeatureStack, quantile: f64) -> SegMap {
    let mut mags: Vec<f64> = stack.agc1.data().iter().map(|v| v.abs()).collect();
    mags.sort_by(f64::total_cmp);
    // nearest-rank percentile
    let rank = ((quantile * mags.len() as f64).ceil() as usize).clamp(1, mags.len().max(1));
    let threshold = mags.get(rank - 1).copied().unwrap_or(0.0);
    let data = stack
        .peaks
        .data()
        .iter()
        .zip(stack.agc1.data())
        .map(|(&p, &a)| {
            if p != 0.0 && a.abs() > threshold {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    let (rows, cols) = stack.dims();
    SegMap::from_raster(Raster::new(rows, cols, data).expect("binary values"))
}

/// Reads an externally produced map. Values outside `[-0.01, 1.01]` mark a
/// wrong file; the rest are clamped to `[0, 1]`.
pub fn load_segmentation(path: impl AsRef<Path>, expected_dims: (usize, usize)) -> Result<SegMap> {
    let raster = read_raster(path)?;
    if raster.dims() != expected_dims {
        return Err(Error::DimensionMismatch {
            expected: expected_dims,
            found: raster.dims(),
        });
    }
    if let Some(index) = raster
        .data()
        .iter()
        .position(|&v| !(-0.01..=1.01).contains(&v))
    {
        return Err(Error::ValueOutOfRange {
            index,
            value: raster.data()[index],
        });
    }
    Ok(SegMap::from_raster(raster))
}
