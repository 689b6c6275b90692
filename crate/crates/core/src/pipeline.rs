//! Stages two to four of the cascade on one segmentation map.

use rayon::prelude::*;

use crate::cluster::merge_curves;
use crate::config::PipelineConfig;
use crate::curve::Curve;
use crate::error::Result;
use crate::extract::extract_all;
use crate::raster::SegMap;
use crate::refine::{field_from_curves, filter_short, refine_curve, SlopeField, SlopeGrid};

/// Every intermediate product of one run.
#[derive(Debug, Clone)]
pub struct PickResult {
    pub raw: Vec<Curve>,
    pub merged: Vec<Curve>,
    /// Refined curves that survived the length filter.
    pub curves: Vec<Curve>,
    pub field: SlopeField,
    /// Points whose regression system was singular.
    pub singular_points: usize,
}

pub fn pick_pipeline(segmap: &SegMap, config: &PipelineConfig) -> Result<PickResult> {
    config.validate()?;
    let raw = extract_all(segmap, config.t_seg)?;
    let merged = merge_curves(&raw, &config.cluster)?;
    let grid = SlopeGrid::new(segmap.dims(), &config.refine);
    let field = field_from_curves(
        &merged,
        grid,
        config.refine.h_prior,
        config.cluster.slope_win,
        config.cluster.slope_stride,
    )?;
    let refined = merged
        .par_iter()
        .map(|c| refine_curve(c, &field, &config.refine))
        .collect::<Result<Vec<_>>>()?;
    let singular_points = refined.iter().map(|r| r.1).sum();
    let curves = filter_short(
        refined.into_iter().map(|r| r.0).collect(),
        config.refine.n_min,
    );
    Ok(PickResult {
        raw,
        merged,
        curves,
        field,
        singular_points,
    })
}
