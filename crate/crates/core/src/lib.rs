//! Residual-moveout picking on common-image gathers.
//!
//! Rasters are indexed `(depth, offset)`. A [`SegMap`] from any segmenter
//! goes through [`pick_pipeline`]: extraction of one preliminary curve per
//! connected blob, merging by a mixed slope/endpoint distance, and
//! refinement against a smoothed slope field.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cluster;
pub mod config;
pub mod curve;
pub mod error;
pub mod extract;
pub mod features;
pub mod metrics;
pub mod pipeline;
pub mod raster;
pub mod refine;
pub mod segment;
pub mod synth;

pub use config::{
    ClusterConfig, FeatureConfig, MetricConfig, PipelineConfig, Preset, RefineConfig,
};
pub use curve::{read_curves, write_curves, Curve, CurvePoint};
pub use error::{Error, Result};
pub use pipeline::{pick_pipeline, PickResult};
pub use raster::{read_raster, write_raster, BinaryMask, Gather, LabelMask, Raster, SegMap};
pub use refine::{SlopeField, SlopeGrid};
pub use segment::SegmenterKind;
pub use synth::{synthesize, SynthSpec, SyntheticGather};
