use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::Args;
use rayon::prelude::*;
use rmopick_core::raster::LabelMask;
use rmopick_core::segment::{external_map_path, SegmentInput};
use rmopick_core::synth::MASK_SUFFIX;
use rmopick_core::{
    pick_pipeline, read_raster, write_curves, write_raster, BinaryMask, Gather, PickResult,
    PipelineConfig, SegmenterKind,
};
use serde::{Deserialize, Serialize};

use crate::inputs::{gather_paths, stem};
use crate::{settings, Cli, SegmenterOpts};

pub const RUN_MANIFEST: &str = "run.json";
pub const PICKS_SUFFIX: &str = ".picks.csv";
pub const SLOPE_SUFFIX: &str = ".slope.cigr";

#[derive(Debug, Clone, Args)]
pub struct PickArgs {
    /// Gather files, or directories of them.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,

    /// Output directory for picks, slope fields and `run.json`.
    #[arg(long)]
    pub out: PathBuf,

    #[command(flatten)]
    pub seg: SegmenterOpts,
}

/// Record of one `pick` invocation. Paths of outputs are relative to the
/// output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub inputs: Vec<String>,
    pub segmenter: String,
    pub config: BTreeMap<String, f64>,
    pub gathers: Vec<GatherRecord>,
    pub timing: Timing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GatherRecord {
    pub gather: String,
    pub picks: Option<String>,
    pub slope: Option<String>,
    pub n_raw: usize,
    pub n_merged: usize,
    pub n_curves: usize,
    pub singular_points: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub seconds: f64,
}

/// Loads a gather and, for the oracle, its label mask.
pub fn load_gather(path: &Path, seg: &SegmenterKind) -> Result<(Gather, Option<LabelMask>)> {
    let gather = Gather::new(read_raster(path)?)?;
    let label = match seg {
        SegmenterKind::Oracle { .. } => {
            let mask_path = external_map_path(path, MASK_SUFFIX);
            let raster =
                read_raster(&mask_path).with_context(|| "oracle segmenter needs the label mask")?;
            Some(BinaryMask::from_raster(&raster)?)
        }
        _ => None,
    };
    Ok((gather, label))
}

/// Segments and picks one gather.
pub fn pick_gather(
    path: &Path,
    seg: &SegmenterKind,
    cfg: &PipelineConfig,
) -> Result<(Gather, PickResult)> {
    let (gather, label) = load_gather(path, seg)?;
    let map = seg.segment(&SegmentInput {
        gather: &gather,
        gather_path: Some(path),
        label: label.as_ref(),
        features: &cfg.features,
    })?;
    let result = pick_pipeline(&map, cfg)?;
    Ok((gather, result))
}

fn describe(seg: &SegmenterKind) -> String {
    match seg {
        SegmenterKind::Oracle { blur_sigma } => format!("oracle(blur_sigma={blur_sigma})"),
        SegmenterKind::Baseline { quantile } => format!("baseline(quantile={quantile})"),
        SegmenterKind::External { suffix } => format!("external(suffix={suffix})"),
    }
}

fn process(path: &Path, out: &Path, seg: &SegmenterKind, cfg: &PipelineConfig) -> GatherRecord {
    let name = stem(path);
    let mut rec = GatherRecord {
        gather: path.display().to_string(),
        picks: None,
        slope: None,
        n_raw: 0,
        n_merged: 0,
        n_curves: 0,
        singular_points: 0,
        error: None,
    };
    let outcome = (|| -> Result<()> {
        let (_, r) = pick_gather(path, seg, cfg)?;
        rec.n_raw = r.raw.len();
        rec.n_merged = r.merged.len();
        rec.n_curves = r.curves.len();
        rec.singular_points = r.singular_points;
        let picks = format!("{name}{PICKS_SUFFIX}");
        let slope = format!("{name}{SLOPE_SUFFIX}");
        write_curves(&r.curves, out.join(&picks))?;
        write_raster(r.field.raster(), out.join(&slope))?;
        rec.picks = Some(picks);
        rec.slope = Some(slope);
        Ok(())
    })();
    if let Err(e) = outcome {
        rec.error = Some(format!("{e:#}"));
    }
    rec
}

/// Picks every gather, writing outputs and `run.json` under `out`.
/// Per-gather failures are recorded in the manifest and do not abort.
pub fn pick_all(
    paths: &[PathBuf],
    out: &Path,
    seg: &SegmenterKind,
    cfg: &PipelineConfig,
) -> Result<RunManifest> {
    seg.validate()?;
    cfg.validate()?;
    let mut seen = HashSet::new();
    for p in paths {
        if !seen.insert(stem(p)) {
            bail!(
                "two inputs share the name {:?}; outputs would collide",
                stem(p)
            );
        }
    }
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let start = Instant::now();
    let gathers: Vec<GatherRecord> = paths
        .par_iter()
        .map(|p| process(p, out, seg, cfg))
        .collect();
    let manifest = RunManifest {
        inputs: paths.iter().map(|p| p.display().to_string()).collect(),
        segmenter: describe(seg),
        config: cfg
            .entries()
            .into_iter()
            .map(|(k, v)| (k.to_owned(), v))
            .collect(),
        gathers,
        timing: Timing {
            seconds: start.elapsed().as_secs_f64(),
        },
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    let path = out.join(RUN_MANIFEST);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(manifest)
}

pub fn run(cli: &Cli, a: &PickArgs) -> Result<()> {
    let cfg = settings::resolve(cli)?;
    let paths = gather_paths(&a.inputs)?;
    let manifest = pick_all(&paths, &a.out, &a.seg.kind(), &cfg)?;
    let failed: Vec<&GatherRecord> = manifest
        .gathers
        .iter()
        .filter(|g| g.error.is_some())
        .collect();
    for g in &failed {
        eprintln!(
            "warning: {}: {}",
            g.gather,
            g.error.as_deref().unwrap_or_default()
        );
    }
    println!(
        "{} of {} gathers picked into {}",
        manifest.gathers.len() - failed.len(),
        manifest.gathers.len(),
        a.out.display()
    );
    Ok(())
}
