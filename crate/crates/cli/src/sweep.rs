use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use rayon::prelude::*;
use rmopick_core::config::CONFIG_KEYS;
use rmopick_core::metrics::aggregate;
use rmopick_core::segment::external_map_path;
use rmopick_core::synth::TRUTH_SUFFIX;
use rmopick_core::{read_curves, PipelineConfig, SegmenterKind};

use crate::eval::score;
use crate::inputs::gather_paths;
use crate::pick::pick_gather;
use crate::{settings, Cli, SegmenterOpts};

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Parameter to vary (any config key).
    #[arg(long)]
    pub param: String,

    /// Comma-separated values.
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<f64>,

    /// Gather files, or directories of them. Manual picks are read from
    /// `<stem><manual-suffix>` beside each gather.
    #[arg(required = true)]
    pub gathers: Vec<PathBuf>,

    #[arg(long, default_value = TRUTH_SUFFIX)]
    pub manual_suffix: String,

    #[command(flatten)]
    pub seg: SegmenterOpts,

    /// Write the table here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Pooled results for one parameter value.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub gathers: usize,
    pub n_raw: usize,
    pub n_merged: usize,
    pub n_curves: usize,
    pub semblance_auto: f64,
    pub track_rate: f64,
    pub mse: f64,
}

pub const SWEEP_HEADER: &str =
    "param,value,gathers,n_raw,n_merged,n_curves,semblance_auto,track_rate,mse";

/// Re-runs the cascade on every gather once per value, holding every other
/// parameter at `base`.
pub fn sweep(
    paths: &[PathBuf],
    param: &str,
    values: &[f64],
    seg: &SegmenterKind,
    base: &PipelineConfig,
    manual_suffix: &str,
) -> Result<Vec<SweepRow>> {
    if !CONFIG_KEYS.contains(&param) {
        bail!(
            "unknown parameter {param:?}; expected one of {}",
            CONFIG_KEYS.join(", ")
        );
    }
    let manuals = paths
        .iter()
        .map(|p| {
            let m = external_map_path(p, manual_suffix);
            read_curves(&m).with_context(|| format!("manual picks for {}", p.display()))
        })
        .collect::<Result<Vec<_>>>()?;
    values
        .iter()
        .map(|&value| {
            let mut cfg = base.clone();
            cfg.set(param, value)?;
            cfg.validate()?;
            let per_gather = paths
                .par_iter()
                .zip(&manuals)
                .map(|(p, manual)| {
                    let (gather, r) =
                        pick_gather(p, seg, &cfg).with_context(|| format!("{}", p.display()))?;
                    let s = score(&p.display().to_string(), &gather, &r.curves, manual, &cfg)?;
                    Ok((r.raw.len(), r.merged.len(), s))
                })
                .collect::<Result<Vec<_>>>()?;
            let scores: Vec<_> = per_gather.iter().map(|x| x.2.clone()).collect();
            let a = aggregate(&scores);
            Ok(SweepRow {
                value,
                gathers: paths.len(),
                n_raw: per_gather.iter().map(|x| x.0).sum(),
                n_merged: per_gather.iter().map(|x| x.1).sum(),
                n_curves: a.n_auto,
                semblance_auto: a.semblance_auto,
                track_rate: a.track_rate,
                mse: a.mse,
            })
        })
        .collect()
}

pub fn table(param: &str, rows: &[SweepRow]) -> String {
    let mut out = format!("{SWEEP_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{param},{},{},{},{},{},{:.6},{:.6},{:.6e}",
            r.value,
            r.gathers,
            r.n_raw,
            r.n_merged,
            r.n_curves,
            r.semblance_auto,
            r.track_rate,
            r.mse
        );
    }
    out
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn run(cli: &Cli, a: &SweepArgs) -> Result<()> {
    let cfg = settings::resolve(cli)?;
    let paths = gather_paths(&a.gathers)?;
    let rows = sweep(
        &paths,
        &a.param,
        &a.values,
        &a.seg.kind(),
        &cfg,
        &a.manual_suffix,
    )?;
    write_or_print(a.out.as_deref(), &table(&a.param, &rows))
}
