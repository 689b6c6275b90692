use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use rayon::prelude::*;
use rmopick_core::metrics::{report, score_gather, GatherScore};
use rmopick_core::synth::TRUTH_SUFFIX;
use rmopick_core::{read_curves, read_raster, Curve, Gather, PipelineConfig};

use crate::inputs::{gather_paths, stem};
use crate::pick::PICKS_SUFFIX;
use crate::{settings, Cli};

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// Directory of automatic picks (`<stem><auto-suffix>`). A missing file
    /// counts as an empty pick set.
    #[arg(long)]
    pub auto: PathBuf,

    /// Directory of manual picks (`<stem><manual-suffix>`).
    #[arg(long)]
    pub manual: PathBuf,

    /// Gather files, or directories of them.
    #[arg(long, required = true, num_args = 1..)]
    pub gathers: Vec<PathBuf>,

    #[arg(long, default_value = PICKS_SUFFIX)]
    pub auto_suffix: String,

    #[arg(long, default_value = TRUTH_SUFFIX)]
    pub manual_suffix: String,

    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn curves_or_empty(path: &Path) -> Result<Vec<Curve>> {
    if path.exists() {
        Ok(read_curves(path)?)
    } else {
        Ok(Vec::new())
    }
}

/// Scores one gather given both pick sets.
pub fn score(
    name: &str,
    gather: &Gather,
    autos: &[Curve],
    manuals: &[Curve],
    cfg: &PipelineConfig,
) -> Result<GatherScore> {
    Ok(score_gather(
        name,
        gather,
        autos,
        manuals,
        &cfg.metrics,
        &cfg.refine,
        &cfg.cluster,
    )?)
}

/// Scores every gather in input order. Gathers without manual picks are an
/// error: there is nothing to compare against.
pub fn evaluate(a: &EvalArgs, cfg: &PipelineConfig) -> Result<Vec<GatherScore>> {
    let paths = gather_paths(&a.gathers)?;
    paths
        .par_iter()
        .map(|p| {
            let name = stem(p);
            let gather = Gather::new(read_raster(p)?)?;
            let manual_path = a.manual.join(format!("{name}{}", a.manual_suffix));
            if !manual_path.exists() {
                bail!("no manual picks for {name} at {}", manual_path.display());
            }
            let manuals = read_curves(&manual_path)?;
            let autos = curves_or_empty(&a.auto.join(format!("{name}{}", a.auto_suffix)))?;
            score(&name, &gather, &autos, &manuals, cfg).with_context(|| format!("scoring {name}"))
        })
        .collect()
}

pub fn run(cli: &Cli, a: &EvalArgs) -> Result<()> {
    let cfg = settings::resolve(cli)?;
    let text = report(&evaluate(a, &cfg)?);
    match &a.out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{text}"),
    }
    Ok(())
}
