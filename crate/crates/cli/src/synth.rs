use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, ValueEnum};
use rmopick_core::synth::{generate_dataset, SynthSpec};

use crate::Cli;

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,

    /// `K=N`: N gathers with K curvatures each. Repeatable.
    #[arg(long = "count", value_name = "K=N")]
    pub counts: Vec<String>,

    /// Full-size dataset composition: `train` is 1000 gathers at each of
    /// 50/60/80/100 curvatures, `val` 500 at each of 60/80.
    #[arg(long, value_enum)]
    pub recipe: Option<Recipe>,

    #[arg(long, default_value_t = 1000)]
    pub n_depth: usize,

    #[arg(long, default_value_t = 100)]
    pub n_offset: usize,

    /// Cropping rate.
    #[arg(long)]
    pub r_c: Option<f64>,

    /// Cropping line start (defaults to half the offset count).
    #[arg(long)]
    pub o0: Option<f64>,

    /// Noise power over mean signal power.
    #[arg(long)]
    pub noise_frac: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Recipe {
    Train,
    Val,
}

impl Recipe {
    pub fn counts(self) -> BTreeMap<usize, usize> {
        match self {
            Recipe::Train => [(50, 1000), (60, 1000), (80, 1000), (100, 1000)].into(),
            Recipe::Val => [(60, 500), (80, 500)].into(),
        }
    }
}

pub fn parse_counts(items: &[String]) -> Result<BTreeMap<usize, usize>> {
    let mut out = BTreeMap::new();
    for s in items {
        let (k, n) = s
            .split_once('=')
            .ok_or_else(|| anyhow!("--count expects K=N, got {s:?}"))?;
        let k: usize = k.trim().parse().with_context(|| format!("--count {s:?}"))?;
        let n: usize = n.trim().parse().with_context(|| format!("--count {s:?}"))?;
        *out.entry(k).or_insert(0) += n;
    }
    Ok(out)
}

pub fn spec_from(cli: &Cli, a: &SynthArgs) -> SynthSpec {
    let mut spec = SynthSpec::with_dims(a.n_depth, a.n_offset);
    spec.seed = cli.seed;
    if let Some(v) = a.r_c {
        spec.r_c = v;
    }
    if let Some(v) = a.o0 {
        spec.o_0 = v;
    }
    if let Some(v) = a.noise_frac {
        spec.noise_frac = v;
    }
    spec
}

pub fn run(cli: &Cli, a: &SynthArgs) -> Result<()> {
    let mut counts = parse_counts(&a.counts)?;
    if let Some(r) = a.recipe {
        for (k, n) in r.counts() {
            *counts.entry(k).or_insert(0) += n;
        }
    }
    counts.retain(|_, n| *n > 0);
    if counts.is_empty() {
        bail!("nothing to generate: give --count K=N or --recipe");
    }
    let manifest = generate_dataset(&spec_from(cli, a), &counts, &a.out)?;
    println!(
        "{} gathers written to {}",
        manifest.entries.len(),
        a.out.display()
    );
    Ok(())
}
