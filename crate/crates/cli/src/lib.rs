//! Command-line front-end: synthesis, picking, evaluation, plotting and
//! one-parameter sweeps over directories of CIGR gathers.

use std::ffi::OsString;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rmopick_core::segment::DEFAULT_SEG_SUFFIX;
use rmopick_core::SegmenterKind;

pub mod eval;
pub mod inputs;
pub mod pick;
pub mod plot;
pub mod settings;
pub mod sweep;
pub mod synth;

#[derive(Debug, Parser)]
#[command(
    name = "rmopick",
    version,
    about = "Residual-moveout picking on common-image gathers"
)]
pub struct Cli {
    /// Base seed for anything randomized.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Flat TOML file of `key = value` pipeline parameters.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Hyperparameter preset applied before the config file.
    #[arg(long, global = true, value_enum, default_value_t = PresetArg::Fa)]
    pub preset: PresetArg,

    /// Single `key=value` override, applied after the config file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PresetArg {
    Bp,
    Fa,
    Fb,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate labeled synthetic gathers.
    Synth(synth::SynthArgs),
    /// Run the picking cascade on gathers.
    Pick(pick::PickArgs),
    /// Score automatic picks against manual ones.
    Eval(eval::EvalArgs),
    /// Render a gather with curve overlays as a binary PPM image.
    Plot(plot::PlotArgs),
    /// Vary one parameter and evaluate each value.
    Sweep(sweep::SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SegmenterArg {
    /// Blurred ground-truth labels (`<stem>.mask.cigr`).
    Oracle,
    /// Peak mask gated by AGC magnitude.
    Baseline,
    /// Precomputed maps at `<stem><seg-suffix>`.
    External,
}

/// Segmenter selection shared by `pick` and `sweep`.
#[derive(Debug, Clone, Args)]
pub struct SegmenterOpts {
    #[arg(long, value_enum, default_value_t = SegmenterArg::Oracle)]
    pub segmenter: SegmenterArg,

    /// Gaussian blur of the oracle labels (pixels).
    #[arg(long, default_value_t = 1.0)]
    pub blur_sigma: f64,

    /// AGC-magnitude quantile of the baseline segmenter.
    #[arg(long, default_value_t = 0.8)]
    pub quantile: f64,

    /// For `external`: `name.cigr` is paired with `name<SUFFIX>` in the
    /// same directory.
    #[arg(long, default_value = DEFAULT_SEG_SUFFIX)]
    pub seg_suffix: String,
}

impl SegmenterOpts {
    pub fn kind(&self) -> SegmenterKind {
        match self.segmenter {
            SegmenterArg::Oracle => SegmenterKind::Oracle {
                blur_sigma: self.blur_sigma,
            },
            SegmenterArg::Baseline => SegmenterKind::Baseline {
                quantile: self.quantile,
            },
            SegmenterArg::External => SegmenterKind::External {
                suffix: self.seg_suffix.clone(),
            },
        }
    }
}

/// Runs one parsed invocation inside a pool of `--jobs` threads.
pub fn run(cli: Cli) -> Result<()> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.jobs {
        anyhow::ensure!(n >= 1, "--jobs must be at least 1");
        pool = pool.num_threads(n);
    }
    let pool = pool.build().context("building worker pool")?;
    pool.install(|| dispatch(&cli))
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Synth(a) => synth::run(cli, a),
        Command::Pick(a) => pick::run(cli, a),
        Command::Eval(a) => eval::run(cli, a),
        Command::Plot(a) => plot::run(a),
        Command::Sweep(a) => sweep::run(cli, a),
    }
}

/// Parses `args` (program name first) and runs them.
pub fn run_from<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run(Cli::try_parse_from(args)?)
}
