//! Pipeline configuration from preset, config file and `--set` flags, in
//! that order of precedence (later wins).

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use rmopick_core::{PipelineConfig, Preset};

use crate::{Cli, PresetArg};

impl From<PresetArg> for Preset {
    fn from(p: PresetArg) -> Self {
        match p {
            PresetArg::Bp => Preset::BP,
            PresetArg::Fa => Preset::FA,
            PresetArg::Fb => Preset::FB,
        }
    }
}

pub fn resolve(cli: &Cli) -> Result<PipelineConfig> {
    let mut cfg = PipelineConfig::preset(cli.preset.into());
    if let Some(path) = &cli.config {
        apply_file(&mut cfg, path)?;
    }
    for o in &cli.overrides {
        let (key, value) = parse_override(o)?;
        cfg.set(&key, value)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Reads a flat TOML table whose values are all numbers.
pub fn apply_file(cfg: &mut PipelineConfig, path: &Path) -> Result<()> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    apply_toml(cfg, &text).with_context(|| format!("in config file {}", path.display()))
}

pub fn apply_toml(cfg: &mut PipelineConfig, text: &str) -> Result<()> {
    let table: toml::Table = text.parse()?;
    for (key, value) in &table {
        let v = match value {
            toml::Value::Integer(i) => *i as f64,
            toml::Value::Float(f) => *f,
            other => bail!("{key}: expected a number, found {}", other.type_str()),
        };
        cfg.set(key, v)?;
    }
    Ok(())
}

pub fn parse_override(s: &str) -> Result<(String, f64)> {
    let (key, value) = s
        .split_once('=')
        .ok_or_else(|| anyhow!("--set expects KEY=VALUE, got {s:?}"))?;
    let v: f64 = value
        .trim()
        .parse()
        .with_context(|| format!("--set {key}: {value:?} is not a number"))?;
    Ok((key.trim().to_owned(), v))
}
