//! Inference hyperparameters for every stage, with the three site presets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the four-channel feature stack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    /// Short AGC window (samples).
    pub h1: usize,
    /// Long AGC window (samples).
    pub h2: usize,
    /// AGC stabilizer.
    pub epsilon: f64,
    /// Pass band in cycles per depth sample.
    pub f_min: f64,
    pub f_max: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            h1: 15,
            h2: 31,
            epsilon: 1e-8,
            f_min: 2.0 / 1000.0,
            f_max: 60.0 / 1000.0,
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.h1 < 1 || self.h2 < 1 {
            return invalid("AGC windows must be at least 1 sample");
        }
        if !(self.epsilon > 0.0) {
            return invalid("epsilon must be positive");
        }
        if !(0.0 <= self.f_min && self.f_min < self.f_max && self.f_max <= 0.5) {
            return invalid("pass band must satisfy 0 <= f_min < f_max <= 0.5");
        }
        Ok(())
    }
}

/// Curve merging by mixed distance and density clustering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterConfig {
    /// Weight of the slope term against the endpoint term, in `[0, 1]`.
    pub alpha: f64,
    /// Multiplier on offset differences between endpoints.
    pub w_offset: f64,
    /// Multiplier on depth differences between endpoints.
    pub w_depth: f64,
    pub d_eps: f64,
    pub n_min_pts: usize,
    /// Points per local-slope window.
    pub slope_win: usize,
    pub slope_stride: usize,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig {
            alpha: 0.5,
            w_offset: 1.5,
            w_depth: 1.0,
            d_eps: 8.0,
            n_min_pts: 1,
            slope_win: 11,
            slope_stride: 5,
        }
    }
}

impl ClusterConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return invalid("alpha must lie in [0, 1]");
        }
        if !(self.w_offset >= 0.0 && self.w_depth >= 0.0) {
            return invalid("anisotropic weights must be non-negative");
        }
        if !(self.d_eps > 0.0) {
            return invalid("d_eps must be positive");
        }
        if self.n_min_pts < 1 {
            return invalid("n_min_pts must be at least 1");
        }
        if self.slope_win < 2 {
            return invalid("slope_win must be at least 2");
        }
        if self.slope_stride < 1 {
            return invalid("slope_stride must be at least 1");
        }
        Ok(())
    }
}

/// Slope field and slope-constrained local regression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineConfig {
    pub h_prior: f64,
    pub h_data: f64,
    pub h_para: f64,
    /// Prior weight; the effective penalty is `lambda / (2 h_para^2)`.
    pub lambda: f64,
    /// Shortest curve (in points) kept after refinement.
    pub n_min: usize,
    /// Slope-field cell size along offset (traces).
    pub cell_offset: usize,
    /// Slope-field cell size along depth (samples).
    pub cell_depth: usize,
}

impl Default for RefineConfig {
    fn default() -> Self {
        RefineConfig {
            h_prior: 5.0,
            h_data: 5.0,
            h_para: 50.0,
            // Unit effective penalty with the default h_para.
            lambda: 5000.0,
            n_min: 20,
            cell_offset: 2,
            cell_depth: 10,
        }
    }
}

impl RefineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.h_prior > 0.0 && self.h_data > 0.0 && self.h_para > 0.0) {
            return invalid("bandwidths must be positive");
        }
        if !(self.lambda >= 0.0) {
            return invalid("lambda must be non-negative");
        }
        if self.n_min < 1 {
            return invalid("n_min must be at least 1");
        }
        if self.cell_offset < 1 || self.cell_depth < 1 {
            return invalid("slope-field cells must be at least 1x1");
        }
        Ok(())
    }

    /// Penalty multiplying the squared slope deviation.
    pub fn prior_weight(&self) -> f64 {
        self.lambda / (2.0 * self.h_para * self.h_para)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    /// Semblance half-window (samples).
    pub h_s: usize,
    /// Tracking threshold (pixels).
    pub d_t: f64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig { h_s: 5, d_t: 3.0 }
    }
}

impl MetricConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.d_t > 0.0) {
            return invalid("d_t must be positive");
        }
        Ok(())
    }
}

/// Every inference hyperparameter of the cascade.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub features: FeatureConfig,
    pub t_seg: f64,
    pub cluster: ClusterConfig,
    pub refine: RefineConfig,
    pub metrics: MetricConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig::preset(Preset::FA)
    }
}

/// Per-site hyperparameter presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    BP,
    FA,
    FB,
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bp" => Ok(Preset::BP),
            "fa" | "f-a" => Ok(Preset::FA),
            "fb" | "f-b" => Ok(Preset::FB),
            other => Err(Error::InvalidConfig(format!("unknown preset {other:?}"))),
        }
    }
}

/// Keys accepted by [`PipelineConfig::set`].
pub const CONFIG_KEYS: &[&str] = &[
    "h1",
    "h2",
    "epsilon",
    "f_min",
    "f_max",
    "t_seg",
    "alpha",
    "w_offset",
    "w_depth",
    "d_eps",
    "n_min_pts",
    "slope_win",
    "slope_stride",
    "h_prior",
    "h_data",
    "h_para",
    "lambda",
    "n_min",
    "cell_offset",
    "cell_depth",
    "h_s",
    "d_t",
];

impl PipelineConfig {
    pub fn preset(preset: Preset) -> Self {
        let (h1, h2, n_min_pts, d_eps, n_min) = match preset {
            Preset::BP => (9, 15, 1, 8.0, 20),
            Preset::FA => (15, 31, 1, 8.0, 20),
            Preset::FB => (15, 31, 1, 4.0, 10),
        };
        PipelineConfig {
            features: FeatureConfig {
                h1,
                h2,
                ..FeatureConfig::default()
            },
            t_seg: 0.5,
            cluster: ClusterConfig {
                n_min_pts,
                d_eps,
                ..ClusterConfig::default()
            },
            refine: RefineConfig {
                h_prior: 5.0,
                h_data: 5.0,
                h_para: 50.0,
                n_min,
                ..RefineConfig::default()
            },
            metrics: MetricConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.features.validate()?;
        if !(self.t_seg > 0.0 && self.t_seg < 1.0) {
            return invalid("t_seg must lie in (0, 1)");
        }
        self.cluster.validate()?;
        self.refine.validate()?;
        self.metrics.validate()
    }

    /// Sets one parameter by its flat key name. The value is parsed as a
    /// number; integer-valued keys reject fractional input.
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        let count = |v: f64| -> Result<usize> {
            if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                Ok(v as usize)
            } else {
                Err(Error::InvalidConfig(format!(
                    "{key} expects a non-negative integer, got {v}"
                )))
            }
        };
        match key {
            "h1" => self.features.h1 = count(value)?,
            "h2" => self.features.h2 = count(value)?,
            "epsilon" => self.features.epsilon = value,
            "f_min" => self.features.f_min = value,
            "f_max" => self.features.f_max = value,
            "t_seg" => self.t_seg = value,
            "alpha" => self.cluster.alpha = value,
            "w_offset" => self.cluster.w_offset = value,
            "w_depth" => self.cluster.w_depth = value,
            "d_eps" => self.cluster.d_eps = value,
            "n_min_pts" => self.cluster.n_min_pts = count(value)?,
            "slope_win" => self.cluster.slope_win = count(value)?,
            "slope_stride" => self.cluster.slope_stride = count(value)?,
            "h_prior" => self.refine.h_prior = value,
            "h_data" => self.refine.h_data = value,
            "h_para" => self.refine.h_para = value,
            "lambda" => self.refine.lambda = value,
            "n_min" => self.refine.n_min = count(value)?,
            "cell_offset" => self.refine.cell_offset = count(value)?,
            "cell_depth" => self.refine.cell_depth = count(value)?,
            "h_s" => self.metrics.h_s = count(value)?,
            "d_t" => self.metrics.d_t = value,
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown config key {other:?}"
                )));
            }
        }
        Ok(())
    }

    /// Flat `(key, value)` view in [`CONFIG_KEYS`] order.
    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        let f = &self.features;
        let c = &self.cluster;
        let r = &self.refine;
        let m = &self.metrics;
        let values = [
            f.h1 as f64,
            f.h2 as f64,
            f.epsilon,
            f.f_min,
            f.f_max,
            self.t_seg,
            c.alpha,
            c.w_offset,
            c.w_depth,
            c.d_eps,
            c.n_min_pts as f64,
            c.slope_win as f64,
            c.slope_stride as f64,
            r.h_prior,
            r.h_data,
            r.h_para,
            r.lambda,
            r.n_min as f64,
            r.cell_offset as f64,
            r.cell_depth as f64,
            m.h_s as f64,
            m.d_t,
        ];
        CONFIG_KEYS.iter().copied().zip(values).collect()
    }
}

fn invalid<T>(msg: &str) -> Result<T> {
    Err(Error::InvalidConfig(msg.to_owned()))
}
