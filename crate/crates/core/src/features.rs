//! Four-channel input features: two trace-wise AGC maps, a band-passed map
//! and a local-peak mask.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::config::FeatureConfig;
use crate::error::{Error, Result};
use crate::raster::{Gather, Raster};

/// Automatic gain control of one trace with a trailing window of `h`
/// samples. The first `h - 1` samples use the available prefix.
pub fn agc_trace(trace: &[f64], h: usize, epsilon: f64) -> Result<Vec<f64>> {
    if trace.is_empty() {
        return Err(Error::EmptyInput("agc trace"));
    }
    if h < 1 {
        return Err(Error::InvalidConfig("AGC window must be at least 1".into()));
    }
    // prefix[t] = sum of squares of trace[..t]
    let mut prefix = Vec::with_capacity(trace.len() + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for &x in trace {
        acc += x * x;
        prefix.push(acc);
    }
    Ok(trace
        .iter()
        .enumerate()
        .map(|(t, &x)| {
            let start = (t + 1).saturating_sub(h);
            let energy = ((prefix[t + 1] - prefix[start]) / (t + 1 - start) as f64).max(0.0);
            x / (energy.sqrt() + epsilon)
        })
        .collect())
}

/// Zeroes every DFT bin whose absolute frequency (cycles per sample) lies
/// outside `[f_min, f_max]` and returns the real part of the inverse.
pub fn bandpass_trace(trace: &[f64], f_min: f64, f_max: f64) -> Result<Vec<f64>> {
    let mut planner = FftPlanner::new();
    bandpass_with(&mut planner, trace, f_min, f_max)
}

fn bandpass_with(
    planner: &mut FftPlanner<f64>,
    trace: &[f64],
    f_min: f64,
    f_max: f64,
) -> Result<Vec<f64>> {
    if trace.len() < 2 {
        return Err(Error::EmptyInput("band-pass needs at least 2 samples"));
    }
    if !(f_min < f_max) {
        return Err(Error::InvalidConfig(format!(
            "pass band [{f_min}, {f_max}] is empty"
        )));
    }
    let n = trace.len();
    let mut buf: Vec<Complex<f64>> = trace.iter().map(|&x| Complex::new(x, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    for (j, bin) in buf.iter_mut().enumerate() {
        let k = if j <= n / 2 {
            j as f64
        } else {
            j as f64 - n as f64
        };
        let f = (k / n as f64).abs();
        if f < f_min || f > f_max {
            *bin = Complex::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    Ok(buf.into_iter().map(|c| c.re * scale).collect())
}

/// 1 where a sample is a strict local maximum along depth; borders are 0.
pub fn peak_mask(gather: &Gather) -> Raster {
    let (rows, cols) = gather.dims();
    let mut out = Raster::zeros(rows, cols).into_data();
    for c in 0..cols {
        for r in 1..rows.saturating_sub(1) {
            let v = gather.amplitude(r, c);
            if v > gather.amplitude(r - 1, c) && v > gather.amplitude(r + 1, c) {
                out[r * cols + c] = 1.0;
            }
        }
    }
    Raster::new(rows, cols, out).expect("binary values are finite")
}

/// The four channels in their fixed order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureStack {
    pub agc1: Raster,
    pub agc2: Raster,
    pub bandpass: Raster,
    pub peaks: Raster,
}

impl FeatureStack {
    pub fn channels(&self) -> [&Raster; 4] {
        [&self.agc1, &self.agc2, &self.bandpass, &self.peaks]
    }

    pub fn dims(&self) -> (usize, usize) {
        self.agc1.dims()
    }
}

/// File suffixes used when a stack is exported channel by channel.
pub const CHANNEL_SUFFIXES: [&str; 4] = [".agc1.cigr", ".agc2.cigr", ".bp.cigr", ".peak.cigr"];

pub fn feature_stack(gather: &Gather, config: &FeatureConfig) -> Result<FeatureStack> {
    config.validate()?;
    let n = gather.n_offset();
    let mut planner = FftPlanner::new();
    let mut agc1 = Vec::with_capacity(n);
    let mut agc2 = Vec::with_capacity(n);
    let mut bp = Vec::with_capacity(n);
    for o in 0..n {
        let trace = gather.trace(o);
        agc1.push(agc_trace(&trace, config.h1, config.epsilon)?);
        agc2.push(agc_trace(&trace, config.h2, config.epsilon)?);
        bp.push(bandpass_with(
            &mut planner,
            &trace,
            config.f_min,
            config.f_max,
        )?);
    }
    Ok(FeatureStack {
        agc1: Raster::from_columns(&agc1)?,
        agc2: Raster::from_columns(&agc2)?,
        bandpass: Raster::from_columns(&bp)?,
        peaks: peak_mask(gather),
    })
}
