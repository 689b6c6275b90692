//! Labeled synthetic gathers.
//!
//! Each gather carries `k_c` curvatures `z(o)^2 = z0^2 + beta o^2 + gamma o^4`
//! whose zero-offset depths follow a noisy ladder. Shape coefficients are
//! drawn from a depth-dependent box, far-offset points are cropped, and
//! every surviving point is rendered as a Ricker wavelet whose frequency
//! falls linearly with depth. Uniform noise is added last.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{write_curves, Curve};
use crate::error::{Error, Result};
use crate::raster::{write_raster, BinaryMask, Gather, LabelMask, Raster};

/// Every randomized knob of the generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    /// Curvatures per gather.
    pub k_c: usize,
    /// Ladder span in depth samples.
    pub d_max: f64,
    pub n_depth: usize,
    pub n_offset: usize,
    /// Cropping rate: points with `o > z * r_c + o_0` are removed.
    pub r_c: f64,
    /// Initial offset position of the cropping line (traces).
    pub o_0: f64,
    /// Wavelet frequency at depth 0, cycles per sample.
    pub f_start: f64,
    /// Wavelet frequency at depth `d_max`.
    pub f_end: f64,
    /// Noise power as a fraction of mean signal power.
    pub noise_frac: f64,
    /// Range of the shared ladder start.
    pub eps_z: (f64, f64),
    /// Half-width of the per-rung ladder jitter.
    pub eps_d: f64,
    /// Multiplier on `eps_d`.
    pub eps_d_scale: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            k_c: 60,
            d_max: 1000.0,
            n_depth: 1000,
            n_offset: 100,
            r_c: 0.2,
            o_0: 50.0,
            f_start: 16.0 / 1000.0,
            f_end: 4.0 / 1000.0,
            noise_frac: 0.05,
            eps_z: (10.0, 200.0),
            eps_d: 0.0125,
            eps_d_scale: 1.0,
            seed: 0,
        }
    }
}

impl SynthSpec {
    /// Default spec for an `n_depth` x `n_offset` raster; the cropping line
    /// starts at mid-offset.
    pub fn with_dims(n_depth: usize, n_offset: usize) -> Self {
        SynthSpec {
            d_max: n_depth as f64,
            n_depth,
            n_offset,
            o_0: n_offset as f64 / 2.0,
            ..SynthSpec::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_owned()));
        if self.k_c < 1 {
            return bad("k_c must be at least 1");
        }
        if self.n_depth < 2 || self.n_offset < 2 {
            return bad("raster must be at least 2x2");
        }
        if !(self.d_max > 0.0 && self.d_max <= self.n_depth as f64) {
            return bad("d_max must lie in (0, n_depth]");
        }
        if !(self.f_start >= self.f_end && self.f_end > 0.0) {
            return bad("frequencies must satisfy f_start >= f_end > 0");
        }
        if !(0.0..1.0).contains(&self.noise_frac) {
            return bad("noise_frac must lie in [0, 1)");
        }
        if !(self.eps_z.0 <= self.eps_z.1) || self.eps_d < 0.0 {
            return bad("ladder jitter ranges are inverted");
        }
        Ok(())
    }

    /// Wavelet frequency for an event at `depth`.
    pub fn frequency_at(&self, depth: f64) -> f64 {
        let t = (depth / self.d_max).clamp(0.0, 1.0);
        self.f_start + (self.f_end - self.f_start) * t
    }
}

/// Shape of one curvature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveParams {
    pub z0: f64,
    pub beta: f64,
    pub gamma: f64,
}

/// Inclusive bounds of the uniform draws for one depth part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamBox {
    pub beta: (f64, f64),
    pub gamma: (f64, f64),
}

const SHALLOW_AND_DEEP: ParamBox = ParamBox {
    beta: (0.275, 1.125),
    gamma: (2.75e-4, 6.25e-4),
};
const UPPER_MIDDLE: ParamBox = ParamBox {
    beta: (0.125, 0.50),
    gamma: (2.00e-4, 3.75e-4),
};
const LOWER_MIDDLE: ParamBox = ParamBox {
    beta: (-0.50, 0.125),
    gamma: (-2.50e-4, -1.25e-4),
};

/// Parameter box for curvature `k` (1-based) of `k_c`. Part boundaries are
/// `floor(k_c/3)`, `floor(k_c/2)` and `floor(2 k_c/3)`.
pub fn param_box(k: usize, k_c: usize) -> Result<ParamBox> {
    if k < 1 || k > k_c {
        return Err(Error::InvalidConfig(format!(
            "curvature index {k} outside [1, {k_c}]"
        )));
    }
    let b = if k < k_c / 3 {
        SHALLOW_AND_DEEP
    } else if k < k_c / 2 {
        UPPER_MIDDLE
    } else if k < 2 * k_c / 3 {
        LOWER_MIDDLE
    } else {
        SHALLOW_AND_DEEP
    };
    Ok(b)
}

pub fn sample_curve_params(k: usize, k_c: usize, rng: &mut impl Rng) -> Result<(f64, f64)> {
    let b = param_box(k, k_c)?;
    let beta = rng.random_range(b.beta.0..b.beta.1);
    let gamma = rng.random_range(b.gamma.0..b.gamma.1);
    Ok((beta, gamma))
}

/// Ladder of zero-offset depths from an explicit start and per-rung jitter:
/// `z0[k] = start + (d_max / k_c + jitter[k-1]) * k`.
pub fn ladder_depths(start: f64, jitter: &[f64], d_max: f64) -> Vec<f64> {
    let k_c = jitter.len() as f64;
    jitter
        .iter()
        .enumerate()
        .map(|(i, j)| start + (d_max / k_c + j) * (i + 1) as f64)
        .collect()
}

/// Draws the ladder start once and the jitter once per rung.
pub fn initial_depths(spec: &SynthSpec, rng: &mut impl Rng) -> Result<Vec<f64>> {
    if spec.k_c == 0 {
        return Err(Error::InvalidConfig("k_c must be at least 1".into()));
    }
    let start = uniform(rng, spec.eps_z);
    let half = spec.eps_d * spec.eps_d_scale;
    let jitter: Vec<f64> = (0..spec.k_c).map(|_| uniform(rng, (-half, half))).collect();
    Ok(ladder_depths(start, &jitter, spec.d_max))
}

fn uniform(rng: &mut impl Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo < hi {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

/// Evaluates the curvature at each offset, omitting offsets where the
/// radicand is not positive.
pub fn curve_depths(
    params: &CurveParams,
    offsets: impl IntoIterator<Item = usize>,
) -> Vec<(usize, f64)> {
    offsets
        .into_iter()
        .filter_map(|o| {
            let of = o as f64;
            let o2 = of * of;
            let r = params.z0 * params.z0 + params.beta * o2 + params.gamma * o2 * o2;
            (r > 0.0).then(|| (o, r.sqrt()))
        })
        .collect()
}

/// Keeps points with `o <= z * r_c + o_0`.
pub fn crop_points(points: Vec<(usize, f64)>, r_c: f64, o_0: f64) -> Vec<(usize, f64)> {
    points
        .into_iter()
        .filter(|&(o, z)| o as f64 <= z * r_c + o_0)
        .collect()
}

/// Ricker amplitude at depth `z` for an event centered on `center`.
#[inline]
pub fn ricker(z: f64, center: f64, freq: f64) -> f64 {
    let a = PI * (z - center) * freq;
    let h = a * a;
    (1.0 - 2.0 * h) * (-h).exp()
}

/// A rendered gather with its labels.
#[derive(Debug, Clone)]
pub struct SyntheticGather {
    pub gather: Gather,
    pub label: LabelMask,
    /// Analytic picks that survived cropping and bounds, one per visible
    /// curvature, ordered by zero-offset depth.
    pub curves: Vec<Curve>,
    pub params: Vec<CurveParams>,
}

/// Renders curves into a gather plus label mask. Points outside the raster
/// are dropped. Noise draws come from `rng`.
pub fn render_gather(
    curves: &[Curve],
    spec: &SynthSpec,
    rng: &mut impl Rng,
) -> Result<(Gather, LabelMask)> {
    let (n_depth, n_offset) = (spec.n_depth, spec.n_offset);
    let mut columns = vec![vec![0.0f64; n_depth]; n_offset];
    let mut label = BinaryMask::zeros(n_depth, n_offset);
    for curve in curves {
        for p in curve.points() {
            let row = p.depth.round();
            if p.offset >= n_offset || row < 0.0 || row >= n_depth as f64 {
                continue;
            }
            label.set(row as usize, p.offset, true);
            let f = spec.frequency_at(p.depth);
            for (z, v) in columns[p.offset].iter_mut().enumerate() {
                *v += ricker(z as f64, p.depth, f);
            }
        }
    }

    if spec.noise_frac > 0.0 {
        let n = (n_depth * n_offset) as f64;
        let power = columns.iter().flatten().map(|v| v * v).sum::<f64>() / n;
        // U(-a, a) has power a^2 / 3.
        let a = (3.0 * spec.noise_frac * power).sqrt();
        if a > 0.0 {
            for v in columns.iter_mut().flatten() {
                *v += rng.random_range(-a..a);
            }
        }
    }

    let gather = Gather::new(Raster::from_columns(&columns)?.quantized())?;
    Ok((gather, label))
}

/// Draws every curvature of one gather and renders it.
pub fn synthesize(spec: &SynthSpec) -> Result<SyntheticGather> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let z0s = initial_depths(spec, &mut rng)?;
    let mut params = Vec::with_capacity(spec.k_c);
    for (i, &z0) in z0s.iter().enumerate() {
        let (beta, gamma) = sample_curve_params(i + 1, spec.k_c, &mut rng)?;
        params.push(CurveParams { z0, beta, gamma });
    }

    let max_depth = spec.n_depth as f64 - 0.5;
    let mut curves = Vec::new();
    for p in &params {
        let pts = crop_points(curve_depths(p, 0..spec.n_offset), spec.r_c, spec.o_0);
        let pts: Vec<_> = pts.into_iter().filter(|&(_, z)| z < max_depth).collect();
        if !pts.is_empty() {
            curves.push(Curve::from_pairs(pts)?);
        }
    }

    let (gather, label) = render_gather(&curves, spec, &mut rng)?;
    Ok(SyntheticGather {
        gather,
        label,
        curves,
        params,
    })
}

/// Seed of the `index`-th gather of a dataset (splitmix64 of the pair).
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub gather: String,
    pub mask: String,
    pub truth: String,
    pub k_c: usize,
    pub seed: u64,
}

/// Dataset listing. Paths are relative to the manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub spec: SynthSpec,
    pub entries: Vec<ManifestEntry>,
}

pub const MANIFEST_NAME: &str = "manifest.json";
pub const GATHER_EXT: &str = "cigr";
pub const MASK_SUFFIX: &str = ".mask.cigr";
pub const TRUTH_SUFFIX: &str = ".truth.csv";

impl DatasetManifest {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Serde(e.to_string()))
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text =
            serde_json::to_string_pretty(self).map_err(|e| Error::Serde(e.to_string()))?;
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// Generates `counts[k_c]` gathers for every curvature count, writing a
/// gather, a label mask and the analytic picks for each, plus
/// `manifest.json`. Output is independent of thread count.
pub fn generate_dataset(
    template: &SynthSpec,
    counts: &BTreeMap<usize, usize>,
    out_dir: impl AsRef<Path>,
) -> Result<DatasetManifest> {
    template.validate()?;
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let jobs: Vec<(usize, usize)> = counts
        .iter()
        .flat_map(|(&k_c, &n)| std::iter::repeat_n(k_c, n))
        .enumerate()
        .collect();

    let entries = jobs
        .par_iter()
        .map(|&(index, k_c)| {
            let spec = SynthSpec {
                k_c,
                seed: derive_seed(template.seed, index as u64),
                ..template.clone()
            };
            let sample = synthesize(&spec)?;
            let stem = format!("cig_{index:05}");
            let entry = ManifestEntry {
                gather: format!("{stem}.{GATHER_EXT}"),
                mask: format!("{stem}{MASK_SUFFIX}"),
                truth: format!("{stem}{TRUTH_SUFFIX}"),
                k_c,
                seed: spec.seed,
            };
            let at = |name: &str| -> PathBuf { out_dir.join(name) };
            write_raster(sample.gather.raster(), at(&entry.gather))?;
            write_raster(&sample.label.to_raster(), at(&entry.mask))?;
            write_curves(&sample.curves, at(&entry.truth))?;
            Ok(entry)
        })
        .collect::<Result<Vec<_>>>()?;

    let manifest = DatasetManifest {
        spec: template.clone(),
        entries,
    };
    manifest.write(out_dir.join(MANIFEST_NAME))?;
    Ok(manifest)
}
