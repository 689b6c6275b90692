use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use rmopick_core::{read_curves, read_raster, Curve, Gather, Raster};

#[derive(Debug, Clone, Args)]
pub struct PlotArgs {
    #[arg(long)]
    pub gather: PathBuf,

    /// Curve CSV to overlay. Repeatable; sets cycle through red, green,
    /// blue, yellow.
    #[arg(long = "curves")]
    pub curves: Vec<PathBuf>,

    /// Slope-field raster drawn as a second panel to the right.
    #[arg(long)]
    pub slope: Option<PathBuf>,

    /// Output `.ppm` file.
    #[arg(long)]
    pub out: PathBuf,
}

const PALETTE: [[u8; 3]; 4] = [[230, 30, 30], [30, 200, 30], [40, 80, 255], [240, 220, 0]];
const GAP: usize = 2;

/// Binary PPM: the gather in gray (zero amplitude at mid-gray), curve
/// points as colored pixels, and optionally the slope field in a diverging
/// blue-white-red panel resampled to the gather height.
pub fn render(gather: &Gather, curve_sets: &[Vec<Curve>], slope: Option<&Raster>) -> Vec<u8> {
    let (rows, cols) = gather.dims();
    let panel = if slope.is_some() { cols + GAP } else { 0 };
    let width = cols + panel;
    let mut px = vec![0u8; rows * width * 3];
    let mut put = |r: usize, c: usize, rgb: [u8; 3]| {
        let i = (r * width + c) * 3;
        px[i..i + 3].copy_from_slice(&rgb);
    };

    let peak = gather
        .raster()
        .data()
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    for r in 0..rows {
        for c in 0..cols {
            let v = if peak > 0.0 {
                gather.amplitude(r, c) / peak
            } else {
                0.0
            };
            let g = (127.5 + 127.5 * v).round().clamp(0.0, 255.0) as u8;
            put(r, c, [g, g, g]);
        }
    }
    for (i, set) in curve_sets.iter().enumerate() {
        let rgb = PALETTE[i % PALETTE.len()];
        for p in set.iter().flat_map(|c| c.points()) {
            let r = p.depth.round();
            if p.offset < cols && r >= 0.0 && (r as usize) < rows {
                put(r as usize, p.offset, rgb);
            }
        }
    }

    if let Some(field) = slope {
        let (fr, fc) = field.dims();
        let peak = field.data().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for r in 0..rows {
            for c in 0..cols {
                let v = if fr == 0 || fc == 0 || peak == 0.0 {
                    0.0
                } else {
                    field.get(r * fr / rows, c * fc / cols) / peak
                };
                let fade = ((1.0 - v.abs()) * 255.0).round().clamp(0.0, 255.0) as u8;
                let rgb = if v >= 0.0 {
                    [255, fade, fade]
                } else {
                    [fade, fade, 255]
                };
                put(r, cols + GAP + c, rgb);
            }
        }
    }

    let mut out = format!("P6\n{width} {rows}\n255\n").into_bytes();
    out.extend_from_slice(&px);
    out
}

pub fn run(a: &PlotArgs) -> Result<()> {
    let gather = Gather::new(read_raster(&a.gather)?)?;
    let sets = a
        .curves
        .iter()
        .map(|p| read_curves(p).with_context(|| format!("reading {}", p.display())))
        .collect::<Result<Vec<_>>>()?;
    let slope = a.slope.as_ref().map(read_raster).transpose()?;
    if let Some(s) = &slope {
        if s.rows() > gather.n_depth() || s.cols() > gather.n_offset() {
            bail!(
                "slope field {:?} is larger than the gather {:?}",
                s.dims(),
                gather.dims()
            );
        }
    }
    let bytes = render(&gather, &sets, slope.as_ref());
    fs::write(&a.out, bytes).with_context(|| format!("writing {}", a.out.display()))?;
    Ok(())
}
