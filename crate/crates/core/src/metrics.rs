//! Semblance along a pick, track rate against reference picks, and the
//! slope-field mean squared error.

use std::fmt::Write as _;

use crate::config::{ClusterConfig, MetricConfig, RefineConfig};
use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::raster::Gather;
use crate::refine::{field_from_curves, SlopeField, SlopeGrid};

/// Coherence of the gather along `curve` over a window of `2 h_s + 1`
/// samples. Depths are rounded; samples outside the gather are skipped.
pub fn semblance(gather: &Gather, curve: &Curve, h_s: usize) -> Result<f64> {
    if curve.is_empty() {
        return Err(Error::EmptyInput("semblance of an empty curve"));
    }
    let (n_depth, n_offset) = gather.dims();
    let h = h_s as i64;
    let (mut num, mut den) = (0.0, 0.0);
    for m in -h..=h {
        let mut sum = 0.0;
        for p in curve.points() {
            let z = p.depth.round() as i64 + m;
            if p.offset >= n_offset || z < 0 || z >= n_depth as i64 {
                continue;
            }
            let g = gather.amplitude(z as usize, p.offset);
            sum += g;
            den += g * g;
        }
        num += sum * sum;
    }
    let den = den * curve.len() as f64;
    Ok(if den > 0.0 { num / den } else { 0.0 })
}

/// Mean absolute depth difference over shared offsets; `+inf` without
/// overlap.
pub fn curve_error(auto: &Curve, manual: &Curve) -> Result<f64> {
    if auto.is_empty() || manual.is_empty() {
        return Err(Error::EmptyInput("curve_error needs non-empty curves"));
    }
    let (mut sum, mut n) = (0.0, 0usize);
    for p in manual.points() {
        if let Some(d) = auto.depth_at(p.offset) {
            sum += (d - p.depth).abs();
            n += 1;
        }
    }
    Ok(if n == 0 {
        f64::INFINITY
    } else {
        sum / n as f64
    })
}

/// Manual curves tracked by at least one auto curve.
pub fn tracked_count(autos: &[Curve], manuals: &[Curve], d_t: f64) -> usize {
    manuals
        .iter()
        .filter(|m| !m.is_empty())
        .filter(|m| {
            autos
                .iter()
                .filter(|a| !a.is_empty())
                .any(|a| curve_error(a, m).is_ok_and(|e| e < d_t))
        })
        .count()
}

/// Fraction of non-empty manual curves tracked within `d_t`. With no
/// manual curves there is nothing to miss and the rate is 1.
pub fn track_rate(autos: &[Curve], manuals: &[Curve], d_t: f64) -> f64 {
    let total = manuals.iter().filter(|m| !m.is_empty()).count();
    if total == 0 {
        return 1.0;
    }
    tracked_count(autos, manuals, d_t) as f64 / total as f64
}

/// Mean squared difference of two fields on the same grid.
pub fn field_mse(a: &SlopeField, b: &SlopeField) -> Result<f64> {
    if a.grid() != b.grid() {
        return Err(Error::DimensionMismatch {
            expected: a.raster().dims(),
            found: b.raster().dims(),
        });
    }
    let (x, y) = (a.raster().data(), b.raster().data());
    Ok(x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>() / x.len() as f64)
}

/// Slope fields of both pick sets on the shared grid, then their MSE.
pub fn slope_mse(
    autos: &[Curve],
    manuals: &[Curve],
    dims: (usize, usize),
    refine: &RefineConfig,
    cluster: &ClusterConfig,
) -> Result<f64> {
    let grid = SlopeGrid::new(dims, refine);
    let field = |c: &[Curve]| {
        field_from_curves(
            c,
            grid,
            refine.h_prior,
            cluster.slope_win,
            cluster.slope_stride,
        )
    };
    field_mse(&field(autos)?, &field(manuals)?)
}

/// One evaluated gather.
#[derive(Debug, Clone, PartialEq)]
pub struct GatherScore {
    pub name: String,
    pub n_auto: usize,
    pub n_manual: usize,
    /// Mean semblance of the automatic picks (0 when there are none).
    pub semblance_auto: f64,
    pub semblance_manual: f64,
    pub tracked: usize,
    pub track_rate: f64,
    pub mse: f64,
}

fn mean_semblance(gather: &Gather, curves: &[Curve], h_s: usize) -> Result<f64> {
    let nonempty: Vec<&Curve> = curves.iter().filter(|c| !c.is_empty()).collect();
    if nonempty.is_empty() {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    for c in &nonempty {
        sum += semblance(gather, c, h_s)?;
    }
    Ok(sum / nonempty.len() as f64)
}

pub fn score_gather(
    name: &str,
    gather: &Gather,
    autos: &[Curve],
    manuals: &[Curve],
    metrics: &MetricConfig,
    refine: &RefineConfig,
    cluster: &ClusterConfig,
) -> Result<GatherScore> {
    let n_manual = manuals.iter().filter(|c| !c.is_empty()).count();
    let tracked = tracked_count(autos, manuals, metrics.d_t);
    Ok(GatherScore {
        name: name.to_owned(),
        n_auto: autos.iter().filter(|c| !c.is_empty()).count(),
        n_manual,
        semblance_auto: mean_semblance(gather, autos, metrics.h_s)?,
        semblance_manual: mean_semblance(gather, manuals, metrics.h_s)?,
        tracked,
        track_rate: track_rate(autos, manuals, metrics.d_t),
        mse: slope_mse(autos, manuals, gather.dims(), refine, cluster)?,
    })
}

/// Pooled figures over several gathers.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub gathers: usize,
    pub n_auto: usize,
    pub n_manual: usize,
    pub semblance_auto: f64,
    pub semblance_manual: f64,
    /// Tracked manual curves over all manual curves.
    pub track_rate: f64,
    /// Mean of per-gather MSE values.
    pub mse: f64,
}

pub fn aggregate(scores: &[GatherScore]) -> Aggregate {
    let n = scores.len().max(1) as f64;
    let n_manual: usize = scores.iter().map(|s| s.n_manual).sum();
    let tracked: usize = scores.iter().map(|s| s.tracked).sum();
    Aggregate {
        gathers: scores.len(),
        n_auto: scores.iter().map(|s| s.n_auto).sum(),
        n_manual,
        semblance_auto: scores.iter().map(|s| s.semblance_auto).sum::<f64>() / n,
        semblance_manual: scores.iter().map(|s| s.semblance_manual).sum::<f64>() / n,
        track_rate: if n_manual == 0 {
            1.0
        } else {
            tracked as f64 / n_manual as f64
        },
        mse: scores.iter().map(|s| s.mse).sum::<f64>() / n,
    }
}

pub const REPORT_HEADER: &str =
    "gather,n_auto,n_manual,semblance_auto,semblance_manual,track_rate,mse";

/// Comma-separated table: one row per gather and a final `ALL` row.
pub fn report(scores: &[GatherScore]) -> String {
    let mut out = String::new();
    out.push_str(REPORT_HEADER);
    out.push('\n');
    for s in scores {
        let _ = writeln!(
            out,
            "{},{},{},{:.6},{:.6},{:.6},{:.6e}",
            s.name, s.n_auto, s.n_manual, s.semblance_auto, s.semblance_manual, s.track_rate, s.mse
        );
    }
    let a = aggregate(scores);
    let _ = writeln!(
        out,
        "ALL,{},{},{:.6},{:.6},{:.6},{:.6e}",
        a.n_auto, a.n_manual, a.semblance_auto, a.semblance_manual, a.track_rate, a.mse
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::Raster;
    use proptest::prelude::*;

    fn flat(depth: f64, offsets: std::ops::Range<usize>) -> Curve {
        Curve::from_pairs(offsets.map(|o| (o, depth))).unwrap()
    }

    /// Direct transcription of the ratio with explicit index bookkeeping.
    fn semblance_oracle(g: &Gather, c: &Curve, h: i64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for m in -h..=h {
            let vals: Vec<f64> = c
                .points()
                .iter()
                .filter_map(|p| {
                    let z = p.depth.round() as i64 + m;
                    (0..g.n_depth() as i64)
                        .contains(&z)
                        .then(|| g.amplitude(z as usize, p.offset))
                })
                .collect();
            num += vals.iter().sum::<f64>().powi(2);
            den += vals.iter().map(|v| v * v).sum::<f64>();
        }
        if den == 0.0 {
            0.0
        } else {
            num / (c.len() as f64 * den)
        }
    }

    #[test]
    fn identical_traces_are_coherent() {
        let g =
            Gather::new(Raster::from_fn(40, 6, |r, _| ((r as f64) * 0.7).sin()).unwrap()).unwrap();
        let s = semblance(&g, &flat(20.0, 0..6), 5).unwrap();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn opposite_traces_cancel() {
        let g = Gather::new(
            Raster::from_fn(40, 2, |r, c| if c == 0 { r as f64 } else { -(r as f64) }).unwrap(),
        )
        .unwrap();
        assert_eq!(semblance(&g, &flat(20.0, 0..2), 5).unwrap(), 0.0);
        let z = Gather::new(Raster::zeros(10, 2)).unwrap();
        assert_eq!(semblance(&z, &flat(5.0, 0..2), 2).unwrap(), 0.0);
        assert!(semblance(&z, &Curve::empty(), 2).is_err());
    }

    #[test]
    fn curve_error_cases() {
        let a = flat(10.0, 0..10);
        assert_eq!(curve_error(&a, &a).unwrap(), 0.0);
        assert_eq!(curve_error(&flat(12.0, 0..10), &a).unwrap(), 2.0);
        assert_eq!(curve_error(&flat(12.0, 20..30), &a).unwrap(), f64::INFINITY);
    }

    #[test]
    fn track_rate_cases() {
        let manual = vec![flat(10.0, 0..20), flat(50.0, 0..20)];
        assert_eq!(track_rate(&manual, &manual, 3.0), 1.0);
        assert_eq!(track_rate(&[], &manual, 3.0), 0.0);
        assert_eq!(track_rate(&[flat(12.5, 0..20)], &manual, 3.0), 0.5);
        // Exactly at the threshold does not count.
        assert_eq!(track_rate(&[flat(13.0, 0..20)], &manual, 3.0), 0.0);
    }

    #[test]
    fn mse_cases() {
        let dims = (200, 40);
        let (r, c) = (RefineConfig::default(), ClusterConfig::default());
        let picks = vec![
            Curve::from_pairs((0..30).map(|o| (o, 50.0 + 0.5 * o as f64))).unwrap(),
            Curve::from_pairs((5..40).map(|o| (o, 120.0 - 0.2 * o as f64))).unwrap(),
        ];
        assert_eq!(slope_mse(&picks, &picks, dims, &r, &c).unwrap(), 0.0);
        let zero = slope_mse(&[flat(40.0, 0..40)], &[], dims, &r, &c).unwrap();
        assert_eq!(zero, 0.0);
        let tilted = Curve::from_pairs((0..40).map(|o| (o, 40.0 + 0.1 * o as f64))).unwrap();
        let m = slope_mse(&[tilted], &[flat(40.0, 0..40)], dims, &r, &c).unwrap();
        assert!((m - 0.01).abs() < 1e-12);
    }

    #[test]
    fn report_layout() {
        let g =
            Gather::new(Raster::from_fn(60, 30, |r, _| if r == 20 { 1.0 } else { 0.0 }).unwrap())
                .unwrap();
        let picks = vec![flat(20.0, 0..30)];
        let cfg = (
            MetricConfig::default(),
            RefineConfig::default(),
            ClusterConfig::default(),
        );
        let s = score_gather("g0", &g, &picks, &picks, &cfg.0, &cfg.1, &cfg.2).unwrap();
        assert_eq!(s.track_rate, 1.0);
        assert_eq!(s.mse, 0.0);
        assert!((s.semblance_auto - 1.0).abs() < 1e-12);
        let text = report(&[s]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], REPORT_HEADER);
        assert!(lines[1].starts_with("g0,1,1,1.000000,1.000000,1.000000,"));
        assert!(lines[2].starts_with("ALL,1,1,"));
    }

    proptest! {
        #[test]
        fn semblance_bounded_scaled_and_matches_oracle(
            vals in proptest::collection::vec(-5.0f64..5.0, 30 * 4),
            depths in proptest::collection::vec(0.0f64..29.0, 4),
            h in 0usize..6,
            scale in prop_oneof![-100.0f64..-0.01, 0.01f64..100.0],
        ) {
            let g = Gather::new(Raster::new(30, 4, vals).unwrap()).unwrap();
            let c = Curve::from_pairs(depths.iter().copied().enumerate()).unwrap();
            let s = semblance(&g, &c, h).unwrap();
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&s));
            prop_assert!((s - semblance_oracle(&g, &c, h as i64)).abs() < 1e-12);
            let gs = g.scaled(scale).unwrap();
            prop_assert!((semblance(&gs, &c, h).unwrap() - s).abs() < 1e-9);
        }

        #[test]
        fn self_comparisons(depths in proptest::collection::vec(10.0f64..180.0, 1..5), d_t in 0.1f64..10.0) {
            let picks: Vec<Curve> = depths
                .iter()
                .map(|&d| Curve::from_pairs((0..25).map(|o| (o, d + 0.3 * o as f64))).unwrap())
                .collect();
            prop_assert_eq!(track_rate(&picks, &picks, d_t), 1.0);
            let (r, c) = (RefineConfig::default(), ClusterConfig::default());
            prop_assert_eq!(slope_mse(&picks, &picks, (200, 25), &r, &c).unwrap(), 0.0);
            let other = vec![picks[0].with_depths(picks[0].points().iter().map(|p| p.depth + 1.0)).unwrap()];
            let ab = slope_mse(&picks, &other, (200, 25), &r, &c).unwrap();
            let ba = slope_mse(&other, &picks, (200, 25), &r, &c).unwrap();
            prop_assert!((ab - ba).abs() < 1e-15);
        }
    }
}
