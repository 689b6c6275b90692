//! Merging of preliminary curves that belong to one event.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::config::ClusterConfig;
use crate::curve::{Curve, CurvePoint};
use crate::error::{Error, Result};

/// One windowed slope estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalSlope {
    pub mean_offset: f64,
    pub mean_depth: f64,
    pub slope: f64,
}

/// Least-squares slope of depth against offset.
pub fn ols_slope(points: &[CurvePoint]) -> Option<(f64, f64, f64)> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mo = points.iter().map(|p| p.offset as f64).sum::<f64>() / n;
    let md = points.iter().map(|p| p.depth).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for p in points {
        let dx = p.offset as f64 - mo;
        sxy += dx * (p.depth - md);
        sxx += dx * dx;
    }
    Some((mo, md, sxy / sxx))
}

/// Windows of `win` consecutive points advancing by `stride`; the last
/// window may be shorter but keeps at least two points.
pub fn local_slopes(curve: &Curve, win: usize, stride: usize) -> Vec<LocalSlope> {
    let pts = curve.points();
    let n = pts.len();
    let mut out = Vec::new();
    if n < 2 || win < 2 || stride < 1 {
        return out;
    }
    let mut start = 0;
    loop {
        let end = (start + win).min(n);
        if let Some((mean_offset, mean_depth, slope)) = ols_slope(&pts[start..end]) {
            out.push(LocalSlope {
                mean_offset,
                mean_depth,
                slope,
            });
        }
        if end == n {
            break;
        }
        start += stride;
    }
    out
}

/// Average local slope; 0 for curves with fewer than two points.
pub fn mean_slope(curve: &Curve, config: &ClusterConfig) -> f64 {
    let s = local_slopes(curve, config.slope_win, config.slope_stride);
    if s.is_empty() {
        return 0.0;
    }
    s.iter().map(|l| l.slope).sum::<f64>() / s.len() as f64
}

fn weighted_gap(a: CurvePoint, b: CurvePoint, config: &ClusterConfig) -> f64 {
    let dof = (a.offset as f64 - b.offset as f64) * config.w_offset;
    let dd = (a.depth - b.depth) * config.w_depth;
    dof.hypot(dd)
}

/// Mixed distance from precomputed mean slopes.
fn mixed(c1: &Curve, s1: f64, c2: &Curve, s2: f64, config: &ClusterConfig) -> f64 {
    let (l1, r1) = (c1.first().unwrap(), c1.last().unwrap());
    let (l2, r2) = (c2.first().unwrap(), c2.last().unwrap());
    let gap = weighted_gap(r1, l2, config).min(weighted_gap(l1, r2, config));
    config.alpha * (s1 - s2).abs() + (1.0 - config.alpha) * gap
}

/// Slope difference blended with the weighted gap between facing endpoints.
pub fn curve_distance(c1: &Curve, c2: &Curve, config: &ClusterConfig) -> Result<f64> {
    if c1.is_empty() || c2.is_empty() {
        return Err(Error::EmptyInput("curve_distance needs non-empty curves"));
    }
    Ok(mixed(
        c1,
        mean_slope(c1, config),
        c2,
        mean_slope(c2, config),
        config,
    ))
}

/// Symmetric pairwise distance matrix, row-major.
pub fn distance_matrix(curves: &[Curve], config: &ClusterConfig) -> Result<Vec<f64>> {
    if curves.iter().any(Curve::is_empty) {
        return Err(Error::EmptyInput("distance matrix over an empty curve"));
    }
    let n = curves.len();
    let slopes: Vec<f64> = curves.iter().map(|c| mean_slope(c, config)).collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        0.0
                    } else {
                        let (a, b) = (i.min(j), i.max(j));
                        mixed(&curves[a], slopes[a], &curves[b], slopes[b], config)
                    }
                })
                .collect()
        })
        .collect();
    Ok(rows.concat())
}

/// DBSCAN on a precomputed `n x n` matrix with neighborhoods `d <= eps`
/// (a point counts itself). Noise points come back as singletons. Clusters
/// are ordered by their smallest index, members ascending.
pub fn dbscan(dist: &[f64], n: usize, eps: f64, min_pts: usize) -> Vec<Vec<usize>> {
    let neighbors =
        |i: usize| -> Vec<usize> { (0..n).filter(|&j| dist[i * n + j] <= eps).collect() };
    let core: Vec<bool> = (0..n).map(|i| neighbors(i).len() >= min_pts).collect();
    let mut label: Vec<Option<usize>> = vec![None; n];
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        if label[i].is_some() || !core[i] {
            continue;
        }
        let id = clusters.len();
        let mut members = vec![i];
        label[i] = Some(id);
        let mut frontier = vec![i];
        while let Some(p) = frontier.pop() {
            if !core[p] {
                continue;
            }
            for q in neighbors(p) {
                if label[q].is_none() {
                    label[q] = Some(id);
                    members.push(q);
                    frontier.push(q);
                }
            }
        }
        clusters.push(members);
    }
    for (i, l) in label.iter().enumerate() {
        if l.is_none() {
            clusters.push(vec![i]);
        }
    }
    for c in &mut clusters {
        c.sort_unstable();
    }
    clusters.sort_by_key(|c| c[0]);
    clusters
}

/// Partition of curve indices under the mixed distance.
pub fn cluster_curves(curves: &[Curve], config: &ClusterConfig) -> Result<Vec<Vec<usize>>> {
    config.validate()?;
    let dist = distance_matrix(curves, config)?;
    Ok(dbscan(&dist, curves.len(), config.d_eps, config.n_min_pts))
}

/// Union of the members' points; depths at shared offsets are averaged.
pub fn merge_group(curves: &[&Curve]) -> Result<Curve> {
    let mut acc: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for c in curves {
        for p in c.points() {
            let e = acc.entry(p.offset).or_insert((0.0, 0));
            e.0 += p.depth;
            e.1 += 1;
        }
    }
    Curve::from_pairs(acc.into_iter().map(|(o, (sum, k))| (o, sum / k as f64)))
}

/// Clusters then merges; output order follows cluster order.
pub fn merge_curves(curves: &[Curve], config: &ClusterConfig) -> Result<Vec<Curve>> {
    cluster_curves(curves, config)?
        .iter()
        .map(|group| merge_group(&group.iter().map(|&i| &curves[i]).collect::<Vec<_>>()))
        .collect()
}
