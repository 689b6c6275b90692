//! Picked curves and the curve CSV format.
//!
//! A curve file has the header `curve_id,offset_index,depth` followed by one
//! record per point. Curve ids index the returned list, so a file whose ids
//! skip a value reads back with an empty curve in that slot. Depths are
//! written in shortest round-trip decimal form.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub offset: usize,
    pub depth: f64,
}

impl CurvePoint {
    pub fn new(offset: usize, depth: f64) -> Self {
        CurvePoint { offset, depth }
    }
}

/// One residual-moveout pick: at most one depth per offset column, with
/// strictly increasing offsets. Gaps are allowed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Curve {
    points: Vec<CurvePoint>,
}

impl Curve {
    pub fn new(points: Vec<CurvePoint>) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            if !p.depth.is_finite() || p.depth < 0.0 {
                return Err(Error::InvalidCurve(format!(
                    "point {i} has depth {} outside [0, inf)",
                    p.depth
                )));
            }
        }
        if let Some(w) = points.windows(2).find(|w| w[1].offset <= w[0].offset) {
            return Err(Error::InvalidCurve(format!(
                "offset {} follows offset {}",
                w[1].offset, w[0].offset
            )));
        }
        Ok(Curve { points })
    }

    /// Builds a curve from `(offset, depth)` pairs.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        Curve::new(
            pairs
                .into_iter()
                .map(|(o, d)| CurvePoint::new(o, d))
                .collect(),
        )
    }

    pub fn empty() -> Self {
        Curve::default()
    }

    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first(&self) -> Option<CurvePoint> {
        self.points.first().copied()
    }

    pub fn last(&self) -> Option<CurvePoint> {
        self.points.last().copied()
    }

    pub fn depth_at(&self, offset: usize) -> Option<f64> {
        self.points
            .binary_search_by_key(&offset, |p| p.offset)
            .ok()
            .map(|i| self.points[i].depth)
    }

    /// Checks every point lies inside an `n_depth` x `n_offset` raster.
    pub fn check_bounds(&self, n_depth: usize, n_offset: usize) -> Result<()> {
        match self
            .points
            .iter()
            .find(|p| p.offset >= n_offset || p.depth >= n_depth as f64)
        {
            Some(p) => Err(Error::InvalidCurve(format!(
                "point ({}, {}) outside {n_depth}x{n_offset} raster",
                p.offset, p.depth
            ))),
            None => Ok(()),
        }
    }

    /// Replaces depths in order, keeping offsets.
    pub fn with_depths(&self, depths: impl IntoIterator<Item = f64>) -> Result<Self> {
        Curve::new(
            self.points
                .iter()
                .zip(depths)
                .map(|(p, d)| CurvePoint::new(p.offset, d))
                .collect(),
        )
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CurveRecord {
    curve_id: u32,
    offset_index: u32,
    depth: f64,
}

pub fn write_curves(curves: &[Curve], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(file);
    let ser = |e: csv::Error| Error::Serde(e.to_string());
    // Written by hand so an empty list still gets a header.
    writer
        .write_record(["curve_id", "offset_index", "depth"])
        .map_err(ser)?;
    for (id, curve) in curves.iter().enumerate() {
        for p in curve.points() {
            writer
                .serialize(CurveRecord {
                    curve_id: id as u32,
                    offset_index: p.offset as u32,
                    depth: p.depth,
                })
                .map_err(ser)?;
        }
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

pub fn read_curves(path: impl AsRef<Path>) -> Result<Vec<Curve>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_curves(file)
}

pub fn parse_curves(input: impl std::io::Read) -> Result<Vec<Curve>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let headers = reader
        .headers()
        .map_err(|e| Error::MalformedRecord {
            line: 1,
            reason: e.to_string(),
        })?
        .clone();
    if !headers.is_empty() && headers != vec!["curve_id", "offset_index", "depth"] {
        return Err(Error::MalformedRecord {
            line: 1,
            reason: format!("unexpected header {headers:?}"),
        });
    }

    let mut grouped: BTreeMap<u32, Vec<CurvePoint>> = BTreeMap::new();
    for (idx, row) in reader.deserialize::<CurveRecord>().enumerate() {
        let line = idx as u64 + 2;
        let rec = row.map_err(|e| Error::MalformedRecord {
            line,
            reason: e.to_string(),
        })?;
        if !rec.depth.is_finite() || rec.depth < 0.0 {
            return Err(Error::MalformedRecord {
                line,
                reason: format!("depth {} not a finite non-negative number", rec.depth),
            });
        }
        let points = grouped.entry(rec.curve_id).or_default();
        if let Some(prev) = points.last() {
            if rec.offset_index as usize <= prev.offset {
                return Err(Error::NonMonotoneOffsets {
                    curve_id: rec.curve_id,
                    offset: rec.offset_index,
                    line,
                });
            }
        }
        points.push(CurvePoint::new(rec.offset_index as usize, rec.depth));
    }

    let n = grouped.keys().next_back().map_or(0, |&id| id as usize + 1);
    let mut curves = vec![Curve::empty(); n];
    for (id, points) in grouped {
        curves[id as usize] = Curve::new(points)?;
    }
    Ok(curves)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_repeated_offset() {
        assert!(Curve::from_pairs([(0, 1.0), (0, 2.0)]).is_err());
        assert!(Curve::from_pairs([(3, 1.0), (1, 2.0)]).is_err());
        assert!(Curve::from_pairs([(0, f64::NAN)]).is_err());
    }

    #[test]
    fn two_point_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        let curves = vec![Curve::from_pairs([(0, 10.5), (1, 11.0)]).unwrap()];
        write_curves(&curves, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "curve_id,offset_index,depth\n0,0,10.5\n0,1,11.0\n");
        assert_eq!(read_curves(&path).unwrap(), curves);
    }

    #[test]
    fn empty_list_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        write_curves(&[], &path).unwrap();
        assert_eq!(
            std::fs::read_to_string(&path).unwrap(),
            "curve_id,offset_index,depth\n"
        );
        assert!(read_curves(&path).unwrap().is_empty());
    }

    #[test]
    fn repeated_offset_in_file() {
        let text = "curve_id,offset_index,depth\n0,4,1.0\n1,4,2.0\n0,4,3.0\n";
        match parse_curves(text.as_bytes()) {
            Err(Error::NonMonotoneOffsets {
                curve_id: 0,
                offset: 4,
                line: 4,
            }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_rows() {
        let text = "curve_id,offset_index,depth\n0,x,1.0\n";
        assert!(matches!(
            parse_curves(text.as_bytes()),
            Err(Error::MalformedRecord { .. })
        ));
        let text = "curve_id,offset_index,depth\n0,1\n";
        assert!(matches!(
            parse_curves(text.as_bytes()),
            Err(Error::MalformedRecord { .. })
        ));
        let text = "curve_id,offset_index,depth\n0,1,NaN\n";
        assert!(matches!(
            parse_curves(text.as_bytes()),
            Err(Error::MalformedRecord { .. })
        ));
    }

    #[test]
    fn interleaved_ids_and_gaps() {
        let text = "curve_id,offset_index,depth\n2,0,1.0\n0,5,2.0\n2,1,1.5\n";
        let curves = parse_curves(text.as_bytes()).unwrap();
        assert_eq!(curves.len(), 3);
        assert!(curves[1].is_empty());
        assert_eq!(curves[2].len(), 2);
    }

    fn arb_curve() -> impl Strategy<Value = Curve> {
        proptest::collection::btree_map(0usize..500, 0.0f64..1e4, 1..30)
            .prop_map(|m| Curve::from_pairs(m).unwrap())
    }

    proptest! {
        #[test]
        fn csv_round_trip(curves in proptest::collection::vec(arb_curve(), 0..6)) {
            let mut buf = Vec::new();
            {
                let dir = tempfile::tempdir().unwrap();
                let path = dir.path().join("c.csv");
                write_curves(&curves, &path).unwrap();
                buf.extend(std::fs::read(&path).unwrap());
            }
            prop_assert_eq!(parse_curves(buf.as_slice()).unwrap(), curves);
        }
    }
}
