//! Per-segment squiggliness features and their ride-level aggregation.
//!
//! All three features are computed in the segment's chord frame (see
//! [`crate::geo::chord_align`]), which makes them invariant under rigid
//! motion of the track and well defined for any compass heading:
//!
//! * method 1 - how often the lateral deviation changes direction, as a
//!   fraction of opportunities;
//! * method 2 - test RMSE of an ordinary least-squares line fitted to half
//!   the segment's points and scored on the other half;
//! * method 3 - sign changes ("zero crossings") of the first derivative of
//!   lateral deviation along the path.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::{chord_align, ChordPoint, GeoError};
use crate::segment::{Segment, MIN_SEGMENT_POINTS};

/// Minimum valid segments a ride must have to produce ride-level features.
pub const MIN_VALID_SEGMENTS: usize = 10;

/// Lateral changes smaller than this (meters, or meters-per-meter for the
/// derivative) are below GPS resolution and are treated as zero slope. Keeps
/// the zero-carry rule meaningful on projected coordinates, where exact zeros
/// rarely survive floating-point rounding.
pub const SLOPE_ZERO_EPS: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeatureError {
    #[error("segment {0} is invalid (fewer than {MIN_SEGMENT_POINTS} points)")]
    InvalidSegment(usize),
    #[error("segment {index}: fit-set chord positions are all identical; line fit is singular")]
    SingularFit { index: usize },
    #[error("segment {index}: zero-length step at point {point}; path derivative undefined")]
    ZeroLengthStep { index: usize, point: usize },
    #[error("segment {index}: {source}")]
    Geometry { index: usize, source: GeoError },
    #[error("ride '{id}' has {n} valid segments, need >= {MIN_VALID_SEGMENTS}")]
    TooFewValidSegments { id: String, n: usize },
    #[error("feature table: {0}")]
    Table(String),
}

/// The three per-segment scalars.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentFeatures {
    pub index: usize,
    pub m1_count: usize,
    pub m1_freq: f64,
    pub m2_rmse: f64,
    pub m3_crossings: usize,
}

/// Which per-segment scalar a classifier consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    M1,
    M2,
    M3,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::M1, Method::M2, Method::M3];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::M1 => "m1",
            Method::M2 => "m2",
            Method::M3 => "m3",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        match s.trim().to_ascii_lowercase().as_str() {
            "m1" => Some(Method::M1),
            "m2" => Some(Method::M2),
            "m3" => Some(Method::M3),
            _ => None,
        }
    }

    /// The scalar this method contributes for one segment.
    pub fn scalar(self, f: &SegmentFeatures) -> f64 {
        match self {
            Method::M1 => f.m1_freq,
            Method::M2 => f.m2_rmse,
            Method::M3 => f.m3_crossings as f64,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Summary statistics of a per-segment scalar across a ride's valid segments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub mean: f64,
    pub median: f64,
    pub stddev: f64,
    pub max: f64,
    pub p90: f64,
}

impl SummaryStats {
    pub const NAMES: [&'static str; 5] = ["mean", "median", "stddev", "max", "p90"];

    pub fn to_vec(self) -> Vec<f64> {
        vec![self.mean, self.median, self.stddev, self.max, self.p90]
    }
}

/// Ride-level feature vector for one method.
#[derive(Debug, Clone, PartialEq)]
pub struct RideFeatures {
    pub track_id: String,
    pub method: Method,
    pub stats: SummaryStats,
    pub n_valid_segments: usize,
}

fn aligned(seg: &Segment) -> Result<Vec<ChordPoint>, FeatureError> {
    if !seg.valid || seg.points.len() < MIN_SEGMENT_POINTS {
        return Err(FeatureError::InvalidSegment(seg.index));
    }
    chord_align(&seg.points).map_err(|source| FeatureError::Geometry {
        index: seg.index,
        source,
    })
}

/// Counts sign changes in a sequence, with sub-epsilon values treated as zero
/// and zeros carrying the last nonzero sign.
fn sign_changes(values: impl IntoIterator<Item = f64>) -> usize {
    let mut last = 0i8;
    let mut count = 0;
    for v in values {
        let sign = if v > SLOPE_ZERO_EPS {
            1
        } else if v < -SLOPE_ZERO_EPS {
            -1
        } else {
            0
        };
        if sign == 0 {
            continue;
        }
        if last != 0 && sign != last {
            count += 1;
        }
        last = sign;
    }
    count
}

/// Method 1: number and frequency of direction changes in the lateral
/// deviation. Each counted change corresponds to one local extremum of the
/// path's deviation from its chord.
pub fn slope_direction_changes(seg: &Segment) -> Result<(usize, f64), FeatureError> {
    let pts = aligned(seg)?;
    let n = pts.len();
    let count = sign_changes(pts.windows(2).map(|w| w[1].v - w[0].v));
    let freq = if n >= 3 {
        count as f64 / (n - 2) as f64
    } else {
        0.0
    };
    Ok((count, freq))
}

/// Method 2: fit v = a*u + b on the even-indexed points by ordinary least
/// squares and return the RMSE on the odd-indexed points. The interleaved
/// 50/50 split is deterministic and keeps spatial coverage on both halves.
pub fn segment_fit_rmse(seg: &Segment) -> Result<f64, FeatureError> {
    let pts = aligned(seg)?;
    let fit: Vec<&ChordPoint> = pts.iter().step_by(2).collect();
    let test: Vec<&ChordPoint> = pts.iter().skip(1).step_by(2).collect();

    let n = fit.len() as f64;
    let mean_u = fit.iter().map(|c| c.u).sum::<f64>() / n;
    let mean_v = fit.iter().map(|c| c.v).sum::<f64>() / n;
    let mut suu = 0.0;
    let mut suv = 0.0;
    for c in &fit {
        let du = c.u - mean_u;
        suu += du * du;
        suv += du * (c.v - mean_v);
    }
    let scale = fit.iter().map(|c| c.u * c.u).sum::<f64>().max(1.0);
    if suu <= scale * f64::EPSILON {
        return Err(FeatureError::SingularFit { index: seg.index });
    }
    let slope = suv / suu;
    let intercept = mean_v - slope * mean_u;

    let sse: f64 = test
        .iter()
        .map(|c| {
            let r = c.v - (slope * c.u + intercept);
            r * r
        })
        .sum();
    Ok((sse / test.len() as f64).sqrt())
}

/// Method 3: zero crossings of the first derivative of lateral deviation.
///
/// The derivative is a central difference of v against cumulative arc length,
/// which is strictly increasing for any cleaned track regardless of how the
/// path wanders around its chord. Each crossing marks a local extremum of the
/// lateral deviation.
pub fn derivative_zero_crossings(seg: &Segment) -> Result<usize, FeatureError> {
    let pts = aligned(seg)?;
    let raw = &seg.points;
    for i in 1..raw.len() {
        if raw[i].s <= raw[i - 1].s {
            return Err(FeatureError::ZeroLengthStep {
                index: seg.index,
                point: i - 1,
            });
        }
    }
    let derivative =
        (1..raw.len() - 1).map(|i| (pts[i + 1].v - pts[i - 1].v) / (raw[i + 1].s - raw[i - 1].s));
    Ok(sign_changes(derivative))
}

/// All three features for one segment.
pub fn segment_features(seg: &Segment) -> Result<SegmentFeatures, FeatureError> {
    let (m1_count, m1_freq) = slope_direction_changes(seg)?;
    let m2_rmse = segment_fit_rmse(seg)?;
    let m3_crossings = derivative_zero_crossings(seg)?;
    Ok(SegmentFeatures {
        index: seg.index,
        m1_count,
        m1_freq,
        m2_rmse,
        m3_crossings,
    })
}

fn nearest_rank_p90(sorted: &[f64]) -> f64 {
    // ceil(0.9 * n) as an integer computation, 1-based rank.
    let rank = (9 * sorted.len()).div_ceil(10).max(1);
    sorted[rank - 1]
}

/// Summary statistics over valid segments' scalars for one method.
pub fn ride_features(
    track_id: &str,
    feats: &[SegmentFeatures],
    method: Method,
) -> Result<RideFeatures, FeatureError> {
    if feats.len() < MIN_VALID_SEGMENTS {
        return Err(FeatureError::TooFewValidSegments {
            id: track_id.to_string(),
            n: feats.len(),
        });
    }
    let mut values: Vec<f64> = feats.iter().map(|f| method.scalar(f)).collect();
    values.sort_by(f64::total_cmp);
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let median = if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    };
    let variance = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    let stats = SummaryStats {
        mean,
        median,
        stddev: variance.sqrt(),
        max: values[n - 1],
        p90: nearest_rank_p90(&values),
    };
    Ok(RideFeatures {
        track_id: track_id.to_string(),
        method,
        stats,
        n_valid_segments: n,
    })
}

/// One row of the feature table CSV. Invalid segments keep their row with
/// empty feature fields so per-track quality is visible downstream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub track_id: String,
    pub segment_index: usize,
    pub m1_count: Option<usize>,
    pub m1_freq: Option<f64>,
    pub m2_rmse: Option<f64>,
    pub m3_crossings: Option<usize>,
    pub valid: bool,
}

impl FeatureRow {
    pub fn features(&self) -> Option<SegmentFeatures> {
        match (self.m1_count, self.m1_freq, self.m2_rmse, self.m3_crossings) {
            (Some(m1_count), Some(m1_freq), Some(m2_rmse), Some(m3_crossings)) if self.valid => {
                Some(SegmentFeatures {
                    index: self.segment_index,
                    m1_count,
                    m1_freq,
                    m2_rmse,
                    m3_crossings,
                })
            }
            _ => None,
        }
    }
}

/// Computes feature rows for every segment of a track. Segments whose
/// features cannot be computed (too sparse, degenerate geometry) get a row
/// with `valid = false`.
pub fn track_feature_rows(track_id: &str, segments: &[Segment]) -> Vec<FeatureRow> {
    segments
        .iter()
        .map(|seg| match segment_features(seg) {
            Ok(f) => FeatureRow {
                track_id: track_id.to_string(),
                segment_index: seg.index,
                m1_count: Some(f.m1_count),
                m1_freq: Some(f.m1_freq),
                m2_rmse: Some(f.m2_rmse),
                m3_crossings: Some(f.m3_crossings),
                valid: true,
            },
            Err(_) => FeatureRow {
                track_id: track_id.to_string(),
                segment_index: seg.index,
                m1_count: None,
                m1_freq: None,
                m2_rmse: None,
                m3_crossings: None,
                valid: false,
            },
        })
        .collect()
}

/// Serializes feature rows with the header
/// `track_id,segment_index,m1_count,m1_freq,m2_rmse,m3_crossings,valid`.
pub fn write_feature_csv(rows: &[FeatureRow]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row).expect("in-memory CSV write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory CSV flush"))
        .expect("CSV output is UTF-8")
}

pub fn read_feature_csv(bytes: &[u8]) -> Result<Vec<FeatureRow>, FeatureError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut rows = Vec::new();
    for (i, record) in reader.deserialize::<FeatureRow>().enumerate() {
        rows.push(record.map_err(|e| FeatureError::Table(format!("row {}: {e}", i + 1)))?);
    }
    Ok(rows)
}

/// Groups feature rows by track and builds ride-level features for one
/// method. Rides with too few valid segments are returned separately so the
/// caller can report them.
pub fn rides_from_rows(
    rows: &[FeatureRow],
    method: Method,
) -> (Vec<RideFeatures>, Vec<(String, FeatureError)>) {
    let mut by_track: BTreeMap<&str, Vec<SegmentFeatures>> = BTreeMap::new();
    for row in rows {
        let entry = by_track.entry(row.track_id.as_str()).or_default();
        if let Some(f) = row.features() {
            entry.push(f);
        }
    }
    let mut rides = Vec::new();
    let mut rejected = Vec::new();
    for (id, feats) in by_track {
        match ride_features(id, &feats, method) {
            Ok(r) => rides.push(r),
            Err(e) => rejected.push((id.to_string(), e)),
        }
    }
    (rides, rejected)
}
