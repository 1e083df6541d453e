//! WGS84 geometry primitives: haversine distance, a local equirectangular
//! projection, and chord-aligned segment frames.
//!
//! The projection is equirectangular about the track's mean latitude. For the
//! ride extents this crate targets (well under 0.5 degrees of latitude or
//! longitude) planar distances agree with haversine to better than 1%; that
//! bound is enforced by a property test rather than assumed.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// IUGG mean Earth radius in meters. Fixed so results are reproducible.
pub const EARTH_RADIUS_M: f64 = 6_371_008.8;

/// Chord shorter than this is considered degenerate for alignment.
pub const DEGENERATE_CHORD_M: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeoError {
    #[error("latitude {0} outside [-90, 90]")]
    LatOutOfRange(f64),
    #[error("longitude {0} outside [-180, 180]")]
    LonOutOfRange(f64),
    #[error("need at least two points, got {0}")]
    FewerThanTwoPoints(usize),
    #[error("chord endpoints coincide (separation < {DEGENERATE_CHORD_M} m)")]
    DegenerateChord,
}

/// A raw WGS84 GPS sample. `t` is seconds since the Unix epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
    pub alt: Option<f64>,
    pub t: Option<f64>,
}

impl GeoPoint {
    pub fn new(lat: f64, lon: f64) -> Result<Self, GeoError> {
        Self::with_alt_time(lat, lon, None, None)
    }

    pub fn with_alt_time(
        lat: f64,
        lon: f64,
        alt: Option<f64>,
        t: Option<f64>,
    ) -> Result<Self, GeoError> {
        if !(-90.0..=90.0).contains(&lat) {
            return Err(GeoError::LatOutOfRange(lat));
        }
        if !(-180.0..=180.0).contains(&lon) {
            return Err(GeoError::LonOutOfRange(lon));
        }
        Ok(GeoPoint { lat, lon, alt, t })
    }
}

/// A projected track sample: meters east (`x`) and north (`y`) of the track
/// origin, plus cumulative planar arc length `s` from the track start.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarPoint {
    pub x: f64,
    pub y: f64,
    pub s: f64,
}

/// A point expressed in a segment's chord frame: `u` meters along the chord
/// from its first point, `v` meters of signed lateral deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChordPoint {
    pub u: f64,
    pub v: f64,
}

/// Great-circle distance in meters between two points, spherical Earth of
/// radius [`EARTH_RADIUS_M`].
pub fn haversine_m(a: GeoPoint, b: GeoPoint) -> f64 {
    let lat1 = a.lat.to_radians();
    let lat2 = b.lat.to_radians();
    let dlat = (b.lat - a.lat).to_radians();
    let dlon = (b.lon - a.lon).to_radians();

    let h = (dlat * 0.5).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon * 0.5).sin().powi(2);
    let central = 2.0 * h.sqrt().atan2((1.0 - h).sqrt());
    EARTH_RADIUS_M * central
}

/// Mean lat/lon of a track, used as the local projection origin.
pub fn projection_origin(points: &[GeoPoint]) -> Result<(f64, f64), GeoError> {
    if points.len() < 2 {
        return Err(GeoError::FewerThanTwoPoints(points.len()));
    }
    let n = points.len() as f64;
    let lat0 = points.iter().map(|p| p.lat).sum::<f64>() / n;
    let lon0 = points.iter().map(|p| p.lon).sum::<f64>() / n;
    Ok((lat0, lon0))
}

/// Equirectangular projection of a track about its mean lat/lon.
///
/// x = R * (lon - lon0) * cos(lat0), y = R * (lat - lat0), angles in radians;
/// `s` is the cumulative planar Euclidean distance, starting at 0.
pub fn project_track(points: &[GeoPoint]) -> Result<Vec<PlanarPoint>, GeoError> {
    let (lat0, lon0) = projection_origin(points)?;
    let cos_lat0 = lat0.to_radians().cos();

    let mut out = Vec::with_capacity(points.len());
    let mut s = 0.0;
    for (i, p) in points.iter().enumerate() {
        let x = EARTH_RADIUS_M * (p.lon - lon0).to_radians() * cos_lat0;
        let y = EARTH_RADIUS_M * (p.lat - lat0).to_radians();
        if i > 0 {
            let prev: &PlanarPoint = &out[i - 1];
            s += (x - prev.x).hypot(y - prev.y);
        }
        out.push(PlanarPoint { x, y, s });
    }
    Ok(out)
}

/// Inverse of the projection used by [`project_track`]: planar meters about
/// (`lat0`, `lon0`) back to degrees.
pub fn inverse_project(lat0: f64, lon0: f64, x: f64, y: f64) -> (f64, f64) {
    let lat = lat0 + (y / EARTH_RADIUS_M).to_degrees();
    let lon = lon0 + (x / (EARTH_RADIUS_M * lat0.to_radians().cos())).to_degrees();
    (lat, lon)
}

/// Rigid transform of a point run into its chord frame: the first point maps
/// to the origin and the last point to the positive u-axis. Pairwise distances
/// are preserved; `v` is the signed perpendicular offset from the chord.
pub fn chord_align(seg: &[PlanarPoint]) -> Result<Vec<ChordPoint>, GeoError> {
    if seg.len() < 2 {
        return Err(GeoError::FewerThanTwoPoints(seg.len()));
    }
    let first = seg[0];
    let last = seg[seg.len() - 1];
    let dx = last.x - first.x;
    let dy = last.y - first.y;
    let chord = dx.hypot(dy);
    if chord < DEGENERATE_CHORD_M {
        return Err(GeoError::DegenerateChord);
    }
    let (cos_t, sin_t) = (dx / chord, dy / chord);

    Ok(seg
        .iter()
        .map(|p| {
            let rx = p.x - first.x;
            let ry = p.y - first.y;
            ChordPoint {
                u: cos_t * rx + sin_t * ry,
                v: -sin_t * rx + cos_t * ry,
            }
        })
        .collect())
}
