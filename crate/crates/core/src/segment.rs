//! Arc-length segmentation: a projected track is divided into 100 consecutive
//! windows, each covering 1% of the total ride distance.
//!
//! A point whose arc length falls exactly on a window boundary is shared by
//! both neighbors, so every segment is closed at both ends and per-segment
//! curves join up when plotted. Windows that catch fewer than
//! [`MIN_SEGMENT_POINTS`] samples are kept but flagged invalid; the feature
//! stage skips them.

use thiserror::Error;

use crate::geo::PlanarPoint;

/// Number of windows a track is divided into (1% of distance each).
pub const SEGMENT_COUNT: usize = 100;

/// Windows with fewer points than this cannot support the feature
/// computations and are flagged invalid.
pub const MIN_SEGMENT_POINTS: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SegmentError {
    #[error("track has zero arc length")]
    ZeroLengthTrack,
}

/// One 1%-of-distance slice of a projected track.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub index: usize,
    pub points: Vec<PlanarPoint>,
    pub s_start: f64,
    pub s_end: f64,
    pub valid: bool,
}

impl Segment {
    /// Window length in meters.
    pub fn length_m(&self) -> f64 {
        self.s_end - self.s_start
    }
}

/// Splits a projected track into exactly [`SEGMENT_COUNT`] segments with
/// boundaries at k*L/100, where L is the total arc length.
pub fn segment_track(points: &[PlanarPoint]) -> Result<Vec<Segment>, SegmentError> {
    let total = match points.last() {
        Some(p) if p.s > 0.0 => p.s,
        _ => return Err(SegmentError::ZeroLengthTrack),
    };

    let boundary = |k: usize| -> f64 {
        match k {
            0 => 0.0,
            k if k == SEGMENT_COUNT => total,
            k => total * k as f64 / SEGMENT_COUNT as f64,
        }
    };

    let mut segments = Vec::with_capacity(SEGMENT_COUNT);
    for index in 0..SEGMENT_COUNT {
        let s_start = boundary(index);
        let s_end = boundary(index + 1);
        let lo = points.partition_point(|p| p.s < s_start);
        let hi = points.partition_point(|p| p.s <= s_end);
        let window = points[lo..hi].to_vec();
        let valid = window.len() >= MIN_SEGMENT_POINTS;
        segments.push(Segment {
            index,
            points: window,
            s_start,
            s_end,
            valid,
        });
    }
    Ok(segments)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Straight east-west line with the given spacing; s equals x.
    fn line(total_m: f64, spacing_m: f64) -> Vec<PlanarPoint> {
        let n = (total_m / spacing_m) as usize;
        (0..=n)
            .map(|i| {
                let s = i as f64 * spacing_m;
                PlanarPoint { x: s, y: 0.0, s }
            })
            .collect()
    }

    #[test]
    fn coarse_track_yields_invalid_segments() {
        let segments = segment_track(&line(1000.0, 10.0)).unwrap();
        assert_eq!(segments.len(), SEGMENT_COUNT);
        for seg in &segments {
            assert!(
                seg.points.len() <= 3,
                "segment {} has {} points",
                seg.index,
                seg.points.len()
            );
            assert!(!seg.valid);
        }
    }

    #[test]
    fn dense_track_yields_valid_segments() {
        let segments = segment_track(&line(1000.0, 1.0)).unwrap();
        assert_eq!(segments.len(), SEGMENT_COUNT);
        for seg in &segments {
            assert!((10..=11).contains(&seg.points.len()));
            assert!(seg.valid);
            assert!((seg.length_m() - 10.0).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_length_track_is_rejected() {
        let pts = vec![PlanarPoint { x: 1.0, y: 1.0, s: 0.0 }; 5];
        assert_eq!(segment_track(&pts), Err(SegmentError::ZeroLengthTrack));
        assert_eq!(segment_track(&[]), Err(SegmentError::ZeroLengthTrack));
    }

    #[test]
    fn boundary_points_are_shared_by_both_neighbors() {
        let segments = segment_track(&line(1000.0, 1.0)).unwrap();
        for k in 1..SEGMENT_COUNT {
            let prev = &segments[k - 1];
            let cur = &segments[k];
            assert_eq!(prev.s_end, cur.s_start);
            let last_prev = prev.points.last().unwrap();
            let first_cur = cur.points.first().unwrap();
            assert_eq!(last_prev.s, prev.s_end);
            assert_eq!(first_cur.s, cur.s_start);
        }
    }

    proptest! {
        #[test]
        fn segments_tile_the_track(
            steps in proptest::collection::vec(0.01f64..30.0, 21..400)
        ) {
            let mut s = 0.0;
            let mut pts = vec![PlanarPoint { x: 0.0, y: 0.0, s: 0.0 }];
            for step in &steps {
                s += step;
                pts.push(PlanarPoint { x: s, y: 0.0, s });
            }
            let total = s;
            let segments = segment_track(&pts).unwrap();

            // Ranges tile [0, L] sharing exactly the boundary values.
            prop_assert_eq!(segments[0].s_start, 0.0);
            prop_assert_eq!(segments.last().unwrap().s_end, total);
            let mut sum = 0.0;
            for k in 0..segments.len() {
                sum += segments[k].length_m();
                if k > 0 {
                    prop_assert_eq!(segments[k].s_start, segments[k - 1].s_end);
                }
                for p in &segments[k].points {
                    prop_assert!(p.s >= segments[k].s_start && p.s <= segments[k].s_end);
                }
            }
            prop_assert!((sum - total).abs() <= 1e-6 * total);

            // Every input point lands in at least one segment; interior
            // non-boundary points land in exactly one.
            for p in &pts {
                let hits = segments
                    .iter()
                    .filter(|seg| seg.points.iter().any(|q| q.s == p.s))
                    .count();
                let on_boundary = segments
                    .iter()
                    .any(|seg| p.s == seg.s_start || p.s == seg.s_end);
                if on_boundary {
                    prop_assert!(hits >= 1);
                } else {
                    prop_assert_eq!(hits, 1, "point s={} hit {} segments", p.s, hits);
                }
            }
        }
    }
}
