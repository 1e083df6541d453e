//! Ride-file ingestion: GPX 1.1 and track CSV parsing, track cleaning, and
//! ground-truth label files.
//!
//! Parsers operate on bytes; file I/O is the caller's job. A parsed [`Track`]
//! guarantees ordered timestamps, but only [`clean`] establishes the
//! minimum-size and maximum-gap invariants the rest of the pipeline relies on.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use quick_xml::events::Event;
use quick_xml::Reader;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::{haversine_m, GeoError, GeoPoint};
use crate::Label;

/// Minimum points a track must keep after cleaning.
pub const MIN_TRACK_POINTS: usize = 20;

/// Consecutive fixes farther apart than this are treated as a GPS dropout.
pub const MAX_GAP_M: f64 = 200.0;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("malformed XML near line {line}: {detail}")]
    MalformedXml { line: usize, detail: String },
    #[error("no track points found")]
    NoTrackPoints,
    #[error("invalid coordinate at line {line}: {source}")]
    InvalidCoordinate { line: usize, source: GeoError },
    #[error("missing or invalid header: {0}")]
    MissingHeader(String),
    #[error("row {row}: {detail}")]
    RowParseError { row: usize, detail: String },
    #[error("track '{id}' has {len} points after cleaning, need >= {MIN_TRACK_POINTS}")]
    TooShort { id: String, len: usize },
    #[error("gap of {meters:.1} m between points {index} and {next} exceeds {MAX_GAP_M} m", next = index + 1)]
    GapTooLarge { index: usize, meters: f64 },
    #[error("row {row}: unknown label '{label}' (expected squiggly or straight)")]
    UnknownLabel { row: usize, label: String },
    #[error("duplicate track id '{id}' in label file")]
    DuplicateId { id: String },
    #[error("point {index} has a timestamp but point {first_missing} does not")]
    MixedTimestamps { index: usize, first_missing: usize },
    #[error("timestamps not strictly increasing at point {index}")]
    UnorderedTimestamps { index: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrackSource {
    Gpx,
    Csv,
    Synthetic,
}

/// An ordered ride.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub id: String,
    pub points: Vec<GeoPoint>,
    pub source: TrackSource,
}

impl Track {
    /// Builds a track, enforcing that timestamps, when present, are present on
    /// every point and strictly increasing.
    pub fn new(
        id: impl Into<String>,
        points: Vec<GeoPoint>,
        source: TrackSource,
    ) -> Result<Self, IngestError> {
        let with_t = points.iter().position(|p| p.t.is_some());
        if let Some(first_with) = with_t {
            if let Some(missing) = points.iter().position(|p| p.t.is_none()) {
                return Err(IngestError::MixedTimestamps {
                    index: first_with,
                    first_missing: missing,
                });
            }
            for i in 1..points.len() {
                if points[i].t.unwrap() <= points[i - 1].t.unwrap() {
                    return Err(IngestError::UnorderedTimestamps { index: i });
                }
            }
        }
        Ok(Track {
            id: id.into(),
            points,
            source,
        })
    }
}

/// A ride with its manually assigned ground-truth class.
#[derive(Debug, Clone)]
pub struct LabeledTrack {
    pub track: Track,
    pub label: Label,
}

fn line_of(bytes: &[u8], pos: usize) -> usize {
    let end = pos.min(bytes.len());
    bytes[..end].iter().filter(|&&b| b == b'\n').count() + 1
}

/// Parses the trk/trkseg/trkpt subset of GPX 1.1, concatenating all segments
/// in document order. Reads the lat/lon attributes plus optional `<ele>` and
/// `<time>` children.
pub fn parse_gpx(id: impl Into<String>, bytes: &[u8]) -> Result<Track, IngestError> {
    #[derive(Clone, Copy)]
    enum TextTarget {
        Ele,
        Time,
    }

    let mut reader = Reader::from_reader(bytes);
    let mut buf = Vec::new();
    let mut points: Vec<GeoPoint> = Vec::new();

    let mut in_trkpt = false;
    let mut cur_lat = 0.0f64;
    let mut cur_lon = 0.0f64;
    let mut cur_pos = 0usize;
    let mut cur_ele: Option<f64> = None;
    let mut cur_time: Option<f64> = None;
    let mut target: Option<TextTarget> = None;

    loop {
        let pos = reader.buffer_position() as usize;
        let event = reader.read_event_into(&mut buf).map_err(|e| {
            IngestError::MalformedXml {
                line: line_of(bytes, reader.buffer_position() as usize),
                detail: e.to_string(),
            }
        })?;
        match event {
            Event::Start(ref e) | Event::Empty(ref e) => {
                let name = e.local_name();
                let is_empty = matches!(event, Event::Empty(_));
                match name.as_ref() {
                    b"trkpt" => {
                        let (mut lat, mut lon) = (None, None);
                        for attr in e.attributes() {
                            let attr = attr.map_err(|e| IngestError::MalformedXml {
                                line: line_of(bytes, pos),
                                detail: format!("bad attribute: {e}"),
                            })?;
                            let key = attr.key.local_name();
                            if !matches!(key.as_ref(), b"lat" | b"lon") {
                                continue;
                            }
                            let raw = attr.unescape_value().map_err(|e| {
                                IngestError::MalformedXml {
                                    line: line_of(bytes, pos),
                                    detail: format!("bad attribute value: {e}"),
                                }
                            })?;
                            let value: f64 =
                                raw.trim().parse().map_err(|_| IngestError::MalformedXml {
                                    line: line_of(bytes, pos),
                                    detail: format!("non-numeric coordinate '{raw}'"),
                                })?;
                            match key.as_ref() {
                                b"lat" => lat = Some(value),
                                b"lon" => lon = Some(value),
                                _ => unreachable!(),
                            }
                        }
                        let (lat, lon) = match (lat, lon) {
                            (Some(lat), Some(lon)) => (lat, lon),
                            _ => {
                                return Err(IngestError::MalformedXml {
                                    line: line_of(bytes, pos),
                                    detail: "trkpt missing lat or lon attribute".into(),
                                })
                            }
                        };
                        if is_empty {
                            let p = GeoPoint::new(lat, lon).map_err(|source| {
                                IngestError::InvalidCoordinate {
                                    line: line_of(bytes, pos),
                                    source,
                                }
                            })?;
                            points.push(p);
                        } else {
                            in_trkpt = true;
                            cur_lat = lat;
                            cur_lon = lon;
                            cur_pos = pos;
                            cur_ele = None;
                            cur_time = None;
                        }
                    }
                    b"ele" if in_trkpt && !is_empty => target = Some(TextTarget::Ele),
                    b"time" if in_trkpt && !is_empty => target = Some(TextTarget::Time),
                    _ => {}
                }
            }
            Event::Text(ref t) => {
                if let Some(tgt) = target {
                    let text = t.unescape().map_err(|e| IngestError::MalformedXml {
                        line: line_of(bytes, pos),
                        detail: e.to_string(),
                    })?;
                    let text = text.trim();
                    if text.is_empty() {
                        continue;
                    }
                    match tgt {
                        TextTarget::Ele => {
                            let ele: f64 =
                                text.parse().map_err(|_| IngestError::MalformedXml {
                                    line: line_of(bytes, pos),
                                    detail: format!("non-numeric <ele> '{text}'"),
                                })?;
                            cur_ele = Some(ele);
                        }
                        TextTarget::Time => {
                            let dt = chrono::DateTime::parse_from_rfc3339(text).map_err(|e| {
                                IngestError::MalformedXml {
                                    line: line_of(bytes, pos),
                                    detail: format!("bad <time> '{text}': {e}"),
                                }
                            })?;
                            cur_time = Some(
                                dt.timestamp() as f64 + dt.timestamp_subsec_nanos() as f64 * 1e-9,
                            );
                        }
                    }
                }
            }
            Event::End(ref e) => match e.local_name().as_ref() {
                b"trkpt" if in_trkpt => {
                    let p = GeoPoint::with_alt_time(cur_lat, cur_lon, cur_ele, cur_time).map_err(
                        |source| IngestError::InvalidCoordinate {
                            line: line_of(bytes, cur_pos),
                            source,
                        },
                    )?;
                    points.push(p);
                    in_trkpt = false;
                }
                b"ele" | b"time" => target = None,
                _ => {}
            },
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }

    if points.is_empty() {
        return Err(IngestError::NoTrackPoints);
    }
    Track::new(id, points, TrackSource::Gpx)
}

/// Serializes a track as GPX 1.1. Inverse of [`parse_gpx`] up to the
/// millisecond resolution of the `<time>` element.
pub fn write_gpx(track: &Track) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str(
        "<gpx version=\"1.1\" creator=\"trail-surface\" \
         xmlns=\"http://www.topografix.com/GPX/1/1\">\n",
    );
    let _ = writeln!(out, "  <trk>\n    <name>{}</name>", xml_escape(&track.id));
    out.push_str("    <trkseg>\n");
    for p in &track.points {
        let _ = write!(out, "      <trkpt lat=\"{}\" lon=\"{}\">", p.lat, p.lon);
        if let Some(ele) = p.alt {
            let _ = write!(out, "<ele>{ele}</ele>");
        }
        if let Some(t) = p.t {
            let secs = t.floor();
            let nanos = ((t - secs) * 1e9).round() as u32;
            if let Some(dt) = chrono::DateTime::from_timestamp(secs as i64, nanos) {
                let _ = write!(out, "<time>{}</time>", dt.format("%Y-%m-%dT%H:%M:%S%.3fZ"));
            }
        }
        out.push_str("</trkpt>\n");
    }
    out.push_str("    </trkseg>\n  </trk>\n</gpx>\n");
    out
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

/// Parses a track CSV with header `lat,lon,alt,t`; the `alt` and `t` columns
/// are optional. Row numbers in errors are 1-based data rows.
pub fn parse_track_csv(id: impl Into<String>, bytes: &[u8]) -> Result<Track, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);

    let headers = reader
        .headers()
        .map_err(|e| IngestError::MissingHeader(e.to_string()))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let lat_col = col("lat").ok_or_else(|| IngestError::MissingHeader("no 'lat' column".into()))?;
    let lon_col = col("lon").ok_or_else(|| IngestError::MissingHeader("no 'lon' column".into()))?;
    let alt_col = col("alt");
    let t_col = col("t");

    let mut points = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| IngestError::RowParseError {
            row,
            detail: e.to_string(),
        })?;
        let field = |idx: usize, name: &str| -> Result<f64, IngestError> {
            let raw = record.get(idx).unwrap_or("");
            raw.parse().map_err(|_| IngestError::RowParseError {
                row,
                detail: format!("non-numeric {name} '{raw}'"),
            })
        };
        let opt_field = |idx: Option<usize>, name: &str| -> Result<Option<f64>, IngestError> {
            match idx.and_then(|i| record.get(i)) {
                None | Some("") => Ok(None),
                Some(raw) => raw
                    .parse()
                    .map(Some)
                    .map_err(|_| IngestError::RowParseError {
                        row,
                        detail: format!("non-numeric {name} '{raw}'"),
                    }),
            }
        };
        let lat = field(lat_col, "lat")?;
        let lon = field(lon_col, "lon")?;
        let alt = opt_field(alt_col, "alt")?;
        let t = opt_field(t_col, "t")?;
        let p = GeoPoint::with_alt_time(lat, lon, alt, t).map_err(|e| {
            IngestError::RowParseError {
                row,
                detail: e.to_string(),
            }
        })?;
        points.push(p);
    }

    if points.is_empty() {
        return Err(IngestError::NoTrackPoints);
    }
    Track::new(id, points, TrackSource::Csv)
}

/// Serializes a track as CSV with the full `lat,lon,alt,t` header. Values are
/// written at round-trip precision.
pub fn write_track_csv(track: &Track) -> String {
    let mut out = String::from("lat,lon,alt,t\n");
    for p in &track.points {
        let _ = write!(out, "{},{},", p.lat, p.lon);
        if let Some(alt) = p.alt {
            let _ = write!(out, "{alt}");
        }
        out.push(',');
        if let Some(t) = p.t {
            let _ = write!(out, "{t}");
        }
        out.push('\n');
    }
    out
}

/// Drops exact-duplicate consecutive fixes (a rider waiting at lights), then
/// rejects tracks that are too short or contain a GPS dropout gap.
pub fn clean(track: Track) -> Result<Track, IngestError> {
    let mut points: Vec<GeoPoint> = Vec::with_capacity(track.points.len());
    for p in track.points {
        match points.last() {
            Some(last) if last.lat == p.lat && last.lon == p.lon => {}
            _ => points.push(p),
        }
    }
    if points.len() < MIN_TRACK_POINTS {
        return Err(IngestError::TooShort {
            id: track.id,
            len: points.len(),
        });
    }
    for i in 1..points.len() {
        let gap = haversine_m(points[i - 1], points[i]);
        if gap > MAX_GAP_M {
            return Err(IngestError::GapTooLarge {
                index: i - 1,
                meters: gap,
            });
        }
    }
    Ok(Track {
        id: track.id,
        points,
        source: track.source,
    })
}

/// Loads a ground-truth label CSV with header `id,label`. Labels are matched
/// case-insensitively; duplicate ids are rejected.
pub fn load_labels(bytes: &[u8]) -> Result<BTreeMap<String, Label>, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);

    let headers = reader
        .headers()
        .map_err(|e| IngestError::MissingHeader(e.to_string()))?
        .clone();
    let id_col = headers
        .iter()
        .position(|h| h == "id")
        .ok_or_else(|| IngestError::MissingHeader("no 'id' column".into()))?;
    let label_col = headers
        .iter()
        .position(|h| h == "label")
        .ok_or_else(|| IngestError::MissingHeader("no 'label' column".into()))?;

    let mut map = BTreeMap::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| IngestError::RowParseError {
            row,
            detail: e.to_string(),
        })?;
        let id = record.get(id_col).unwrap_or("").to_string();
        let raw = record.get(label_col).unwrap_or("");
        let label = Label::parse(raw).ok_or_else(|| IngestError::UnknownLabel {
            row,
            label: raw.to_string(),
        })?;
        if map.insert(id.clone(), label).is_some() {
            return Err(IngestError::DuplicateId { id });
        }
    }
    Ok(map)
}

/// Serializes an id -> label map as the `id,label` CSV consumed by
/// [`load_labels`].
pub fn write_labels<'a>(labels: impl IntoIterator<Item = (&'a str, Label)>) -> String {
    let mut out = String::from("id,label\n");
    for (id, label) in labels {
        let _ = writeln!(out, "{id},{label}");
    }
    out
}
