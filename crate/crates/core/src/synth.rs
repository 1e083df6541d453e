//! Deterministic synthetic GPS-track generator: the ground-truth oracle for
//! feature and end-to-end classifier tests.
//!
//! A track is a straight centerline ray at a given compass heading; squiggly
//! tracks add a lateral sine of known amplitude and wavelength. Seeded
//! isotropic Gaussian noise is applied in the planar frame and the result is
//! inverse-projected to lat/lon, so a generated ride exercises the whole
//! ingest -> project -> segment -> feature pipeline.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::geo::{inverse_project, GeoPoint};
use crate::ingest::{LabeledTrack, Track, TrackSource};
use crate::Label;

/// Fixed epoch for synthetic timestamps (1 Hz samples).
const SYNTH_EPOCH_S: f64 = 1_700_000_000.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("invalid synthetic spec: {0}")]
    SpecInvalid(String),
}

/// Parameters of one synthetic ride.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub kind: Label,
    pub length_m: f64,
    pub spacing_m: f64,
    pub amplitude_m: f64,
    pub wavelength_m: f64,
    pub noise_sigma_m: f64,
    /// Compass heading in degrees: 0 = north, 90 = east.
    pub heading_deg: f64,
    pub origin: GeoPoint,
    pub seed: u64,
}

impl SynthSpec {
    /// A 5 km ride sampled every 2 m; squiggle of 10 m amplitude and 50 m
    /// wavelength; 3 m GPS noise.
    pub fn new(kind: Label) -> SynthSpec {
        SynthSpec {
            kind,
            length_m: 5_000.0,
            spacing_m: 2.0,
            amplitude_m: 10.0,
            wavelength_m: 50.0,
            noise_sigma_m: 3.0,
            heading_deg: 0.0,
            origin: GeoPoint::new(46.0, 7.5).expect("default origin is valid"),
            seed: 0,
        }
    }

    fn validate(&self) -> Result<(), SynthError> {
        let err = |msg: String| Err(SynthError::SpecInvalid(msg));
        if !(self.length_m > 0.0) {
            return err(format!("length {} must be > 0", self.length_m));
        }
        if !(self.spacing_m > 0.0) {
            return err(format!("spacing {} must be > 0", self.spacing_m));
        }
        if !(self.wavelength_m > 2.0 * self.spacing_m) {
            return err(format!(
                "wavelength {} must exceed twice the spacing {} (Nyquist)",
                self.wavelength_m, self.spacing_m
            ));
        }
        if !(self.amplitude_m >= 0.0) {
            return err(format!("amplitude {} must be >= 0", self.amplitude_m));
        }
        if !(self.noise_sigma_m >= 0.0) {
            return err(format!("noise sigma {} must be >= 0", self.noise_sigma_m));
        }
        if !self.heading_deg.is_finite() {
            return err(format!("heading {} must be finite", self.heading_deg));
        }
        Ok(())
    }
}

/// Generates one labeled track. Deterministic per spec (including seed).
pub fn generate(spec: &SynthSpec) -> Result<LabeledTrack, SynthError> {
    let id = format!("synth-{}-{:08x}", spec.kind, spec.seed);
    generate_with_id(spec, &id)
}

fn generate_with_id(spec: &SynthSpec, id: &str) -> Result<LabeledTrack, SynthError> {
    spec.validate()?;

    let heading = spec.heading_deg.to_radians();
    let (dir_x, dir_y) = (heading.sin(), heading.cos());
    // Right-hand perpendicular of the direction of travel.
    let (perp_x, perp_y) = (dir_y, -dir_x);

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = if spec.noise_sigma_m > 0.0 {
        Some(Normal::new(0.0, spec.noise_sigma_m).expect("validated sigma"))
    } else {
        None
    };

    let n = (spec.length_m / spec.spacing_m).floor() as usize + 1;
    let mut points = Vec::with_capacity(n);
    for k in 0..n {
        let s = k as f64 * spec.spacing_m;
        let lateral = match spec.kind {
            Label::Squiggly => {
                spec.amplitude_m * (2.0 * std::f64::consts::PI * s / spec.wavelength_m).sin()
            }
            Label::Straight => 0.0,
        };
        let (nx, ny) = match &noise {
            Some(dist) => (dist.sample(&mut rng), dist.sample(&mut rng)),
            None => (0.0, 0.0),
        };
        let x = dir_x * s + perp_x * lateral + nx;
        let y = dir_y * s + perp_y * lateral + ny;
        let (lat, lon) = inverse_project(spec.origin.lat, spec.origin.lon, x, y);
        let point = GeoPoint::with_alt_time(lat, lon, None, Some(SYNTH_EPOCH_S + k as f64))
            .map_err(|e| {
                SynthError::SpecInvalid(format!(
                    "origin/heading push the ride out of coordinate range: {e}"
                ))
            })?;
        points.push(point);
    }

    let track = Track::new(id, points, TrackSource::Synthetic)
        .expect("synthetic timestamps are strictly increasing");
    Ok(LabeledTrack {
        track,
        label: spec.kind,
    })
}

/// Generates `n_per_class` tracks per class with headings, origins, and noise
/// streams jittered deterministically from `seed`. Track ids are
/// `straight-000` ... / `squiggly-000` ....
pub fn generate_corpus(
    n_per_class: usize,
    base: &SynthSpec,
    seed: u64,
) -> Result<Vec<LabeledTrack>, SynthError> {
    if n_per_class == 0 {
        return Err(SynthError::SpecInvalid("n_per_class must be >= 1".into()));
    }
    base.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tracks = Vec::with_capacity(2 * n_per_class);
    for kind in [Label::Straight, Label::Squiggly] {
        for i in 0..n_per_class {
            let spec = SynthSpec {
                kind,
                heading_deg: rng.random_range(0.0..360.0),
                origin: GeoPoint::new(
                    base.origin.lat + rng.random_range(-0.2..0.2),
                    base.origin.lon + rng.random_range(-0.2..0.2),
                )
                .map_err(|e| SynthError::SpecInvalid(format!("jittered origin: {e}")))?,
                seed: rng.random::<u64>(),
                ..base.clone()
            };
            tracks.push(generate_with_id(&spec, &format!("{kind}-{i:03}"))?);
        }
    }
    Ok(tracks)
}
