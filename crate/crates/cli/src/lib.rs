//! Command-line pipeline: ingest -> features -> train -> eval, plus GeoJSON
//! segment coloring, rider profiling, and synthetic-corpus generation.
//!
//! Stages communicate through documented files (feature CSV, label CSV,
//! model JSON, report JSON) so each method/model/level combination is
//! independently scriptable. Every command is deterministic given its flags;
//! all randomness is seeded.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use trail_surface_core::eval::{
    classification_report, make_split, roc_curve, roc_to_csv, EvalReport, PointsPerSegmentStats,
    SplitInfo,
};
use trail_surface_core::features::{
    read_feature_csv, rides_from_rows, track_feature_rows, write_feature_csv, FeatureRow, Method,
    SummaryStats,
};
use trail_surface_core::geo::{inverse_project, project_track, projection_origin};
use trail_surface_core::ingest::{
    clean, load_labels, parse_gpx, parse_track_csv, write_gpx, write_labels, Track,
};
use trail_surface_core::ml::{
    knn_train, load_model, save_model, svm_train, tree_train, DataRow, Dataset, ModelFile,
    Prediction, TrainedModel,
};
use trail_surface_core::segment::{segment_track, Segment, SEGMENT_COUNT};
use trail_surface_core::synth::{generate_corpus, SynthSpec};
use trail_surface_core::Label;

/// Caps worker threads for per-track parallelism; unset = one per processor.
pub const THREADS_ENV: &str = "TRAIL_SURFACE_THREADS";

/// Errors grouped by exit code: usage = 1, data = 2, internal = 3.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Internal(_) => 3,
        }
    }

    pub fn kind_str(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Data(_) => "data",
            CliError::Internal(_) => "internal",
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Internal(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

fn data_err(context: &str, err: impl std::fmt::Display) -> CliError {
    CliError::Data(format!("{context}: {err}"))
}

#[derive(Parser, Debug)]
#[command(
    name = "trail-surface",
    version,
    about = "Classify road surface (paved vs dirt) from cyclist GPS rides"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse, clean, project, segment, and featurize rides into a feature CSV
    Ingest(IngestArgs),
    /// Train a classifier from a feature CSV and labels; writes model + report
    Train(TrainArgs),
    /// Evaluate a saved model against a feature CSV and labels
    Eval(EvalArgs),
    /// Color one ride's segments by model prediction (GeoJSON FeatureCollection)
    Color(ColorArgs),
    /// Share of squiggly vs straight distance across many rides
    Profile(ProfileArgs),
    /// Generate a synthetic GPX corpus with a label CSV
    Synth(SynthArgs),
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    /// Ride files (.gpx or .csv), processed in the given order
    #[arg(required = true)]
    pub paths: Vec<PathBuf>,
    /// Output feature CSV; a quality sidecar is written next to it
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    /// Feature method: m1, m2, or m3
    #[arg(long)]
    pub method: String,
    /// Classifier: svm, knn, or tree
    #[arg(long)]
    pub model: String,
    /// Instance granularity: ride (summary stats) or segment (single scalar)
    #[arg(long, default_value = "ride")]
    pub level: String,
    /// Train fraction in (0, 1)
    #[arg(long, default_value_t = 0.5)]
    pub ratio: f64,
    /// Seed for the split shuffle and SVM epoch shuffles
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub model_out: PathBuf,
    #[arg(long)]
    pub report_out: PathBuf,
    /// KNN neighbor count (odd)
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Decision-tree depth limit; unlimited if omitted
    #[arg(long)]
    pub max_depth: Option<usize>,
    /// Minimum rows per tree leaf
    #[arg(long, default_value_t = 1)]
    pub min_leaf: usize,
    /// SVM soft-margin constant
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// SVM training epochs
    #[arg(long, default_value_t = 200)]
    pub epochs: usize,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long)]
    pub report_out: PathBuf,
    /// Optional ROC points CSV for plotting
    #[arg(long)]
    pub roc_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ColorArgs {
    /// A segment-level model file
    #[arg(long)]
    pub model: PathBuf,
    /// One GPX ride
    pub gpx: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ProfileArgs {
    /// A segment-level model file
    #[arg(long)]
    pub model: PathBuf,
    /// GPX rides of one athlete
    #[arg(required = true)]
    pub paths: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// straight, squiggly, or both
    #[arg(long, default_value = "both")]
    pub kind: String,
    /// Tracks per selected class
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 5_000.0)]
    pub length: f64,
    #[arg(long, default_value_t = 2.0)]
    pub spacing: f64,
    #[arg(long, default_value_t = 10.0)]
    pub amplitude: f64,
    #[arg(long, default_value_t = 50.0)]
    pub wavelength: f64,
    #[arg(long, default_value_t = 3.0)]
    pub noise_sigma: f64,
    #[arg(long, default_value_t = 0.0)]
    pub heading: f64,
    #[arg(long, default_value_t = 46.0)]
    pub origin_lat: f64,
    #[arg(long, default_value_t = 7.5)]
    pub origin_lon: f64,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    init_thread_pool()?;
    match cli.command {
        Command::Ingest(args) => cmd_ingest(args),
        Command::Train(args) => cmd_train(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Color(args) => cmd_color(args),
        Command::Profile(args) => cmd_profile(args),
        Command::Synth(args) => cmd_synth(args),
    }
}

static POOL_INIT: OnceLock<Result<(), String>> = OnceLock::new();

fn init_thread_pool() -> Result<(), CliError> {
    let result = POOL_INIT.get_or_init(|| {
        let threads = match std::env::var(THREADS_ENV) {
            Ok(raw) => match raw.trim().parse::<usize>() {
                Ok(n) if n >= 1 => Some(n),
                _ => return Err(format!("{THREADS_ENV} must be a positive integer, got '{raw}'")),
            },
            Err(_) => None,
        };
        if let Some(n) = threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| e.to_string())?;
        }
        Ok(())
    });
    result.clone().map_err(CliError::Usage)
}

// ---------------------------------------------------------------------------
// Shared per-track pipeline
// ---------------------------------------------------------------------------

/// Sampling-quality numbers for one ingested track.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrackQuality {
    pub track_id: String,
    pub n_points: usize,
    pub valid_segments: usize,
    pub invalid_segments: usize,
    pub points_per_segment_mean: f64,
    pub points_per_segment_min: usize,
    pub points_per_segment_max: usize,
}

/// Sidecar written next to the feature CSV so later stages can report
/// sampling density.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QualitySummary {
    pub aggregate: PointsPerSegmentStats,
    pub tracks: Vec<TrackQuality>,
}

struct ProcessedTrack {
    origin: (f64, f64),
    segments: Vec<Segment>,
    rows: Vec<FeatureRow>,
    quality: TrackQuality,
}

fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| data_err(&format!("reading {}", path.display()), e))
}

fn track_id_of(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn parse_ride_file(path: &Path) -> Result<Track, CliError> {
    let bytes = read_file(path)?;
    let id = track_id_of(path);
    let ext = path
        .extension()
        .map(|e| e.to_string_lossy().to_ascii_lowercase())
        .unwrap_or_default();
    let context = || format!("parsing {}", path.display());
    match ext.as_str() {
        "gpx" => parse_gpx(id, &bytes).map_err(|e| data_err(&context(), e)),
        "csv" => parse_track_csv(id, &bytes).map_err(|e| data_err(&context(), e)),
        other => Err(CliError::Data(format!(
            "{}: unsupported ride extension '{other}' (expected .gpx or .csv)",
            path.display()
        ))),
    }
}

fn process_track(track: Track) -> Result<ProcessedTrack, CliError> {
    let id = track.id.clone();
    let context = |what: &str| format!("{what} for track '{id}'");
    let cleaned = clean(track).map_err(|e| data_err(&context("cleaning"), e))?;
    let origin =
        projection_origin(&cleaned.points).map_err(|e| data_err(&context("projecting"), e))?;
    let planar = project_track(&cleaned.points).map_err(|e| data_err(&context("projecting"), e))?;
    let segments =
        segment_track(&planar).map_err(|e| data_err(&context("segmenting"), e))?;
    let rows = track_feature_rows(&cleaned.id, &segments);

    let counts: Vec<usize> = segments.iter().map(|s| s.points.len()).collect();
    let valid_rows = rows.iter().filter(|r| r.valid).count();
    let quality = TrackQuality {
        track_id: cleaned.id.clone(),
        n_points: cleaned.points.len(),
        valid_segments: valid_rows,
        invalid_segments: SEGMENT_COUNT - valid_rows,
        points_per_segment_mean: counts.iter().sum::<usize>() as f64 / counts.len() as f64,
        points_per_segment_min: counts.iter().copied().min().unwrap_or(0),
        points_per_segment_max: counts.iter().copied().max().unwrap_or(0),
    };
    Ok(ProcessedTrack {
        origin,
        segments,
        rows,
        quality,
    })
}

fn process_ride_file(path: &Path) -> Result<ProcessedTrack, CliError> {
    process_track(parse_ride_file(path)?)
}

fn write_output(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| data_err(&format!("creating {}", parent.display()), e))?;
        }
    }
    std::fs::write(path, bytes).map_err(|e| data_err(&format!("writing {}", path.display()), e))
}

fn quality_sidecar_path(features: &Path) -> PathBuf {
    features.with_extension("quality.json")
}

fn aggregate_quality(tracks: &[TrackQuality]) -> PointsPerSegmentStats {
    let total_segments: usize = tracks.len() * SEGMENT_COUNT;
    let invalid: usize = tracks.iter().map(|t| t.invalid_segments).sum();
    let mean = if tracks.is_empty() {
        0.0
    } else {
        tracks.iter().map(|t| t.points_per_segment_mean).sum::<f64>() / tracks.len() as f64
    };
    PointsPerSegmentStats {
        mean,
        min: tracks
            .iter()
            .map(|t| t.points_per_segment_min)
            .min()
            .unwrap_or(0),
        max: tracks
            .iter()
            .map(|t| t.points_per_segment_max)
            .max()
            .unwrap_or(0),
        invalid_segments: invalid,
        total_segments,
    }
}

// ---------------------------------------------------------------------------
// ingest
// ---------------------------------------------------------------------------

fn cmd_ingest(args: IngestArgs) -> Result<(), CliError> {
    // Parse and featurize in parallel; outputs keep the input path order.
    let processed: Vec<Result<ProcessedTrack, CliError>> =
        args.paths.par_iter().map(|p| process_ride_file(p)).collect();

    let mut rows = Vec::with_capacity(args.paths.len() * SEGMENT_COUNT);
    let mut qualities = Vec::with_capacity(args.paths.len());
    for result in processed {
        let t = result?;
        rows.extend(t.rows);
        qualities.push(t.quality);
    }

    write_output(&args.out, write_feature_csv(&rows).as_bytes())?;
    let summary = QualitySummary {
        aggregate: aggregate_quality(&qualities),
        tracks: qualities,
    };
    let summary_json = serde_json::to_string_pretty(&summary)
        .map_err(|e| CliError::Internal(format!("serializing quality summary: {e}")))?;
    write_output(&quality_sidecar_path(&args.out), summary_json.as_bytes())?;
    println!("{summary_json}");
    Ok(())
}

// ---------------------------------------------------------------------------
// train / eval
// ---------------------------------------------------------------------------

fn parse_method(raw: &str) -> Result<Method, CliError> {
    Method::parse(raw).ok_or_else(|| {
        CliError::Usage(format!("unknown method '{raw}' (expected m1, m2, or m3)"))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Level {
    Segment,
    Ride,
}

impl Level {
    fn parse(raw: &str) -> Result<Level, CliError> {
        match raw.trim().to_ascii_lowercase().as_str() {
            "segment" => Ok(Level::Segment),
            "ride" => Ok(Level::Ride),
            other => Err(CliError::Usage(format!(
                "unknown level '{other}' (expected segment or ride)"
            ))),
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Level::Segment => "segment",
            Level::Ride => "ride",
        }
    }
}

fn load_feature_rows(path: &Path) -> Result<Vec<FeatureRow>, CliError> {
    let bytes = read_file(path)?;
    read_feature_csv(&bytes).map_err(|e| data_err(&format!("reading {}", path.display()), e))
}

fn load_label_map(path: &Path) -> Result<BTreeMap<String, Label>, CliError> {
    let bytes = read_file(path)?;
    load_labels(&bytes).map_err(|e| data_err(&format!("reading {}", path.display()), e))
}

/// Track id of a segment-level instance id ("<track>#<index>").
fn ride_of_instance(id: &str) -> &str {
    id.rsplit_once('#').map(|(ride, _)| ride).unwrap_or(id)
}

/// Builds the labeled dataset at the requested level. Every track in the
/// feature table must have a label.
fn build_dataset(
    rows: &[FeatureRow],
    labels: &BTreeMap<String, Label>,
    method: Method,
    level: Level,
) -> Result<Dataset, CliError> {
    let track_ids: std::collections::BTreeSet<&str> =
        rows.iter().map(|r| r.track_id.as_str()).collect();
    let unlabeled: Vec<&str> = track_ids
        .iter()
        .copied()
        .filter(|id| !labels.contains_key(*id))
        .collect();
    if !unlabeled.is_empty() {
        return Err(CliError::Data(format!(
            "no label for track ids: {}",
            unlabeled.join(", ")
        )));
    }

    let (feature_names, data_rows) = match level {
        Level::Ride => {
            let (rides, rejected) = rides_from_rows(rows, method);
            for (id, why) in &rejected {
                eprintln!("warning: skipping ride '{id}': {why}");
            }
            let names = SummaryStats::NAMES
                .iter()
                .map(|n| format!("{method}_{n}"))
                .collect::<Vec<_>>();
            let data_rows: Vec<DataRow> = rides
                .iter()
                .map(|r| DataRow {
                    id: r.track_id.clone(),
                    features: r.stats.to_vec(),
                    label: labels[&r.track_id],
                })
                .collect();
            (names, data_rows)
        }
        Level::Segment => {
            let names = vec![method.as_str().to_string()];
            let data_rows: Vec<DataRow> = rows
                .iter()
                .filter_map(|row| {
                    row.features().map(|f| DataRow {
                        id: format!("{}#{:02}", row.track_id, row.segment_index),
                        features: vec![method.scalar(&f)],
                        label: labels[&row.track_id],
                    })
                })
                .collect();
            (names, data_rows)
        }
    };
    if data_rows.is_empty() {
        return Err(CliError::Data(
            "feature table produced no usable instances".into(),
        ));
    }
    Dataset::new(feature_names, data_rows).map_err(|e| data_err("building dataset", e))
}

/// Splits at the ride level regardless of instance level, so segment
/// instances of one ride never straddle the train/test boundary.
fn split_dataset(
    data: &Dataset,
    labels: &BTreeMap<String, Label>,
    ratio: f64,
    seed: u64,
) -> Result<(Dataset, Dataset, SplitInfo), CliError> {
    let mut rides: BTreeMap<&str, Label> = BTreeMap::new();
    for row in &data.rows {
        let ride = ride_of_instance(&row.id);
        rides.insert(ride, labels[ride]);
    }
    let ids_with_labels: Vec<(String, Label)> = rides
        .iter()
        .map(|(id, l)| (id.to_string(), *l))
        .collect();
    let split =
        make_split(&ids_with_labels, ratio, seed).map_err(|e| data_err("splitting", e))?;
    let train_set: std::collections::BTreeSet<&str> =
        split.train_ids.iter().map(String::as_str).collect();
    let pick = |want_train: bool| Dataset {
        feature_names: data.feature_names.clone(),
        rows: data
            .rows
            .iter()
            .filter(|r| train_set.contains(ride_of_instance(&r.id)) == want_train)
            .cloned()
            .collect(),
    };
    Ok((
        pick(true),
        pick(false),
        SplitInfo { ratio, seed },
    ))
}

fn train_model(args: &TrainArgs, train: &Dataset) -> Result<TrainedModel, CliError> {
    let context = || format!("training {} model", args.model);
    match args.model.trim().to_ascii_lowercase().as_str() {
        "knn" => knn_train(train, args.k).map_err(|e| data_err(&context(), e)),
        "tree" => {
            tree_train(train, args.max_depth, args.min_leaf).map_err(|e| data_err(&context(), e))
        }
        "svm" => {
            svm_train(train, args.c, args.epochs, args.seed).map_err(|e| data_err(&context(), e))
        }
        other => Err(CliError::Usage(format!(
            "unknown model '{other}' (expected svm, knn, or tree)"
        ))),
    }
}

fn evaluate(
    model: &TrainedModel,
    test: &Dataset,
    labels: &BTreeMap<String, Label>,
) -> Result<(Vec<Prediction>, EvalReport), CliError> {
    let predictions: Vec<Prediction> = test
        .rows
        .iter()
        .map(|r| model.predict(&r.id, &r.features))
        .collect::<Result<_, _>>()
        .map_err(|e| data_err("predicting", e))?;

    let truth: BTreeMap<String, Label> = test
        .rows
        .iter()
        .map(|r| (r.id.clone(), labels[ride_of_instance(&r.id)]))
        .collect();
    let metrics =
        classification_report(&truth, &predictions).map_err(|e| data_err("scoring", e))?;
    let scored: Vec<(Label, f64)> = predictions
        .iter()
        .map(|p| (truth[&p.id], p.score))
        .collect();
    let (roc, auc) = roc_curve(&scored).map_err(|e| data_err("roc analysis", e))?;

    let report = EvalReport {
        model: String::new(),
        method: String::new(),
        level: String::new(),
        split: SplitInfo { ratio: 0.0, seed: 0 },
        confusion: metrics.confusion,
        accuracy: metrics.accuracy,
        precision: metrics.precision,
        recall: metrics.recall,
        auc,
        roc,
        points_per_segment_stats: None,
        flags: metrics.flags,
    };
    Ok((predictions, report))
}

fn load_quality_sidecar(features: &Path) -> Option<PointsPerSegmentStats> {
    let path = quality_sidecar_path(features);
    let bytes = std::fs::read(path).ok()?;
    serde_json::from_slice::<QualitySummary>(&bytes)
        .ok()
        .map(|s| s.aggregate)
}

fn cmd_train(args: TrainArgs) -> Result<(), CliError> {
    let method = parse_method(&args.method)?;
    let level = Level::parse(&args.level)?;
    let rows = load_feature_rows(&args.features)?;
    let labels = load_label_map(&args.labels)?;

    let data = build_dataset(&rows, &labels, method, level)?;
    let (train, test, split_info) = split_dataset(&data, &labels, args.ratio, args.seed)?;
    if train.rows.is_empty() || test.rows.is_empty() {
        return Err(CliError::Data(
            "split produced an empty train or test side".into(),
        ));
    }
    let model = train_model(&args, &train)?;

    let mut meta = BTreeMap::new();
    meta.insert("method".to_string(), method.as_str().to_string());
    meta.insert("level".to_string(), level.as_str().to_string());
    meta.insert("features".to_string(), data.feature_names.join(","));
    let file = ModelFile {
        model: model.clone(),
        meta,
    };
    write_output(&args.model_out, &save_model(&file))?;

    let (_, mut report) = evaluate(&model, &test, &labels)?;
    report.model = model.kind().to_string();
    report.method = method.as_str().to_string();
    report.level = level.as_str().to_string();
    report.split = split_info;
    report.points_per_segment_stats = load_quality_sidecar(&args.features);
    write_output(&args.report_out, report.to_json().as_bytes())?;
    println!("{}", report.to_json());
    Ok(())
}

fn load_model_file(path: &Path) -> Result<ModelFile, CliError> {
    let bytes = read_file(path)?;
    load_model(&bytes).map_err(|e| data_err(&format!("loading {}", path.display()), e))
}

fn model_meta<'a>(file: &'a ModelFile, key: &str, path: &Path) -> Result<&'a str, CliError> {
    file.meta.get(key).map(String::as_str).ok_or_else(|| {
        CliError::Data(format!(
            "model {} carries no '{key}' metadata",
            path.display()
        ))
    })
}

fn cmd_eval(args: EvalArgs) -> Result<(), CliError> {
    let file = load_model_file(&args.model)?;
    let method = parse_method(model_meta(&file, "method", &args.model)?)?;
    let level = Level::parse(model_meta(&file, "level", &args.model)?)?;
    let rows = load_feature_rows(&args.features)?;
    let labels = load_label_map(&args.labels)?;
    let data = build_dataset(&rows, &labels, method, level)?;

    let (_, mut report) = evaluate(&file.model, &data, &labels)?;
    report.model = file.model.kind().to_string();
    report.method = method.as_str().to_string();
    report.level = level.as_str().to_string();
    report.points_per_segment_stats = load_quality_sidecar(&args.features);
    write_output(&args.report_out, report.to_json().as_bytes())?;
    if let Some(roc_out) = &args.roc_out {
        write_output(roc_out, roc_to_csv(&report.roc).as_bytes())?;
    }
    println!("{}", report.to_json());
    Ok(())
}

// ---------------------------------------------------------------------------
// color / profile
// ---------------------------------------------------------------------------

fn require_segment_level(file: &ModelFile, path: &Path) -> Result<Method, CliError> {
    let level = Level::parse(model_meta(file, "level", path)?)?;
    if level != Level::Segment {
        return Err(CliError::Data(format!(
            "model {} was trained at ride level; per-segment prediction needs a segment-level model",
            path.display()
        )));
    }
    parse_method(model_meta(file, "method", path)?)
}

fn segment_prediction(
    model: &TrainedModel,
    method: Method,
    row: &FeatureRow,
) -> Result<Option<Prediction>, CliError> {
    match row.features() {
        Some(f) => {
            let id = format!("{}#{:02}", row.track_id, row.segment_index);
            let p = model
                .predict(&id, &[method.scalar(&f)])
                .map_err(|e| data_err("predicting", e))?;
            Ok(Some(p))
        }
        None => Ok(None),
    }
}

fn cmd_color(args: ColorArgs) -> Result<(), CliError> {
    let file = load_model_file(&args.model)?;
    let method = require_segment_level(&file, &args.model)?;
    let processed = process_ride_file(&args.gpx)?;

    let mut features = Vec::new();
    for (seg, row) in processed.segments.iter().zip(&processed.rows) {
        if seg.points.len() < 2 {
            continue; // nothing drawable
        }
        let coordinates: Vec<[f64; 2]> = seg
            .points
            .iter()
            .map(|p| {
                let (lat, lon) = inverse_project(processed.origin.0, processed.origin.1, p.x, p.y);
                [lon, lat]
            })
            .collect();
        let properties = match segment_prediction(&file.model, method, row)? {
            Some(p) => serde_json::json!({
                "segment_index": seg.index,
                "valid": true,
                "score": p.score,
                "label": p.label.as_str(),
                "color": if p.label == Label::Squiggly { "red" } else { "blue" },
            }),
            None => serde_json::json!({
                "segment_index": seg.index,
                "valid": false,
                "score": null,
                "label": null,
                "color": "gray",
            }),
        };
        features.push(serde_json::json!({
            "type": "Feature",
            "geometry": { "type": "LineString", "coordinates": coordinates },
            "properties": properties,
        }));
    }

    let collection = serde_json::json!({
        "type": "FeatureCollection",
        "features": features,
    });
    let body = serde_json::to_string_pretty(&collection)
        .map_err(|e| CliError::Internal(format!("serializing GeoJSON: {e}")))?;
    write_output(&args.out, body.as_bytes())?;
    println!("{body}");
    Ok(())
}

/// Distance shares written by `profile`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileReport {
    pub n_rides: usize,
    /// Percentages of the valid (classified) distance; sum to 100.
    pub straight_pct: f64,
    pub squiggly_pct: f64,
    pub valid_distance_m: f64,
    /// Distance in segments too sparse to classify, reported separately.
    pub invalid_distance_m: f64,
}

fn cmd_profile(args: ProfileArgs) -> Result<(), CliError> {
    let file = load_model_file(&args.model)?;
    let method = require_segment_level(&file, &args.model)?;

    let processed: Vec<Result<ProcessedTrack, CliError>> =
        args.paths.par_iter().map(|p| process_ride_file(p)).collect();

    let mut squiggly_m = 0.0;
    let mut straight_m = 0.0;
    let mut invalid_m = 0.0;
    let mut n_rides = 0usize;
    for result in processed {
        let t = result?;
        n_rides += 1;
        for (seg, row) in t.segments.iter().zip(&t.rows) {
            match segment_prediction(&file.model, method, row)? {
                Some(p) => match p.label {
                    Label::Squiggly => squiggly_m += seg.length_m(),
                    Label::Straight => straight_m += seg.length_m(),
                },
                None => invalid_m += seg.length_m(),
            }
        }
    }

    let valid = squiggly_m + straight_m;
    if valid <= 0.0 {
        return Err(CliError::Data(
            "no classifiable distance in the given rides".into(),
        ));
    }
    let report = ProfileReport {
        n_rides,
        straight_pct: 100.0 * straight_m / valid,
        squiggly_pct: 100.0 * squiggly_m / valid,
        valid_distance_m: valid,
        invalid_distance_m: invalid_m,
    };
    let body = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::Internal(format!("serializing profile: {e}")))?;
    write_output(&args.out, body.as_bytes())?;
    println!("{body}");
    Ok(())
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

fn cmd_synth(args: SynthArgs) -> Result<(), CliError> {
    let keep: Option<Label> = match args.kind.trim().to_ascii_lowercase().as_str() {
        "both" => None,
        other => Some(Label::parse(other).ok_or_else(|| {
            CliError::Usage(format!(
                "unknown kind '{other}' (expected straight, squiggly, or both)"
            ))
        })?),
    };
    if args.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }

    let origin = trail_surface_core::geo::GeoPoint::new(args.origin_lat, args.origin_lon)
        .map_err(|e| CliError::Usage(format!("bad origin: {e}")))?;
    let base = SynthSpec {
        kind: Label::Straight,
        length_m: args.length,
        spacing_m: args.spacing,
        amplitude_m: args.amplitude,
        wavelength_m: args.wavelength,
        noise_sigma_m: args.noise_sigma,
        heading_deg: args.heading,
        origin,
        seed: 0,
    };
    let corpus = generate_corpus(args.n, &base, args.seed)
        .map_err(|e| data_err("generating corpus", e))?;

    std::fs::create_dir_all(&args.out)
        .map_err(|e| data_err(&format!("creating {}", args.out.display()), e))?;
    let mut labeled = Vec::new();
    for ride in &corpus {
        if keep.is_some_and(|k| k != ride.label) {
            continue;
        }
        let path = args.out.join(format!("{}.gpx", ride.track.id));
        write_output(&path, write_gpx(&ride.track).as_bytes())?;
        labeled.push((ride.track.id.as_str(), ride.label));
    }
    write_output(
        &args.out.join("labels.csv"),
        write_labels(labeled.iter().map(|&(id, l)| (id, l))).as_bytes(),
    )?;
    println!(
        "wrote {} tracks and labels.csv to {}",
        labeled.len(),
        args.out.display()
    );
    Ok(())
}
