//! Acceptance suite: one test per criterion, each printing a PASS line.
//!
//! The checks are oracle-based: ground truth comes from the deterministic
//! synthetic-track generator and from independent brute-force computations,
//! never from the implementation under test.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use clap::Parser;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

use trail_surface::{run, Cli};
use trail_surface_core::eval::{classification_report, make_split, roc_curve};
use trail_surface_core::features::{
    rides_from_rows, segment_features, track_feature_rows, FeatureRow, Method, SummaryStats,
};
use trail_surface_core::geo::{project_track, GeoPoint, PlanarPoint};
use trail_surface_core::ingest::{
    clean, parse_gpx, parse_track_csv, write_gpx, write_track_csv, LabeledTrack, Track,
    TrackSource,
};
use trail_surface_core::ml::{
    knn_train, load_model, save_model, svm_objective, svm_train, tree_train, DataRow, Dataset,
    ModelFile, Prediction, TrainedModel,
};
use trail_surface_core::segment::{segment_track, Segment};
use trail_surface_core::synth::{generate, generate_corpus, SynthSpec};
use trail_surface_core::Label;

fn pass(criterion: &str, elapsed: Duration, budget: Duration) {
    assert!(
        elapsed <= budget,
        "{criterion}: took {elapsed:?}, budget {budget:?}"
    );
    println!("ACCEPTANCE {criterion}: PASS ({elapsed:?})");
}

/// Runs the real pipeline from GPX bytes: parse -> clean -> project -> segment.
fn pipeline_segments(ride: &LabeledTrack) -> Vec<Segment> {
    let xml = write_gpx(&ride.track);
    let parsed = parse_gpx(ride.track.id.clone(), xml.as_bytes()).expect("parse generated GPX");
    let cleaned = clean(parsed).expect("clean generated track");
    let planar = project_track(&cleaned.points).expect("project");
    segment_track(&planar).expect("segment")
}

fn corpus_feature_rows(corpus: &[LabeledTrack]) -> (Vec<FeatureRow>, BTreeMap<String, Label>) {
    let mut rows = Vec::new();
    let mut labels = BTreeMap::new();
    for ride in corpus {
        let segments = pipeline_segments(ride);
        rows.extend(track_feature_rows(&ride.track.id, &segments));
        labels.insert(ride.track.id.clone(), ride.label);
    }
    (rows, labels)
}

// ---------------------------------------------------------------------------
// 1. Feature oracle suite on noise-free tracks
// ---------------------------------------------------------------------------

#[test]
fn criterion_1_feature_oracle_suite() {
    let start = Instant::now();
    let base = SynthSpec {
        noise_sigma_m: 0.0,
        ..SynthSpec::new(Label::Straight)
    };
    let corpus = generate_corpus(5, &base, 1).unwrap();

    for ride in &corpus {
        let segments = pipeline_segments(ride);
        for seg in segments.iter().filter(|s| s.valid) {
            let f = segment_features(seg).expect("features on valid segment");
            match ride.label {
                Label::Straight => {
                    assert_eq!(
                        f.m1_freq, 0.0,
                        "ride {} segment {}: m1 freq {}",
                        ride.track.id, seg.index, f.m1_freq
                    );
                    assert!(
                        f.m2_rmse < 1e-6,
                        "ride {} segment {}: m2 rmse {}",
                        ride.track.id,
                        seg.index,
                        f.m2_rmse
                    );
                    assert_eq!(
                        f.m3_crossings, 0,
                        "ride {} segment {}: m3 {}",
                        ride.track.id, seg.index, f.m3_crossings
                    );
                }
                Label::Squiggly => {
                    // >= 1 full period per segment -> at least two extrema.
                    assert!(
                        f.m3_crossings >= 2,
                        "ride {} segment {}: m3 {}",
                        ride.track.id,
                        seg.index,
                        f.m3_crossings
                    );
                }
            }
        }
    }
    pass("1 (feature oracle suite)", start.elapsed(), Duration::from_secs(5));
}

// ---------------------------------------------------------------------------
// 2. Qualitative parity: straight <= 2 crossings, squiggly >= 5
// ---------------------------------------------------------------------------

#[test]
fn criterion_2_qualitative_zero_crossing_parity() {
    let start = Instant::now();
    // One GPS fix every few meters of travel; dirt riding is slower, so
    // squiggly rides sample more densely per meter. The wavelength puts
    // ~3.4 sine periods into each 1% segment.
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for i in 0..4 {
        let straight = SynthSpec {
            kind: Label::Straight,
            noise_sigma_m: 1.0,
            spacing_m: 12.5,
            heading_deg: rng.random_range(0.0..360.0),
            seed: 100 + i,
            ..SynthSpec::new(Label::Straight)
        };
        let ride = generate(&straight).unwrap();
        for seg in pipeline_segments(&ride).iter().filter(|s| s.valid) {
            let f = segment_features(seg).unwrap();
            assert!(
                f.m3_crossings <= 2,
                "straight seed {} segment {}: m3 {}",
                straight.seed,
                seg.index,
                f.m3_crossings
            );
        }

        let squiggly = SynthSpec {
            kind: Label::Squiggly,
            noise_sigma_m: 1.0,
            spacing_m: 2.5,
            wavelength_m: 50.0 / 3.4,
            amplitude_m: 10.0,
            heading_deg: rng.random_range(0.0..360.0),
            seed: 200 + i,
            ..SynthSpec::new(Label::Squiggly)
        };
        let ride = generate(&squiggly).unwrap();
        for seg in pipeline_segments(&ride).iter().filter(|s| s.valid) {
            let f = segment_features(seg).unwrap();
            assert!(
                f.m3_crossings >= 5,
                "squiggly seed {} segment {}: m3 {}",
                squiggly.seed,
                seg.index,
                f.m3_crossings
            );
        }
    }
    pass(
        "2 (qualitative zero-crossing parity)",
        start.elapsed(),
        Duration::from_secs(5),
    );
}

// ---------------------------------------------------------------------------
// 3. End-to-end classification on the 100+100 corpus
// ---------------------------------------------------------------------------

fn ride_dataset(
    rows: &[FeatureRow],
    labels: &BTreeMap<String, Label>,
    method: Method,
) -> Dataset {
    let (rides, rejected) = rides_from_rows(rows, method);
    assert!(rejected.is_empty(), "rejected rides: {rejected:?}");
    let data_rows: Vec<DataRow> = rides
        .iter()
        .map(|r| DataRow {
            id: r.track_id.clone(),
            features: r.stats.to_vec(),
            label: labels[&r.track_id],
        })
        .collect();
    Dataset::new(
        SummaryStats::NAMES.iter().map(|s| s.to_string()).collect(),
        data_rows,
    )
    .unwrap()
}

fn acceptance_corpus_rows() -> (Vec<FeatureRow>, BTreeMap<String, Label>) {
    let corpus = generate_corpus(100, &SynthSpec::new(Label::Straight), 42).unwrap();
    corpus_feature_rows(&corpus)
}

#[test]
fn criterion_3_end_to_end_classification() {
    let start = Instant::now();
    let (rows, labels) = acceptance_corpus_rows();

    for method in Method::ALL {
        let data = ride_dataset(&rows, &labels, method);
        let ids: Vec<(String, Label)> =
            data.rows.iter().map(|r| (r.id.clone(), r.label)).collect();
        let split = make_split(&ids, 0.5, 7).unwrap();
        let train = data.subset(&split.train_ids);
        let test = data.subset(&split.test_ids);

        for model_kind in ["svm", "knn", "tree"] {
            let model = match model_kind {
                "svm" => svm_train(&train, 1.0, 200, 7).unwrap(),
                "knn" => knn_train(&train, 3).unwrap(),
                _ => tree_train(&train, None, 1).unwrap(),
            };
            let predictions: Vec<Prediction> = test
                .rows
                .iter()
                .map(|r| model.predict(&r.id, &r.features).unwrap())
                .collect();
            let truth: BTreeMap<String, Label> = test
                .rows
                .iter()
                .map(|r| (r.id.clone(), r.label))
                .collect();
            let metrics = classification_report(&truth, &predictions).unwrap();
            let scored: Vec<(Label, f64)> = predictions
                .iter()
                .map(|p| (truth[&p.id], p.score))
                .collect();
            let (_, auc) = roc_curve(&scored).unwrap();
            assert!(
                metrics.accuracy >= 0.90,
                "{method} {model_kind}: accuracy {}",
                metrics.accuracy
            );
            assert!(auc >= 0.95, "{method} {model_kind}: auc {auc}");
        }
    }
    pass(
        "3 (end-to-end classification, 9 combos)",
        start.elapsed(),
        Duration::from_secs(60),
    );
}

#[test]
fn svm_objective_converges_on_the_acceptance_corpus() {
    // Training at the default 200 epochs must land within 1% of the
    // objective reached at 10x the epochs.
    let start = Instant::now();
    let (rows, labels) = acceptance_corpus_rows();
    for method in Method::ALL {
        let data = ride_dataset(&rows, &labels, method);
        let ids: Vec<(String, Label)> =
            data.rows.iter().map(|r| (r.id.clone(), r.label)).collect();
        let split = make_split(&ids, 0.5, 7).unwrap();
        let train = data.subset(&split.train_ids);

        let model_of = |epochs: usize| match svm_train(&train, 1.0, epochs, 7).unwrap() {
            TrainedModel::LinearSvm(m) => m,
            _ => unreachable!(),
        };
        let short = svm_objective(&model_of(200), &train, 1.0);
        let long = svm_objective(&model_of(2000), &train, 1.0);
        let rel = (short - long).abs() / long;
        assert!(rel <= 0.01, "{method}: objective drift {rel:.5} above 1%");
    }
    pass(
        "3b (svm convergence at 10x epochs)",
        start.elapsed(),
        Duration::from_secs(60),
    );
}

// ---------------------------------------------------------------------------
// 4. AUC equals the Mann-Whitney pair-counting oracle
// ---------------------------------------------------------------------------

/// Independent oracle: fraction of (positive, negative) pairs ordered
/// correctly, ties counting one half.
fn mann_whitney_auc(labeled: &[(Label, f64)]) -> f64 {
    let mut total = 0.0;
    let mut pairs = 0u64;
    for (la, sa) in labeled {
        if *la != Label::Squiggly {
            continue;
        }
        for (lb, sb) in labeled {
            if *lb != Label::Straight {
                continue;
            }
            pairs += 1;
            total += if sa > sb {
                1.0
            } else if sa == sb {
                0.5
            } else {
                0.0
            };
        }
    }
    total / pairs as f64
}

#[test]
fn criterion_4_auc_matches_pair_counting_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for case in 0..100 {
        let n = rng.random_range(2..=200);
        let labeled: Vec<(Label, f64)> = (0..n)
            .map(|_| {
                let label = if rng.random_bool(0.5) {
                    Label::Squiggly
                } else {
                    Label::Straight
                };
                // Coarse grid forces plenty of score ties.
                let score = rng.random_range(0..25) as f64 / 5.0;
                (label, score)
            })
            .collect();
        let has_both = labeled.iter().any(|(l, _)| *l == Label::Squiggly)
            && labeled.iter().any(|(l, _)| *l == Label::Straight);
        if !has_both {
            continue;
        }
        let (_, auc) = roc_curve(&labeled).unwrap();
        let oracle = mann_whitney_auc(&labeled);
        assert!(
            (auc - oracle).abs() < 1e-9,
            "case {case}: auc {auc} vs oracle {oracle}"
        );
    }
    pass(
        "4 (AUC = Mann-Whitney oracle)",
        start.elapsed(),
        Duration::from_secs(5),
    );
}

// ---------------------------------------------------------------------------
// 5. Classifier correctness properties
// ---------------------------------------------------------------------------

/// Collision-free two-cluster data with deterministic jitter.
fn clusters(n_per_class: usize) -> Dataset {
    let rows = (0..n_per_class)
        .flat_map(|i| {
            let j = 0.03 * i as f64;
            [
                DataRow {
                    id: format!("s{i}"),
                    features: vec![8.0 + j, 120.0 - j],
                    label: Label::Squiggly,
                },
                DataRow {
                    id: format!("t{i}"),
                    features: vec![1.0 + j, 20.0 + j],
                    label: Label::Straight,
                },
            ]
        })
        .collect();
    Dataset::new(vec!["a".into(), "b".into()], rows).unwrap()
}

fn training_accuracy(model: &TrainedModel, data: &Dataset) -> f64 {
    let hits = data
        .rows
        .iter()
        .filter(|r| model.predict(&r.id, &r.features).unwrap().label == r.label)
        .count();
    hits as f64 / data.rows.len() as f64
}

#[test]
fn criterion_5_classifier_correctness() {
    let start = Instant::now();
    let data = clusters(20);

    // KNN k=1 and unlimited-depth tree memorize collision-free data.
    assert_eq!(training_accuracy(&knn_train(&data, 1).unwrap(), &data), 1.0);
    assert_eq!(
        training_accuracy(&tree_train(&data, None, 1).unwrap(), &data),
        1.0
    );

    // The tree also fits data that needs zero-gain splits.
    let xor = Dataset::new(
        vec!["x".into(), "y".into()],
        vec![
            DataRow { id: "a".into(), features: vec![0.0, 0.0], label: Label::Straight },
            DataRow { id: "b".into(), features: vec![1.0, 1.0], label: Label::Straight },
            DataRow { id: "c".into(), features: vec![0.0, 1.0], label: Label::Squiggly },
            DataRow { id: "d".into(), features: vec![1.0, 0.0], label: Label::Squiggly },
        ],
    )
    .unwrap();
    assert_eq!(
        training_accuracy(&tree_train(&xor, None, 1).unwrap(), &xor),
        1.0
    );

    // Linear SVM separates analytically separable clusters.
    assert_eq!(
        training_accuracy(&svm_train(&data, 1.0, 200, 11).unwrap(), &data),
        1.0
    );

    // Positive per-feature rescaling leaves predicted labels unchanged.
    let queries: Vec<Vec<f64>> = vec![
        vec![7.5, 110.0],
        vec![1.5, 25.0],
        vec![4.0, 60.0],
        vec![8.9, 121.0],
        vec![0.5, 18.0],
    ];
    for scale in [[2.0, 2.0], [3.7, 0.25], [100.0, 0.001]] {
        let scaled_rows: Vec<DataRow> = data
            .rows
            .iter()
            .map(|r| DataRow {
                id: r.id.clone(),
                features: vec![r.features[0] * scale[0], r.features[1] * scale[1]],
                label: r.label,
            })
            .collect();
        let scaled = Dataset::new(data.feature_names.clone(), scaled_rows).unwrap();
        let models = [
            (knn_train(&data, 3).unwrap(), knn_train(&scaled, 3).unwrap()),
            (
                tree_train(&data, None, 1).unwrap(),
                tree_train(&scaled, None, 1).unwrap(),
            ),
            (
                svm_train(&data, 1.0, 100, 3).unwrap(),
                svm_train(&scaled, 1.0, 100, 3).unwrap(),
            ),
        ];
        for q in &queries {
            let scaled_q = vec![q[0] * scale[0], q[1] * scale[1]];
            for (orig_model, scaled_model) in &models {
                let a = orig_model.predict("q", q).unwrap().label;
                let b = scaled_model.predict("q", &scaled_q).unwrap().label;
                assert_eq!(
                    a,
                    b,
                    "{} disagrees after rescale {scale:?} on {q:?}",
                    orig_model.kind()
                );
            }
        }
    }
    pass(
        "5 (classifier correctness properties)",
        start.elapsed(),
        Duration::from_secs(60),
    );
}

// ---------------------------------------------------------------------------
// 6. Metric identities
// ---------------------------------------------------------------------------

#[test]
fn criterion_6_metric_identities() {
    let start = Instant::now();

    // All-positive predictions on 50/50 truth: hand-computed macro metrics.
    let truth: BTreeMap<String, Label> = (0..50)
        .map(|i| (format!("s{i}"), Label::Squiggly))
        .chain((0..50).map(|i| (format!("t{i}"), Label::Straight)))
        .collect();
    let predictions: Vec<Prediction> = truth
        .keys()
        .map(|id| Prediction {
            id: id.clone(),
            score: 1.0,
            label: Label::Squiggly,
        })
        .collect();
    let m = classification_report(&truth, &predictions).unwrap();
    assert_eq!(m.accuracy, 0.5);
    assert_eq!(m.precision, 0.25);
    assert_eq!(m.recall, 0.5);

    // accuracy * n == tp + tn as an exact integer identity, across a sweep
    // of confusion shapes.
    for (tp, fp, tn, fneg) in [
        (50usize, 0usize, 50usize, 0usize),
        (73, 9, 11, 7),
        (1, 0, 0, 2),
        (33, 33, 33, 1),
        (17, 4, 61, 18),
    ] {
        let mut truth = BTreeMap::new();
        let mut preds = Vec::new();
        let mut add = |idx: usize, actual: Label, predicted: Label| {
            let id = format!("r{idx}");
            truth.insert(id.clone(), actual);
            preds.push(Prediction {
                id,
                score: predicted.to_num(),
                label: predicted,
            });
        };
        let mut idx = 0;
        for _ in 0..tp {
            add(idx, Label::Squiggly, Label::Squiggly);
            idx += 1;
        }
        for _ in 0..fp {
            add(idx, Label::Straight, Label::Squiggly);
            idx += 1;
        }
        for _ in 0..tn {
            add(idx, Label::Straight, Label::Straight);
            idx += 1;
        }
        for _ in 0..fneg {
            add(idx, Label::Squiggly, Label::Straight);
            idx += 1;
        }
        let m = classification_report(&truth, &preds).unwrap();
        let n = tp + fp + tn + fneg;
        assert_eq!(m.confusion.tp, tp);
        assert_eq!(m.confusion.fneg, fneg);
        assert_eq!(
            m.accuracy * n as f64,
            (tp + tn) as f64,
            "accuracy*n not exact for ({tp},{fp},{tn},{fneg})"
        );
    }
    pass("6 (metric identities)", start.elapsed(), Duration::from_secs(5));
}

// ---------------------------------------------------------------------------
// 7. Determinism and round-trips
// ---------------------------------------------------------------------------

#[test]
fn criterion_7_determinism_and_round_trips() {
    let start = Instant::now();

    // Identical seeds give byte-identical corpora.
    let base = SynthSpec {
        length_m: 1_000.0,
        ..SynthSpec::new(Label::Straight)
    };
    let a = generate_corpus(3, &base, 9).unwrap();
    let b = generate_corpus(3, &base, 9).unwrap();
    for (ra, rb) in a.iter().zip(&b) {
        assert_eq!(write_gpx(&ra.track), write_gpx(&rb.track));
    }

    // Identical seeds give identical splits.
    let ids: Vec<(String, Label)> = a
        .iter()
        .map(|r| (r.track_id(), r.label))
        .collect();
    assert_eq!(
        make_split(&ids, 0.5, 3).unwrap(),
        make_split(&ids, 0.5, 3).unwrap()
    );

    // Identical seeds give bitwise-identical SVM weights and identical
    // reports end to end.
    let data = clusters_small();
    let m1 = svm_train(&data, 1.0, 80, 5).unwrap();
    let m2 = svm_train(&data, 1.0, 80, 5).unwrap();
    assert_eq!(m1, m2);

    // Model save/load round-trips to bit-exact predictions.
    for model in [
        knn_train(&data, 3).unwrap(),
        tree_train(&data, None, 1).unwrap(),
        m1,
    ] {
        let file = ModelFile {
            model,
            meta: BTreeMap::new(),
        };
        let loaded = load_model(&save_model(&file)).unwrap();
        for q in [[0.1, 30.0], [7.7, 111.0], [4.2, 55.5]] {
            let x = file.model.predict("q", &q).unwrap();
            let y = loaded.model.predict("q", &q).unwrap();
            assert_eq!(x.score.to_bits(), y.score.to_bits());
            assert_eq!(x.label, y.label);
        }
    }

    // Track CSV write/read is an identity to 1e-9 degrees / 1e-3 s.
    let points: Vec<GeoPoint> = (0..30)
        .map(|i| {
            GeoPoint::with_alt_time(
                47.0 + 1.3e-4 * i as f64,
                8.0 - 0.7e-4 * i as f64,
                Some(400.0 + 0.31 * i as f64),
                Some(1.7e9 + 1.5 * i as f64),
            )
            .unwrap()
        })
        .collect();
    let track = Track::new("roundtrip", points, TrackSource::Csv).unwrap();
    let csv = write_track_csv(&track);
    let again = parse_track_csv("roundtrip", csv.as_bytes()).unwrap();
    assert_eq!(track.points.len(), again.points.len());
    for (p, q) in track.points.iter().zip(&again.points) {
        assert!((p.lat - q.lat).abs() < 1e-9);
        assert!((p.lon - q.lon).abs() < 1e-9);
        assert!((p.alt.unwrap() - q.alt.unwrap()).abs() < 1e-3);
        assert!((p.t.unwrap() - q.t.unwrap()).abs() < 1e-3);
    }

    pass(
        "7 (determinism and round-trips)",
        start.elapsed(),
        Duration::from_secs(60),
    );
}

fn clusters_small() -> Dataset {
    Dataset::new(
        vec!["a".into(), "b".into()],
        (0..8)
            .flat_map(|i| {
                let j = 0.05 * i as f64;
                [
                    DataRow {
                        id: format!("s{i}"),
                        features: vec![8.0 + j, 120.0 - j],
                        label: Label::Squiggly,
                    },
                    DataRow {
                        id: format!("t{i}"),
                        features: vec![1.0 + j, 20.0 + j],
                        label: Label::Straight,
                    },
                ]
            })
            .collect(),
    )
    .unwrap()
}

trait TrackIdOf {
    fn track_id(&self) -> String;
}

impl TrackIdOf for LabeledTrack {
    fn track_id(&self) -> String {
        self.track.id.clone()
    }
}

// ---------------------------------------------------------------------------
// 8. Geometry invariance under rigid motion
// ---------------------------------------------------------------------------

fn rebuild_s(xy: &[(f64, f64)]) -> Vec<PlanarPoint> {
    let mut s = 0.0;
    xy.iter()
        .enumerate()
        .map(|(i, &(x, y))| {
            if i > 0 {
                let (px, py) = xy[i - 1];
                s += (x - px).hypot(y - py);
            }
            PlanarPoint { x, y, s }
        })
        .collect()
}

#[test]
fn criterion_8_geometry_invariance_under_rotation() {
    let start = Instant::now();
    let spec = SynthSpec {
        kind: Label::Squiggly,
        noise_sigma_m: 1.0,
        length_m: 2_000.0,
        seed: 8,
        ..SynthSpec::new(Label::Squiggly)
    };
    let ride = generate(&spec).unwrap();
    let cleaned = clean(ride.track).unwrap();
    let planar = project_track(&cleaned.points).unwrap();
    let reference: Vec<_> = segment_track(&planar)
        .unwrap()
        .iter()
        .map(|seg| segment_features(seg).ok())
        .collect();
    assert!(reference.iter().filter(|f| f.is_some()).count() >= 90);

    let mut rng = ChaCha8Rng::seed_from_u64(88);
    for rotation in 0..50 {
        let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let tx: f64 = rng.random_range(-5_000.0..5_000.0);
        let ty: f64 = rng.random_range(-5_000.0..5_000.0);
        let moved: Vec<(f64, f64)> = planar
            .iter()
            .map(|p| {
                (
                    theta.cos() * p.x - theta.sin() * p.y + tx,
                    theta.sin() * p.x + theta.cos() * p.y + ty,
                )
            })
            .collect();
        let segments = segment_track(&rebuild_s(&moved)).unwrap();
        for (seg, expected) in segments.iter().zip(&reference) {
            let got = segment_features(seg).ok();
            match (expected, got) {
                (Some(e), Some(g)) => {
                    assert_eq!(
                        e.m1_count, g.m1_count,
                        "rotation {rotation} segment {}",
                        seg.index
                    );
                    assert_eq!(
                        e.m3_crossings, g.m3_crossings,
                        "rotation {rotation} segment {}",
                        seg.index
                    );
                    assert!(
                        (e.m2_rmse - g.m2_rmse).abs() <= 1e-9 * e.m2_rmse.max(1.0),
                        "rotation {rotation} segment {}: {} vs {}",
                        seg.index,
                        e.m2_rmse,
                        g.m2_rmse
                    );
                }
                (None, None) => {}
                (e, g) => panic!(
                    "rotation {rotation} segment {}: validity changed ({e:?} vs {g:?})",
                    seg.index
                ),
            }
        }
    }
    pass(
        "8 (geometry invariance, 50 rotations)",
        start.elapsed(),
        Duration::from_secs(60),
    );
}

// ---------------------------------------------------------------------------
// 9. Fig-12/13 plumbing: segment coloring and rider profile
// ---------------------------------------------------------------------------

fn run_cli(args: &[&str]) {
    let mut full = vec!["trail-surface"];
    full.extend_from_slice(args);
    run(Cli::try_parse_from(full).expect("valid CLI args")).expect("command succeeds");
}

#[test]
fn criterion_9_color_and_profile_plumbing() {
    let start = Instant::now();
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    let path = |name: &str| dir.join(name).to_str().unwrap().to_string();

    // Train a segment-level model on a corpus matching the ride parameters.
    // Amplitude 6 keeps the squiggly path-length inflation small enough that
    // a 50/50 ride mix stays near a 50/50 distance split; sigma = 1 GPS noise
    // separates cleanly from the squiggle at single-segment granularity.
    let sigma = 1.0;
    run_cli(&[
        "synth",
        "--kind",
        "both",
        "--n",
        "20",
        "--seed",
        "90",
        "--amplitude",
        "6",
        "--noise-sigma",
        "1",
        "--out",
        &path("corpus"),
    ]);
    let corpus_files: Vec<String> = {
        let mut v: Vec<_> = std::fs::read_dir(dir.join("corpus"))
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.extension().is_some_and(|e| e == "gpx"))
            .map(|p| p.to_str().unwrap().to_string())
            .collect();
        v.sort();
        v
    };
    let mut ingest_args = vec!["ingest"];
    ingest_args.extend(corpus_files.iter().map(String::as_str));
    let features = path("features.csv");
    ingest_args.extend(["--out", &features]);
    run_cli(&ingest_args);

    let model = path("segment.tsurf");
    let labels = path("corpus/labels.csv");
    run_cli(&[
        "train",
        "--features",
        &features,
        "--labels",
        &labels,
        "--method",
        "m2",
        "--model",
        "tree",
        "--level",
        "segment",
        "--ratio",
        "0.5",
        "--seed",
        "9",
        "--model-out",
        &model,
        "--report-out",
        &path("train-report.json"),
    ]);

    // --- Fig 12: color a half-straight, half-squiggly ride.
    let (ride, junction_idx) = concatenated_ride_with_amplitude(sigma, 900, 6.0);
    std::fs::write(dir.join("mixed.gpx"), write_gpx(&ride)).unwrap();

    // Ground truth per segment from the junction's arc length.
    let cleaned = clean(ride.clone()).unwrap();
    assert_eq!(cleaned.points.len(), ride.points.len(), "no cleaning losses");
    let planar = project_track(&cleaned.points).unwrap();
    let junction_s = planar[junction_idx].s;
    let segments = segment_track(&planar).unwrap();

    let geojson_path = path("mixed.geojson");
    run_cli(&["color", "--model", &model, &path("mixed.gpx"), "--out", &geojson_path]);
    let geo: serde_json::Value =
        serde_json::from_slice(&std::fs::read(&geojson_path).unwrap()).unwrap();
    assert_eq!(geo["type"], "FeatureCollection");

    let mut straight_total = 0usize;
    let mut straight_right = 0usize;
    let mut squiggly_total = 0usize;
    let mut squiggly_right = 0usize;
    for f in geo["features"].as_array().unwrap() {
        let props = &f["properties"];
        if !props["valid"].as_bool().unwrap() {
            continue;
        }
        let idx = props["segment_index"].as_u64().unwrap() as usize;
        let seg = &segments[idx];
        let color = props["color"].as_str().unwrap();
        if seg.s_end <= junction_s {
            straight_total += 1;
            if color == "blue" {
                straight_right += 1;
            }
        } else if seg.s_start >= junction_s {
            squiggly_total += 1;
            if color == "red" {
                squiggly_right += 1;
            }
        }
    }
    assert!(straight_total >= 30 && squiggly_total >= 30);
    let straight_rate = straight_right as f64 / straight_total as f64;
    let squiggly_rate = squiggly_right as f64 / squiggly_total as f64;
    assert!(
        straight_rate >= 0.90,
        "straight half colored correctly at {straight_rate}"
    );
    assert!(
        squiggly_rate >= 0.90,
        "squiggly half colored correctly at {squiggly_rate}"
    );

    // --- Fig 13: distance profile over the mixed corpus.
    let profile_path = path("profile.json");
    let mut profile_args = vec!["profile", "--model", &model, "--out", &profile_path];
    profile_args.extend(corpus_files.iter().map(String::as_str));
    run_cli(&profile_args);
    let profile: serde_json::Value =
        serde_json::from_slice(&std::fs::read(&profile_path).unwrap()).unwrap();
    let s = profile["straight_pct"].as_f64().unwrap();
    let q = profile["squiggly_pct"].as_f64().unwrap();
    assert!((s + q - 100.0).abs() < 0.01, "{s} + {q} != 100");
    assert!((s - 50.0).abs() <= 5.0, "straight share {s}");
    assert!((q - 50.0).abs() <= 5.0, "squiggly share {q}");

    pass(
        "9 (Fig 12/13 plumbing: color + profile)",
        start.elapsed(),
        Duration::from_secs(60),
    );
}

/// Like [`concatenated_ride`] but with a custom squiggle amplitude.
fn concatenated_ride_with_amplitude(sigma: f64, seed: u64, amplitude: f64) -> (Track, usize) {
    let straight = generate(&SynthSpec {
        kind: Label::Straight,
        length_m: 2_500.0,
        noise_sigma_m: sigma,
        heading_deg: 40.0,
        seed,
        ..SynthSpec::new(Label::Straight)
    })
    .unwrap();
    let junction = straight.track.points.len();
    let last = *straight.track.points.last().unwrap();
    let squiggly = generate(&SynthSpec {
        kind: Label::Squiggly,
        length_m: 2_500.0,
        noise_sigma_m: sigma,
        amplitude_m: amplitude,
        heading_deg: 40.0,
        origin: GeoPoint::new(last.lat, last.lon).unwrap(),
        seed: seed + 1,
        ..SynthSpec::new(Label::Squiggly)
    })
    .unwrap();

    let mut points = Vec::new();
    for (i, p) in straight
        .track
        .points
        .iter()
        .chain(squiggly.track.points.iter())
        .enumerate()
    {
        points.push(
            GeoPoint::with_alt_time(p.lat, p.lon, p.alt, Some(1.7e9 + i as f64)).unwrap(),
        );
    }
    (
        Track::new("mixed-ride", points, TrackSource::Synthetic).unwrap(),
        junction,
    )
}
