//! Evaluation harness: stratified train/test splits, confusion-matrix
//! metrics with macro-averaged precision/recall, ROC curves with trapezoid
//! AUC, report serialization, and the power-to-VO2max helper.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ml::Prediction;
use crate::Label;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("class '{label}' has {n} ids, need >= 2 for a stratified split")]
    TooFewPerClass { label: Label, n: usize },
    #[error("split ratio {0} outside (0, 1)")]
    InvalidRatio(f64),
    #[error("truth and prediction id sets differ: {0}")]
    IdMismatch(String),
    #[error("truth contains a single class; ROC undefined")]
    SingleClassTruth,
    #[error("weight must be positive, got {0}")]
    NonpositiveWeight(f64),
    #[error("power must be nonnegative, got {0}")]
    NegativePower(f64),
}

/// A deterministic stratified partition of track ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub train_ids: Vec<String>,
    pub test_ids: Vec<String>,
    pub ratio: f64,
    pub seed: u64,
}

/// Training-side count for one class. The ratio is resolved to millionths and
/// the arithmetic kept integral so that `count(r, n) + count(1 - r, n) == n`
/// holds exactly; complementary ratios then yield mirrored partitions even
/// when `r * n` lands on a rounding boundary.
fn train_count(ratio: f64, n: usize) -> usize {
    const SCALE: u64 = 1_000_000;
    let p = (ratio * SCALE as f64).round() as u64;
    let rounded = |p: u64| ((p * n as u64 + SCALE / 2) / SCALE) as usize;
    if p <= SCALE / 2 {
        rounded(p)
    } else {
        n - rounded(SCALE - p)
    }
}

/// Stratified shuffle split: ids are grouped by class, sorted, shuffled by a
/// seeded ChaCha stream, and cut at the ratio per class. Deterministic for a
/// fixed (ids, ratio, seed) regardless of input order.
pub fn make_split(
    ids_with_labels: &[(String, Label)],
    ratio: f64,
    seed: u64,
) -> Result<Split, EvalError> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(EvalError::InvalidRatio(ratio));
    }
    let mut by_class: BTreeMap<Label, Vec<&str>> = BTreeMap::new();
    for (id, label) in ids_with_labels {
        by_class.entry(*label).or_default().push(id);
    }
    for label in [Label::Squiggly, Label::Straight] {
        let n = by_class.get(&label).map_or(0, Vec::len);
        if n < 2 {
            return Err(EvalError::TooFewPerClass { label, n });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train_ids = Vec::new();
    let mut test_ids = Vec::new();
    for (_, mut ids) in by_class {
        ids.sort_unstable();
        ids.shuffle(&mut rng);
        let n = ids.len();
        let k = train_count(ratio, n);
        // The minority side of the cut always comes from the front of the
        // shuffled list, so swapping ratio for 1 - ratio swaps the roles of
        // the two sides instead of drawing different ids.
        let (train, test) = if ratio <= 0.5 {
            (&ids[..k], &ids[k..])
        } else {
            (&ids[n - k..], &ids[..n - k])
        };
        train_ids.extend(train.iter().map(|s| s.to_string()));
        test_ids.extend(test.iter().map(|s| s.to_string()));
    }
    train_ids.sort_unstable();
    test_ids.sort_unstable();
    Ok(Split {
        train_ids,
        test_ids,
        ratio,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fneg: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fneg
    }
}

/// Confusion counts plus accuracy and macro-averaged precision/recall.
/// Squiggly is the positive class. A class with no predicted (or no actual)
/// members contributes 0 to the macro average and raises a flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetrics {
    pub confusion: Confusion,
    pub accuracy: f64,
    /// Macro-averaged over both classes.
    pub precision: f64,
    /// Macro-averaged over both classes.
    pub recall: f64,
    pub flags: Vec<String>,
}

pub fn classification_report(
    truth: &BTreeMap<String, Label>,
    predictions: &[Prediction],
) -> Result<ReportMetrics, EvalError> {
    let pred_ids: BTreeMap<&str, Label> = predictions
        .iter()
        .map(|p| (p.id.as_str(), p.label))
        .collect();
    if pred_ids.len() != predictions.len() {
        return Err(EvalError::IdMismatch("duplicate prediction ids".into()));
    }
    let missing: Vec<&str> = truth
        .keys()
        .map(String::as_str)
        .filter(|id| !pred_ids.contains_key(id))
        .collect();
    let extra: Vec<&str> = pred_ids
        .keys()
        .copied()
        .filter(|id| !truth.contains_key(*id))
        .collect();
    if !missing.is_empty() || !extra.is_empty() {
        return Err(EvalError::IdMismatch(format!(
            "missing predictions for {missing:?}, unknown ids {extra:?}"
        )));
    }

    let mut c = Confusion {
        tp: 0,
        fp: 0,
        tn: 0,
        fneg: 0,
    };
    for (id, &actual) in truth {
        let predicted = pred_ids[id.as_str()];
        match (actual, predicted) {
            (Label::Squiggly, Label::Squiggly) => c.tp += 1,
            (Label::Straight, Label::Squiggly) => c.fp += 1,
            (Label::Straight, Label::Straight) => c.tn += 1,
            (Label::Squiggly, Label::Straight) => c.fneg += 1,
        }
    }

    let n = c.total() as f64;
    let accuracy = (c.tp + c.tn) as f64 / n;

    let mut flags = Vec::new();
    let mut rate = |num: usize, den: usize, what: &str| -> f64 {
        if den == 0 {
            flags.push(format!("{what}: zero denominator, reported as 0"));
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let precision_pos = rate(c.tp, c.tp + c.fp, "precision(squiggly)");
    let precision_neg = rate(c.tn, c.tn + c.fneg, "precision(straight)");
    let recall_pos = rate(c.tp, c.tp + c.fneg, "recall(squiggly)");
    let recall_neg = rate(c.tn, c.tn + c.fp, "recall(straight)");

    Ok(ReportMetrics {
        confusion: c,
        accuracy,
        precision: (precision_pos + precision_neg) / 2.0,
        recall: (recall_pos + recall_neg) / 2.0,
        flags,
    })
}

/// ROC curve over decision scores, one vertex per distinct score (tie blocks
/// walk a diagonal), starting at (0,0) and ending at (1,1). Returns the curve
/// and its trapezoid-rule AUC.
pub fn roc_curve(labeled_scores: &[(Label, f64)]) -> Result<(Vec<(f64, f64)>, f64), EvalError> {
    let pos = labeled_scores
        .iter()
        .filter(|(l, _)| *l == Label::Squiggly)
        .count();
    let neg = labeled_scores.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(EvalError::SingleClassTruth);
    }

    let mut sorted: Vec<(Label, f64)> = labeled_scores.to_vec();
    sorted.sort_by(|a, b| b.1.total_cmp(&a.1));

    let mut points = vec![(0.0, 0.0)];
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut i = 0;
    while i < sorted.len() {
        let score = sorted[i].1;
        while i < sorted.len() && sorted[i].1 == score {
            match sorted[i].0 {
                Label::Squiggly => tp += 1,
                Label::Straight => fp += 1,
            }
            i += 1;
        }
        points.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
    }

    let auc = points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0)
        .sum();
    Ok((points, auc))
}

/// VO2max estimate (ml/kg/min) from sustained power output and body weight.
pub fn vo2max(power_w: f64, weight_kg: f64) -> Result<f64, EvalError> {
    if !(weight_kg > 0.0) {
        return Err(EvalError::NonpositiveWeight(weight_kg));
    }
    if power_w < 0.0 {
        return Err(EvalError::NegativePower(power_w));
    }
    Ok(10.8 * power_w / weight_kg + 7.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitInfo {
    pub ratio: f64,
    pub seed: u64,
}

/// Sampling-density context recorded with every report so feature values from
/// different corpora can be compared.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointsPerSegmentStats {
    pub mean: f64,
    pub min: usize,
    pub max: usize,
    pub invalid_segments: usize,
    pub total_segments: usize,
}

/// The full evaluation report written as JSON by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model: String,
    pub method: String,
    pub level: String,
    pub split: SplitInfo,
    pub confusion: Confusion,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub auc: f64,
    pub roc: Vec<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points_per_segment_stats: Option<PointsPerSegmentStats>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }
}

/// ROC points as a two-column CSV for plotting.
pub fn roc_to_csv(points: &[(f64, f64)]) -> String {
    let mut out = String::from("fpr,tpr\n");
    for (fpr, tpr) in points {
        let _ = writeln!(out, "{fpr},{tpr}");
    }
    out
}
