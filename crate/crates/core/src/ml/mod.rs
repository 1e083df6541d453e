//! From-scratch classifiers over squiggliness features: KNN, a CART-style
//! decision tree, and a linear soft-margin SVM, all with decision scores
//! suitable for ROC analysis and a versioned serialization format.
//!
//! Determinism is part of the contract: every tie (equal distances, equal
//! split impurities, boundary comparisons) is broken by a fixed documented
//! rule, and the only randomness (SVM epoch shuffling) is seeded.

mod io;
mod knn;
mod svm;
mod tree;

pub use io::{load_model, save_model, ModelFile, MODEL_FORMAT_VERSION, MODEL_MAGIC};
pub use knn::knn_train;
pub use svm::{svm_objective, svm_train};
pub use tree::tree_train;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Label;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MlError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("row {row} has {got} features, expected {expected}")]
    RowDimMismatch {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("row {row} has a non-finite feature value")]
    NonFiniteFeature { row: usize },
    #[error("bad k = {k} for {n} training rows (k must be odd and 1 <= k <= n)")]
    BadK { k: usize, n: usize },
    #[error("query has {got} features, model expects {expected}")]
    DimMismatch { got: usize, expected: usize },
    #[error("training data contains a single class")]
    SingleClass,
    #[error("hyperparameter out of range: {0}")]
    BadParam(String),
    #[error("corrupt model file: {0}")]
    CorruptModel(String),
}

/// A labeled feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub feature_names: Vec<String>,
    pub rows: Vec<DataRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataRow {
    pub id: String,
    pub features: Vec<f64>,
    pub label: Label,
}

impl Dataset {
    /// Builds a dataset, validating uniform dimensionality and finiteness.
    pub fn new(feature_names: Vec<String>, rows: Vec<DataRow>) -> Result<Self, MlError> {
        if rows.is_empty() {
            return Err(MlError::EmptyDataset);
        }
        let dim = feature_names.len();
        for (i, row) in rows.iter().enumerate() {
            if row.features.len() != dim {
                return Err(MlError::RowDimMismatch {
                    row: i,
                    got: row.features.len(),
                    expected: dim,
                });
            }
            if row.features.iter().any(|v| !v.is_finite()) {
                return Err(MlError::NonFiniteFeature { row: i });
            }
        }
        Ok(Dataset {
            feature_names,
            rows,
        })
    }

    pub fn dim(&self) -> usize {
        self.feature_names.len()
    }

    /// Restricts the dataset to the given ids, in the rows' original order.
    pub fn subset(&self, ids: &[String]) -> Dataset {
        let keep: std::collections::BTreeSet<&str> = ids.iter().map(String::as_str).collect();
        Dataset {
            feature_names: self.feature_names.clone(),
            rows: self
                .rows
                .iter()
                .filter(|r| keep.contains(r.id.as_str()))
                .cloned()
                .collect(),
        }
    }
}

/// A scored class decision. Higher scores mean "more squiggly"; the label
/// threshold is score >= 0.5 for KNN and trees (vote fractions) and
/// score >= 0 for the SVM (signed margin).
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub id: String,
    pub score: f64,
    pub label: Label,
}

/// Per-feature min-max scaling fitted on the training split only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaling {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Scaling {
    pub fn fit(rows: &[DataRow], dim: usize) -> Scaling {
        let mut min = vec![f64::INFINITY; dim];
        let mut max = vec![f64::NEG_INFINITY; dim];
        for row in rows {
            for (j, &v) in row.features.iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        Scaling { min, max }
    }

    /// Maps training features into [0, 1]; constant features map to 0.
    pub fn apply(&self, features: &[f64]) -> Vec<f64> {
        features
            .iter()
            .enumerate()
            .map(|(j, &v)| {
                let range = self.max[j] - self.min[j];
                if range > 0.0 {
                    (v - self.min[j]) / range
                } else {
                    0.0
                }
            })
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub scaling: Scaling,
    /// Min-max scaled training rows, in insertion order (the tie-break order).
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<Label>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf {
        /// Fraction of squiggly rows that reached this leaf during training.
        fraction: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub dim: usize,
    pub root: TreeNode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub scaling: Scaling,
}

/// A trained classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TrainedModel {
    Knn(KnnModel),
    DecisionTree(TreeModel),
    LinearSvm(SvmModel),
}

impl TrainedModel {
    pub fn dim(&self) -> usize {
        match self {
            TrainedModel::Knn(m) => m.scaling.dim(),
            TrainedModel::DecisionTree(m) => m.dim,
            TrainedModel::LinearSvm(m) => m.weights.len(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            TrainedModel::Knn(_) => "knn",
            TrainedModel::DecisionTree(_) => "tree",
            TrainedModel::LinearSvm(_) => "svm",
        }
    }

    pub fn predict(&self, id: &str, features: &[f64]) -> Result<Prediction, MlError> {
        if features.len() != self.dim() {
            return Err(MlError::DimMismatch {
                got: features.len(),
                expected: self.dim(),
            });
        }
        let (score, label) = match self {
            TrainedModel::Knn(m) => knn::score(m, features),
            TrainedModel::DecisionTree(m) => tree::score(m, features),
            TrainedModel::LinearSvm(m) => svm::score(m, features),
        };
        Ok(Prediction {
            id: id.to_string(),
            score,
            label,
        })
    }
}
