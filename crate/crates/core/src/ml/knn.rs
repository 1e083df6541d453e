//! K-nearest-neighbors voting in min-max scaled space.

use crate::Label;

use super::{DataRow, Dataset, KnnModel, MlError, Scaling, TrainedModel};

/// Stores min-max scaled copies of the training rows. `k` must be odd so a
/// two-class vote cannot tie.
pub fn knn_train(data: &Dataset, k: usize) -> Result<TrainedModel, MlError> {
    if data.rows.is_empty() {
        return Err(MlError::EmptyDataset);
    }
    let n = data.rows.len();
    if k == 0 || k > n || k % 2 == 0 {
        return Err(MlError::BadK { k, n });
    }
    let scaling = Scaling::fit(&data.rows, data.dim());
    let features = data
        .rows
        .iter()
        .map(|r: &DataRow| scaling.apply(&r.features))
        .collect();
    let labels = data.rows.iter().map(|r| r.label).collect();
    Ok(TrainedModel::Knn(KnnModel {
        k,
        scaling,
        features,
        labels,
    }))
}

/// Squared Euclidean distance; same ordering as the true distance.
fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum()
}

/// Score = fraction of squiggly labels among the k nearest neighbors.
/// Distance ties are broken by lower training-row index.
pub(super) fn score(model: &KnnModel, features: &[f64]) -> (f64, Label) {
    let query = model.scaling.apply(features);
    let mut order: Vec<(f64, usize)> = model
        .features
        .iter()
        .enumerate()
        .map(|(i, row)| (dist_sq(row, &query), i))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let squiggly = order
        .iter()
        .take(model.k)
        .filter(|&&(_, i)| model.labels[i] == Label::Squiggly)
        .count();
    let score = squiggly as f64 / model.k as f64;
    let label = if score >= 0.5 {
        Label::Squiggly
    } else {
        Label::Straight
    };
    (score, label)
}
