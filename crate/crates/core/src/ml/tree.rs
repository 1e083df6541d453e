//! CART-style binary decision tree minimizing weighted Gini impurity.

use crate::Label;

use super::{Dataset, MlError, TrainedModel, TreeModel, TreeNode};

/// Grows a binary tree. Candidate thresholds are midpoints between
/// consecutive distinct sorted values of each feature; rows with
/// `feature < threshold` go left. Ties between candidate splits are broken by
/// lower impurity, then lower feature index, then lower threshold. Splitting
/// stops at pure nodes, at `max_depth` (`None` = unlimited), or when no split
/// leaves `min_leaf` rows on both sides. Zero-gain splits are allowed, so
/// collision-free training data is always fit exactly at unlimited depth.
pub fn tree_train(
    data: &Dataset,
    max_depth: Option<usize>,
    min_leaf: usize,
) -> Result<TrainedModel, MlError> {
    if data.rows.is_empty() {
        return Err(MlError::EmptyDataset);
    }
    let min_leaf = min_leaf.max(1);
    let idx: Vec<usize> = (0..data.rows.len()).collect();
    let root = build(data, &idx, 0, max_depth, min_leaf);
    Ok(TrainedModel::DecisionTree(TreeModel {
        dim: data.dim(),
        root,
    }))
}

fn count_squiggly(data: &Dataset, idx: &[usize]) -> usize {
    idx.iter()
        .filter(|&&i| data.rows[i].label == Label::Squiggly)
        .count()
}

fn gini(pos: usize, n: usize) -> f64 {
    let p = pos as f64 / n as f64;
    1.0 - p * p - (1.0 - p) * (1.0 - p)
}

struct Candidate {
    weighted_gini: f64,
    feature: usize,
    threshold: f64,
}

fn best_split(data: &Dataset, idx: &[usize], min_leaf: usize) -> Option<Candidate> {
    let n = idx.len();
    let mut best: Option<Candidate> = None;

    for feature in 0..data.dim() {
        let mut values: Vec<(f64, bool)> = idx
            .iter()
            .map(|&i| {
                let row = &data.rows[i];
                (row.features[feature], row.label == Label::Squiggly)
            })
            .collect();
        values.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut left_n = 0usize;
        let mut left_pos = 0usize;
        let total_pos = values.iter().filter(|&&(_, p)| p).count();
        for i in 0..n - 1 {
            left_n += 1;
            if values[i].1 {
                left_pos += 1;
            }
            if values[i].0 == values[i + 1].0 {
                continue;
            }
            let threshold = (values[i].0 + values[i + 1].0) / 2.0;
            // Adjacent floats can round the midpoint onto the lower value,
            // which would send the whole prefix right; skip such candidates.
            if threshold <= values[i].0 {
                continue;
            }
            let right_n = n - left_n;
            if left_n < min_leaf || right_n < min_leaf {
                continue;
            }
            let right_pos = total_pos - left_pos;
            let weighted_gini = (left_n as f64 * gini(left_pos, left_n)
                + right_n as f64 * gini(right_pos, right_n))
                / n as f64;
            // Strict improvement keeps the first (lowest feature index,
            // lowest threshold) candidate among equals.
            if best
                .as_ref()
                .map_or(true, |b| weighted_gini < b.weighted_gini)
            {
                best = Some(Candidate {
                    weighted_gini,
                    feature,
                    threshold,
                });
            }
        }
    }
    best
}

fn build(
    data: &Dataset,
    idx: &[usize],
    depth: usize,
    max_depth: Option<usize>,
    min_leaf: usize,
) -> TreeNode {
    let n = idx.len();
    let pos = count_squiggly(data, idx);
    let fraction = pos as f64 / n as f64;
    if pos == 0 || pos == n || max_depth.is_some_and(|d| depth >= d) {
        return TreeNode::Leaf { fraction };
    }
    let Some(split) = best_split(data, idx, min_leaf) else {
        return TreeNode::Leaf { fraction };
    };
    let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = idx
        .iter()
        .partition(|&&i| data.rows[i].features[split.feature] < split.threshold);
    TreeNode::Split {
        feature: split.feature,
        threshold: split.threshold,
        left: Box::new(build(data, &left_idx, depth + 1, max_depth, min_leaf)),
        right: Box::new(build(data, &right_idx, depth + 1, max_depth, min_leaf)),
    }
}

/// Descends by threshold comparison; equal values go right (the `>=` side).
/// Score is the training positive-fraction of the reached leaf.
pub(super) fn score(model: &TreeModel, features: &[f64]) -> (f64, Label) {
    let mut node = &model.root;
    loop {
        match node {
            TreeNode::Leaf { fraction } => {
                let label = if *fraction >= 0.5 {
                    Label::Squiggly
                } else {
                    Label::Straight
                };
                return (*fraction, label);
            }
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                node = if features[*feature] < *threshold {
                    left
                } else {
                    right
                };
            }
        }
    }
}
