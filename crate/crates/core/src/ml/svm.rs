//! Linear soft-margin SVM trained by seeded per-sample subgradient descent
//! on min-max scaled features.
//!
//! The objective is 0.5*||w||^2 + C * sum_i max(0, 1 - y_i * (w.x_i + b))
//! with labels y in {-1, +1} (squiggly = +1). Written in the classic
//! per-sample form with lambda = 1/(n*C), the step schedule is
//! eta_t = 1/(lambda*t). The bias is trained as a constant augmented feature
//! (so it moves at the same rate as the weights and the 1/t schedule applies
//! to the whole parameter vector), and the returned parameters are the
//! average of the trajectory over the last half of the steps, which settles
//! far faster than the oscillating final iterate.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::Label;

use super::{Dataset, MlError, Scaling, SvmModel, TrainedModel};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Trains the SVM. The epoch order of samples is reshuffled each epoch by a
/// ChaCha stream seeded with `seed`, so identical inputs give bitwise
/// identical weights.
pub fn svm_train(
    data: &Dataset,
    c: f64,
    epochs: usize,
    seed: u64,
) -> Result<TrainedModel, MlError> {
    if data.rows.is_empty() {
        return Err(MlError::EmptyDataset);
    }
    if !(c > 0.0 && c.is_finite()) || epochs == 0 {
        return Err(MlError::BadParam(format!("C = {c}, epochs = {epochs}")));
    }
    let has_pos = data.rows.iter().any(|r| r.label == Label::Squiggly);
    let has_neg = data.rows.iter().any(|r| r.label == Label::Straight);
    if !has_pos || !has_neg {
        return Err(MlError::SingleClass);
    }

    let scaling = Scaling::fit(&data.rows, data.dim());
    // Augment with a constant 1 feature carrying the bias.
    let x: Vec<Vec<f64>> = data
        .rows
        .iter()
        .map(|r| {
            let mut v = scaling.apply(&r.features);
            v.push(1.0);
            v
        })
        .collect();
    let y: Vec<f64> = data
        .rows
        .iter()
        .map(|r| if r.label == Label::Squiggly { 1.0 } else { -1.0 })
        .collect();

    let n = x.len();
    let dim = data.dim() + 1;
    let lambda = 1.0 / (n as f64 * c);
    let mut w = vec![0.0; dim];
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total_steps = (epochs * n) as u64;
    let tail_start = total_steps / 2 + 1;
    let mut w_sum = vec![0.0; dim];
    let mut tail_count = 0u64;
    let mut t: u64 = 0;

    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let tf = t as f64;
            let shrink = 1.0 - 1.0 / tf;
            let violated = y[i] * dot(&w, &x[i]) < 1.0;
            if violated {
                let eta = 1.0 / (lambda * tf);
                for (wj, &xj) in w.iter_mut().zip(&x[i]) {
                    *wj = shrink * *wj + eta * y[i] * xj;
                }
            } else {
                for wj in w.iter_mut() {
                    *wj *= shrink;
                }
            }
            if t >= tail_start {
                for (sj, wj) in w_sum.iter_mut().zip(&w) {
                    *sj += wj;
                }
                tail_count += 1;
            }
        }
    }

    let scale = 1.0 / tail_count as f64;
    let mut averaged: Vec<f64> = w_sum.iter().map(|s| s * scale).collect();
    let bias = averaged.pop().expect("augmented dimension present");
    Ok(TrainedModel::LinearSvm(SvmModel {
        weights: averaged,
        bias,
        scaling,
    }))
}

/// The soft-margin objective of a model on a dataset, using the model's own
/// scaling. Used to check that training has effectively converged.
pub fn svm_objective(model: &SvmModel, data: &Dataset, c: f64) -> f64 {
    let reg = 0.5 * dot(&model.weights, &model.weights);
    let hinge: f64 = data
        .rows
        .iter()
        .map(|r| {
            let x = model.scaling.apply(&r.features);
            let y = if r.label == Label::Squiggly { 1.0 } else { -1.0 };
            (1.0 - y * (dot(&model.weights, &x) + model.bias)).max(0.0)
        })
        .sum();
    reg + c * hinge
}

/// Score is the signed margin w.x_scaled + b; the decision boundary itself
/// (score 0) classifies as squiggly.
pub(super) fn score(model: &SvmModel, features: &[f64]) -> (f64, Label) {
    let x = model.scaling.apply(features);
    let s = dot(&model.weights, &x) + model.bias;
    let label = if s >= 0.0 {
        Label::Squiggly
    } else {
        Label::Straight
    };
    (s, label)
}
