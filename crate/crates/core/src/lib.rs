//! Road-surface classification for cyclist GPS rides.
//!
//! A ride is split into 100 equal arc-length segments. For each segment three
//! squiggliness features are computed in a chord-aligned frame (slope
//! direction-change frequency, linear-fit test RMSE, and zero crossings of the
//! first derivative of lateral deviation). Rides or individual segments are
//! then classified as dirt ("squiggly") or paved ("straight") by from-scratch
//! KNN, decision-tree, and linear-SVM models, evaluated with ROC/AUC tooling.
//! A deterministic synthetic-track generator provides ground truth for tests.

use std::fmt;

use serde::{Deserialize, Serialize};

pub mod eval;
pub mod features;
pub mod geo;
pub mod ingest;
pub mod ml;
pub mod segment;
pub mod synth;

/// Surface class of a ride or segment: dirt trails read as "squiggly",
/// paved roads as "straight".
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Squiggly,
    Straight,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Squiggly => "squiggly",
            Label::Straight => "straight",
        }
    }

    /// Numeric encoding used by the classifiers: squiggly = 1, straight = 0.
    pub fn to_num(self) -> f64 {
        match self {
            Label::Squiggly => 1.0,
            Label::Straight => 0.0,
        }
    }

    /// Case-insensitive parse of "squiggly" / "straight".
    pub fn parse(s: &str) -> Option<Label> {
        match s.trim().to_ascii_lowercase().as_str() {
            "squiggly" => Some(Label::Squiggly),
            "straight" => Some(Label::Straight),
            _ => None,
        }
    }

    pub fn flipped(self) -> Label {
        match self {
            Label::Squiggly => Label::Straight,
            Label::Straight => Label::Squiggly,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
