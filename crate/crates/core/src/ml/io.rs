//! Versioned model serialization.
//!
//! A model file is a JSON container:
//!
//! ```json
//! {
//!   "magic": "TSURF",
//!   "version": 1,
//!   "meta": { "method": "m2", "level": "ride", ... },
//!   "model": { "LinearSvm": { ... } }
//! }
//! ```
//!
//! Floats are written at shortest round-trip precision, so a loaded model
//! predicts bitwise identically to the one saved. `meta` carries free-form
//! pipeline context (which method/level the model was trained on).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{MlError, TrainedModel};

pub const MODEL_MAGIC: &str = "TSURF";
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// A trained model plus the pipeline context it was trained in.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub model: TrainedModel,
    pub meta: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
struct Container {
    magic: String,
    version: u32,
    meta: BTreeMap<String, String>,
    model: TrainedModel,
}

pub fn save_model(file: &ModelFile) -> Vec<u8> {
    let container = Container {
        magic: MODEL_MAGIC.to_string(),
        version: MODEL_FORMAT_VERSION,
        meta: file.meta.clone(),
        model: file.model.clone(),
    };
    serde_json::to_vec_pretty(&container).expect("model serialization is infallible")
}

pub fn load_model(bytes: &[u8]) -> Result<ModelFile, MlError> {
    let value: serde_json::Value = serde_json::from_slice(bytes)
        .map_err(|e| MlError::CorruptModel(format!("not valid JSON (truncated?): {e}")))?;
    match value.get("magic").and_then(|m| m.as_str()) {
        Some(MODEL_MAGIC) => {}
        Some(other) => {
            return Err(MlError::CorruptModel(format!(
                "bad magic '{other}', expected '{MODEL_MAGIC}'"
            )))
        }
        None => return Err(MlError::CorruptModel("missing magic field".into())),
    }
    match value.get("version").and_then(|v| v.as_u64()) {
        Some(v) if v == MODEL_FORMAT_VERSION as u64 => {}
        Some(v) => {
            return Err(MlError::CorruptModel(format!(
                "unsupported format version {v}, expected {MODEL_FORMAT_VERSION}"
            )))
        }
        None => return Err(MlError::CorruptModel("missing version field".into())),
    }
    let container: Container = serde_json::from_value(value)
        .map_err(|e| MlError::CorruptModel(format!("malformed model body: {e}")))?;
    Ok(ModelFile {
        model: container.model,
        meta: container.meta,
    })
}
