//! Versioned JSON model file.
//!
//! Reals are written with the shortest representation that parses back to
//! the same `f64`, so `load(save(m)) == m` bit for bit. The basis samples
//! are not stored; they are rebuilt from `(S, mode, seed)`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GpnamModel, Interaction, ModelParts, Standardization, Task};
use crate::data::Encoding;
use crate::error::{Error, Result};
use crate::fsutil::write_atomic;
use crate::matrix::Matrix;
use crate::rff::{BasisMode, FeatureBasis};

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    schema_version: u64,
    task: Task,
    #[serde(rename = "S")]
    basis_size: usize,
    mode: BasisMode,
    seed: u64,
    d: usize,
    feature_names: Vec<String>,
    standardization: Standardization,
    b: Vec<f64>,
    w0: f64,
    /// Row-major `d × S`.
    #[serde(rename = "W")]
    weights: Vec<f64>,
    centering_offsets: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    interactions: Vec<InteractionEntry>,
    bandwidth_scale: f64,
    encodings: Vec<Encoding>,
    feature_ranges: Vec<[f64; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
struct InteractionEntry {
    i: usize,
    j: usize,
    w: Vec<f64>,
}

impl GpnamModel {
    /// JSON text of the model file.
    pub fn to_json(&self) -> Result<String> {
        let file = ModelFile {
            schema_version: SCHEMA_VERSION,
            task: self.task,
            basis_size: self.basis.size(),
            mode: self.basis.mode(),
            seed: self.basis.seed(),
            d: self.n_features(),
            feature_names: self.feature_names.clone(),
            standardization: self.standardization.clone(),
            b: self.widths.clone(),
            w0: self.w0,
            weights: self.weights.as_slice().to_vec(),
            centering_offsets: self.centering_offsets.clone(),
            interactions: self
                .interactions
                .iter()
                .map(|t| InteractionEntry {
                    i: t.i,
                    j: t.j,
                    w: t.weights.clone(),
                })
                .collect(),
            bandwidth_scale: self.bandwidth_scale,
            encodings: self.encodings.clone(),
            feature_ranges: self.feature_ranges.clone(),
        };
        let mut s = serde_json::to_string_pretty(&file)?;
        s.push('\n');
        Ok(s)
    }

    /// Parses and validates model-file JSON.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::MalformedFile(e.to_string()))?;
        let version = value
            .get("schema_version")
            .ok_or_else(|| Error::MalformedFile("missing schema_version".into()))?
            .as_u64()
            .ok_or_else(|| Error::MalformedFile("schema_version must be an integer".into()))?;
        if version != SCHEMA_VERSION {
            return Err(Error::VersionMismatch {
                found: version,
                expected: SCHEMA_VERSION,
            });
        }
        let f: ModelFile =
            serde_json::from_value(value).map_err(|e| Error::MalformedFile(e.to_string()))?;

        let violation = |m: String| Error::InvariantViolation(m);
        if f.d != f.feature_names.len() {
            return Err(violation(format!(
                "d = {} but {} feature names",
                f.d,
                f.feature_names.len()
            )));
        }
        let mut basis = FeatureBasis::build(f.basis_size, f.mode, f.seed)
            .map_err(|e| violation(e.to_string()))?;
        if !f.interactions.is_empty() {
            basis = basis.with_pair_frequencies();
        }
        let weights = Matrix::from_vec(f.d, f.basis_size, f.weights)
            .map_err(|e| violation(format!("W: {e}")))?;
        GpnamModel::from_parts(ModelParts {
            basis,
            task: f.task,
            feature_names: f.feature_names,
            standardization: f.standardization,
            widths: f.b,
            w0: f.w0,
            weights,
            centering_offsets: f.centering_offsets,
            interactions: f
                .interactions
                .into_iter()
                .map(|t| Interaction {
                    i: t.i,
                    j: t.j,
                    weights: t.w,
                })
                .collect(),
            bandwidth_scale: f.bandwidth_scale,
            encodings: f.encodings,
            feature_ranges: f.feature_ranges,
        })
    }
}

/// Writes the model atomically.
pub fn save(model: &GpnamModel, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), model.to_json()?.as_bytes())
}

pub fn load(path: impl AsRef<Path>) -> Result<GpnamModel> {
    let text = std::fs::read_to_string(path)?;
    GpnamModel::from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::super::test_support::random_model;
    use super::*;

    fn tmp_path(dir: &tempfile::TempDir) -> std::path::PathBuf {
        dir.path().join("model.json")
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = random_model(4, 33, Task::BinaryClassification, 77);
        let x = Matrix::from_rows(&[[0.1, 0.2, 0.3, 0.4], [1.0, -1.0, 2.0, -2.0]]).unwrap();
        m.recenter(&x).unwrap();
        save(&m, tmp_path(&dir)).unwrap();
        let back = load(tmp_path(&dir)).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.predict(&x).unwrap(), m.predict(&x).unwrap());
    }

    #[test]
    fn round_trip_with_interactions() {
        let mut p = random_model(3, 8, Task::Regression, 1).into_parts();
        p.basis = p.basis.with_pair_frequencies();
        p.interactions.push(Interaction {
            i: 0,
            j: 2,
            weights: (0..8).map(|k| k as f64 * 0.1).collect(),
        });
        let m = GpnamModel::from_parts(p).unwrap();
        let back = GpnamModel::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn truncated_file_is_malformed() {
        let m = random_model(2, 5, Task::Regression, 3);
        let text = m.to_json().unwrap();
        let cut = &text[..text.len() / 2];
        assert!(matches!(GpnamModel::from_json(cut), Err(Error::MalformedFile(_))));
        assert!(matches!(GpnamModel::from_json(""), Err(Error::MalformedFile(_))));
    }

    #[test]
    fn negative_width_is_invariant_violation() {
        let m = random_model(2, 5, Task::Regression, 3);
        let mut v: serde_json::Value = serde_json::from_str(&m.to_json().unwrap()).unwrap();
        v["b"] = serde_json::json!([-1.0, 1.0]);
        let r = GpnamModel::from_json(&v.to_string());
        assert!(matches!(r, Err(Error::InvariantViolation(_))), "{r:?}");
    }

    #[test]
    fn unknown_version_rejected() {
        let m = random_model(2, 5, Task::Regression, 3);
        let mut v: serde_json::Value = serde_json::from_str(&m.to_json().unwrap()).unwrap();
        v["schema_version"] = serde_json::json!(99);
        assert!(matches!(
            GpnamModel::from_json(&v.to_string()),
            Err(Error::VersionMismatch { found: 99, .. })
        ));
    }

    #[test]
    fn missing_field_is_malformed() {
        let m = random_model(2, 5, Task::Regression, 3);
        let mut v: serde_json::Value = serde_json::from_str(&m.to_json().unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("W");
        assert!(matches!(GpnamModel::from_json(&v.to_string()), Err(Error::MalformedFile(_))));
    }

    #[test]
    fn file_lists_documented_fields() {
        let m = random_model(2, 5, Task::Regression, 3);
        let v: serde_json::Value = serde_json::from_str(&m.to_json().unwrap()).unwrap();
        for key in [
            "schema_version", "task", "S", "mode", "seed", "d", "feature_names",
            "standardization", "b", "w0", "W", "centering_offsets",
        ] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["W"].as_array().unwrap().len(), 10);
        assert!(v.get("interactions").is_none());
    }
}
