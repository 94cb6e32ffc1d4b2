use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{ClassifierModel, ModelSpec};

pub const CHECKPOINT_FORMAT: &str = "fairlens-checkpoint/1";

#[derive(Serialize, Deserialize)]
struct CheckpointDoc {
    format: String,
    spec: serde_json::Value,
    /// Tensor name → rows of values.
    tensors: BTreeMap<String, Vec<Vec<f64>>>,
}

impl ClassifierModel {
    /// JSON checkpoint with the model spec and every parameter tensor.
    /// Floats are written in shortest round-trip form, so reloading is bit-exact.
    pub fn to_checkpoint_json(&self) -> Result<String> {
        let tensors = self
            .params
            .tensors()
            .iter()
            .map(|t| {
                let values = &self.params.values()[t.range()];
                let rows = values.chunks(t.cols.max(1)).map(<[f64]>::to_vec).collect();
                (t.name.clone(), rows)
            })
            .collect();
        let doc = CheckpointDoc {
            format: CHECKPOINT_FORMAT.into(),
            spec: serde_json::to_value(&self.spec)?,
            tensors,
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_checkpoint_json(text: &str) -> Result<Self> {
        let doc: CheckpointDoc = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: format!("checkpoint: {e}"),
        })?;
        if doc.format != CHECKPOINT_FORMAT {
            return Err(Error::Checkpoint {
                field: "format".into(),
                message: format!("expected `{CHECKPOINT_FORMAT}`, found `{}`", doc.format),
            });
        }
        let spec: ModelSpec = serde_json::from_value(doc.spec).map_err(|e| Error::Checkpoint {
            field: "spec".into(),
            message: e.to_string(),
        })?;
        let mut model = ClassifierModel::new(spec, 0).map_err(|e| Error::Checkpoint {
            field: "spec".into(),
            message: e.to_string(),
        })?;
        let infos = model.params.tensors().to_vec();
        for info in &infos {
            let field = format!("tensors.{}", info.name);
            let rows = doc
                .tensors
                .get(&info.name)
                .ok_or_else(|| Error::Checkpoint {
                    field: field.clone(),
                    message: "missing tensor".into(),
                })?;
            if rows.len() != info.rows || rows.iter().any(|r| r.len() != info.cols) {
                return Err(Error::Checkpoint {
                    field,
                    message: format!(
                        "shape mismatch: expected {}x{}, found {} rows (first row length {})",
                        info.rows,
                        info.cols,
                        rows.len(),
                        rows.first().map_or(0, Vec::len)
                    ),
                });
            }
            let dst = &mut model.params.values_mut()[info.range()];
            for (d, s) in dst.iter_mut().zip(rows.iter().flatten()) {
                *d = *s;
            }
        }
        if let Some(extra) = doc.tensors.keys().find(|k| model.params.find(k).is_none()) {
            return Err(Error::Checkpoint {
                field: format!("tensors.{extra}"),
                message: "unexpected tensor".into(),
            });
        }
        Ok(model)
    }
}

pub fn save_checkpoint(model: &ClassifierModel, path: &Path) -> Result<()> {
    std::fs::write(path, model.to_checkpoint_json()?).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<ClassifierModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ClassifierModel::from_checkpoint_json(&text)
}
