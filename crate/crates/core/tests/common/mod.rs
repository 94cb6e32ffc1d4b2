#![allow(dead_code)]

pub mod oracle;

use fairlens::experiment::ExperimentConfig;

/// Small multi-class config that trains in well under a second.
pub fn small_config_json() -> String {
    r#"{
  "name": "small",
  "task": "multiclass",
  "data": {"generate": {
    "task": "multiclass", "classes": 3, "feature_dim": 6, "per_class": 60,
    "skew": 0.9, "spread": 1.0, "shift": 3.0, "shift_mode": "shared", "seed": 11
  }},
  "test": {"per_class": 40, "skew": 0.5},
  "val_fraction": 0.2,
  "encoder": {"hidden": [12], "features": 8},
  "train": {"epochs": 3, "batch_size": 32},
  "seeds": [0, 1, 2]
}"#
    .to_string()
}

pub fn small_config() -> ExperimentConfig {
    ExperimentConfig::from_json(&small_config_json()).unwrap()
}

pub fn small_multilabel_config() -> ExperimentConfig {
    let text = small_config_json()
        .replace(
            "\"task\": \"multiclass\", \"classes\": 3",
            "\"task\": \"multilabel\", \"classes\": 3",
        )
        .replace("\"task\": \"multiclass\",", "\"task\": \"multilabel\",");
    ExperimentConfig::from_json(&text).unwrap()
}
