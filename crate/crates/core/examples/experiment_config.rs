//! Parses an experiment config from JSON, showing defaults and the
//! pointer-addressed error for a bad field.
//!
//! ```bash
//! cargo run --example experiment_config
//! ```

use fairlens::experiment::ExperimentConfig;

const CONFIG: &str = r#"{
  "name": "small",
  "task": "multiclass",
  "data": {"generate": {
    "task": "multiclass", "classes": 4, "feature_dim": 8, "per_class": 100,
    "skew": 0.9, "spread": 1.0, "shift": 4.0, "shift_mode": "shared", "seed": 3
  }},
  "test": {"skew": 0.5},
  "encoder": {"hidden": [32], "features": 16},
  "train": {"epochs": 5}
}"#;

fn main() -> fairlens::Result<()> {
    let cfg = ExperimentConfig::from_json(CONFIG)?;
    println!("{}", cfg.to_json()?);

    let bad = CONFIG.replace("\"skew\": 0.9", "\"skew\": 1.5");
    match ExperimentConfig::from_json(&bad) {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
