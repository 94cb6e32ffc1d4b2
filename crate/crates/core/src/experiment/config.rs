use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::datagen::{DataTask, GenConfig};
use crate::error::{Error, Result};
use crate::fairness::AmplificationForm;
use crate::model::{EncoderSpec, ModelSpec, TaskMode, TrainConfig, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentTask {
    Multiclass,
    Multilabel,
    Binary,
}

/// Where the samples come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    /// Synthetic data; the run seed is added to `seed` so every run draws
    /// its own geometry and samples.
    Generate(GenConfig),
    /// Directory holding `train.csv`, `test.csv` and optionally `val.csv`.
    Path(PathBuf),
}

/// Test split drawn from the same synthetic source as the training data.
/// Unset fields inherit the training values.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TestDesign {
    pub per_class: Option<usize>,
    pub skew: Option<f64>,
    /// Swap every class's dominant attribute, e.g. an extreme-bias cross split.
    pub crossed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncoderConfig {
    pub hidden: Vec<usize>,
    pub features: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisOptions {
    /// Center `Δ` before PCA.
    pub centered: bool,
    /// Also evaluate with the bias direction projected out of the features.
    pub apply_removal: bool,
    /// Bias amplification form; inferred from the test design when unset.
    pub amplification: Option<AmplificationForm>,
    /// Multi-label decision threshold on the mean head probability.
    pub threshold: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            centered: true,
            apply_removal: true,
            amplification: None,
            threshold: 0.5,
        }
    }
}

fn default_val_fraction() -> f64 {
    0.2
}

fn default_variant() -> Variant {
    Variant::Protected
}

fn default_seeds() -> Vec<u64> {
    (0..5).collect()
}

/// One JSON document describing data, model, training, analysis and seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    pub task: ExperimentTask,
    pub data: DataSource,
    #[serde(default)]
    pub test: TestDesign,
    /// Fraction of generated training data held out for validation.
    #[serde(default = "default_val_fraction")]
    pub val_fraction: f64,
    pub encoder: EncoderConfig,
    /// Embedding width `M` of protected heads; defaults to the feature width.
    #[serde(default)]
    pub embed_dim: Option<usize>,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default = "default_variant")]
    pub variant: Variant,
    #[serde(default)]
    pub analysis: AnalysisOptions,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
}

fn nest(prefix: &str, e: Error) -> Error {
    match e {
        Error::Config { pointer, message } => Error::Config {
            pointer: format!("{prefix}{pointer}"),
            message,
        },
        other => other,
    }
}

fn to_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => out.push_str(&format!("/{key}")),
            Segment::Enum { variant } => out.push_str(&format!("/{variant}")),
            Segment::Unknown => out.push_str("/?"),
        }
    }
    if out.is_empty() {
        out.push('/');
    }
    out
}

impl ExperimentConfig {
    /// Parses and validates; every error carries a JSON pointer.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let pointer = to_pointer(e.path());
            Error::config(pointer, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::config("/seeds", "at least one seed is required"));
        }
        if let DataSource::Generate(gen) = &self.data {
            gen.validate().map_err(|e| nest("/data/generate", e))?;
            let expected = match self.task {
                ExperimentTask::Multiclass => DataTask::Multiclass,
                ExperimentTask::Multilabel => DataTask::Multilabel,
                ExperimentTask::Binary => DataTask::ExtremeBias,
            };
            if gen.task != expected {
                return Err(Error::config(
                    "/data/generate/task",
                    format!("task {:?} needs generator task {expected:?}", self.task),
                ));
            }
            if let Some(skew) = self.test.skew {
                if !(0.5..=1.0).contains(&skew) {
                    return Err(Error::config("/test/skew", "skew must lie in [0.5, 1]"));
                }
            }
            if self.test.per_class.is_some_and(|n| n < 2) {
                return Err(Error::config(
                    "/test/per_class",
                    "per-class count must be at least 2",
                ));
            }
        }
        if !(0.0..1.0).contains(&self.val_fraction) {
            return Err(Error::config("/val_fraction", "must lie in [0, 1)"));
        }
        if !(self.analysis.threshold > 0.0 && self.analysis.threshold < 1.0) {
            return Err(Error::config("/analysis/threshold", "must lie in (0, 1)"));
        }
        self.train.validate().map_err(|e| nest("/train", e))?;
        if self.encoder.features == 0 {
            return Err(Error::config("/encoder/features", "must be at least 1"));
        }
        if let Some((i, _)) = self
            .encoder
            .hidden
            .iter()
            .enumerate()
            .find(|(_, &w)| w == 0)
        {
            return Err(Error::config(
                format!("/encoder/hidden/{i}"),
                "width must be at least 1",
            ));
        }
        if self.embed_dim == Some(0) {
            return Err(Error::config("/embed_dim", "must be at least 1"));
        }
        Ok(())
    }

    pub fn task_mode(&self, classes: usize) -> TaskMode {
        match self.task {
            ExperimentTask::Multiclass => TaskMode::Multiclass { classes },
            ExperimentTask::Multilabel => TaskMode::Multilabel { labels: classes },
            ExperimentTask::Binary => TaskMode::Binary,
        }
    }

    pub fn model_spec(&self, input_dim: usize, classes: usize, variant: Variant) -> ModelSpec {
        ModelSpec {
            encoder: EncoderSpec::mlp(input_dim, &self.encoder.hidden, self.encoder.features),
            task: self.task_mode(classes),
            variant,
            embed_dim: self.embed_dim.unwrap_or(self.encoder.features),
        }
    }

    /// Amplification form: explicit, or non-iid when the test skew differs
    /// from training.
    pub fn amplification(&self) -> AmplificationForm {
        if let Some(form) = self.analysis.amplification {
            return form;
        }
        match &self.data {
            DataSource::Generate(gen) => {
                let skew = self.test.skew.unwrap_or(gen.skew);
                if self.test.crossed || skew != gen.skew {
                    AmplificationForm::NonIid
                } else {
                    AmplificationForm::Iid
                }
            }
            DataSource::Path(_) => AmplificationForm::Iid,
        }
    }

    /// Directory for command outputs: explicit, configured, or `runs/<name>`.
    pub fn output_dir(&self, explicit: Option<&Path>) -> PathBuf {
        explicit
            .map(Path::to_path_buf)
            .or_else(|| self.output.clone())
            .unwrap_or_else(|| {
                let name = if self.name.is_empty() {
                    "experiment"
                } else {
                    &self.name
                };
                PathBuf::from("runs").join(name)
            })
    }
}
