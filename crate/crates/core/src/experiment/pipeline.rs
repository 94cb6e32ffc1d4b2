use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bias::{
    dataset_features, profile_dataset_features, remove_bias_all, shuffled_attributes, BiasProfile,
};
use crate::datagen::{load_csv, split, Dataset, GenConfig, Label, SyntheticSource};
use crate::error::{Error, Result};
use crate::fairness::{evaluate_log, MetricReport, PredictionLog, PredictionRecord};
use crate::model::{train, ClassifierModel, TrainOutcome, Variant};
use crate::numeric::SeededRng;

use super::config::{DataSource, ExperimentConfig};

/// Train, validation and test splits of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitData {
    pub train: Dataset,
    pub val: Option<Dataset>,
    pub test: Dataset,
}

/// Generator settings for run seed `seed`.
pub fn seeded_gen(gen: &GenConfig, seed: u64) -> GenConfig {
    GenConfig {
        seed: gen.seed.wrapping_add(seed),
        ..gen.clone()
    }
}

/// Synthesizes the splits of one run.
pub fn generate_splits(cfg: &ExperimentConfig, seed: u64) -> Result<SplitData> {
    let DataSource::Generate(gen) = &cfg.data else {
        return Err(Error::config(
            "/data",
            "data generation needs a `generate` source",
        ));
    };
    let gen = seeded_gen(gen, seed);
    let source = SyntheticSource::new(&gen)?;
    let full = source.sample(
        gen.per_class,
        gen.skew,
        false,
        &mut SeededRng::with_stream(gen.seed, 1),
    )?;
    let (train, val) = if cfg.val_fraction > 0.0 {
        let mut parts = split(&full, &[1.0 - cfg.val_fraction, cfg.val_fraction], gen.seed)?;
        let val = parts.pop();
        (parts.pop().unwrap(), val)
    } else {
        (full, None)
    };
    let test = source.sample(
        cfg.test.per_class.unwrap_or(gen.per_class),
        cfg.test.skew.unwrap_or(gen.skew),
        cfg.test.crossed,
        &mut SeededRng::with_stream(gen.seed, 2),
    )?;
    Ok(SplitData { train, val, test })
}

/// Reads `train.csv`, `test.csv` and, when present, `val.csv` from `dir`.
pub fn load_splits(dir: &Path) -> Result<SplitData> {
    let val_path = dir.join("val.csv");
    let val = if val_path.exists() {
        Some(load_csv(&val_path)?)
    } else {
        None
    };
    Ok(SplitData {
        train: load_csv(&dir.join("train.csv"))?,
        val,
        test: load_csv(&dir.join("test.csv"))?,
    })
}

/// Splits for a run: generated, or loaded from the configured directory.
pub fn run_splits(cfg: &ExperimentConfig, seed: u64) -> Result<SplitData> {
    match &cfg.data {
        DataSource::Generate(_) => generate_splits(cfg, seed),
        DataSource::Path(dir) => load_splits(dir),
    }
}

fn check_compatible(cfg: &ExperimentConfig, ds: &Dataset, split_name: &str) -> Result<()> {
    let mode = cfg.task_mode(ds.space().len());
    let ok = match (mode.is_multiclass(), ds.space()) {
        (true, crate::datagen::LabelSpace::MultiClass { .. }) => true,
        (false, crate::datagen::LabelSpace::MultiLabel { labels }) => {
            !matches!(cfg.task, super::config::ExperimentTask::Binary) || labels == 1
        }
        _ => false,
    };
    if !ok {
        return Err(Error::Data(format!(
            "{split_name} split has label space {:?}, incompatible with task {:?}",
            ds.space(),
            cfg.task
        )));
    }
    Ok(())
}

/// Fresh model of `variant` sized for `data`.
pub fn build_model(
    cfg: &ExperimentConfig,
    data: &SplitData,
    variant: Variant,
    seed: u64,
) -> Result<ClassifierModel> {
    check_compatible(cfg, &data.train, "train")?;
    check_compatible(cfg, &data.test, "test")?;
    if data.test.feature_dim() != data.train.feature_dim() {
        return Err(Error::Data(
            "train and test feature dimensions differ".into(),
        ));
    }
    let spec = cfg.model_spec(data.train.feature_dim(), data.train.space().len(), variant);
    ClassifierModel::new(spec, seed)
}

/// Builds and trains one arm.
pub fn train_arm(
    cfg: &ExperimentConfig,
    data: &SplitData,
    variant: Variant,
    seed: u64,
) -> Result<TrainOutcome> {
    let model = build_model(cfg, data, variant, seed)?;
    let train_cfg = crate::model::TrainConfig {
        seed,
        ..cfg.train.clone()
    };
    train(model, &data.train, data.val.as_ref(), &train_cfg)
}

/// Prediction log from precomputed features. Attributes of `ds` are copied
/// into the records only after prediction.
pub fn prediction_log(
    model: &ClassifierModel,
    features: &[Vec<f64>],
    ds: &Dataset,
    tau: f64,
    threshold: f64,
) -> Result<PredictionLog> {
    let space = ds.space();
    let records = features
        .iter()
        .zip(ds.samples())
        .map(|(h, s)| {
            let (predicted, scores) = if model.spec().task.is_multiclass() {
                (
                    Label::Class(model.predict_class_from_features(h, tau)?),
                    None,
                )
            } else {
                let scores = model.label_scores_from_features(h, tau)?;
                let bits = scores.iter().map(|&p| u8::from(p >= threshold)).collect();
                (Label::Multi(bits), Some(scores))
            };
            Ok(PredictionRecord {
                truth: s.label.clone(),
                predicted,
                scores,
                attribute: s.attribute,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    PredictionLog::new(space.into(), records)
}

/// Spectrum headline numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSummary {
    pub pc1_ratio: f64,
    pub skewness: Option<f64>,
    pub ratios: Vec<f64>,
}

impl From<&BiasProfile> for ProfileSummary {
    fn from(p: &BiasProfile) -> Self {
        ProfileSummary {
            pc1_ratio: p.pc1_ratio,
            skewness: p.skewness,
            ratios: p.ratios.clone(),
        }
    }
}

/// Metrics after projecting the training-data bias direction out of every feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemovalEvaluation {
    /// Split from which `b` was computed; always `train`.
    pub direction_source: String,
    pub bias_direction: Vec<f64>,
    pub metrics: MetricReport,
    /// Training-feature profile after removal.
    pub profile: ProfileSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub metrics: MetricReport,
    pub removal: Option<RemovalEvaluation>,
}

/// Task score and fairness metrics on the test split, plus the removal
/// variant when requested.
pub fn evaluate_model(
    cfg: &ExperimentConfig,
    model: &ClassifierModel,
    train_set: &Dataset,
    test_set: &Dataset,
    centered: bool,
    apply_removal: bool,
) -> Result<Evaluation> {
    let tau = cfg.train.temperature;
    let form = cfg.amplification();
    let test_features = dataset_features(model, test_set)?;
    let log = prediction_log(model, &test_features, test_set, tau, cfg.analysis.threshold)?;
    let metrics = evaluate_log(&log, train_set.skew_table(), form)?;
    let removal = if apply_removal {
        let train_features = dataset_features(model, train_set)?;
        let profile = profile_dataset_features(&train_features, train_set, centered)?;
        let b = profile.bias_direction;
        let cleaned_train = remove_bias_all(&train_features, &b)?;
        let after = profile_dataset_features(&cleaned_train, train_set, centered)?;
        let cleaned_test = remove_bias_all(&test_features, &b)?;
        let log = prediction_log(model, &cleaned_test, test_set, tau, cfg.analysis.threshold)?;
        Some(RemovalEvaluation {
            direction_source: "train".into(),
            bias_direction: b,
            metrics: evaluate_log(&log, train_set.skew_table(), form)?,
            profile: ProfileSummary::from(&after),
        })
    } else {
        None
    };
    Ok(Evaluation { metrics, removal })
}

/// Bias profile of a model on training data and its shuffled-attribute control.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub profile: BiasProfile,
    pub control: ProfileSummary,
}

pub fn analyze_model(
    model: &ClassifierModel,
    train_set: &Dataset,
    centered: bool,
    seed: u64,
) -> Result<Analysis> {
    let features = dataset_features(model, train_set)?;
    let profile = profile_dataset_features(&features, train_set, centered)?;
    let shuffled =
        train_set.with_attributes(&shuffled_attributes(&train_set.attributes(), seed))?;
    let control = profile_dataset_features(&features, &shuffled, centered)?;
    Ok(Analysis {
        profile,
        control: ProfileSummary::from(&control),
    })
}

/// One arm of one seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmResult {
    pub metrics: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub skipped: BTreeMap<String, Vec<usize>>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub undefined: Vec<String>,
    /// Training-feature spectrum; absent when a `(y, v)` cell is empty.
    pub profile: Option<ProfileSummary>,
    /// Shuffled-attribute control spectrum.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub control: Option<ProfileSummary>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub selected_epoch: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub final_train_score: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub direction_source: Option<String>,
}

impl ArmResult {
    fn from_metrics(m: &MetricReport) -> Self {
        ArmResult {
            metrics: m.values.clone(),
            skipped: m.skipped.clone(),
            undefined: m.undefined.clone(),
            profile: None,
            control: None,
            selected_epoch: None,
            final_train_score: None,
            direction_source: None,
        }
    }
}

pub const BASELINE_ARM: &str = "baseline";
pub const PROTECTED_ARM: &str = "protected";
pub const REMOVAL_ARM: &str = "protected+removal";

/// Every arm of one seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedResult {
    pub seed: u64,
    pub arms: BTreeMap<String, ArmResult>,
}

fn profiled(
    outcome: &TrainOutcome,
    data: &SplitData,
    centered: bool,
    seed: u64,
) -> Result<Option<Analysis>> {
    if data
        .train
        .cell_counts()
        .iter()
        .any(|c| c[0] == 0 || c[1] == 0)
    {
        return Ok(None);
    }
    analyze_model(&outcome.model, &data.train, centered, seed).map(Some)
}

fn arm_result(outcome: &TrainOutcome, eval: &Evaluation, analysis: Option<&Analysis>) -> ArmResult {
    ArmResult {
        profile: analysis.map(|a| ProfileSummary::from(&a.profile)),
        control: analysis.map(|a| a.control.clone()),
        selected_epoch: outcome.selected_epoch,
        final_train_score: outcome.history.last().map(|r| r.train_score),
        ..ArmResult::from_metrics(&eval.metrics)
    }
}

/// Baseline and protected arms (plus removal) on one seed's data.
pub fn run_seed(
    cfg: &ExperimentConfig,
    seed: u64,
    centered: bool,
    apply_removal: bool,
) -> Result<SeedResult> {
    let data = run_splits(cfg, seed)?;
    let mut arms = BTreeMap::new();

    let baseline = train_arm(cfg, &data, Variant::Baseline, seed)?;
    let eval = evaluate_model(
        cfg,
        &baseline.model,
        &data.train,
        &data.test,
        centered,
        false,
    )?;
    let analysis = profiled(&baseline, &data, centered, seed)?;
    arms.insert(
        BASELINE_ARM.to_string(),
        arm_result(&baseline, &eval, analysis.as_ref()),
    );

    let variant = match cfg.variant {
        Variant::Baseline => Variant::Protected,
        v => v,
    };
    let protected = train_arm(cfg, &data, variant, seed)?;
    let analysis = profiled(&protected, &data, centered, seed)?;
    let removal = apply_removal && analysis.is_some();
    let eval = evaluate_model(
        cfg,
        &protected.model,
        &data.train,
        &data.test,
        centered,
        removal,
    )?;
    arms.insert(
        PROTECTED_ARM.to_string(),
        arm_result(&protected, &eval, analysis.as_ref()),
    );
    if let Some(r) = &eval.removal {
        arms.insert(
            REMOVAL_ARM.to_string(),
            ArmResult {
                profile: Some(r.profile.clone()),
                direction_source: Some(r.direction_source.clone()),
                ..ArmResult::from_metrics(&r.metrics)
            },
        );
    }
    Ok(SeedResult { seed, arms })
}
