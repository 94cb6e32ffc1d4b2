use crate::datagen::{DataTask, GenConfig, ShiftMode};
use crate::error::{Error, Result};
use crate::model::{HeadUpdate, LrSchedule, TrainConfig, Variant};

use super::config::{
    AnalysisOptions, DataSource, EncoderConfig, ExperimentConfig, ExperimentTask, TestDesign,
};

pub const PRESET_NAMES: [&str; 3] = [
    "cifar10s-synthetic",
    "celeba-synthetic",
    "imdb-eb-synthetic",
];

pub fn preset_names() -> &'static [&'static str] {
    &PRESET_NAMES
}

/// Named study configuration.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    match name {
        "cifar10s-synthetic" => Ok(cifar10s()),
        "celeba-synthetic" => Ok(celeba()),
        "imdb-eb-synthetic" => Ok(imdb_eb()),
        _ => Err(Error::config(
            "/preset",
            format!(
                "unknown preset `{name}`; available: {}",
                PRESET_NAMES.join(", ")
            ),
        )),
    }
}

/// The presets shift every class along one shared attribute direction, so
/// all rows of `Δ` share that direction. Centering would subtract it.
fn uncentered() -> AnalysisOptions {
    AnalysisOptions {
        centered: false,
        ..AnalysisOptions::default()
    }
}

/// Ten classes, 95% of each carrying its dominant attribute, balanced test set.
fn cifar10s() -> ExperimentConfig {
    ExperimentConfig {
        name: "cifar10s-synthetic".into(),
        task: ExperimentTask::Multiclass,
        data: DataSource::Generate(GenConfig {
            task: DataTask::Multiclass,
            classes: 10,
            feature_dim: 32,
            per_class: 500,
            skew: 0.95,
            spread: 1.0,
            shift: 4.0,
            shift_mode: ShiftMode::Shared,
            center_scale: 1.0,
            positive_rate: 0.25,
            seed: 0,
        }),
        test: TestDesign {
            per_class: Some(200),
            skew: Some(0.5),
            crossed: false,
        },
        val_fraction: 0.0,
        encoder: EncoderConfig {
            hidden: vec![256],
            features: 64,
        },
        embed_dim: Some(64),
        train: TrainConfig {
            epochs: 30,
            schedule: LrSchedule::Step {
                factor: 10.0,
                period: 20,
            },
            ..TrainConfig::default()
        },
        variant: Variant::Protected,
        analysis: uncentered(),
        output: None,
        seeds: (0..5).collect(),
    }
}

/// Multi-label attributes, each skewed toward one attribute value.
fn celeba() -> ExperimentConfig {
    ExperimentConfig {
        name: "celeba-synthetic".into(),
        task: ExperimentTask::Multilabel,
        data: DataSource::Generate(GenConfig {
            task: DataTask::Multilabel,
            classes: 8,
            feature_dim: 32,
            per_class: 600,
            skew: 0.8,
            spread: 1.0,
            shift: 2.0,
            shift_mode: ShiftMode::Shared,
            center_scale: 0.3,
            positive_rate: 0.25,
            seed: 0,
        }),
        test: TestDesign::default(),
        val_fraction: 0.2,
        encoder: EncoderConfig {
            hidden: vec![64],
            features: 32,
        },
        embed_dim: Some(32),
        train: TrainConfig {
            epochs: 30,
            schedule: LrSchedule::Step {
                factor: 10.0,
                period: 20,
            },
            ..TrainConfig::default()
        },
        variant: Variant::Protected,
        analysis: uncentered(),
        output: None,
        seeds: (0..5).collect(),
    }
}

/// Binary task whose training split fully confounds class and attribute;
/// the test split crosses them.
fn imdb_eb() -> ExperimentConfig {
    ExperimentConfig {
        name: "imdb-eb-synthetic".into(),
        task: ExperimentTask::Binary,
        data: DataSource::Generate(GenConfig {
            task: DataTask::ExtremeBias,
            classes: 2,
            feature_dim: 32,
            per_class: 500,
            skew: 1.0,
            spread: 1.0,
            shift: 8.0,
            shift_mode: ShiftMode::Shared,
            center_scale: 1.0,
            positive_rate: 0.25,
            seed: 0,
        }),
        test: TestDesign {
            per_class: Some(500),
            skew: Some(1.0),
            crossed: true,
        },
        val_fraction: 0.0,
        encoder: EncoderConfig {
            hidden: vec![64],
            features: 32,
        },
        embed_dim: Some(32),
        train: TrainConfig {
            epochs: 30,
            schedule: LrSchedule::Step {
                factor: 10.0,
                period: 20,
            },
            head_update: HeadUpdate::Both,
            temperature: 1.0,
            ..TrainConfig::default()
        },
        variant: Variant::Protected,
        analysis: AnalysisOptions {
            apply_removal: false,
            ..uncentered()
        },
        output: None,
        seeds: (0..5).collect(),
    }
}
