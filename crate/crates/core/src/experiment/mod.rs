//! Configuration-driven runner: data generation, training of baseline and
//! protected arms, bias profiling, removal, evaluation and reports.
//!
//! The `cmd_*` functions back the `fairlens` binary; each reads an
//! [`ExperimentConfig`] and writes JSON artifacts under an output directory.

mod commands;
mod config;
mod pipeline;
mod presets;
mod report;

pub use commands::{
    cmd_analyze, cmd_evaluate, cmd_generate, cmd_reproduce, cmd_train, resolve_config,
    CommandOptions,
};
pub use config::{
    AnalysisOptions, DataSource, EncoderConfig, ExperimentConfig, ExperimentTask, TestDesign,
};
pub use pipeline::{
    analyze_model, build_model, evaluate_model, generate_splits, load_splits, prediction_log,
    run_seed, run_splits, seeded_gen, train_arm, Analysis, ArmResult, Evaluation, ProfileSummary,
    RemovalEvaluation, SeedResult, SplitData, BASELINE_ARM, PROTECTED_ARM, REMOVAL_ARM,
};
pub use presets::{preset, preset_names, PRESET_NAMES};
pub use report::{
    aggregate, reproduce, thread_cap, Aggregate, RunReport, Timing, METRIC_KEYS, REPORT_FORMAT,
};
