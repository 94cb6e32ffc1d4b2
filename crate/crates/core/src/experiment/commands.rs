use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::bias::projection_payload;
use crate::datagen::save_csv;
use crate::error::{Error, Result};
use crate::model::{load_checkpoint, save_checkpoint};

use super::config::{DataSource, ExperimentConfig};
use super::pipeline::{analyze_model, evaluate_model, generate_splits, load_splits, train_arm};
use super::presets::{preset, PRESET_NAMES};
use super::report::reproduce;

/// Command-line overrides shared by every command.
#[derive(Debug, Clone, Default)]
pub struct CommandOptions {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub no_center: bool,
    pub no_removal: bool,
}

impl CommandOptions {
    fn seed(&self, cfg: &ExperimentConfig) -> u64 {
        self.seed.unwrap_or(cfg.seeds[0])
    }

    fn centered(&self, cfg: &ExperimentConfig) -> bool {
        cfg.analysis.centered && !self.no_center
    }

    fn removal(&self, cfg: &ExperimentConfig) -> bool {
        cfg.analysis.apply_removal && !self.no_removal
    }
}

/// Loads a config file, or a preset when no file of that name exists.
pub fn resolve_config(arg: &str) -> Result<ExperimentConfig> {
    let path = Path::new(arg);
    if path.exists() {
        return ExperimentConfig::load(path);
    }
    if PRESET_NAMES.contains(&arg) {
        return preset(arg);
    }
    Err(Error::config(
        "/",
        format!(
            "`{arg}` is neither a config file nor a preset; presets: {}",
            PRESET_NAMES.join(", ")
        ),
    ))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<PathBuf> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))?;
    Ok(path.to_path_buf())
}

fn data_dir(cfg: &ExperimentConfig, out: &Path) -> PathBuf {
    match &cfg.data {
        DataSource::Path(dir) => dir.clone(),
        DataSource::Generate(_) => out.join("data"),
    }
}

fn require(path: &Path, hint: &str) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Error::Data(format!("{} not found; {hint}", path.display())))
    }
}

#[derive(Serialize)]
struct SkewSummary<'a> {
    seed: u64,
    train_skew: &'a [[f64; 2]],
    train_counts: Vec<[usize; 2]>,
    test_skew: &'a [[f64; 2]],
    test_counts: Vec<[usize; 2]>,
}

/// Writes `data/{train,val,test}.csv` and `data/skew.json`.
pub fn cmd_generate(cfg: &ExperimentConfig, opts: &CommandOptions) -> Result<Vec<PathBuf>> {
    let out = cfg.output_dir(opts.out.as_deref());
    let seed = opts.seed(cfg);
    let data = generate_splits(cfg, seed)?;
    let dir = out.join("data");
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut written = Vec::new();
    for (name, ds) in [
        ("train", Some(&data.train)),
        ("val", data.val.as_ref()),
        ("test", Some(&data.test)),
    ] {
        if let Some(ds) = ds {
            let path = dir.join(format!("{name}.csv"));
            save_csv(ds, &path)?;
            written.push(path);
        }
    }
    let summary = SkewSummary {
        seed,
        train_skew: data.train.skew_table(),
        train_counts: data.train.cell_counts(),
        test_skew: data.test.skew_table(),
        test_counts: data.test.cell_counts(),
    };
    written.push(write_json(&dir.join("skew.json"), &summary)?);
    Ok(written)
}

/// Trains the configured variant; writes `model/checkpoint.json` and
/// `model/history.json`. A diverged run still writes its history.
pub fn cmd_train(cfg: &ExperimentConfig, opts: &CommandOptions) -> Result<Vec<PathBuf>> {
    let out = cfg.output_dir(opts.out.as_deref());
    let dir = data_dir(cfg, &out);
    require(&dir.join("train.csv"), "run `generate` first")?;
    let data = load_splits(&dir)?;
    let model_dir = out.join("model");
    match train_arm(cfg, &data, cfg.variant, opts.seed(cfg)) {
        Ok(outcome) => {
            std::fs::create_dir_all(&model_dir).map_err(|e| Error::io(&model_dir, e))?;
            let ckpt = model_dir.join("checkpoint.json");
            save_checkpoint(&outcome.model, &ckpt)?;
            let history = write_json(&model_dir.join("history.json"), &outcome.history)?;
            Ok(vec![ckpt, history])
        }
        Err(Error::Diverged {
            epoch,
            message,
            history,
        }) => {
            write_json(&model_dir.join("history.json"), &history)?;
            Err(Error::Diverged {
                epoch,
                message,
                history,
            })
        }
        Err(e) => Err(e),
    }
}

/// Writes `analysis/profile.json`, `analysis/projection.json` and the
/// shuffled-attribute `analysis/control.json`.
pub fn cmd_analyze(cfg: &ExperimentConfig, opts: &CommandOptions) -> Result<Vec<PathBuf>> {
    let out = cfg.output_dir(opts.out.as_deref());
    let dir = data_dir(cfg, &out);
    require(&dir.join("train.csv"), "run `generate` first")?;
    let ckpt = out.join("model").join("checkpoint.json");
    require(&ckpt, "run `train` first")?;
    let model = load_checkpoint(&ckpt)?;
    let train_set = crate::datagen::load_csv(&dir.join("train.csv"))?;
    let analysis = analyze_model(&model, &train_set, opts.centered(cfg), opts.seed(cfg))?;
    let adir = out.join("analysis");
    Ok(vec![
        write_json(&adir.join("profile.json"), &analysis.profile)?,
        write_json(
            &adir.join("projection.json"),
            &projection_payload(&analysis.profile),
        )?,
        write_json(&adir.join("control.json"), &analysis.control)?,
    ])
}

/// Writes `evaluation.json` with test metrics, and the removal variant when enabled.
pub fn cmd_evaluate(cfg: &ExperimentConfig, opts: &CommandOptions) -> Result<Vec<PathBuf>> {
    let out = cfg.output_dir(opts.out.as_deref());
    let dir = data_dir(cfg, &out);
    require(&dir.join("test.csv"), "run `generate` first")?;
    let ckpt = out.join("model").join("checkpoint.json");
    require(&ckpt, "run `train` first")?;
    let model = load_checkpoint(&ckpt)?;
    let data = load_splits(&dir)?;
    let eval = evaluate_model(
        cfg,
        &model,
        &data.train,
        &data.test,
        opts.centered(cfg),
        opts.removal(cfg),
    )?;
    Ok(vec![write_json(&out.join("evaluation.json"), &eval)?])
}

/// Runs all arms over the seed list; writes `report.json` and `report.md`.
pub fn cmd_reproduce(cfg: &ExperimentConfig, opts: &CommandOptions) -> Result<Vec<PathBuf>> {
    let mut cfg = cfg.clone();
    if let Some(seed) = opts.seed {
        cfg.seeds = vec![seed];
    }
    let out = cfg.output_dir(opts.out.as_deref());
    let report = reproduce(&cfg, opts.centered(&cfg), opts.removal(&cfg))?;
    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    let json = out.join("report.json");
    std::fs::write(&json, report.to_json()? + "\n").map_err(|e| Error::io(&json, e))?;
    let md = out.join("report.md");
    std::fs::write(&md, report.to_markdown()).map_err(|e| Error::io(&md, e))?;
    Ok(vec![json, md])
}
