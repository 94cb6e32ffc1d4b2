use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::config::{ExperimentConfig, ExperimentTask};
use super::pipeline::{run_seed, SeedResult, BASELINE_ARM, PROTECTED_ARM, REMOVAL_ARM};

pub const REPORT_FORMAT: &str = "fairlens-report/1";

/// Metric keys in table order.
pub const METRIC_KEYS: [&str; 5] = ["accuracy", "bias", "parity", "opportunity", "odds"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single seed.
    pub std: f64,
    pub count: usize,
}

impl Aggregate {
    pub fn of(values: &[f64]) -> Option<Aggregate> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(Aggregate {
            mean,
            std,
            count: values.len(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub total_seconds: f64,
    pub per_seed_seconds: Vec<f64>,
}

/// Full comparison over seeds. Everything except `timing` is a deterministic
/// function of the config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub format: String,
    pub config: ExperimentConfig,
    pub centered: bool,
    pub apply_removal: bool,
    /// Name of the task score under the `accuracy` key.
    pub task_score: String,
    pub metric_keys: Vec<String>,
    pub arms: Vec<String>,
    pub per_seed: Vec<SeedResult>,
    /// Arm → quantity → mean and std over seeds.
    pub aggregate: BTreeMap<String, BTreeMap<String, Aggregate>>,
    pub conventions: Vec<String>,
    pub timing: Timing,
}

/// Arm quantities that are aggregated: metrics plus spectrum summaries.
fn quantities(arm: &super::pipeline::ArmResult) -> Vec<(String, f64)> {
    let mut out: Vec<(String, f64)> = arm.metrics.iter().map(|(k, v)| (k.clone(), *v)).collect();
    if let Some(p) = &arm.profile {
        out.push(("pc1_ratio".into(), p.pc1_ratio));
        if let Some(g) = p.skewness {
            out.push(("skewness".into(), g));
        }
    }
    if let Some(c) = &arm.control {
        out.push(("control_pc1_ratio".into(), c.pc1_ratio));
    }
    out
}

pub fn aggregate(per_seed: &[SeedResult]) -> BTreeMap<String, BTreeMap<String, Aggregate>> {
    let mut collected: BTreeMap<String, BTreeMap<String, Vec<f64>>> = BTreeMap::new();
    for seed in per_seed {
        for (name, arm) in &seed.arms {
            let slot = collected.entry(name.clone()).or_default();
            for (k, v) in quantities(arm) {
                slot.entry(k).or_default().push(v);
            }
        }
    }
    collected
        .into_iter()
        .map(|(arm, q)| {
            let q = q
                .into_iter()
                .filter_map(|(k, v)| Aggregate::of(&v).map(|a| (k, a)))
                .collect();
            (arm, q)
        })
        .collect()
}

/// Worker count from `FAIRLENS_THREADS`; `None` leaves rayon's default.
pub fn thread_cap() -> Result<Option<usize>> {
    match std::env::var("FAIRLENS_THREADS") {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::config(
                "env:FAIRLENS_THREADS",
                format!("expected a positive integer, found `{s}`"),
            )),
        },
    }
}

/// Runs every seed of `cfg` (concurrently, capped by `FAIRLENS_THREADS`)
/// and assembles the report in seed-list order.
pub fn reproduce(cfg: &ExperimentConfig, centered: bool, apply_removal: bool) -> Result<RunReport> {
    cfg.validate()?;
    let start = Instant::now();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap()? {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::config("env:FAIRLENS_THREADS", e.to_string()))?;
    let results: Vec<(SeedResult, f64)> = pool.install(|| {
        cfg.seeds
            .par_iter()
            .map(|&seed| {
                let t = Instant::now();
                run_seed(cfg, seed, centered, apply_removal).map(|r| (r, t.elapsed().as_secs_f64()))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let (per_seed, per_seed_seconds): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let mut arms = vec![BASELINE_ARM.to_string(), PROTECTED_ARM.to_string()];
    if per_seed.iter().any(|s| s.arms.contains_key(REMOVAL_ARM)) {
        arms.push(REMOVAL_ARM.to_string());
    }
    let task_score = match cfg.task {
        ExperimentTask::Multiclass => "per-class accuracy",
        ExperimentTask::Multilabel => "attribute-weighted mAP",
        ExperimentTask::Binary => "accuracy",
    };
    let conventions = vec![
        format!("bias amplification form: {:?}", cfg.amplification()),
        "undefined per-class ratios are skipped; means run over evaluated classes".into(),
        "one-vs-rest counting; FPR negatives are all records outside the class".into(),
        "removal direction is computed from training features only".into(),
        "aggregate std is the sample standard deviation over seeds".into(),
    ];
    Ok(RunReport {
        format: REPORT_FORMAT.into(),
        config: cfg.clone(),
        centered,
        apply_removal,
        task_score: task_score.into(),
        metric_keys: METRIC_KEYS.iter().map(|s| s.to_string()).collect(),
        arms,
        aggregate: aggregate(&per_seed),
        per_seed,
        conventions,
        timing: Timing {
            total_seconds: start.elapsed().as_secs_f64(),
            per_seed_seconds,
        },
    })
}

fn cell(q: Option<&Aggregate>, scale: f64) -> String {
    match q {
        Some(a) => format!("{:.2} ± {:.2}", a.mean * scale, a.std * scale),
        None => "n/a".into(),
    }
}

impl RunReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// JSON with the `timing` member removed, for determinism comparisons.
    pub fn to_json_without_timing(&self) -> Result<String> {
        let mut value = serde_json::to_value(self)?;
        if let Some(obj) = value.as_object_mut() {
            obj.remove("timing");
        }
        Ok(serde_json::to_string_pretty(&value)?)
    }

    /// Markdown comparison table, metrics in percent.
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let title = if self.config.name.is_empty() {
            "experiment"
        } else {
            &self.config.name
        };
        let _ = writeln!(out, "# {title}\n");
        let _ = writeln!(
            out,
            "{} seeds; task score: {}; values are mean ± std in percent.\n",
            self.per_seed.len(),
            self.task_score
        );
        let score = if self.task_score.contains("mAP") { "mAP" } else { "Acc." };
        let _ = writeln!(out, "| Method | {score} | Bias | Parity | Opp. | Odds |");
        let _ = writeln!(out, "|---|---|---|---|---|---|");
        for arm in &self.arms {
            let q = self.aggregate.get(arm);
            let cells: Vec<String> = METRIC_KEYS
                .iter()
                .map(|k| cell(q.and_then(|q| q.get(*k)), 100.0))
                .collect();
            let _ = writeln!(out, "| {arm} | {} |", cells.join(" | "));
        }
        let _ = writeln!(out, "\n## Bias spectrum of training features\n");
        let _ = writeln!(
            out,
            "| Method | PC1 ratio | Skewness | Shuffled-attribute PC1 ratio |"
        );
        let _ = writeln!(out, "|---|---|---|---|");
        for arm in &self.arms {
            let q = self.aggregate.get(arm);
            let get = |k: &str| cell(q.and_then(|q| q.get(k)), 1.0);
            let _ = writeln!(
                out,
                "| {arm} | {} | {} | {} |",
                get("pc1_ratio"),
                get("skewness"),
                get("control_pc1_ratio")
            );
        }
        let _ = writeln!(out, "\nTotal time: {:.1} s", self.timing.total_seconds);
        out
    }
}
