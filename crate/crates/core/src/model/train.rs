use serde::{Deserialize, Serialize};

use crate::datagen::{Dataset, Label, Sample};
use crate::error::{Error, Result};
use crate::fairness::{weighted_map, PredictionLog, PredictionRecord};
use crate::numeric::SeededRng;

use super::loss::LossConfig;
use super::{ClassifierModel, TaskMode};

/// Which protected heads a sample trains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadUpdate {
    /// Only the head of the sample's own attribute value.
    #[default]
    Matched,
    /// Both heads, each with weight 0.5.
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LrSchedule {
    Constant,
    /// Divide by `factor` every `period` epochs.
    Step {
        factor: f64,
        period: usize,
    },
    /// Multiply by `decay` after every optimizer step.
    Exponential {
        decay: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub lr: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub schedule: LrSchedule,
    pub temperature: f64,
    pub head_update: HeadUpdate,
    pub seed: u64,
}

impl Default for TrainConfig {
    /// Full-scale optimizer settings with the epoch budget scaled down to
    /// 60 epochs and the step decay to every 20 epochs.
    fn default() -> Self {
        TrainConfig {
            lr: 0.1,
            momentum: 0.9,
            weight_decay: 5e-4,
            batch_size: 128,
            epochs: 60,
            schedule: LrSchedule::Step {
                factor: 10.0,
                period: 20,
            },
            temperature: 0.1,
            head_update: HeadUpdate::Matched,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::config("/lr", "learning rate must be positive"));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::config("/momentum", "momentum must lie in [0, 1)"));
        }
        if !(self.weight_decay >= 0.0) {
            return Err(Error::config(
                "/weight_decay",
                "weight decay must be non-negative",
            ));
        }
        if self.batch_size == 0 {
            return Err(Error::config(
                "/batch_size",
                "batch size must be at least 1",
            ));
        }
        if !(self.temperature > 0.0) {
            return Err(Error::config(
                "/temperature",
                "temperature must be positive",
            ));
        }
        match self.schedule {
            LrSchedule::Step { factor, period } if !(factor > 0.0) || period == 0 => {
                Err(Error::config(
                    "/schedule",
                    "step schedule needs a positive factor and period",
                ))
            }
            LrSchedule::Exponential { decay } if !(decay > 0.0 && decay <= 1.0) => {
                Err(Error::config("/schedule/decay", "decay must lie in (0, 1]"))
            }
            _ => Ok(()),
        }
    }

    pub fn loss_config(&self) -> LossConfig {
        LossConfig {
            temperature: self.temperature,
            weight_decay: self.weight_decay,
            head_update: self.head_update,
        }
    }

    /// Learning rate in `epoch` after `step` optimizer steps in total.
    pub fn learning_rate(&self, epoch: usize, step: usize) -> f64 {
        match self.schedule {
            LrSchedule::Constant => self.lr,
            LrSchedule::Step { factor, period } => self.lr / factor.powi((epoch / period) as i32),
            LrSchedule::Exponential { decay } => self.lr * decay.powi(step as i32),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    pub learning_rate: f64,
    /// Accuracy (multi-class, binary) or weighted mAP (multi-label), as a fraction.
    pub train_score: f64,
    pub val_score: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: ClassifierModel,
    pub history: Vec<EpochRecord>,
    /// Epoch whose parameters were kept; `None` when no epoch ran.
    pub selected_epoch: Option<usize>,
}

impl ClassifierModel {
    /// Momentum SGD: `buf ← μ·buf + g`, `θ ← θ − lr·buf`.
    pub fn sgd_step(&mut self, grads: &[f64], cfg: &TrainConfig, epoch: usize, step: usize) {
        let lr = cfg.learning_rate(epoch, step);
        let (params, velocity) = self.velocity_mut();
        for ((theta, buf), g) in params
            .values_mut()
            .iter_mut()
            .zip(velocity.iter_mut())
            .zip(grads)
        {
            *buf = cfg.momentum * *buf + g;
            *theta -= lr * *buf;
        }
    }

    /// Task score over a dataset: accuracy, or weighted mAP for multi-label.
    pub fn score(&self, ds: &Dataset, tau: f64) -> Result<f64> {
        match self.spec.task {
            TaskMode::Multiclass { .. } => {
                let mut correct = 0usize;
                for s in ds.samples() {
                    if Label::Class(self.predict_class(&s.features, tau)?) == s.label {
                        correct += 1;
                    }
                }
                Ok(correct as f64 / ds.len().max(1) as f64)
            }
            TaskMode::Binary => {
                let mut correct = 0usize;
                for s in ds.samples() {
                    let p = self.label_scores(&s.features, tau)?[0];
                    let bit = s.label.bits().unwrap()[0];
                    if u8::from(p >= 0.5) == bit {
                        correct += 1;
                    }
                }
                Ok(correct as f64 / ds.len().max(1) as f64)
            }
            TaskMode::Multilabel { labels } => {
                let records = ds
                    .samples()
                    .iter()
                    .map(|s| {
                        let scores = self.label_scores(&s.features, tau)?;
                        let predicted = scores.iter().map(|&p| u8::from(p >= 0.5)).collect();
                        Ok(PredictionRecord {
                            truth: s.label.clone(),
                            predicted: Label::Multi(predicted),
                            scores: Some(scores),
                            attribute: s.attribute,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let log = PredictionLog::multilabel(labels, records)?;
                Ok(weighted_map(&log).map(|m| m.value).unwrap_or(0.0))
            }
        }
    }
}

/// Mini-batch momentum SGD with a fixed per-seed shuffle order.
///
/// Multi-label models keep the epoch with the best validation weighted mAP;
/// other tasks keep the final epoch.
pub fn train(
    mut model: ClassifierModel,
    train_set: &Dataset,
    val_set: Option<&Dataset>,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if train_set.is_empty() {
        return Err(Error::Data("empty training set".into()));
    }
    let loss_cfg = cfg.loss_config();
    let select_best = matches!(model.spec.task, TaskMode::Multilabel { .. }) && val_set.is_some();
    let mut rng = SeededRng::with_stream(cfg.seed, 3);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(f64, usize, ClassifierModel)> = None;
    let mut step = 0usize;

    for epoch in 0..cfg.epochs {
        rng.shuffle(&mut order);
        let lr_at_start = cfg.learning_rate(epoch, step);
        let mut loss_sum = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<&Sample> = chunk.iter().map(|&i| &train_set.samples()[i]).collect();
            let out = match model.loss(&batch, &loss_cfg) {
                Ok(out) => out,
                Err(Error::Numeric(message)) => {
                    return Err(Error::Diverged {
                        epoch,
                        message,
                        history,
                    })
                }
                Err(e) => return Err(e),
            };
            loss_sum += out.loss;
            batches += 1;
            model.sgd_step(&out.grads, cfg, epoch, step);
            step += 1;
        }
        let non_finite = model.non_finite_tensors();
        if !non_finite.is_empty() {
            return Err(Error::Diverged {
                epoch,
                message: format!("non-finite parameters in {non_finite:?}"),
                history,
            });
        }
        let train_score = model.score(train_set, cfg.temperature)?;
        let val_score = val_set
            .map(|v| model.score(v, cfg.temperature))
            .transpose()?;
        history.push(EpochRecord {
            epoch,
            loss: loss_sum / batches as f64,
            learning_rate: lr_at_start,
            train_score,
            val_score,
        });
        if select_best {
            let score = val_score.unwrap();
            if best.as_ref().is_none_or(|(b, _, _)| score > *b) {
                best = Some((score, epoch, model.clone()));
            }
        }
    }

    let (model, selected_epoch) = match best {
        Some((_, epoch, m)) => (m, Some(epoch)),
        None => (model, cfg.epochs.checked_sub(1)),
    };
    Ok(TrainOutcome {
        model,
        history,
        selected_epoch,
    })
}
