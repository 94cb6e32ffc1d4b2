//! Objectives and their hand-derived gradients.
//!
//! Cosine similarities inside the loss use `‖·‖ + 1e-12` denominators so
//! gradients stay finite near zero norm.

use crate::datagen::{Label, Sample};
use crate::error::{Error, Result};
use crate::numeric::{dot, norm};

use super::train::HeadUpdate;
use super::{ClassifierModel, Head, TaskMode, TensorId};

const COSINE_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossConfig {
    /// Temperature `τ` of the cosine softmax.
    pub temperature: f64,
    /// `λ` in the `0.5·λ·‖θ‖²` penalty.
    pub weight_decay: f64,
    pub head_update: HeadUpdate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossOutput {
    /// Data term plus weight decay.
    pub loss: f64,
    /// Mean negative log-likelihood alone.
    pub data_loss: f64,
    /// `∂loss/∂θ` in the flat parameter layout.
    pub grads: Vec<f64>,
}

fn log_softmax_at(logits: &[f64], target: usize) -> (f64, Vec<f64>) {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = logits.iter().map(|l| (l - max).exp()).sum();
    let lse = max + sum.ln();
    let probs = logits.iter().map(|l| (l - lse).exp()).collect();
    (logits[target] - lse, probs)
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

impl ClassifierModel {
    /// Cross-entropy of a temperature-scaled cosine softmax over the rows of
    /// `rows` against `target`. Accumulates `scale · ∂nll/∂W` into `grads`,
    /// adds `scale · ∂nll/∂z` into `dz` and returns the unscaled nll.
    fn cosine_nll(
        &self,
        rows: TensorId,
        z: &[f64],
        target: usize,
        tau: f64,
        scale: f64,
        grads: &mut [f64],
        dz: &mut [f64],
    ) -> f64 {
        let info = self.params.info(rows);
        let m = info.cols;
        let w = self.params.get(rows);
        let z_norm = norm(z);
        let z_den = z_norm + COSINE_GUARD;
        let mut sims = Vec::with_capacity(info.rows);
        let mut row_norms = Vec::with_capacity(info.rows);
        for r in 0..info.rows {
            let row = &w[r * m..(r + 1) * m];
            let rn = norm(row);
            row_norms.push(rn);
            sims.push(dot(row, z) / ((rn + COSINE_GUARD) * z_den));
        }
        let logits: Vec<f64> = sims.iter().map(|s| s / tau).collect();
        let (log_p, probs) = log_softmax_at(&logits, target);

        for r in 0..info.rows {
            let g = scale * (probs[r] - f64::from(u8::from(r == target))) / tau;
            if g == 0.0 {
                continue;
            }
            let row = &w[r * m..(r + 1) * m];
            let rn = row_norms[r];
            let r_den = rn + COSINE_GUARD;
            let s = sims[r];
            let gw = &mut grads[info.offset + r * m..info.offset + (r + 1) * m];
            for k in 0..m {
                let mut d_row = z[k] / (r_den * z_den);
                if rn > 0.0 {
                    d_row -= s * row[k] / (r_den * rn);
                }
                gw[k] += g * d_row;

                let mut d_z = row[k] / (r_den * z_den);
                if z_norm > 0.0 {
                    d_z -= s * z[k] / (z_den * z_norm);
                }
                dz[k] += g * d_z;
            }
        }
        -log_p
    }

    /// Backpropagates `dh` through the encoder given cached activations.
    fn backward_encoder(&self, acts: &[Vec<f64>], dh: Vec<f64>, grads: &mut [f64]) {
        let mut d = dh;
        for l in (0..self.encoder.len()).rev() {
            let dx = self.encoder[l].backward(&self.params, &acts[l], &d, grads);
            if l == 0 {
                break;
            }
            d = dx
                .into_iter()
                .zip(&acts[l])
                .map(|(g, a)| if *a > 0.0 { g } else { 0.0 })
                .collect();
        }
    }

    fn heads_for(v: u8, update: HeadUpdate) -> Vec<(usize, f64)> {
        match update {
            HeadUpdate::Matched => vec![(v as usize, 1.0)],
            HeadUpdate::Both => vec![(0, 0.5), (1, 0.5)],
        }
    }

    fn check_batch(&self, batch: &[&Sample]) -> Result<()> {
        if batch.is_empty() {
            return Err(Error::Domain("empty batch".into()));
        }
        let outputs = self.spec.task.outputs();
        for (i, s) in batch.iter().enumerate() {
            self.check_input(&s.features)?;
            Self::check_attribute(s.attribute)?;
            let ok = match (&self.spec.task, &s.label) {
                (TaskMode::Multiclass { classes }, Label::Class(y)) => y < classes,
                (TaskMode::Multilabel { .. } | TaskMode::Binary, Label::Multi(bits)) => {
                    bits.len() == outputs && bits.iter().all(|&b| b <= 1)
                }
                _ => false,
            };
            if !ok {
                return Err(Error::Data(format!(
                    "batch sample {i}: label {:?} does not match task {:?}",
                    s.label, self.spec.task
                )));
            }
        }
        Ok(())
    }

    fn finish(&self, data_loss: f64, mut grads: Vec<f64>, cfg: &LossConfig) -> Result<LossOutput> {
        let values = self.params.values();
        let decay = 0.5 * cfg.weight_decay * dot(values, values);
        if cfg.weight_decay != 0.0 {
            for (g, w) in grads.iter_mut().zip(values) {
                *g += cfg.weight_decay * w;
            }
        }
        let loss = data_loss + decay;
        if !loss.is_finite() || grads.iter().any(|g| !g.is_finite()) {
            let bad = self.non_finite_tensors();
            let max_abs = values.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
            return Err(Error::Numeric(format!(
                "non-finite loss {loss} (max |θ| = {max_abs:e}, non-finite tensors: {bad:?})"
            )));
        }
        Ok(LossOutput {
            loss,
            data_loss,
            grads,
        })
    }

    /// Loss and gradients for whichever head this model carries.
    pub fn loss(&self, batch: &[&Sample], cfg: &LossConfig) -> Result<LossOutput> {
        match (&self.head, self.spec.task) {
            (Head::Baseline(_), _) => self.loss_baseline(batch, cfg),
            (Head::Protected { .. }, TaskMode::Multiclass { .. }) => {
                self.loss_multiclass(batch, cfg)
            }
            (Head::Protected { .. }, _) => self.loss_multilabel(batch, cfg),
        }
    }

    /// `-(1/N) Σ_i log p(y_i | x_i, v_i)`, each sample routed to its own
    /// attribute's head (or to both with weight 0.5 under [`HeadUpdate::Both`]).
    pub fn loss_multiclass(&self, batch: &[&Sample], cfg: &LossConfig) -> Result<LossOutput> {
        let (proj, classes) = self.protected_parts()?;
        if !self.spec.task.is_multiclass() {
            return Err(Error::Unsupported(
                "multi-class loss on a multi-label model".into(),
            ));
        }
        self.check_batch(batch)?;
        let n = batch.len() as f64;
        let mut grads = vec![0.0; self.params.len()];
        let mut total = 0.0;
        for s in batch {
            let y = s.label.class().unwrap();
            let acts = self.encode_cached(&s.features);
            let h = acts.last().unwrap();
            let mut dh = vec![0.0; h.len()];
            for (v, weight) in Self::heads_for(s.attribute, cfg.head_update) {
                let z = proj[v].forward(&self.params, h);
                let mut dz = vec![0.0; z.len()];
                let nll = self.cosine_nll(
                    classes[v][0],
                    &z,
                    y,
                    cfg.temperature,
                    weight / n,
                    &mut grads,
                    &mut dz,
                );
                total += weight * nll;
                let dhv = proj[v].backward(&self.params, h, &dz, &mut grads);
                dh.iter_mut().zip(dhv).for_each(|(a, b)| *a += b);
            }
            self.backward_encoder(&acts, dh, &mut grads);
        }
        self.finish(total / n, grads, cfg)
    }

    /// `-(1/(N·C)) Σ_i Σ_c log p(y_i^c | x_i, v_i)`; binary is `C = 1`.
    pub fn loss_multilabel(&self, batch: &[&Sample], cfg: &LossConfig) -> Result<LossOutput> {
        let (proj, classes) = self.protected_parts()?;
        if self.spec.task.is_multiclass() {
            return Err(Error::Unsupported(
                "multi-label loss on a multi-class model".into(),
            ));
        }
        self.check_batch(batch)?;
        let labels = self.spec.task.outputs();
        let norm_factor = (batch.len() * labels) as f64;
        let mut grads = vec![0.0; self.params.len()];
        let mut total = 0.0;
        for s in batch {
            let bits = s.label.bits().unwrap();
            let acts = self.encode_cached(&s.features);
            let h = acts.last().unwrap();
            let mut dh = vec![0.0; h.len()];
            for (v, weight) in Self::heads_for(s.attribute, cfg.head_update) {
                let z = proj[v].forward(&self.params, h);
                let mut dz = vec![0.0; z.len()];
                for (c, &bit) in bits.iter().enumerate() {
                    let nll = self.cosine_nll(
                        classes[v][c],
                        &z,
                        bit as usize,
                        cfg.temperature,
                        weight / norm_factor,
                        &mut grads,
                        &mut dz,
                    );
                    total += weight * nll;
                }
                let dhv = proj[v].backward(&self.params, h, &dz, &mut grads);
                dh.iter_mut().zip(dhv).for_each(|(a, b)| *a += b);
            }
            self.backward_encoder(&acts, dh, &mut grads);
        }
        self.finish(total / norm_factor, grads, cfg)
    }

    /// Attribute-blind one-hot softmax cross-entropy (multi-class) or mean
    /// sigmoid binary cross-entropy (multi-label / binary).
    pub fn loss_baseline(&self, batch: &[&Sample], cfg: &LossConfig) -> Result<LossOutput> {
        let Head::Baseline(head) = &self.head else {
            return Err(Error::Unsupported(
                "baseline loss on a protected model".into(),
            ));
        };
        self.check_batch(batch)?;
        let outputs = self.spec.task.outputs();
        let norm_factor = match self.spec.task {
            TaskMode::Multiclass { .. } => batch.len() as f64,
            _ => (batch.len() * outputs) as f64,
        };
        let mut grads = vec![0.0; self.params.len()];
        let mut total = 0.0;
        for s in batch {
            let acts = self.encode_cached(&s.features);
            let h = acts.last().unwrap();
            let logits = head.forward(&self.params, h);
            let dlogits: Vec<f64> = match &s.label {
                Label::Class(y) => {
                    let (log_p, probs) = log_softmax_at(&logits, *y);
                    total -= log_p;
                    probs
                        .iter()
                        .enumerate()
                        .map(|(k, p)| (p - f64::from(u8::from(k == *y))) / norm_factor)
                        .collect()
                }
                Label::Multi(bits) => logits
                    .iter()
                    .zip(bits)
                    .map(|(&l, &b)| {
                        total += if b == 1 { softplus(-l) } else { softplus(l) };
                        (super::sigmoid(l) - f64::from(b)) / norm_factor
                    })
                    .collect(),
            };
            let dh = head.backward(&self.params, h, &dlogits, &mut grads);
            self.backward_encoder(&acts, dh, &mut grads);
        }
        self.finish(total / norm_factor, grads, cfg)
    }
}
