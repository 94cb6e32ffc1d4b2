//! MLP encoder with either a one-hot softmax head or protected cosine
//! label-embedding heads, one per protected attribute value.

mod checkpoint;
mod loss;
mod params;
mod train;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{argmax, cosine_similarity, norm, SeededRng};

pub use checkpoint::{load_checkpoint, save_checkpoint, CHECKPOINT_FORMAT};
pub use loss::{LossConfig, LossOutput};
pub use params::{Dense, Params, TensorId, TensorInfo};
pub use train::{train, EpochRecord, HeadUpdate, LrSchedule, TrainConfig, TrainOutcome};

/// Layer widths `D → hidden… → H`. Hidden layers use ReLU, the output is linear.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncoderSpec {
    pub widths: Vec<usize>,
}

impl EncoderSpec {
    pub fn mlp(input: usize, hidden: &[usize], features: usize) -> Self {
        let mut widths = vec![input];
        widths.extend_from_slice(hidden);
        widths.push(features);
        EncoderSpec { widths }
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    pub fn feature_dim(&self) -> usize {
        *self.widths.last().unwrap()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskMode {
    Multiclass {
        classes: usize,
    },
    Multilabel {
        labels: usize,
    },
    /// Multi-label with a single attribute label.
    Binary,
}

impl TaskMode {
    /// Number of outputs: classes, or attribute labels.
    pub fn outputs(&self) -> usize {
        match *self {
            TaskMode::Multiclass { classes } => classes,
            TaskMode::Multilabel { labels } => labels,
            TaskMode::Binary => 1,
        }
    }

    pub fn is_multiclass(&self) -> bool {
        matches!(self, TaskMode::Multiclass { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Attribute-blind linear softmax (sigmoid for multi-label) head.
    Baseline,
    /// One projection head and one set of class embeddings per attribute value.
    Protected,
    /// Both attribute losses share a single head (ablation).
    ProtectedTied,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub encoder: EncoderSpec,
    pub task: TaskMode,
    pub variant: Variant,
    /// Embedding size `M` of the protected heads.
    pub embed_dim: usize,
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        if self.encoder.widths.len() < 2 || self.encoder.widths.contains(&0) {
            return Err(Error::config(
                "/encoder/widths",
                "encoder needs at least one layer and positive widths",
            ));
        }
        if self.task.outputs() == 0 {
            return Err(Error::config("/task", "task needs at least one output"));
        }
        if let TaskMode::Multiclass { classes: 1 } = self.task {
            return Err(Error::config(
                "/task",
                "multi-class task needs at least two classes",
            ));
        }
        if self.variant != Variant::Baseline && self.embed_dim == 0 {
            return Err(Error::config(
                "/embed_dim",
                "embedding size must be positive",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Head {
    Baseline(Dense),
    /// `classes[v]` holds `W^v` (one `K×M` tensor) for multi-class, or the
    /// `C` tensors `W^{v,c}` (each `2×M`) for multi-label.
    Protected {
        proj: [Dense; 2],
        classes: [Vec<TensorId>; 2],
    },
}

/// Trainable classifier: encoder `f`, head(s), and SGD momentum buffers.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierModel {
    spec: ModelSpec,
    params: Params,
    encoder: Vec<Dense>,
    head: Head,
    velocity: Vec<f64>,
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / sum).collect()
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl ClassifierModel {
    /// Allocates and initializes a model: Glorot-uniform weights, zero biases.
    pub fn new(spec: ModelSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let mut params = Params::default();
        let widths = &spec.encoder.widths;
        let encoder: Vec<Dense> = widths
            .windows(2)
            .enumerate()
            .map(|(l, w)| Dense::new(&mut params, &format!("encoder.{l}"), w[0], w[1]))
            .collect();
        let h = spec.encoder.feature_dim();
        let m = spec.embed_dim;
        let outputs = spec.task.outputs();
        let head = match spec.variant {
            Variant::Baseline => Head::Baseline(Dense::new(&mut params, "head", h, outputs)),
            Variant::Protected | Variant::ProtectedTied => {
                let heads = if spec.variant == Variant::Protected {
                    2
                } else {
                    1
                };
                let mut proj = Vec::new();
                let mut classes = Vec::new();
                for v in 0..heads {
                    proj.push(Dense::new(&mut params, &format!("proj.{v}"), h, m));
                    classes.push(match spec.task {
                        TaskMode::Multiclass { classes } => {
                            vec![params.add(format!("classes.{v}"), classes, m)]
                        }
                        _ => (0..outputs)
                            .map(|c| params.add(format!("classes.{v}.{c}"), 2, m))
                            .collect(),
                    });
                }
                if heads == 1 {
                    proj.push(proj[0]);
                    classes.push(classes[0].clone());
                }
                let classes: [Vec<TensorId>; 2] = [classes[0].clone(), classes[1].clone()];
                Head::Protected {
                    proj: [proj[0], proj[1]],
                    classes,
                }
            }
        };

        let mut rng = SeededRng::with_stream(seed, 7);
        for id in 0..params.tensors().len() {
            let id = TensorId(id);
            if !params.info(id).name.ends_with(".bias") {
                params.init_glorot(id, &mut rng);
            }
        }
        let velocity = vec![0.0; params.len()];
        Ok(ClassifierModel {
            spec,
            params,
            encoder,
            head,
            velocity,
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    /// Direct parameter access, e.g. for gradient checks or hand-built weights.
    pub fn params_mut(&mut self) -> &mut Params {
        &mut self.params
    }

    pub fn tensor(&self, name: &str) -> Option<&[f64]> {
        self.params.find(name).map(|id| self.params.get(id))
    }

    pub fn tensor_mut(&mut self, name: &str) -> Option<&mut [f64]> {
        let id = self.params.find(name)?;
        Some(self.params.get_mut(id))
    }

    pub fn is_protected(&self) -> bool {
        matches!(self.head, Head::Protected { .. })
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.spec.encoder.input_dim() {
            return Err(Error::Shape(format!(
                "input has {} features, encoder expects {}",
                x.len(),
                self.spec.encoder.input_dim()
            )));
        }
        Ok(())
    }

    /// Runs the encoder keeping every layer's output (`acts[0]` is the input).
    fn encode_cached(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = Vec::with_capacity(self.encoder.len() + 1);
        acts.push(x.to_vec());
        let last = self.encoder.len() - 1;
        for (l, layer) in self.encoder.iter().enumerate() {
            let mut out = layer.forward(&self.params, acts.last().unwrap());
            if l < last {
                out.iter_mut().for_each(|a| *a = a.max(0.0));
            }
            acts.push(out);
        }
        acts
    }

    /// `h = f(x)`.
    pub fn forward_features(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        Ok(self.encode_cached(x).pop().unwrap())
    }

    fn protected_parts(&self) -> Result<(&[Dense; 2], &[Vec<TensorId>; 2])> {
        match &self.head {
            Head::Protected { proj, classes } => Ok((proj, classes)),
            Head::Baseline(_) => Err(Error::Unsupported(
                "baseline model has no protected heads".into(),
            )),
        }
    }

    fn check_attribute(v: u8) -> Result<usize> {
        if v > 1 {
            return Err(Error::Domain(format!("attribute {v} is not binary")));
        }
        Ok(v as usize)
    }

    /// `z^v = g^v(h)`.
    pub fn project(&self, h: &[f64], v: u8) -> Result<Vec<f64>> {
        let (proj, _) = self.protected_parts()?;
        let v = Self::check_attribute(v)?;
        if h.len() != proj[v].inputs {
            return Err(Error::Shape(format!(
                "feature vector has {} entries, head expects {}",
                h.len(),
                proj[v].inputs
            )));
        }
        Ok(proj[v].forward(&self.params, h))
    }

    fn cosine_probs(&self, rows: TensorId, z: &[f64], tau: f64) -> Result<Vec<f64>> {
        if !(tau > 0.0) {
            return Err(Error::Domain("temperature must be positive".into()));
        }
        let info = self.params.info(rows);
        if z.len() != info.cols {
            return Err(Error::Shape(format!(
                "embedding has {} entries, class weights expect {}",
                z.len(),
                info.cols
            )));
        }
        if norm(z) == 0.0 {
            return Err(Error::Domain("embedding has zero norm".into()));
        }
        let w = self.params.get(rows);
        let logits = (0..info.rows)
            .map(|r| {
                let row = &w[r * info.cols..(r + 1) * info.cols];
                cosine_similarity(row, z).map(|s| s / tau).map_err(|_| {
                    Error::Domain(format!("weight row {r} of `{}` has zero norm", info.name))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(softmax(&logits))
    }

    /// `p(y | z^v, v)`: softmax of `sim(W^v_y, z)/τ` over classes.
    pub fn probs_multiclass(&self, z: &[f64], v: u8, tau: f64) -> Result<Vec<f64>> {
        let (_, classes) = self.protected_parts()?;
        if !self.spec.task.is_multiclass() {
            return Err(Error::Unsupported("model is not multi-class".into()));
        }
        self.cosine_probs(classes[Self::check_attribute(v)?][0], z, tau)
    }

    /// Two-way distribution `(absent, present)` for attribute label `c`.
    pub fn probs_multilabel(&self, z: &[f64], v: u8, c: usize, tau: f64) -> Result<[f64; 2]> {
        let (_, classes) = self.protected_parts()?;
        if self.spec.task.is_multiclass() {
            return Err(Error::Unsupported("model is not multi-label".into()));
        }
        let tensors = &classes[Self::check_attribute(v)?];
        let id = *tensors
            .get(c)
            .ok_or_else(|| Error::Domain(format!("attribute label {c} out of range")))?;
        let p = self.cosine_probs(id, z, tau)?;
        Ok([p[0], p[1]])
    }

    /// Summed per-head class distribution `Σ_v p(y | x, v)` from features `h`.
    pub fn ensemble_distribution(&self, h: &[f64], tau: f64) -> Result<Vec<f64>> {
        let mut total = vec![0.0; self.spec.task.outputs()];
        for v in 0..2 {
            let z = self.project(h, v)?;
            let p = self.probs_multiclass(&z, v, tau)?;
            total.iter_mut().zip(&p).for_each(|(t, p)| *t += p);
        }
        Ok(total)
    }

    /// `argmax_y Σ_v p(y | x, v)`, lowest index on ties.
    pub fn ensemble_predict_multiclass(&self, x: &[f64], tau: f64) -> Result<usize> {
        self.protected_parts()?;
        let h = self.forward_features(x)?;
        Ok(argmax(&self.ensemble_distribution(&h, tau)?))
    }

    /// `ŷ^c = Σ_v p(y^c = 1 | x, v)` per attribute label, each in `[0, 2]`.
    pub fn ensemble_score_multilabel(&self, x: &[f64], tau: f64) -> Result<Vec<f64>> {
        self.protected_parts()?;
        let h = self.forward_features(x)?;
        self.ensemble_score_from_features(&h, tau)
    }

    fn ensemble_score_from_features(&self, h: &[f64], tau: f64) -> Result<Vec<f64>> {
        let mut scores = vec![0.0; self.spec.task.outputs()];
        for v in 0..2 {
            let z = self.project(h, v)?;
            for (c, s) in scores.iter_mut().enumerate() {
                *s += self.probs_multilabel(&z, v, c, tau)?[1];
            }
        }
        Ok(scores)
    }

    /// Baseline logits from features.
    fn baseline_logits(&self, h: &[f64]) -> Result<Vec<f64>> {
        match &self.head {
            Head::Baseline(dense) => Ok(dense.forward(&self.params, h)),
            Head::Protected { .. } => Err(Error::Unsupported(
                "protected model has no linear head".into(),
            )),
        }
    }

    /// Predicted class from features `h`, for any variant. Attribute labels
    /// are never consulted.
    pub fn predict_class_from_features(&self, h: &[f64], tau: f64) -> Result<usize> {
        if !self.spec.task.is_multiclass() {
            return Err(Error::Unsupported(
                "class prediction needs a multi-class model".into(),
            ));
        }
        if self.is_protected() {
            Ok(argmax(&self.ensemble_distribution(h, tau)?))
        } else {
            Ok(argmax(&self.baseline_logits(h)?))
        }
    }

    pub fn predict_class(&self, x: &[f64], tau: f64) -> Result<usize> {
        let h = self.forward_features(x)?;
        self.predict_class_from_features(&h, tau)
    }

    /// Per-label presence probability in `[0, 1]` from features `h`: the
    /// sigmoid output for the baseline, the mean head probability for
    /// protected models.
    pub fn label_scores_from_features(&self, h: &[f64], tau: f64) -> Result<Vec<f64>> {
        if self.spec.task.is_multiclass() {
            return Err(Error::Unsupported(
                "label scores need a multi-label model".into(),
            ));
        }
        if self.is_protected() {
            Ok(self
                .ensemble_score_from_features(h, tau)?
                .into_iter()
                .map(|s| s / 2.0)
                .collect())
        } else {
            Ok(self.baseline_logits(h)?.into_iter().map(sigmoid).collect())
        }
    }

    pub fn label_scores(&self, x: &[f64], tau: f64) -> Result<Vec<f64>> {
        let h = self.forward_features(x)?;
        self.label_scores_from_features(&h, tau)
    }

    pub(crate) fn velocity_mut(&mut self) -> (&mut Params, &mut Vec<f64>) {
        (&mut self.params, &mut self.velocity)
    }

    /// Names of tensors holding non-finite values.
    pub(crate) fn non_finite_tensors(&self) -> Vec<String> {
        self.params
            .tensors()
            .iter()
            .filter(|t| {
                self.params.values()[t.range()]
                    .iter()
                    .any(|x| !x.is_finite())
            })
            .map(|t| t.name.clone())
            .collect()
    }
}

/// `argmax_y Σ_v p_v(y)` over per-head distributions; ties go to the lowest index.
pub fn ensemble_argmax(distributions: &[Vec<f64>]) -> usize {
    let k = distributions.first().map_or(0, Vec::len);
    let summed: Vec<f64> = (0..k)
        .map(|y| distributions.iter().map(|d| d[y]).sum())
        .collect();
    argmax(&summed)
}

/// Hard multi-label decision: the summed ensemble score reaches `2·threshold`,
/// i.e. the mean head probability reaches `threshold` (default 0.5).
pub fn ensemble_positive(score_sum: f64, threshold: f64) -> bool {
    score_sum >= 2.0 * threshold
}

#[cfg(test)]
mod tests;
