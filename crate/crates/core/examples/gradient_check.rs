//! Compares analytic gradients with central finite differences for each loss.
//!
//! ```bash
//! cargo run --example gradient_check
//! ```

use fairlens::datagen::{Label, Sample};
use fairlens::model::{
    ClassifierModel, EncoderSpec, HeadUpdate, LossConfig, ModelSpec, TaskMode, Variant,
};
use fairlens::numeric::SeededRng;

fn main() -> fairlens::Result<()> {
    let cfg = LossConfig {
        temperature: 0.5,
        weight_decay: 1e-3,
        head_update: HeadUpdate::Matched,
    };
    let cases = [
        (
            "baseline",
            TaskMode::Multiclass { classes: 3 },
            Variant::Baseline,
        ),
        (
            "protected multi-class",
            TaskMode::Multiclass { classes: 3 },
            Variant::Protected,
        ),
        (
            "protected multi-label",
            TaskMode::Multilabel { labels: 3 },
            Variant::Protected,
        ),
        ("protected binary", TaskMode::Binary, Variant::Protected),
    ];
    let mut rng = SeededRng::new(1);
    for (name, task, variant) in cases {
        let spec = ModelSpec {
            encoder: EncoderSpec::mlp(4, &[6], 4),
            task,
            variant,
            embed_dim: 4,
        };
        let mut model = ClassifierModel::new(spec, 3)?;
        // Nonzero biases keep embeddings away from the origin.
        for t in model.params().tensors().to_vec() {
            if t.name.ends_with("bias") {
                for b in model.tensor_mut(&t.name).unwrap() {
                    *b = rng.uniform_range(0.5, 1.0);
                }
            }
        }
        let batch: Vec<Sample> = (0..8)
            .map(|i| Sample {
                features: rng.normal_vec(4),
                label: match task {
                    TaskMode::Multiclass { classes } => Label::Class(rng.below(classes)),
                    _ => Label::Multi((0..task.outputs()).map(|_| rng.below(2) as u8).collect()),
                },
                attribute: (i % 2) as u8,
            })
            .collect();
        let refs: Vec<&Sample> = batch.iter().collect();
        let analytic = model.loss(&refs, &cfg)?.grads;
        let step = 1e-5;
        let mut worst: f64 = 0.0;
        for (i, &a) in analytic.iter().enumerate() {
            let orig = model.params().values()[i];
            model.params_mut().values_mut()[i] = orig + step;
            let plus = model.loss(&refs, &cfg)?.loss;
            model.params_mut().values_mut()[i] = orig - step;
            let minus = model.loss(&refs, &cfg)?.loss;
            model.params_mut().values_mut()[i] = orig;
            let numeric = (plus - minus) / (2.0 * step);
            let scale = a.abs().max(numeric.abs()).max(1e-2);
            worst = worst.max((a - numeric).abs() / scale);
        }
        println!(
            "{name:<24} {} params, worst relative error {worst:.2e}",
            analytic.len()
        );
    }
    Ok(())
}
