use super::*;
use crate::datagen::{Label, Sample};
use crate::numeric::SeededRng;

fn spec(task: TaskMode, variant: Variant) -> ModelSpec {
    ModelSpec {
        encoder: EncoderSpec::mlp(4, &[5], 3),
        task,
        variant,
        embed_dim: 4,
    }
}

fn cfg(update: HeadUpdate, decay: f64) -> LossConfig {
    LossConfig {
        temperature: 0.5,
        weight_decay: decay,
        head_update: update,
    }
}

/// Nonzero biases keep embeddings away from the origin, where the cosine is not smooth.
fn jittered(task: TaskMode, variant: Variant, seed: u64) -> ClassifierModel {
    let mut m = ClassifierModel::new(spec(task, variant), seed).unwrap();
    let mut rng = SeededRng::new(seed + 1000);
    for t in m.params().tensors().to_vec() {
        if t.name.ends_with("bias") {
            for b in m.tensor_mut(&t.name).unwrap() {
                *b = rng.uniform_range(0.5, 1.0);
            }
        }
    }
    m
}

fn random_batch(task: TaskMode, n: usize, dim: usize, seed: u64) -> Vec<Sample> {
    let mut rng = SeededRng::new(seed);
    (0..n)
        .map(|i| Sample {
            features: rng.normal_vec(dim),
            label: match task {
                TaskMode::Multiclass { classes } => Label::Class(rng.below(classes)),
                _ => Label::Multi((0..task.outputs()).map(|_| rng.below(2) as u8).collect()),
            },
            attribute: (i % 2) as u8,
        })
        .collect()
}

/// Central finite differences of `loss` over every parameter.
fn numeric_gradient(model: &ClassifierModel, batch: &[&Sample], cfg: &LossConfig) -> Vec<f64> {
    let step = 1e-5;
    let mut probe = model.clone();
    (0..model.params().len())
        .map(|i| {
            let orig = probe.params().values()[i];
            probe.params_mut().values_mut()[i] = orig + step;
            let plus = probe.loss(batch, cfg).unwrap().loss;
            probe.params_mut().values_mut()[i] = orig - step;
            let minus = probe.loss(batch, cfg).unwrap().loss;
            probe.params_mut().values_mut()[i] = orig;
            (plus - minus) / (2.0 * step)
        })
        .collect()
}

fn assert_gradients_match(model: &ClassifierModel, batch: &[Sample], cfg: &LossConfig) {
    let refs: Vec<&Sample> = batch.iter().collect();
    let analytic = model.loss(&refs, cfg).unwrap().grads;
    let numeric = numeric_gradient(model, &refs, cfg);
    for (i, (a, n)) in analytic.iter().zip(&numeric).enumerate() {
        let tol = (1e-4 * a.abs().max(n.abs())).max(1e-6);
        assert!((a - n).abs() <= tol, "param {i}: analytic {a} numeric {n}");
    }
}

#[test]
fn gradients_match_finite_differences() {
    let cases = [
        (
            TaskMode::Multiclass { classes: 3 },
            Variant::Baseline,
            HeadUpdate::Matched,
        ),
        (
            TaskMode::Multiclass { classes: 3 },
            Variant::Protected,
            HeadUpdate::Matched,
        ),
        (
            TaskMode::Multiclass { classes: 3 },
            Variant::Protected,
            HeadUpdate::Both,
        ),
        (
            TaskMode::Multiclass { classes: 3 },
            Variant::ProtectedTied,
            HeadUpdate::Matched,
        ),
        (
            TaskMode::Multilabel { labels: 3 },
            Variant::Protected,
            HeadUpdate::Matched,
        ),
        (
            TaskMode::Multilabel { labels: 2 },
            Variant::Baseline,
            HeadUpdate::Matched,
        ),
        (TaskMode::Binary, Variant::Protected, HeadUpdate::Both),
        (TaskMode::Binary, Variant::Baseline, HeadUpdate::Matched),
    ];
    for (i, (task, variant, update)) in cases.into_iter().enumerate() {
        let model = jittered(task, variant, i as u64);
        let batch = random_batch(task, 8, 4, 100 + i as u64);
        assert_gradients_match(&model, &batch, &cfg(update, 1e-3));
    }
}

#[test]
fn forward_identity_layer() {
    let s = ModelSpec {
        encoder: EncoderSpec { widths: vec![3, 3] },
        task: TaskMode::Multiclass { classes: 2 },
        variant: Variant::Baseline,
        embed_dim: 0,
    };
    let mut m = ClassifierModel::new(s, 1).unwrap();
    let w = m.tensor_mut("encoder.0.weight").unwrap();
    w.fill(0.0);
    for i in 0..3 {
        w[i * 3 + i] = 1.0;
    }
    assert_eq!(
        m.forward_features(&[1.0, -2.0, 3.0]).unwrap(),
        vec![1.0, -2.0, 3.0]
    );

    m.tensor_mut("encoder.0.weight").unwrap().fill(0.0);
    m.tensor_mut("encoder.0.bias")
        .unwrap()
        .copy_from_slice(&[0.5, 0.0, -1.0]);
    assert_eq!(
        m.forward_features(&[9.0, 9.0, 9.0]).unwrap(),
        vec![0.5, 0.0, -1.0]
    );
    assert!(matches!(m.forward_features(&[1.0]), Err(Error::Shape(_))));
}

#[test]
fn forward_is_deterministic() {
    let s = spec(TaskMode::Multiclass { classes: 3 }, Variant::Protected);
    let a = ClassifierModel::new(s.clone(), 9).unwrap();
    let b = ClassifierModel::new(s, 9).unwrap();
    let x = [0.3, -1.0, 2.0, 0.1];
    let ha = a.forward_features(&x).unwrap();
    let hb = b.forward_features(&x).unwrap();
    assert_eq!(
        ha.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
        hb.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
    );
}

#[test]
fn project_uses_only_its_head() {
    let mut m = ClassifierModel::new(
        spec(TaskMode::Multiclass { classes: 3 }, Variant::Protected),
        2,
    )
    .unwrap();
    let h = [0.5, -0.25, 1.0];
    let z0 = m.project(&h, 0).unwrap();
    let z1 = m.project(&h, 1).unwrap();
    m.tensor_mut("proj.1.weight")
        .unwrap()
        .iter_mut()
        .for_each(|w| *w += 0.3);
    assert_eq!(m.project(&h, 0).unwrap(), z0);
    assert_ne!(m.project(&h, 1).unwrap(), z1);

    let baseline = ClassifierModel::new(
        spec(TaskMode::Multiclass { classes: 3 }, Variant::Baseline),
        2,
    )
    .unwrap();
    assert!(matches!(
        baseline.project(&h, 0),
        Err(Error::Unsupported(_))
    ));
}

#[test]
fn identity_projection() {
    let s = ModelSpec {
        encoder: EncoderSpec::mlp(3, &[], 3),
        task: TaskMode::Multiclass { classes: 2 },
        variant: Variant::Protected,
        embed_dim: 3,
    };
    let mut m = ClassifierModel::new(s, 0).unwrap();
    let w = m.tensor_mut("proj.0.weight").unwrap();
    w.fill(0.0);
    for i in 0..3 {
        w[i * 3 + i] = 1.0;
    }
    assert_eq!(m.project(&[1.0, 2.0, 3.0], 0).unwrap(), vec![1.0, 2.0, 3.0]);
}

fn two_class_protected(rows: [[f64; 2]; 2]) -> ClassifierModel {
    let s = ModelSpec {
        encoder: EncoderSpec::mlp(2, &[], 2),
        task: TaskMode::Multiclass { classes: 2 },
        variant: Variant::Protected,
        embed_dim: 2,
    };
    let mut m = ClassifierModel::new(s, 0).unwrap();
    m.tensor_mut("classes.0")
        .unwrap()
        .copy_from_slice(&[rows[0][0], rows[0][1], rows[1][0], rows[1][1]]);
    m
}

#[test]
fn multiclass_probabilities() {
    let m = two_class_protected([[1.0, 0.0], [0.0, 1.0]]);
    let p = m.probs_multiclass(&[1.0, 0.0], 0, 0.1).unwrap();
    let expected = 10f64.exp() / (10f64.exp() + 1.0);
    assert!((p[0] - expected).abs() < 1e-15);
    assert!((p[0] - 0.9999546).abs() < 1e-7);
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);

    let scaled = m.probs_multiclass(&[5.0, 0.0], 0, 0.1).unwrap();
    assert!((scaled[0] - p[0]).abs() < 1e-12);

    let same = two_class_protected([[0.3, 0.4], [0.3, 0.4]]);
    assert_eq!(
        same.probs_multiclass(&[1.0, 2.0], 0, 0.1).unwrap(),
        vec![0.5, 0.5]
    );

    assert!(matches!(
        m.probs_multiclass(&[0.0, 0.0], 0, 0.1),
        Err(Error::Domain(_))
    ));
    let zero_row = two_class_protected([[0.0, 0.0], [1.0, 0.0]]);
    assert!(matches!(
        zero_row.probs_multiclass(&[1.0, 0.0], 0, 0.1),
        Err(Error::Domain(_))
    ));
}

#[test]
fn multilabel_probabilities() {
    let s = ModelSpec {
        encoder: EncoderSpec::mlp(2, &[], 2),
        task: TaskMode::Multilabel { labels: 2 },
        variant: Variant::Protected,
        embed_dim: 2,
    };
    let mut m = ClassifierModel::new(s, 0).unwrap();
    m.tensor_mut("classes.0.0")
        .unwrap()
        .copy_from_slice(&[-1.0, 0.0, 1.0, 0.0]);
    let p = m.probs_multilabel(&[1.0, 0.0], 0, 0, 1.0).unwrap();
    let e = std::f64::consts::E;
    assert!((p[1] - e / (e + 1.0 / e)).abs() < 1e-15);
    assert!((p[0] + p[1] - 1.0).abs() < 1e-12);

    let other = m.probs_multilabel(&[1.0, 0.0], 0, 1, 1.0).unwrap();
    m.tensor_mut("classes.0.0")
        .unwrap()
        .copy_from_slice(&[2.0, 1.0, 1.0, 3.0]);
    assert_eq!(m.probs_multilabel(&[1.0, 0.0], 0, 1, 1.0).unwrap(), other);

    m.tensor_mut("classes.1.1")
        .unwrap()
        .copy_from_slice(&[1.0, 1.0, 1.0, 1.0]);
    assert_eq!(
        m.probs_multilabel(&[0.2, 0.7], 1, 1, 0.1).unwrap(),
        [0.5, 0.5]
    );
}

#[test]
fn uniform_predictions_give_log_k() {
    for k in [2usize, 3, 5] {
        let task = TaskMode::Multiclass { classes: k };
        let mut m = ClassifierModel::new(spec(task, Variant::Protected), 3).unwrap();
        for v in 0..2 {
            let w = m.tensor_mut(&format!("classes.{v}")).unwrap();
            let first: Vec<f64> = w[..4].to_vec();
            for row in w.chunks_mut(4) {
                row.copy_from_slice(&first);
            }
        }
        let batch = random_batch(task, 6, 4, 1);
        let refs: Vec<&Sample> = batch.iter().collect();
        let out = m.loss(&refs, &cfg(HeadUpdate::Matched, 0.0)).unwrap();
        assert!((out.loss - (k as f64).ln()).abs() < 1e-12);

        let decayed = m.loss(&refs, &cfg(HeadUpdate::Matched, 0.01)).unwrap();
        let norm2: f64 = m.params().values().iter().map(|x| x * x).sum();
        assert!((decayed.loss - (k as f64).ln() - 0.005 * norm2).abs() < 1e-12);

        let mut b = ClassifierModel::new(spec(task, Variant::Baseline), 3).unwrap();
        b.tensor_mut("head.weight").unwrap().fill(0.0);
        let out = b.loss(&refs, &cfg(HeadUpdate::Matched, 0.0)).unwrap();
        assert!((out.loss - (k as f64).ln()).abs() < 1e-12);
    }

    let task = TaskMode::Multilabel { labels: 3 };
    let mut m = ClassifierModel::new(spec(task, Variant::Protected), 3).unwrap();
    for v in 0..2 {
        for c in 0..3 {
            m.tensor_mut(&format!("classes.{v}.{c}"))
                .unwrap()
                .copy_from_slice(&[1.0, 2.0, 3.0, 4.0, 1.0, 2.0, 3.0, 4.0]);
        }
    }
    let batch = random_batch(task, 5, 4, 2);
    let refs: Vec<&Sample> = batch.iter().collect();
    let out = m.loss(&refs, &cfg(HeadUpdate::Matched, 0.0)).unwrap();
    assert!((out.loss - 2f64.ln()).abs() < 1e-12);
}

#[test]
fn confident_predictions_leave_only_decay() {
    let task = TaskMode::Multiclass { classes: 3 };
    let mut m = ClassifierModel::new(spec(task, Variant::Baseline), 4).unwrap();
    m.tensor_mut("head.weight").unwrap().fill(0.0);
    m.tensor_mut("head.bias")
        .unwrap()
        .copy_from_slice(&[60.0, 0.0, 0.0]);
    let batch: Vec<Sample> = random_batch(task, 4, 4, 3)
        .into_iter()
        .map(|s| Sample {
            label: Label::Class(0),
            ..s
        })
        .collect();
    let refs: Vec<&Sample> = batch.iter().collect();
    let out = m.loss(&refs, &cfg(HeadUpdate::Matched, 1e-3)).unwrap();
    assert!(out.data_loss < 1e-20);
    let norm2: f64 = m.params().values().iter().map(|x| x * x).sum();
    assert!((out.loss - 0.5e-3 * norm2).abs() < 1e-12);
}

#[test]
fn matched_updates_isolate_heads() {
    for task in [
        TaskMode::Multiclass { classes: 3 },
        TaskMode::Multilabel { labels: 2 },
    ] {
        let m = ClassifierModel::new(spec(task, Variant::Protected), 5).unwrap();
        let batch: Vec<Sample> = random_batch(task, 6, 4, 4)
            .into_iter()
            .map(|s| Sample { attribute: 1, ..s })
            .collect();
        let refs: Vec<&Sample> = batch.iter().collect();
        let out = m.loss(&refs, &cfg(HeadUpdate::Matched, 0.0)).unwrap();
        for t in m.params().tensors() {
            let g = &out.grads[t.range()];
            if t.name.starts_with("proj.0") || t.name.starts_with("classes.0") {
                assert!(g.iter().all(|&x| x == 0.0), "{} has gradient", t.name);
            } else {
                assert!(g.iter().any(|&x| x != 0.0), "{} has no gradient", t.name);
            }
        }
    }
}

#[test]
fn tied_head_equals_protected_with_shared_parameters() {
    for task in [
        TaskMode::Multiclass { classes: 3 },
        TaskMode::Multilabel { labels: 2 },
    ] {
        let tied = ClassifierModel::new(spec(task, Variant::ProtectedTied), 6).unwrap();
        let mut untied = ClassifierModel::new(spec(task, Variant::Protected), 6).unwrap();
        for t in untied.params().tensors().to_vec() {
            let mut parts: Vec<&str> = t.name.split('.').collect();
            if parts[0] != "encoder" {
                parts[1] = "0";
            }
            let source = parts.join(".");
            let values = tied.tensor(&source).unwrap().to_vec();
            untied.tensor_mut(&t.name).unwrap().copy_from_slice(&values);
        }
        let batch = random_batch(task, 8, 4, 5);
        let refs: Vec<&Sample> = batch.iter().collect();
        let c = cfg(HeadUpdate::Matched, 0.0);
        assert_eq!(
            tied.loss(&refs, &c).unwrap().loss,
            untied.loss(&refs, &c).unwrap().loss
        );
    }
}

#[test]
fn binary_reduces_to_two_class_multiclass() {
    let bin = ClassifierModel::new(spec(TaskMode::Binary, Variant::Protected), 7).unwrap();
    let mut mc = ClassifierModel::new(
        spec(TaskMode::Multiclass { classes: 2 }, Variant::Protected),
        7,
    )
    .unwrap();
    for t in mc.params().tensors().to_vec() {
        let source = match t.name.as_str() {
            "classes.0" => "classes.0.0".to_string(),
            "classes.1" => "classes.1.0".to_string(),
            other => other.to_string(),
        };
        let values = bin.tensor(&source).unwrap().to_vec();
        mc.tensor_mut(&t.name).unwrap().copy_from_slice(&values);
    }
    let bin_batch = random_batch(TaskMode::Binary, 8, 4, 8);
    let mc_batch: Vec<Sample> = bin_batch
        .iter()
        .map(|s| Sample {
            label: Label::Class(s.label.bits().unwrap()[0] as usize),
            ..s.clone()
        })
        .collect();
    for update in [HeadUpdate::Matched, HeadUpdate::Both] {
        let c = cfg(update, 0.0);
        let a = bin.loss(&bin_batch.iter().collect::<Vec<_>>(), &c).unwrap();
        let b = mc.loss(&mc_batch.iter().collect::<Vec<_>>(), &c).unwrap();
        assert_eq!(a.loss, b.loss);
    }
}

#[test]
fn loss_errors() {
    let task = TaskMode::Multiclass { classes: 3 };
    let m = ClassifierModel::new(spec(task, Variant::Protected), 1).unwrap();
    assert!(m.loss(&[], &cfg(HeadUpdate::Matched, 0.0)).is_err());
    let b = ClassifierModel::new(spec(task, Variant::Baseline), 1).unwrap();
    let batch = random_batch(task, 2, 4, 1);
    let refs: Vec<&Sample> = batch.iter().collect();
    assert!(matches!(
        b.loss_multiclass(&refs, &cfg(HeadUpdate::Matched, 0.0)),
        Err(Error::Unsupported(_))
    ));
    assert!(matches!(
        m.loss_baseline(&refs, &cfg(HeadUpdate::Matched, 0.0)),
        Err(Error::Unsupported(_))
    ));

    let mut broken = m.clone();
    broken.tensor_mut("encoder.0.weight").unwrap()[0] = f64::NAN;
    let err = broken
        .loss(&refs, &cfg(HeadUpdate::Matched, 0.0))
        .unwrap_err();
    assert!(matches!(err, Error::Numeric(_)));
    assert!(err.to_string().contains("encoder.0.weight"), "{err}");
}

#[test]
fn sgd_and_schedules() {
    let task = TaskMode::Multiclass { classes: 2 };
    let mut m = ClassifierModel::new(spec(task, Variant::Baseline), 1).unwrap();
    let before = m.params().values().to_vec();
    let grads: Vec<f64> = (0..before.len()).map(|i| i as f64 * 0.01).collect();
    let plain = TrainConfig {
        momentum: 0.0,
        lr: 0.5,
        schedule: LrSchedule::Constant,
        ..TrainConfig::default()
    };
    m.sgd_step(&grads, &plain, 0, 0);
    for ((a, b), g) in m.params().values().iter().zip(&before).zip(&grads) {
        assert_eq!(*a, b - 0.5 * g);
    }

    let mut mm = ClassifierModel::new(spec(task, Variant::Baseline), 1).unwrap();
    let mom = TrainConfig {
        momentum: 0.9,
        lr: 1.0,
        schedule: LrSchedule::Constant,
        ..TrainConfig::default()
    };
    mm.sgd_step(&grads, &mom, 0, 0);
    mm.sgd_step(&grads, &mom, 0, 1);
    // buffer after two steps: g + 0.9 g
    for ((a, b), g) in mm.params().values().iter().zip(&before).zip(&grads) {
        assert!((a - (b - g - 1.9 * g)).abs() < 1e-12);
    }

    let step = TrainConfig {
        lr: 0.1,
        schedule: LrSchedule::Step {
            factor: 10.0,
            period: 50,
        },
        ..TrainConfig::default()
    };
    assert_eq!(step.learning_rate(49, 0), 0.1);
    assert!((step.learning_rate(50, 0) - 0.01).abs() < 1e-18);
    let exp = TrainConfig {
        lr: 0.1,
        schedule: LrSchedule::Exponential { decay: 0.999 },
        ..TrainConfig::default()
    };
    for t in [0usize, 1, 10, 1000] {
        assert!((exp.learning_rate(0, t) - 0.1 * 0.999f64.powi(t as i32)).abs() < 1e-15);
    }
}

#[test]
fn ensemble_rules() {
    assert_eq!(ensemble_argmax(&[vec![0.9, 0.1], vec![0.8, 0.2]]), 0);
    assert_eq!(ensemble_argmax(&[vec![0.7, 0.3], vec![0.3, 0.7]]), 0);
    assert_eq!(ensemble_argmax(&[vec![0.2, 0.8], vec![0.4, 0.6]]), 1);
    assert!(ensemble_positive(0.5 + 0.5, 0.5));
    assert!(!ensemble_positive(0.49 + 0.5, 0.5));
    assert!((0.9f64 + 0.7 - 1.6).abs() < 1e-15);
}

#[test]
fn ensemble_matches_explicit_sum() {
    let task = TaskMode::Multiclass { classes: 4 };
    let m = jittered(task, Variant::Protected, 11);
    let mut rng = SeededRng::new(3);
    for _ in 0..200 {
        let x = rng.normal_vec(4);
        let h = m.forward_features(&x).unwrap();
        let p0 = m
            .probs_multiclass(&m.project(&h, 0).unwrap(), 0, 0.1)
            .unwrap();
        let p1 = m
            .probs_multiclass(&m.project(&h, 1).unwrap(), 1, 0.1)
            .unwrap();
        let mut best = 0;
        for y in 1..4 {
            if p0[y] + p1[y] > p0[best] + p1[best] {
                best = y;
            }
        }
        assert_eq!(m.ensemble_predict_multiclass(&x, 0.1).unwrap(), best);

        // a common positive scale on both embeddings leaves the argmax alone
        let s0 = m
            .probs_multiclass(
                &crate::numeric::scale(&m.project(&h, 0).unwrap(), 3.7),
                0,
                0.1,
            )
            .unwrap();
        let s1 = m
            .probs_multiclass(
                &crate::numeric::scale(&m.project(&h, 1).unwrap(), 3.7),
                1,
                0.1,
            )
            .unwrap();
        assert_eq!(ensemble_argmax(&[s0, s1]), best);
    }
    let b = ClassifierModel::new(spec(task, Variant::Baseline), 11).unwrap();
    assert!(matches!(
        b.ensemble_predict_multiclass(&[0.0; 4], 0.1),
        Err(Error::Unsupported(_))
    ));
}

#[test]
fn multilabel_scores_in_range() {
    let task = TaskMode::Multilabel { labels: 3 };
    let m = ClassifierModel::new(spec(task, Variant::Protected), 12).unwrap();
    let mut rng = SeededRng::new(4);
    for _ in 0..50 {
        let x = rng.normal_vec(4);
        let s = m.ensemble_score_multilabel(&x, 0.1).unwrap();
        assert!(s.iter().all(|&v| (0.0..=2.0).contains(&v)));
        let mean = m.label_scores(&x, 0.1).unwrap();
        for (a, b) in s.iter().zip(&mean) {
            assert!((a / 2.0 - b).abs() < 1e-15);
        }
    }
    let mc = ClassifierModel::new(
        spec(TaskMode::Multiclass { classes: 3 }, Variant::Protected),
        1,
    )
    .unwrap();
    assert!(mc.ensemble_score_multilabel(&[0.0; 4], 0.1).is_err());
}

#[test]
fn checkpoint_round_trip() {
    for (task, variant) in [
        (TaskMode::Multiclass { classes: 3 }, Variant::Protected),
        (TaskMode::Multilabel { labels: 2 }, Variant::ProtectedTied),
        (TaskMode::Binary, Variant::Baseline),
    ] {
        let m = ClassifierModel::new(spec(task, variant), 13).unwrap();
        let json = m.to_checkpoint_json().unwrap();
        let back = ClassifierModel::from_checkpoint_json(&json).unwrap();
        assert_eq!(back.params(), m.params());
        let x = [0.1, 0.2, -0.3, 0.4];
        assert_eq!(
            back.forward_features(&x).unwrap(),
            m.forward_features(&x).unwrap()
        );
    }
}

#[test]
fn checkpoint_errors() {
    let m = ClassifierModel::new(
        spec(TaskMode::Multiclass { classes: 3 }, Variant::Protected),
        13,
    )
    .unwrap();
    let json = m.to_checkpoint_json().unwrap();
    let truncated = &json[..json.len() / 2];
    assert!(matches!(
        ClassifierModel::from_checkpoint_json(truncated),
        Err(Error::Parse { .. })
    ));

    let mut doc: serde_json::Value = serde_json::from_str(&json).unwrap();
    doc["tensors"]["proj.1.weight"] = serde_json::json!([[1.0, 2.0]]);
    let err = ClassifierModel::from_checkpoint_json(&doc.to_string()).unwrap_err();
    assert!(
        matches!(&err, Error::Checkpoint { field, .. } if field == "tensors.proj.1.weight"),
        "{err}"
    );

    let mut doc: serde_json::Value = serde_json::from_str(&json).unwrap();
    doc["spec"]["variant"] = serde_json::json!("mystery");
    let err = ClassifierModel::from_checkpoint_json(&doc.to_string()).unwrap_err();
    assert!(matches!(&err, Error::Checkpoint { field, .. } if field == "spec"));
}

fn separable_toy(n: usize, seed: u64) -> crate::datagen::Dataset {
    let mut rng = SeededRng::new(seed);
    let samples = (0..n)
        .map(|i| {
            let y = i % 2;
            let sign = if y == 0 { -1.0 } else { 1.0 };
            let mut x = rng.normal_vec(4);
            x[0] = sign * (1.0 + rng.uniform());
            Sample {
                features: x,
                label: Label::Class(y),
                attribute: ((i / 2) % 2) as u8,
            }
        })
        .collect();
    crate::datagen::Dataset::new(
        samples,
        crate::datagen::LabelSpace::MultiClass { classes: 2 },
        4,
    )
    .unwrap()
}

#[test]
fn training_fits_separable_toy() {
    let ds = separable_toy(200, 1);
    for variant in [Variant::Baseline, Variant::Protected] {
        let m =
            ClassifierModel::new(spec(TaskMode::Multiclass { classes: 2 }, variant), 3).unwrap();
        let cfg = TrainConfig {
            epochs: 50,
            batch_size: 16,
            ..TrainConfig::default()
        };
        let out = train(m, &ds, None, &cfg).unwrap();
        assert_eq!(out.history.len(), 50);
        let acc = out.model.score(&ds, cfg.temperature).unwrap();
        assert!(acc >= 0.99, "{variant:?} accuracy {acc}");
    }
}

#[test]
fn zero_epochs_and_determinism() {
    let ds = separable_toy(40, 2);
    let m = ClassifierModel::new(
        spec(TaskMode::Multiclass { classes: 2 }, Variant::Protected),
        3,
    )
    .unwrap();
    let none = TrainConfig {
        epochs: 0,
        ..TrainConfig::default()
    };
    let out = train(m.clone(), &ds, None, &none).unwrap();
    assert_eq!(out.model, m);
    assert!(out.history.is_empty());
    assert_eq!(out.selected_epoch, None);

    let cfg = TrainConfig {
        epochs: 3,
        batch_size: 8,
        seed: 5,
        ..TrainConfig::default()
    };
    let a = train(m.clone(), &ds, None, &cfg).unwrap();
    let b = train(m, &ds, None, &cfg).unwrap();
    assert_eq!(a.model.params(), b.model.params());
    assert_eq!(a.history, b.history);
}

#[test]
fn divergence_keeps_history() {
    let ds = separable_toy(40, 3);
    let m = ClassifierModel::new(
        spec(TaskMode::Multiclass { classes: 2 }, Variant::Baseline),
        3,
    )
    .unwrap();
    let cfg = TrainConfig {
        epochs: 20,
        lr: 1e200,
        momentum: 0.0,
        batch_size: 8,
        schedule: LrSchedule::Constant,
        ..TrainConfig::default()
    };
    match train(m, &ds, None, &cfg) {
        Err(Error::Diverged { history, epoch, .. }) => assert_eq!(history.len(), epoch),
        other => panic!("expected divergence, got {other:?}"),
    }
}
