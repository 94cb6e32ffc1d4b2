//! Protected label-embedding heads: one cosine-softmax head per attribute
//! value, combined by summing probabilities at inference.
//!
//! ```bash
//! cargo run --example protected_heads
//! ```

use fairlens::experiment::{generate_splits, preset, train_arm};
use fairlens::model::Variant;

fn main() -> fairlens::Result<()> {
    let mut cfg = preset("cifar10s-synthetic")?;
    cfg.train.epochs = 15;
    let data = generate_splits(&cfg, 0)?;
    let tau = cfg.train.temperature;
    let model = train_arm(&cfg, &data, Variant::Protected, 0)?.model;

    // Inference sees features only; both heads vote.
    let x = &data.test.samples()[0].features;
    let h = model.forward_features(x)?;
    for v in 0..2u8 {
        let p = model.probs_multiclass(&model.project(&h, v)?, v, tau)?;
        let top = p.iter().cloned().fold(f64::MIN, f64::max);
        println!("head {v}: max probability {top:.3}");
    }
    println!(
        "ensemble prediction {} (true class {:?})",
        model.ensemble_predict_multiclass(x, tau)?,
        data.test.samples()[0].label
    );
    println!("test accuracy {:.3}", model.score(&data.test, tau)?);
    Ok(())
}
