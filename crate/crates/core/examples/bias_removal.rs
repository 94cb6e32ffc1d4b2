//! Projects the training-data bias direction out of the features of a
//! protected model and compares test metrics with and without removal.
//!
//! ```bash
//! cargo run --example bias_removal
//! ```

use fairlens::bias::remove_bias;
use fairlens::experiment::{evaluate_model, generate_splits, preset, train_arm};
use fairlens::model::Variant;

fn main() -> fairlens::Result<()> {
    let h = [3.0, 4.0];
    println!(
        "remove (1,0) from (3,4): {:?}",
        remove_bias(&h, &[1.0, 0.0])?
    );

    let mut cfg = preset("cifar10s-synthetic")?;
    cfg.train.epochs = 15;
    let data = generate_splits(&cfg, 0)?;
    let model = train_arm(&cfg, &data, Variant::Protected, 0)?.model;
    let eval = evaluate_model(&cfg, &model, &data.train, &data.test, true, true)?;
    let removal = eval.removal.expect("removal requested");
    println!("metric        without   with removal");
    for (k, v) in &eval.metrics.values {
        println!("{k:<12} {v:>8.4}   {:>8.4}", removal.metrics.values[k]);
    }
    println!("direction computed from: {}", removal.direction_source);
    println!("post-removal skewness: {:?}", removal.profile.skewness);
    Ok(())
}
