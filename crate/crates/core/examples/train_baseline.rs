//! Trains the one-hot softmax baseline and prints the epoch history.
//!
//! ```bash
//! cargo run --example train_baseline
//! ```

use fairlens::experiment::{generate_splits, preset, train_arm};
use fairlens::model::Variant;

fn main() -> fairlens::Result<()> {
    let mut cfg = preset("cifar10s-synthetic")?;
    cfg.train.epochs = 15;
    let data = generate_splits(&cfg, 0)?;
    let outcome = train_arm(&cfg, &data, Variant::Baseline, 0)?;
    println!("epoch   loss     lr      train acc");
    for r in &outcome.history {
        println!(
            "{:>5}  {:.4}  {:.4}  {:.3}",
            r.epoch, r.loss, r.learning_rate, r.train_score
        );
    }
    let test_acc = outcome.model.score(&data.test, cfg.train.temperature)?;
    println!("balanced test accuracy: {test_acc:.3}");
    Ok(())
}
