//! Identifies the bias direction of a trained baseline: class prototypes per
//! attribute, their differences, and the PCA spectrum of those differences.
//! The shuffled-attribute control gives the spectrum of attribute-free noise.
//!
//! ```bash
//! cargo run --example bias_profile
//! ```

use fairlens::bias::projection_payload;
use fairlens::experiment::{analyze_model, generate_splits, preset, train_arm};
use fairlens::model::Variant;

fn main() -> fairlens::Result<()> {
    let mut cfg = preset("cifar10s-synthetic")?;
    cfg.train.epochs = 15;
    let data = generate_splits(&cfg, 0)?;
    let model = train_arm(&cfg, &data, Variant::Baseline, 0)?.model;

    for centered in [true, false] {
        let a = analyze_model(&model, &data.train, centered, 0)?;
        let ratios: Vec<String> = a.profile.ratios.iter().map(|r| format!("{r:.3}")).collect();
        println!("centered={centered}");
        println!("  ratios   {}", ratios.join(" "));
        println!("  skewness {:?}", a.profile.skewness);
        println!("  shuffled-attribute PC1 ratio {:.3}", a.control.pc1_ratio);
    }

    let a = analyze_model(&model, &data.train, true, 0)?;
    println!("class   delta on (PC1, PC2)");
    for c in projection_payload(&a.profile).classes {
        println!("{:>5}   ({:+.3}, {:+.3})", c.class, c.delta[0], c.delta[1]);
    }
    Ok(())
}
