//! Runs a named study preset (baseline vs protected vs protected+removal)
//! on two seeds and prints the markdown summary.
//!
//! ```bash
//! cargo run --example reproduce_preset -- cifar10s-synthetic
//! ```

use fairlens::experiment::{preset, preset_names, reproduce};

fn main() -> fairlens::Result<()> {
    let name = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "cifar10s-synthetic".into());
    println!("available presets: {}", preset_names().join(", "));
    let mut cfg = preset(&name)?;
    cfg.seeds = vec![0, 1];
    let report = reproduce(&cfg, cfg.analysis.centered, cfg.analysis.apply_removal)?;
    println!("{}", report.to_markdown());
    Ok(())
}
