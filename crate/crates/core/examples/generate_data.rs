//! Draws a skewed synthetic dataset, prints its skew table and splits it.
//!
//! ```bash
//! cargo run --example generate_data
//! ```

use fairlens::datagen::{
    from_csv, generate_synthetic, split, to_csv, DataTask, GenConfig, ShiftMode,
};

fn main() -> fairlens::Result<()> {
    let cfg = GenConfig {
        task: DataTask::Multiclass,
        classes: 10,
        feature_dim: 32,
        per_class: 500,
        skew: 0.95,
        spread: 1.0,
        shift: 4.0,
        shift_mode: ShiftMode::Shared,
        center_scale: 0.7,
        positive_rate: 0.25,
        seed: 7,
    };
    let ds = generate_synthetic(&cfg)?;
    println!("{} samples, {} features", ds.len(), ds.feature_dim());
    println!("class  N^0  N^1  s(y,1)");
    for (y, (counts, skew)) in ds.cell_counts().iter().zip(ds.skew_table()).enumerate() {
        println!("{y:>5} {:>4} {:>4}  {:.2}", counts[0], counts[1], skew[1]);
    }

    let parts = split(&ds, &[0.8, 0.2], 1)?;
    println!("train {} / val {}", parts[0].len(), parts[1].len());

    let back = from_csv(&to_csv(&parts[1]))?;
    assert_eq!(back, parts[1]);
    println!("CSV round trip ok");
    Ok(())
}
