//! Saves a model to a JSON checkpoint and reloads it bit-exactly.
//!
//! ```bash
//! cargo run --example checkpoint
//! ```

use fairlens::model::{
    load_checkpoint, save_checkpoint, ClassifierModel, EncoderSpec, ModelSpec, TaskMode, Variant,
};

fn main() -> fairlens::Result<()> {
    let spec = ModelSpec {
        encoder: EncoderSpec::mlp(8, &[16], 8),
        task: TaskMode::Multilabel { labels: 3 },
        variant: Variant::Protected,
        embed_dim: 8,
    };
    let model = ClassifierModel::new(spec, 42)?;
    let path = std::env::temp_dir().join("fairlens-example-checkpoint.json");
    save_checkpoint(&model, &path)?;
    let back = load_checkpoint(&path)?;
    assert_eq!(back.params(), model.params());
    for t in back.params().tensors() {
        println!("{:<16} {}x{}", t.name, t.rows, t.cols);
    }
    println!(
        "reloaded {} parameters from {}",
        back.params().len(),
        path.display()
    );
    std::fs::remove_file(&path).ok();
    Ok(())
}
