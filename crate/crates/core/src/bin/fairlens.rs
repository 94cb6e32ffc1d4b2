use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fairlens::experiment::{
    cmd_analyze, cmd_evaluate, cmd_generate, cmd_reproduce, cmd_train, resolve_config,
    CommandOptions, ExperimentConfig, PRESET_NAMES,
};

const DEFAULTS_HELP: &str = "\
Training defaults (scaled down for desk runs; override under `train` in the config):
  lr 0.1, momentum 0.9, weight_decay 5e-4, batch_size 128, temperature 0.1
  epochs 60 (scaled down), step schedule ×0.1 every 20 epochs (scaled down)
  seeds 0..5

Exit codes: 0 success, 2 config error, 3 numeric divergence, 4 data error.
FAIRLENS_THREADS caps how many seeds run concurrently.";

#[derive(Parser)]
#[command(name = "fairlens", version, about = "Bias identification and mitigation experiments on synthetic data", after_help = DEFAULTS_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write train/val/test CSVs and the skew table.
    Generate(Common),
    /// Train the configured variant; write checkpoint and history.
    Train(Common),
    /// Profile the trained model's bias spectrum on training data.
    Analyze(Common),
    /// Evaluate task score and fairness gaps on the test split.
    Evaluate(Common),
    /// Run baseline and protected arms over all seeds and write a report.
    Reproduce(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config JSON, or a preset name.
    #[arg(long, value_name = "PATH")]
    config: String,
    /// Output directory (default: config `output`, else runs/<name>).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Run seed (default: first configured seed; reproduce runs only this seed).
    #[arg(long)]
    seed: Option<u64>,
    /// Uncentered PCA of the difference set.
    #[arg(long)]
    no_center: bool,
    /// Skip the bias-removal evaluation.
    #[arg(long)]
    no_removal: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    type Runner = fn(&ExperimentConfig, &CommandOptions) -> fairlens::Result<Vec<PathBuf>>;
    let (run, common): (Runner, Common) = match cli.command {
        Command::Generate(c) => (cmd_generate, c),
        Command::Train(c) => (cmd_train, c),
        Command::Analyze(c) => (cmd_analyze, c),
        Command::Evaluate(c) => (cmd_evaluate, c),
        Command::Reproduce(c) => (cmd_reproduce, c),
    };
    let opts = CommandOptions {
        out: common.out,
        seed: common.seed,
        no_center: common.no_center,
        no_removal: common.no_removal,
    };
    let result = resolve_config(&common.config).and_then(|cfg| run(&cfg, &opts));
    match result {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, fairlens::Error::Config { .. }) && e.to_string().contains("preset") {
                eprintln!("presets: {}", PRESET_NAMES.join(", "));
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
