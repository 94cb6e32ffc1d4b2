//! Fairness metrics on a small hand-written prediction log.
//!
//! ```bash
//! cargo run --example fairness_metrics
//! ```

use fairlens::datagen::Label;
use fairlens::fairness::{
    build_confusion, equalized_odds_difference, evaluate_log, opportunity_difference,
    parity_difference, weighted_map, AmplificationForm, PredictionLog, PredictionRecord,
};

fn record(truth: usize, predicted: usize, attribute: u8) -> PredictionRecord {
    PredictionRecord {
        truth: Label::Class(truth),
        predicted: Label::Class(predicted),
        scores: None,
        attribute,
    }
}

fn main() -> fairlens::Result<()> {
    // Group 1 is predicted as class 0 more often than group 0.
    let records = vec![
        record(0, 0, 0),
        record(0, 1, 0),
        record(1, 1, 0),
        record(1, 1, 0),
        record(0, 0, 1),
        record(0, 0, 1),
        record(1, 0, 1),
        record(1, 1, 1),
    ];
    let log = PredictionLog::multiclass(2, records)?;
    let slice = build_confusion(&log)?;
    println!("parity       {:.3}", parity_difference(&slice)?.value);
    println!("opportunity  {:.3}", opportunity_difference(&slice)?.value);
    println!(
        "odds         {:.3}",
        equalized_odds_difference(&slice)?.value
    );

    let report = evaluate_log(&log, &[[0.5, 0.5], [0.5, 0.5]], AmplificationForm::Iid)?;
    println!("{}", serde_json::to_string_pretty(&report.values)?);

    // Multi-label scores ranked per label, weighted so both groups count equally.
    let ml = |truth: u8, score: f64, attribute: u8| PredictionRecord {
        truth: Label::Multi(vec![truth]),
        predicted: Label::Multi(vec![u8::from(score >= 0.5)]),
        scores: Some(vec![score]),
        attribute,
    };
    let log = PredictionLog::multilabel(
        1,
        vec![
            ml(1, 0.9, 0),
            ml(0, 0.8, 0),
            ml(1, 0.7, 1),
            ml(0, 0.6, 1),
            ml(1, 0.2, 1),
            ml(0, 0.1, 0),
        ],
    )?;
    println!("weighted mAP {:.4}", weighted_map(&log)?.value);
    Ok(())
}
