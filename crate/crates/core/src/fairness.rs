//! Fairness and task metrics over prediction logs.
//!
//! Every metric is computed as a fraction; reports render them ×100.
//! Multi-class metrics use one-vs-rest counting per class, multi-label
//! metrics treat each attribute label as a class. A per-class term whose
//! ratio is undefined (zero denominator) is skipped and the mean is taken
//! over the evaluated classes; skipped classes are reported alongside.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::datagen::{Label, LabelSpace};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogMode {
    Multiclass { classes: usize },
    Multilabel { labels: usize },
}

impl LogMode {
    pub fn len(&self) -> usize {
        match *self {
            LogMode::Multiclass { classes } => classes,
            LogMode::Multilabel { labels } => labels,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl From<LabelSpace> for LogMode {
    fn from(space: LabelSpace) -> Self {
        match space {
            LabelSpace::MultiClass { classes } => LogMode::Multiclass { classes },
            LabelSpace::MultiLabel { labels } => LogMode::Multilabel { labels },
        }
    }
}

/// One evaluated sample. Attributes enter evaluation only here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub truth: Label,
    pub predicted: Label,
    /// Presence scores per attribute label (multi-label only).
    pub scores: Option<Vec<f64>>,
    pub attribute: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionLog {
    mode: LogMode,
    records: Vec<PredictionRecord>,
}

impl PredictionLog {
    pub fn new(mode: LogMode, records: Vec<PredictionRecord>) -> Result<Self> {
        for (i, r) in records.iter().enumerate() {
            if r.attribute > 1 {
                return Err(Error::Data(format!(
                    "record {i}: attribute {} is not binary",
                    r.attribute
                )));
            }
            let fits = |l: &Label| match (mode, l) {
                (LogMode::Multiclass { classes }, Label::Class(y)) => *y < classes,
                (LogMode::Multilabel { labels }, Label::Multi(bits)) => {
                    bits.len() == labels && bits.iter().all(|&b| b <= 1)
                }
                _ => false,
            };
            if !fits(&r.truth) || !fits(&r.predicted) {
                return Err(Error::Data(format!(
                    "record {i}: labels do not match {mode:?}"
                )));
            }
            if let (LogMode::Multilabel { labels }, Some(scores)) = (mode, &r.scores) {
                if scores.len() != labels || scores.iter().any(|s| !s.is_finite()) {
                    return Err(Error::Data(format!("record {i}: bad score vector")));
                }
            }
        }
        Ok(PredictionLog { mode, records })
    }

    pub fn multiclass(classes: usize, records: Vec<PredictionRecord>) -> Result<Self> {
        PredictionLog::new(LogMode::Multiclass { classes }, records)
    }

    pub fn multilabel(labels: usize, records: Vec<PredictionRecord>) -> Result<Self> {
        PredictionLog::new(LogMode::Multilabel { labels }, records)
    }

    pub fn mode(&self) -> LogMode {
        self.mode
    }

    pub fn records(&self) -> &[PredictionRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellCounts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl CellCounts {
    pub fn predicted_positive(&self) -> usize {
        self.tp + self.fp
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

/// One-vs-rest confusion counts per class and attribute value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionSlice {
    /// `cells[y][v]`.
    pub cells: Vec<[CellCounts; 2]>,
    /// `N^v`.
    pub group_sizes: [usize; 2],
}

impl ConfusionSlice {
    pub fn classes(&self) -> usize {
        self.cells.len()
    }

    /// `P_y^v`.
    pub fn predicted_positive(&self, y: usize, v: usize) -> usize {
        self.cells[y][v].predicted_positive()
    }
}

pub fn build_confusion(log: &PredictionLog) -> Result<ConfusionSlice> {
    if log.is_empty() {
        return Err(Error::Data("empty prediction log".into()));
    }
    let k = log.mode.len();
    let mut cells = vec![[CellCounts::default(); 2]; k];
    let mut group_sizes = [0usize; 2];
    for r in &log.records {
        let v = r.attribute as usize;
        group_sizes[v] += 1;
        for (y, cell) in cells.iter_mut().enumerate() {
            let c = &mut cell[v];
            match (r.truth.is_positive(y), r.predicted.is_positive(y)) {
                (true, true) => c.tp += 1,
                (false, true) => c.fp += 1,
                (true, false) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
    }
    Ok(ConfusionSlice { cells, group_sizes })
}

/// A metric value with the classes left out of its mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricValue {
    pub value: f64,
    pub skipped: Vec<usize>,
}

fn mean_over(terms: Vec<Option<f64>>, what: &str) -> Result<MetricValue> {
    let skipped: Vec<usize> = terms
        .iter()
        .enumerate()
        .filter_map(|(y, t)| t.is_none().then_some(y))
        .collect();
    let evaluated: Vec<f64> = terms.into_iter().flatten().collect();
    if evaluated.is_empty() {
        return Err(Error::Domain(format!(
            "{what}: no class has a defined value"
        )));
    }
    Ok(MetricValue {
        value: evaluated.iter().sum::<f64>() / evaluated.len() as f64,
        skipped,
    })
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Bias amplification against the training skew `s(y, v)`:
/// mean over classes of `Σ_v 𝕀[s(y,v) > 1/2] (P_y^v / (P_y^0 + P_y^1) − s(y,v))`.
pub fn bias_amplification(slice: &ConfusionSlice, skew: &[[f64; 2]]) -> Result<MetricValue> {
    if skew.len() != slice.classes() {
        return Err(Error::Shape(format!(
            "skew table has {} classes, predictions have {}",
            skew.len(),
            slice.classes()
        )));
    }
    let terms = (0..slice.classes())
        .map(|y| {
            let p = [
                slice.predicted_positive(y, 0),
                slice.predicted_positive(y, 1),
            ];
            let total = p[0] + p[1];
            (total > 0).then(|| {
                (0..2)
                    .filter(|&v| skew[y][v] > 0.5)
                    .map(|v| p[v] as f64 / total as f64 - skew[y][v])
                    .sum()
            })
        })
        .collect();
    mean_over(terms, "bias amplification")
}

/// Non-i.i.d. bias amplification: mean over classes of
/// `max(P_y^0, P_y^1) / (P_y^0 + P_y^1) − 0.5`.
pub fn bias_amplification_noniid(slice: &ConfusionSlice) -> Result<MetricValue> {
    let terms = (0..slice.classes())
        .map(|y| {
            let (p0, p1) = (
                slice.predicted_positive(y, 0),
                slice.predicted_positive(y, 1),
            );
            ratio(p0.max(p1), p0 + p1).map(|r| r - 0.5)
        })
        .collect();
    mean_over(terms, "non-i.i.d. bias amplification")
}

/// Statistical parity difference: mean over classes of
/// `|(TP_y^1 + FP_y^1)/N^1 − (TP_y^0 + FP_y^0)/N^0|`.
pub fn parity_difference(slice: &ConfusionSlice) -> Result<MetricValue> {
    let [n0, n1] = slice.group_sizes;
    if n0 == 0 || n1 == 0 {
        return Err(Error::Domain(
            "parity difference needs both attribute groups".into(),
        ));
    }
    let terms = (0..slice.classes())
        .map(|y| {
            let r1 = slice.predicted_positive(y, 1) as f64 / n1 as f64;
            let r0 = slice.predicted_positive(y, 0) as f64 / n0 as f64;
            Some((r1 - r0).abs())
        })
        .collect();
    mean_over(terms, "parity difference")
}

fn tpr(c: &CellCounts) -> Option<f64> {
    ratio(c.tp, c.tp + c.fn_)
}

fn fpr(c: &CellCounts) -> Option<f64> {
    ratio(c.fp, c.fp + c.tn)
}

/// Difference of equality of opportunity: mean over classes of `|TPR_y^1 − TPR_y^0|`.
pub fn opportunity_difference(slice: &ConfusionSlice) -> Result<MetricValue> {
    let terms = slice
        .cells
        .iter()
        .map(|[c0, c1]| Some((tpr(c1)? - tpr(c0)?).abs()))
        .collect();
    mean_over(terms, "opportunity difference")
}

/// Difference of equalized odds: mean over classes of
/// `0.5 (|FPR_y^1 − FPR_y^0| + |TPR_y^1 − TPR_y^0|)`.
pub fn equalized_odds_difference(slice: &ConfusionSlice) -> Result<MetricValue> {
    let terms = slice
        .cells
        .iter()
        .map(|[c0, c1]| Some(0.5 * ((fpr(c1)? - fpr(c0)?).abs() + (tpr(c1)? - tpr(c0)?).abs())))
        .collect();
    mean_over(terms, "equalized odds difference")
}

/// Unweighted mean over classes of within-class accuracy. For multi-label
/// logs, the mean over labels of per-label bit accuracy.
pub fn per_class_accuracy(log: &PredictionLog) -> Result<f64> {
    if log.is_empty() {
        return Err(Error::Data("empty prediction log".into()));
    }
    match log.mode {
        LogMode::Multiclass { classes } => {
            let mut correct = vec![0usize; classes];
            let mut total = vec![0usize; classes];
            for r in &log.records {
                let y = r.truth.class().unwrap();
                total[y] += 1;
                if r.predicted == r.truth {
                    correct[y] += 1;
                }
            }
            if let Some(missing) = total.iter().position(|&t| t == 0) {
                return Err(Error::Data(format!(
                    "class {missing} is absent from the ground truth"
                )));
            }
            Ok(correct
                .iter()
                .zip(&total)
                .map(|(&c, &t)| c as f64 / t as f64)
                .sum::<f64>()
                / classes as f64)
        }
        LogMode::Multilabel { labels } => {
            let mut correct = vec![0usize; labels];
            for r in &log.records {
                let (t, p) = (r.truth.bits().unwrap(), r.predicted.bits().unwrap());
                for c in 0..labels {
                    correct[c] += usize::from(t[c] == p[c]);
                }
            }
            Ok(correct
                .iter()
                .map(|&c| c as f64 / log.len() as f64)
                .sum::<f64>()
                / labels as f64)
        }
    }
}

/// Fraction of records whose prediction matches the ground truth exactly.
pub fn accuracy(log: &PredictionLog) -> Result<f64> {
    if log.is_empty() {
        return Err(Error::Data("empty prediction log".into()));
    }
    let correct = log
        .records
        .iter()
        .filter(|r| r.predicted == r.truth)
        .count();
    Ok(correct as f64 / log.len() as f64)
}

/// Weighted average precision of one ranked list.
///
/// Items are `(score, positive, weight)`. Tied scores form one threshold:
/// precision is taken after the whole tie group.
pub fn weighted_average_precision(items: &[(f64, bool, f64)]) -> Option<f64> {
    let total_pos: f64 = items.iter().filter(|i| i.1).map(|i| i.2).sum();
    if total_pos <= 0.0 {
        return None;
    }
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| items[b].0.total_cmp(&items[a].0));
    let mut ap = 0.0;
    let mut seen_pos = 0.0;
    let mut seen = 0.0;
    let mut i = 0;
    while i < order.len() {
        let score = items[order[i]].0;
        let mut group_pos = 0.0;
        while i < order.len() && items[order[i]].0 == score {
            let (_, positive, weight) = items[order[i]];
            seen += weight;
            if positive {
                group_pos += weight;
            }
            i += 1;
        }
        seen_pos += group_pos;
        if group_pos > 0.0 {
            ap += group_pos / total_pos * (seen_pos / seen);
        }
    }
    Some(ap)
}

/// Attribute-weighted mAP over attribute labels.
///
/// Every record of group `v` carries weight `(N^0 + N^1) / (2 N^v)`. Labels
/// without both positives and negatives, or whose positives come from a
/// single attribute group, are skipped.
pub fn weighted_map(log: &PredictionLog) -> Result<MetricValue> {
    let LogMode::Multilabel { labels } = log.mode else {
        return Err(Error::Unsupported(
            "weighted mAP needs a multi-label log".into(),
        ));
    };
    let mut n = [0usize; 2];
    for r in &log.records {
        n[r.attribute as usize] += 1;
    }
    if n[0] == 0 || n[1] == 0 {
        return Err(Error::Domain(
            "weighted mAP needs both attribute groups".into(),
        ));
    }
    let weights = [
        (n[0] + n[1]) as f64 / (2 * n[0]) as f64,
        (n[0] + n[1]) as f64 / (2 * n[1]) as f64,
    ];
    let mut terms = Vec::with_capacity(labels);
    for c in 0..labels {
        let mut items = Vec::with_capacity(log.len());
        let mut pos_groups = [false; 2];
        for (i, r) in log.records.iter().enumerate() {
            let score = r
                .scores
                .as_ref()
                .ok_or_else(|| Error::Data(format!("record {i} has no scores")))?[c];
            let positive = r.truth.is_positive(c);
            pos_groups[r.attribute as usize] |= positive;
            items.push((score, positive, weights[r.attribute as usize]));
        }
        let has_negative = items.iter().any(|i| !i.1);
        if !has_negative || !(pos_groups[0] && pos_groups[1]) {
            terms.push(None);
            continue;
        }
        terms.push(weighted_average_precision(&items));
    }
    mean_over(terms, "weighted mAP")
}

/// Fairness metrics of one prediction log, as fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub values: BTreeMap<String, f64>,
    pub skipped: BTreeMap<String, Vec<usize>>,
    /// Metrics with no evaluable class, e.g. gaps on a split where every
    /// positive shares one attribute value.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub undefined: Vec<String>,
    pub conventions: Vec<String>,
}

/// Which bias amplification form to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplificationForm {
    /// Against the training skew; train and test share a distribution.
    Iid,
    /// Majority-attribute share of predictions; train and test differ.
    NonIid,
}

/// Computes the task score (`accuracy`: per-class accuracy, or mAP for
/// multi-label) plus `bias`, `parity`, `opportunity` and `odds`.
pub fn evaluate_log(
    log: &PredictionLog,
    train_skew: &[[f64; 2]],
    form: AmplificationForm,
) -> Result<MetricReport> {
    let slice = build_confusion(log)?;
    let mut values = BTreeMap::new();
    let mut skipped = BTreeMap::new();
    let mut undefined = Vec::new();
    let mut put = |name: &str, m: Result<MetricValue>| -> Result<()> {
        match m {
            Ok(m) => {
                values.insert(name.to_string(), m.value);
                if !m.skipped.is_empty() {
                    skipped.insert(name.to_string(), m.skipped);
                }
            }
            Err(Error::Domain(_)) => undefined.push(name.to_string()),
            Err(e) => return Err(e),
        }
        Ok(())
    };
    let score = match log.mode {
        LogMode::Multilabel { labels } if labels > 1 => weighted_map(log),
        LogMode::Multilabel { .. } => accuracy(log).map(|value| MetricValue {
            value,
            skipped: vec![],
        }),
        LogMode::Multiclass { .. } => per_class_accuracy(log).map(|value| MetricValue {
            value,
            skipped: vec![],
        }),
    };
    put("accuracy", score)?;
    put(
        "bias",
        match form {
            AmplificationForm::Iid => bias_amplification(&slice, train_skew),
            AmplificationForm::NonIid => bias_amplification_noniid(&slice),
        },
    )?;
    put("parity", parity_difference(&slice))?;
    put("opportunity", opportunity_difference(&slice))?;
    put("odds", equalized_odds_difference(&slice))?;
    let conventions = vec![
        format!("bias amplification form: {form:?}"),
        "undefined per-class ratios are skipped; means run over evaluated classes".into(),
        "one-vs-rest counting; FPR negatives are all records outside the class".into(),
        "multi-label task score is attribute-weighted mAP; binary task score is accuracy".into(),
    ];
    Ok(MetricReport {
        values,
        skipped,
        undefined,
        conventions,
    })
}
