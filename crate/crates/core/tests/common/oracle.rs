//! Brute-force recount of the fairness metrics from raw `(truth, predicted,
//! attribute)` triples.

#![allow(clippy::needless_range_loop)]

use fairlens::datagen::Label;
use fairlens::fairness::{
    bias_amplification, bias_amplification_noniid, build_confusion, equalized_odds_difference,
    opportunity_difference, parity_difference, per_class_accuracy, MetricValue, PredictionLog,
    PredictionRecord,
};

/// Naive recount over raw records. Returns per-class terms, `None` where undefined.
pub struct Naive<'a> {
    pub k: usize,
    pub records: &'a [(usize, usize, usize)],
}

impl Naive<'_> {
    pub fn count(&self, f: impl Fn(&(usize, usize, usize)) -> bool) -> usize {
        self.records.iter().filter(|r| f(r)).count()
    }

    pub fn group(&self, v: usize) -> usize {
        self.count(|r| r.2 == v)
    }

    pub fn pred(&self, y: usize, v: usize) -> usize {
        self.count(|r| r.1 == y && r.2 == v)
    }

    pub fn tpr(&self, y: usize, v: usize) -> Option<f64> {
        let pos = self.count(|r| r.0 == y && r.2 == v);
        (pos > 0).then(|| self.count(|r| r.0 == y && r.1 == y && r.2 == v) as f64 / pos as f64)
    }

    pub fn fpr(&self, y: usize, v: usize) -> Option<f64> {
        let neg = self.count(|r| r.0 != y && r.2 == v);
        (neg > 0).then(|| self.count(|r| r.0 != y && r.1 == y && r.2 == v) as f64 / neg as f64)
    }

    pub fn amplification(&self, skew: &[[f64; 2]]) -> Vec<Option<f64>> {
        (0..self.k)
            .map(|y| {
                let total = self.pred(y, 0) + self.pred(y, 1);
                if total == 0 {
                    return None;
                }
                let mut s = 0.0;
                for v in 0..2 {
                    if skew[y][v] > 0.5 {
                        s += self.pred(y, v) as f64 / total as f64 - skew[y][v];
                    }
                }
                Some(s)
            })
            .collect()
    }

    pub fn amplification_noniid(&self) -> Vec<Option<f64>> {
        (0..self.k)
            .map(|y| {
                let (a, b) = (self.pred(y, 0), self.pred(y, 1));
                (a + b > 0).then(|| a.max(b) as f64 / (a + b) as f64 - 0.5)
            })
            .collect()
    }

    pub fn parity(&self) -> Option<Vec<Option<f64>>> {
        let (n0, n1) = (self.group(0), self.group(1));
        if n0 == 0 || n1 == 0 {
            return None;
        }
        Some(
            (0..self.k)
                .map(|y| {
                    Some(
                        (self.pred(y, 1) as f64 / n1 as f64 - self.pred(y, 0) as f64 / n0 as f64)
                            .abs(),
                    )
                })
                .collect(),
        )
    }

    pub fn opportunity(&self) -> Vec<Option<f64>> {
        (0..self.k)
            .map(|y| Some((self.tpr(y, 1)? - self.tpr(y, 0)?).abs()))
            .collect()
    }

    pub fn odds(&self) -> Vec<Option<f64>> {
        (0..self.k)
            .map(|y| {
                let t = (self.tpr(y, 1)? - self.tpr(y, 0)?).abs();
                let f = (self.fpr(y, 1)? - self.fpr(y, 0)?).abs();
                Some((t + f) / 2.0)
            })
            .collect()
    }

    pub fn per_class_accuracy(&self) -> Option<f64> {
        let mut acc = 0.0;
        for y in 0..self.k {
            let n = self.count(|r| r.0 == y);
            if n == 0 {
                return None;
            }
            acc += self.count(|r| r.0 == y && r.1 == y) as f64 / n as f64;
        }
        Some(acc / self.k as f64)
    }
}

pub fn agrees(got: fairlens::Result<MetricValue>, terms: Option<Vec<Option<f64>>>) -> bool {
    let expected = terms.and_then(|t| {
        let skipped: Vec<usize> = (0..t.len()).filter(|&y| t[y].is_none()).collect();
        let vals: Vec<f64> = t.into_iter().flatten().collect();
        (!vals.is_empty()).then(|| (vals.iter().sum::<f64>() / vals.len() as f64, skipped))
    });
    match (got, expected) {
        (Ok(m), Some((v, skipped))) => (m.value - v).abs() <= 1e-12 && m.skipped == skipped,
        (Err(_), None) => true,
        _ => false,
    }
}

/// Every multiset of predicted classes of size `0..=max` over `k` classes.
pub fn prediction_multisets(k: usize, max: usize) -> Vec<Vec<usize>> {
    pub fn rec(
        k: usize,
        left: usize,
        from: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        out.push(cur.clone());
        if left == 0 {
            return;
        }
        for p in from..k {
            cur.push(p);
            rec(k, left - 1, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, max, 0, &mut Vec::new(), &mut out);
    out
}

pub fn check_log(k: usize, cells: &[&Vec<usize>], skew: &[[f64; 2]]) -> bool {
    let mut raw = Vec::new();
    for (i, preds) in cells.iter().enumerate() {
        let (y, v) = (i / 2, i % 2);
        raw.extend(preds.iter().map(|&p| (y, p, v)));
    }
    if raw.is_empty() {
        return true;
    }
    let records = raw
        .iter()
        .map(|&(y, p, v)| PredictionRecord {
            truth: Label::Class(y),
            predicted: Label::Class(p),
            scores: None,
            attribute: v as u8,
        })
        .collect();
    let log = PredictionLog::multiclass(k, records).unwrap();
    let slice = build_confusion(&log).unwrap();
    let naive = Naive { k, records: &raw };
    // Integer counts first.
    for y in 0..k {
        for v in 0..2 {
            let c = slice.cells[y][v];
            if c.tp != naive.count(|r| r.0 == y && r.1 == y && r.2 == v)
                || c.fp != naive.count(|r| r.0 != y && r.1 == y && r.2 == v)
                || c.fn_ != naive.count(|r| r.0 == y && r.1 != y && r.2 == v)
                || c.tn != naive.count(|r| r.0 != y && r.1 != y && r.2 == v)
            {
                return false;
            }
        }
    }
    let pca_ok = match (per_class_accuracy(&log), naive.per_class_accuracy()) {
        (Ok(a), Some(b)) => (a - b).abs() <= 1e-12,
        (Err(_), None) => true,
        _ => false,
    };
    pca_ok
        && agrees(
            bias_amplification(&slice, skew),
            Some(naive.amplification(skew)),
        )
        && agrees(
            bias_amplification_noniid(&slice),
            Some(naive.amplification_noniid()),
        )
        && agrees(parity_difference(&slice), naive.parity())
        && agrees(opportunity_difference(&slice), Some(naive.opportunity()))
        && agrees(equalized_odds_difference(&slice), Some(naive.odds()))
}
