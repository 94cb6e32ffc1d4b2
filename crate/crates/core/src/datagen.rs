//! Synthetic skewed datasets, stratified splits and the CSV format.
//!
//! Every class is a Gaussian cluster around a random center. Samples whose
//! protected attribute is `v = 1` are additionally shifted by `β·u` along a
//! unit direction `u`, so the attribute leaves a recoverable trace in the
//! input. Each class is skewed toward one attribute value: the first
//! `⌈K/2⌉` classes toward `v = 1`, the rest toward `v = 0`.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::SeededRng;

/// Ground truth of one sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Label {
    /// Multi-class label `y ∈ {0..K-1}`.
    Class(usize),
    /// One binary entry per attribute label (multi-label or binary tasks).
    Multi(Vec<u8>),
}

impl Label {
    pub fn class(&self) -> Option<usize> {
        match self {
            Label::Class(y) => Some(*y),
            Label::Multi(_) => None,
        }
    }

    pub fn bits(&self) -> Option<&[u8]> {
        match self {
            Label::Class(_) => None,
            Label::Multi(bits) => Some(bits),
        }
    }

    /// Whether the sample counts as positive for class / attribute label `y`.
    pub fn is_positive(&self, y: usize) -> bool {
        match self {
            Label::Class(c) => *c == y,
            Label::Multi(bits) => bits.get(y).is_some_and(|&b| b == 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub features: Vec<f64>,
    pub label: Label,
    /// Protected attribute, 0 or 1.
    pub attribute: u8,
}

/// The label layout of a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelSpace {
    MultiClass {
        classes: usize,
    },
    /// Binary classification is `MultiLabel { labels: 1 }`.
    MultiLabel {
        labels: usize,
    },
}

impl LabelSpace {
    /// `|𝒴|`: classes for multi-class, attribute labels otherwise.
    pub fn len(&self) -> usize {
        match *self {
            LabelSpace::MultiClass { classes } => classes,
            LabelSpace::MultiLabel { labels } => labels,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn check(&self, label: &Label) -> Result<()> {
        match (self, label) {
            (LabelSpace::MultiClass { classes }, Label::Class(y)) if y < classes => Ok(()),
            (LabelSpace::MultiLabel { labels }, Label::Multi(bits))
                if bits.len() == *labels && bits.iter().all(|&b| b <= 1) =>
            {
                Ok(())
            }
            _ => Err(Error::Data(format!(
                "label {label:?} does not fit {self:?}"
            ))),
        }
    }
}

/// Labeled samples plus the realized skew table `s(y, v) = N_y^v / (N_y^0 + N_y^1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: Vec<Sample>,
    space: LabelSpace,
    feature_dim: usize,
    skew_table: Vec<[f64; 2]>,
}

impl Dataset {
    pub fn new(samples: Vec<Sample>, space: LabelSpace, feature_dim: usize) -> Result<Self> {
        for (i, s) in samples.iter().enumerate() {
            if s.attribute > 1 {
                return Err(Error::Data(format!(
                    "sample {i}: attribute {} is not binary",
                    s.attribute
                )));
            }
            if s.features.len() != feature_dim {
                return Err(Error::Data(format!(
                    "sample {i}: {} features, expected {feature_dim}",
                    s.features.len()
                )));
            }
            if s.features.iter().any(|x| !x.is_finite()) {
                return Err(Error::Data(format!("sample {i}: non-finite feature")));
            }
            space
                .check(&s.label)
                .map_err(|e| Error::Data(format!("sample {i}: {e}")))?;
        }
        let mut ds = Dataset {
            samples,
            space,
            feature_dim,
            skew_table: Vec::new(),
        };
        ds.skew_table = ds
            .cell_counts()
            .iter()
            .map(|&[n0, n1]| {
                let total = n0 + n1;
                if total == 0 {
                    [0.5, 0.5]
                } else {
                    [n0 as f64 / total as f64, n1 as f64 / total as f64]
                }
            })
            .collect();
        Ok(ds)
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn space(&self) -> LabelSpace {
        self.space
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    /// `s(y, v)` per class (or per attribute label, over its positives).
    /// Classes without samples get `(0.5, 0.5)`.
    pub fn skew_table(&self) -> &[[f64; 2]] {
        &self.skew_table
    }

    /// `N_y^v` per class and attribute value.
    pub fn cell_counts(&self) -> Vec<[usize; 2]> {
        let mut counts = vec![[0usize; 2]; self.space.len()];
        for s in &self.samples {
            for (y, cell) in counts.iter_mut().enumerate() {
                if s.label.is_positive(y) {
                    cell[s.attribute as usize] += 1;
                }
            }
        }
        counts
    }

    pub fn features(&self) -> Vec<&[f64]> {
        self.samples.iter().map(|s| s.features.as_slice()).collect()
    }

    pub fn attributes(&self) -> Vec<u8> {
        self.samples.iter().map(|s| s.attribute).collect()
    }

    /// Copy of the dataset with attributes replaced, e.g. a shuffled-attribute control.
    pub fn with_attributes(&self, attributes: &[u8]) -> Result<Dataset> {
        if attributes.len() != self.len() {
            return Err(Error::Shape(format!(
                "{} attributes for {} samples",
                attributes.len(),
                self.len()
            )));
        }
        let samples = self
            .samples
            .iter()
            .zip(attributes)
            .map(|(s, &a)| Sample {
                attribute: a,
                ..s.clone()
            })
            .collect();
        Dataset::new(samples, self.space, self.feature_dim)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataTask {
    Multiclass,
    Multilabel,
    /// Binary task whose training split fully confounds class and attribute.
    ExtremeBias,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftMode {
    /// One attribute direction `u` for every class.
    Shared,
    /// An independent direction `u_y` per class.
    PerClass,
}

fn default_positive_rate() -> f64 {
    0.25
}

fn default_center_scale() -> f64 {
    1.0
}

/// Parameters of the synthetic generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenConfig {
    pub task: DataTask,
    /// `K` classes (multi-class), `C` attribute labels (multi-label); 2 for extreme bias.
    pub classes: usize,
    pub feature_dim: usize,
    /// Samples per class; for multi-label, samples per attribute group.
    pub per_class: usize,
    /// Fraction `ρ ∈ [0.5, 1]` of each class carrying its dominant attribute.
    pub skew: f64,
    /// Within-class noise `σ`.
    pub spread: f64,
    /// Attribute shift magnitude `β`.
    pub shift: f64,
    pub shift_mode: ShiftMode,
    /// Standard deviation of class centers (multi-label: label offsets).
    #[serde(default = "default_center_scale")]
    pub center_scale: f64,
    /// Mean positive rate per attribute label (multi-label only).
    #[serde(default = "default_positive_rate")]
    pub positive_rate: f64,
    pub seed: u64,
}

impl GenConfig {
    /// Checks ranges; errors carry a JSON pointer relative to this object.
    pub fn validate(&self) -> Result<()> {
        if self.classes == 0 {
            return Err(Error::config("/classes", "must be at least 1"));
        }
        if self.task == DataTask::ExtremeBias && self.classes != 2 {
            return Err(Error::config(
                "/classes",
                "extreme-bias data is binary: classes must be 2",
            ));
        }
        if self.feature_dim == 0 {
            return Err(Error::config("/feature_dim", "must be at least 1"));
        }
        if self.per_class < 2 {
            return Err(Error::config(
                "/per_class",
                "per-class count must be at least 2",
            ));
        }
        if !(0.5..=1.0).contains(&self.skew) {
            return Err(Error::config("/skew", "skew must lie in [0.5, 1]"));
        }
        if !(self.spread > 0.0 && self.spread.is_finite()) {
            return Err(Error::config("/spread", "spread must be positive"));
        }
        if !(self.shift >= 0.0 && self.shift.is_finite()) {
            return Err(Error::config("/shift", "shift must be non-negative"));
        }
        if !(self.center_scale > 0.0 && self.center_scale.is_finite()) {
            return Err(Error::config("/center_scale", "must be positive"));
        }
        if self.task == DataTask::Multilabel {
            if !(self.positive_rate > 0.0 && 2.0 * self.positive_rate * self.skew <= 1.0) {
                return Err(Error::config(
                    "/positive_rate",
                    "need 0 < positive_rate and 2·positive_rate·skew ≤ 1",
                ));
            }
            if self.shift_mode == ShiftMode::PerClass {
                return Err(Error::config(
                    "/shift_mode",
                    "multi-label data supports only the shared shift direction",
                ));
            }
        }
        Ok(())
    }
}

/// Dominant attribute of class `y` among `k` classes.
pub fn dominant_attribute(y: usize, k: usize) -> u8 {
    u8::from(y < k.div_ceil(2))
}

/// Fixed cluster geometry from which datasets with any skew can be drawn.
///
/// Training and test splits of one experiment share a source so they live in
/// the same feature space while carrying different skews.
#[derive(Debug, Clone)]
pub struct SyntheticSource {
    cfg: GenConfig,
    centers: Vec<Vec<f64>>,
    shifts: Vec<Vec<f64>>,
}

impl SyntheticSource {
    pub fn new(cfg: &GenConfig) -> Result<Self> {
        cfg.validate()?;
        let mut rng = SeededRng::with_stream(cfg.seed, 0);
        let d = cfg.feature_dim;
        let centers = (0..cfg.classes)
            .map(|_| {
                rng.normal_vec(d)
                    .into_iter()
                    .map(|x| x * cfg.center_scale)
                    .collect()
            })
            .collect();
        let shifts = match cfg.shift_mode {
            ShiftMode::Shared => vec![rng.unit_vector(d); cfg.classes],
            ShiftMode::PerClass => (0..cfg.classes).map(|_| rng.unit_vector(d)).collect(),
        };
        Ok(SyntheticSource {
            cfg: cfg.clone(),
            centers,
            shifts,
        })
    }

    pub fn config(&self) -> &GenConfig {
        &self.cfg
    }

    /// Unit attribute direction for class `y`.
    pub fn shift_direction(&self, y: usize) -> &[f64] {
        &self.shifts[y]
    }

    pub fn center(&self, y: usize) -> &[f64] {
        &self.centers[y]
    }

    pub fn label_space(&self) -> LabelSpace {
        match self.cfg.task {
            DataTask::Multiclass => LabelSpace::MultiClass {
                classes: self.cfg.classes,
            },
            DataTask::Multilabel => LabelSpace::MultiLabel {
                labels: self.cfg.classes,
            },
            DataTask::ExtremeBias => LabelSpace::MultiLabel { labels: 1 },
        }
    }

    /// Draws a dataset with `per_class` samples per class (per attribute group
    /// for multi-label) and dominant-attribute fraction `skew`. `crossed`
    /// swaps every class's dominant attribute.
    pub fn sample(
        &self,
        per_class: usize,
        skew: f64,
        crossed: bool,
        rng: &mut SeededRng,
    ) -> Result<Dataset> {
        if per_class < 2 {
            return Err(Error::config(
                "/per_class",
                "per-class count must be at least 2",
            ));
        }
        if !(0.5..=1.0).contains(&skew) {
            return Err(Error::config("/skew", "skew must lie in [0.5, 1]"));
        }
        let samples = match self.cfg.task {
            DataTask::Multiclass | DataTask::ExtremeBias => {
                self.sample_classes(per_class, skew, crossed, rng)
            }
            DataTask::Multilabel => self.sample_multilabel(per_class, skew, crossed, rng),
        };
        Dataset::new(samples, self.label_space(), self.cfg.feature_dim)
    }

    fn features(
        &self,
        base: &[f64],
        y_shift: usize,
        attribute: u8,
        rng: &mut SeededRng,
    ) -> Vec<f64> {
        let mut x: Vec<f64> = base
            .iter()
            .map(|c| c + self.cfg.spread * rng.normal())
            .collect();
        if attribute == 1 {
            crate::numeric::axpy(&mut x, self.cfg.shift, &self.shifts[y_shift]);
        }
        x
    }

    fn sample_classes(
        &self,
        per_class: usize,
        skew: f64,
        crossed: bool,
        rng: &mut SeededRng,
    ) -> Vec<Sample> {
        let k = self.cfg.classes;
        let dominant_count = (skew * per_class as f64 + 1e-9).floor() as usize;
        let mut out = Vec::with_capacity(k * per_class);
        for y in 0..k {
            let mut dominant = dominant_attribute(y, k);
            if crossed {
                dominant = 1 - dominant;
            }
            for i in 0..per_class {
                let attribute = if i < dominant_count {
                    dominant
                } else {
                    1 - dominant
                };
                let features = self.features(&self.centers[y], y, attribute, rng);
                let label = match self.cfg.task {
                    DataTask::ExtremeBias => Label::Multi(vec![y as u8]),
                    _ => Label::Class(y),
                };
                out.push(Sample {
                    features,
                    label,
                    attribute,
                });
            }
        }
        out
    }

    fn sample_multilabel(
        &self,
        per_group: usize,
        skew: f64,
        crossed: bool,
        rng: &mut SeededRng,
    ) -> Vec<Sample> {
        let c = self.cfg.classes;
        let rate = self.cfg.positive_rate;
        // bits[v][i][c]
        let mut bits = vec![vec![vec![0u8; c]; per_group]; 2];
        for label in 0..c {
            let mut dominant = dominant_attribute(label, c);
            if crossed {
                dominant = 1 - dominant;
            }
            for (v, group) in bits.iter_mut().enumerate() {
                let fraction = if v as u8 == dominant {
                    skew
                } else {
                    1.0 - skew
                };
                let positives = (2.0 * rate * fraction * per_group as f64).round() as usize;
                let mut order: Vec<usize> = (0..per_group).collect();
                rng.shuffle(&mut order);
                for &i in order.iter().take(positives.min(per_group)) {
                    group[i][label] = 1;
                }
            }
        }
        let d = self.cfg.feature_dim;
        let mut out = Vec::with_capacity(2 * per_group);
        for i in 0..per_group {
            for attribute in 0..2u8 {
                let label_bits = bits[attribute as usize][i].clone();
                let mut base = vec![0.0; d];
                for (label, &b) in label_bits.iter().enumerate() {
                    if b == 1 {
                        crate::numeric::axpy(&mut base, 1.0, &self.centers[label]);
                    }
                }
                let features = self.features(&base, 0, attribute, rng);
                out.push(Sample {
                    features,
                    label: Label::Multi(label_bits),
                    attribute,
                });
            }
        }
        out
    }
}

/// Generates the training-distribution dataset described by `cfg`.
pub fn generate_synthetic(cfg: &GenConfig) -> Result<Dataset> {
    let source = SyntheticSource::new(cfg)?;
    let mut rng = SeededRng::with_stream(cfg.seed, 1);
    source.sample(cfg.per_class, cfg.skew, false, &mut rng)
}

fn stratum(s: &Sample) -> (Vec<u8>, u8) {
    match &s.label {
        Label::Class(y) => ((*y as u64).to_le_bytes().to_vec(), s.attribute),
        // Full label patterns fragment into tiny cells, so multi-label data
        // is stratified by attribute alone.
        Label::Multi(_) => (Vec::new(), s.attribute),
    }
}

/// Disjoint, exhaustive split stratified by `(y, v)` cell.
///
/// Each cell is shuffled with `seed` and cut by largest-remainder rounding of
/// `fractions`; every split keeps the original sample order.
pub fn split(ds: &Dataset, fractions: &[f64], seed: u64) -> Result<Vec<Dataset>> {
    if fractions.is_empty() || fractions.iter().any(|&f| !(f > 0.0)) {
        return Err(Error::config("/split", "fractions must be positive"));
    }
    if (fractions.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::config("/split", "fractions must sum to 1"));
    }
    let mut cells: std::collections::BTreeMap<(Vec<u8>, u8), Vec<usize>> = Default::default();
    for (i, s) in ds.samples.iter().enumerate() {
        cells.entry(stratum(s)).or_default().push(i);
    }
    let mut rng = SeededRng::new(seed);
    let mut assigned: Vec<Vec<usize>> = vec![Vec::new(); fractions.len()];
    for (key, mut members) in cells {
        if members.len() < fractions.len() {
            return Err(Error::Stratification(format!(
                "cell (label {:?}, attribute {}) has {} samples for {} splits",
                key.0,
                key.1,
                members.len(),
                fractions.len()
            )));
        }
        rng.shuffle(&mut members);
        let counts = apportion(members.len(), fractions);
        let mut start = 0;
        for (part, count) in assigned.iter_mut().zip(counts) {
            part.extend_from_slice(&members[start..start + count]);
            start += count;
        }
    }
    assigned
        .into_iter()
        .map(|mut idx| {
            idx.sort_unstable();
            let samples = idx.iter().map(|&i| ds.samples[i].clone()).collect();
            Dataset::new(samples, ds.space, ds.feature_dim)
        })
        .collect()
}

fn apportion(n: usize, fractions: &[f64]) -> Vec<usize> {
    let raw: Vec<f64> = fractions.iter().map(|f| f * n as f64).collect();
    let mut counts: Vec<usize> = raw.iter().map(|r| (r + 1e-9).floor() as usize).collect();
    let mut left = n - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..fractions.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = raw[a] - raw[a].floor();
        let rb = raw[b] - raw[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        counts[i] += 1;
        left -= 1;
    }
    counts
}

/// Serializes a dataset as CSV: `f0..f{D-1},label,attr` (multi-class) or
/// `f0..f{D-1},l0..l{C-1},attr` (multi-label), 17 significant digits.
pub fn to_csv(ds: &Dataset) -> String {
    let mut out = String::new();
    let mut header: Vec<String> = (0..ds.feature_dim).map(|i| format!("f{i}")).collect();
    match ds.space {
        LabelSpace::MultiClass { .. } => header.push("label".into()),
        LabelSpace::MultiLabel { labels } => header.extend((0..labels).map(|c| format!("l{c}"))),
    }
    header.push("attr".into());
    out.push_str(&header.join(","));
    out.push('\n');
    for s in &ds.samples {
        for x in &s.features {
            write!(out, "{x:.16e},").unwrap();
        }
        match &s.label {
            Label::Class(y) => write!(out, "{y},").unwrap(),
            Label::Multi(bits) => {
                for b in bits {
                    write!(out, "{b},").unwrap();
                }
            }
        }
        writeln!(out, "{}", s.attribute).unwrap();
    }
    out
}

/// Parses the CSV layout written by [`to_csv`]. The class count of a
/// multi-class file is the largest label plus one.
pub fn from_csv(text: &str) -> Result<Dataset> {
    let mut lines = text.lines().enumerate();
    let Some((_, header)) = lines.next().filter(|(_, l)| !l.trim().is_empty()) else {
        return Err(Error::Parse {
            line: 1,
            message: "no samples".into(),
        });
    };
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    let feature_dim = columns.iter().take_while(|c| c.starts_with('f')).count();
    let label_cols = &columns[feature_dim..];
    let multiclass = label_cols == ["label", "attr"];
    let labels = label_cols.len().saturating_sub(1);
    let well_formed = label_cols.last() == Some(&"attr")
        && (multiclass
            || label_cols[..labels]
                .iter()
                .enumerate()
                .all(|(c, n)| *n == format!("l{c}")));
    if feature_dim == 0 || !well_formed || labels == 0 {
        return Err(Error::Parse {
            line: 1,
            message: format!("unrecognized header `{header}`"),
        });
    }

    let mut samples = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != columns.len() {
            return Err(parse_err(format!(
                "expected {} fields, found {}",
                columns.len(),
                fields.len()
            )));
        }
        let features = fields[..feature_dim]
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| parse_err(format!("bad feature value `{f}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        let label = if multiclass {
            let raw = fields[feature_dim];
            Label::Class(
                raw.parse()
                    .map_err(|_| parse_err(format!("bad class label `{raw}`")))?,
            )
        } else {
            let bits = fields[feature_dim..feature_dim + labels]
                .iter()
                .map(|b| match *b {
                    "0" => Ok(0),
                    "1" => Ok(1),
                    other => Err(parse_err(format!("label bit `{other}` is not binary"))),
                })
                .collect::<Result<Vec<u8>>>()?;
            Label::Multi(bits)
        };
        let attribute = match *fields.last().unwrap() {
            "0" => 0,
            "1" => 1,
            other => return Err(parse_err(format!("attribute `{other}` is not binary"))),
        };
        samples.push(Sample {
            features,
            label,
            attribute,
        });
    }
    if samples.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "no samples".into(),
        });
    }
    let space = if multiclass {
        let classes = samples
            .iter()
            .filter_map(|s| s.label.class())
            .max()
            .unwrap()
            + 1;
        LabelSpace::MultiClass { classes }
    } else {
        LabelSpace::MultiLabel { labels }
    };
    Dataset::new(samples, space, feature_dim)
}

pub fn save_csv(ds: &Dataset, path: &Path) -> Result<()> {
    std::fs::write(path, to_csv(ds)).map_err(|e| Error::io(path, e))
}

pub fn load_csv(path: &Path) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_csv(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn cfg(task: DataTask, classes: usize, per_class: usize, skew: f64) -> GenConfig {
        GenConfig {
            task,
            classes,
            feature_dim: 6,
            per_class,
            skew,
            spread: 1.0,
            shift: 2.0,
            shift_mode: ShiftMode::Shared,
            center_scale: 1.0,
            positive_rate: 0.25,
            seed: 3,
        }
    }

    #[test]
    fn balanced_skew() {
        for k in [2, 3, 7] {
            let ds = generate_synthetic(&cfg(DataTask::Multiclass, k, 20, 0.5)).unwrap();
            for s in ds.skew_table() {
                assert_eq!(*s, [0.5, 0.5]);
            }
        }
    }

    #[test]
    fn cifar_like_skew() {
        let mut c = cfg(DataTask::Multiclass, 10, 1000, 0.95);
        c.feature_dim = 4;
        let ds = generate_synthetic(&c).unwrap();
        let counts = ds.cell_counts();
        for y in 0..10 {
            let expected = if y < 5 { [50, 950] } else { [950, 50] };
            assert_eq!(counts[y], expected, "class {y}");
            assert!((ds.skew_table()[y].iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert_eq!(ds.skew_table()[0][1], 0.95);
        assert_eq!(ds.skew_table()[9][0], 0.95);
    }

    #[test]
    fn zero_shift_gives_identical_means() {
        let mut c = cfg(DataTask::Multiclass, 2, 10, 0.8);
        c.shift = 0.0;
        let source = SyntheticSource::new(&c).unwrap();
        let mut shifted = c.clone();
        shifted.shift = 5.0;
        let shifted_source = SyntheticSource::new(&shifted).unwrap();
        // the population means of both attribute groups sit on the class center
        assert_eq!(source.center(1), shifted_source.center(1));
        let ds = generate_synthetic(&c).unwrap();
        let ds_shift = generate_synthetic(&shifted).unwrap();
        for (a, b) in ds.samples().iter().zip(ds_shift.samples()) {
            if a.attribute == 0 {
                assert_eq!(a.features, b.features);
            }
        }
    }

    #[test]
    fn large_shift_is_recoverable() {
        let mut c = cfg(DataTask::Multiclass, 2, 400, 0.5);
        c.shift = 10.0;
        let source = SyntheticSource::new(&c).unwrap();
        let ds = generate_synthetic(&c).unwrap();
        let n = 200.0;
        for y in 0..2 {
            let mut means = [vec![0.0; 6], vec![0.0; 6]];
            for s in ds.samples().iter().filter(|s| s.label == Label::Class(y)) {
                crate::numeric::axpy(&mut means[s.attribute as usize], 1.0 / n, &s.features);
            }
            let diff = crate::numeric::sub(&means[1], &means[0]);
            for (d, u) in diff.iter().zip(source.shift_direction(y)) {
                assert!((d - 10.0 * u).abs() < 3.0 * 1.0 / n.sqrt() * 2f64.sqrt());
            }
        }
    }

    #[test]
    fn config_errors() {
        assert!(matches!(
            generate_synthetic(&cfg(DataTask::Multiclass, 3, 1, 0.9)),
            Err(Error::Config { .. })
        ));
        assert!(generate_synthetic(&cfg(DataTask::Multiclass, 3, 10, 0.4)).is_err());
        assert!(generate_synthetic(&cfg(DataTask::ExtremeBias, 3, 10, 1.0)).is_err());
    }

    #[test]
    fn generation_is_deterministic() {
        let c = cfg(DataTask::Multilabel, 4, 50, 0.9);
        assert_eq!(
            generate_synthetic(&c).unwrap(),
            generate_synthetic(&c).unwrap()
        );
    }

    #[test]
    fn multilabel_skew_per_label() {
        let ds = generate_synthetic(&cfg(DataTask::Multilabel, 4, 200, 0.9)).unwrap();
        assert_eq!(ds.space(), LabelSpace::MultiLabel { labels: 4 });
        // 2·0.25·0.9·200 = 90 positives in the dominant group, 10 in the other
        assert_eq!(
            ds.cell_counts(),
            vec![[10, 90], [10, 90], [90, 10], [90, 10]]
        );
        assert!((ds.skew_table()[0][1] - 0.9).abs() < 1e-12);
    }

    #[test]
    fn extreme_bias_is_fully_confounded() {
        let c = cfg(DataTask::ExtremeBias, 2, 30, 1.0);
        let source = SyntheticSource::new(&c).unwrap();
        let mut rng = SeededRng::new(1);
        let eb1 = source.sample(30, 1.0, false, &mut rng).unwrap();
        let eb2 = source.sample(30, 1.0, true, &mut rng).unwrap();
        assert_eq!(eb1.cell_counts(), vec![[30, 0]]);
        for s in eb1.samples() {
            assert_eq!(s.label.bits().unwrap()[0], 1 - s.attribute);
        }
        for s in eb2.samples() {
            assert_eq!(s.label.bits().unwrap()[0], s.attribute);
        }
    }

    #[test]
    fn split_identity_and_exact() {
        let ds = generate_synthetic(&cfg(DataTask::Multiclass, 2, 200, 0.5)).unwrap();
        let parts = split(&ds, &[1.0], 1).unwrap();
        assert_eq!(parts[0], ds);

        let parts = split(&ds, &[0.5, 0.5], 9).unwrap();
        for p in &parts {
            assert_eq!(p.cell_counts(), vec![[50, 50], [50, 50]]);
        }
        let again = split(&ds, &[0.5, 0.5], 9).unwrap();
        assert_eq!(parts, again);
        let total: usize = parts.iter().map(Dataset::len).sum();
        assert_eq!(total, ds.len());
    }

    #[test]
    fn split_is_a_partition() {
        let ds = generate_synthetic(&cfg(DataTask::Multiclass, 3, 17, 0.8)).unwrap();
        let parts = split(&ds, &[0.6, 0.2, 0.2], 4).unwrap();
        let mut all: Vec<Vec<u64>> = parts
            .iter()
            .flat_map(|p| {
                p.samples()
                    .iter()
                    .map(|s| s.features.iter().map(|x| x.to_bits()).collect())
            })
            .collect();
        let mut orig: Vec<Vec<u64>> = ds
            .samples()
            .iter()
            .map(|s| s.features.iter().map(|x| x.to_bits()).collect())
            .collect();
        all.sort();
        orig.sort();
        assert_eq!(all, orig);
    }

    #[test]
    fn split_errors() {
        let ds = generate_synthetic(&cfg(DataTask::Multiclass, 2, 10, 0.9)).unwrap();
        // each class has a single minority sample
        assert!(matches!(
            split(&ds, &[0.5, 0.5], 1),
            Err(Error::Stratification(_))
        ));
        assert!(split(&ds, &[0.5, 0.4], 1).is_err());
        assert!(split(&ds, &[1.5, -0.5], 1).is_err());
    }

    #[test]
    fn csv_round_trip() {
        for task in [
            DataTask::Multiclass,
            DataTask::Multilabel,
            DataTask::ExtremeBias,
        ] {
            let k = if task == DataTask::ExtremeBias { 2 } else { 3 };
            let ds = generate_synthetic(&cfg(task, k, 12, 0.75)).unwrap();
            assert_eq!(from_csv(&to_csv(&ds)).unwrap(), ds);
        }
    }

    #[test]
    fn csv_errors() {
        let err = from_csv("f0,f1,label,attr\n0.5,1.0,0,1\n0.1,0.2,1,2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = from_csv("").unwrap_err();
        assert!(err.to_string().contains("no samples"));
        let err = from_csv("f0,label,attr\n").unwrap_err();
        assert!(err.to_string().contains("no samples"));
        let err = from_csv("f0,f1,label,attr\n0.5,0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = from_csv("f0,l0,attr\n0.5,3,0\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }
}
