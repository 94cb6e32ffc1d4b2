//! Bias direction identification in feature space and its removal.
//!
//! Protected class prototypes `μ_y^v` are per-(class, attribute) feature
//! means. Their differences `δ_y = μ_y^1 − μ_y^0` form `Δ`; a dominant first
//! principal component of `Δ` is the bias direction `b`, and projecting
//! features off `b` neutralizes it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datagen::{Dataset, Label};
use crate::error::{Error, Result};
use crate::model::ClassifierModel;
use crate::numeric::{axpy, dot, norm, sample_skewness, symmetric_eigen, Matrix, SeededRng};

/// `μ_y^v` with the cell sizes `N_y^v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prototypes {
    /// `means[y][v]`.
    pub means: Vec<[Vec<f64>; 2]>,
    pub counts: Vec<[usize; 2]>,
}

/// Per-(class, attribute) feature means. A sample belongs to class `y` when
/// its label is positive for `y`, so multi-label data uses each label's
/// positive set.
pub fn compute_prototypes(
    features: &[Vec<f64>],
    labels: &[Label],
    attributes: &[u8],
    classes: usize,
) -> Result<Prototypes> {
    if features.len() != labels.len() || features.len() != attributes.len() {
        return Err(Error::Shape(
            "features, labels and attributes differ in length".into(),
        ));
    }
    let dim = features.first().map_or(0, Vec::len);
    let mut sums = vec![[vec![0.0; dim], vec![0.0; dim]]; classes];
    let mut counts = vec![[0usize; 2]; classes];
    for ((h, label), &v) in features.iter().zip(labels).zip(attributes) {
        if v > 1 {
            return Err(Error::Domain(format!("attribute {v} is not binary")));
        }
        if h.len() != dim {
            return Err(Error::Shape("feature vectors differ in length".into()));
        }
        for y in 0..classes {
            if label.is_positive(y) {
                axpy(&mut sums[y][v as usize], 1.0, h);
                counts[y][v as usize] += 1;
            }
        }
    }
    for (y, c) in counts.iter().enumerate() {
        for v in 0..2 {
            if c[v] == 0 {
                return Err(Error::Data(format!("empty prototype cell (y={y}, v={v})")));
            }
        }
    }
    let means = sums
        .into_iter()
        .zip(&counts)
        .map(|([s0, s1], c)| {
            [
                s0.into_iter().map(|x| x / c[0] as f64).collect(),
                s1.into_iter().map(|x| x / c[1] as f64).collect(),
            ]
        })
        .collect();
    Ok(Prototypes { means, counts })
}

/// `Δ` as a `|𝒴| × H` matrix with rows `μ_y^1 − μ_y^0`.
pub fn compute_delta(prototypes: &Prototypes) -> Result<Matrix> {
    let rows: Vec<Vec<f64>> = prototypes
        .means
        .iter()
        .enumerate()
        .map(|(y, [m0, m1])| {
            if m0.len() != m1.len() || m0.is_empty() {
                return Err(Error::Data(format!("missing prototype for class {y}")));
            }
            Ok(crate::numeric::sub(m1, m0))
        })
        .collect::<Result<_>>()?;
    Matrix::from_rows(&rows)
}

/// Principal spectrum of `Δ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Gram eigenvalues over the rank-capped list, descending, clamped at 0.
    pub eigenvalues: Vec<f64>,
    /// Explained-variance ratios; sum to 1.
    pub ratios: Vec<f64>,
    /// Fisher–Pearson skewness of `ratios`; `None` with fewer than three
    /// ratios or when all ratios are equal.
    pub skewness: Option<f64>,
    /// Unit principal directions in feature space, one per non-zero eigenvalue.
    pub components: Vec<Vec<f64>>,
}

fn center_rows(delta: &Matrix) -> Matrix {
    let n = delta.rows();
    let mut mean = vec![0.0; delta.cols()];
    for row in delta.iter_rows() {
        axpy(&mut mean, 1.0 / n as f64, row);
    }
    let mut out = delta.clone();
    for i in 0..n {
        axpy(out.row_mut(i), -1.0, &mean);
    }
    out
}

/// PCA of `Δ` through its `|Δ| × |Δ|` Gram matrix.
///
/// With `centered`, rows are mean-centered first and the rank cap is
/// `min(|Δ| − 1, H)`, otherwise `min(|Δ|, H)`.
pub fn spectrum(delta: &Matrix, centered: bool) -> Result<Spectrum> {
    let n = delta.rows();
    let min_rows = if centered { 2 } else { 1 };
    if n < min_rows {
        return Err(Error::Degenerate(format!(
            "{} PCA needs at least {min_rows} difference vectors, got {n}",
            if centered { "centered" } else { "uncentered" }
        )));
    }
    let x = if centered {
        center_rows(delta)
    } else {
        delta.clone()
    };
    let eig = symmetric_eigen(&x.gram())?;
    let rank_cap = (if centered { n - 1 } else { n }).min(x.cols());
    let eigenvalues: Vec<f64> = eig.eigenvalues[..rank_cap]
        .iter()
        .map(|l| l.max(0.0))
        .collect();
    let total: f64 = eigenvalues.iter().sum();
    if !(total >= 1e-18) {
        return Err(Error::Degenerate(format!(
            "total variance {total:e} is below 1e-18"
        )));
    }
    let ratios: Vec<f64> = eigenvalues.iter().map(|l| l / total).collect();
    let skewness = if ratios.len() >= 3 {
        sample_skewness(&ratios).ok()
    } else {
        None
    };
    let xt = x.transpose();
    let mut components = Vec::new();
    for (lambda, v) in eigenvalues.iter().zip(&eig.eigenvectors) {
        if *lambda <= 1e-12 * eigenvalues[0] {
            break;
        }
        let u = xt.matvec(v)?;
        components.push(crate::numeric::normalize(&u)?);
    }
    Ok(Spectrum {
        eigenvalues,
        ratios,
        skewness,
        components,
    })
}

fn orient(mut b: Vec<f64>, delta: &Matrix) -> Vec<f64> {
    let mut mean = vec![0.0; delta.cols()];
    for row in delta.iter_rows() {
        axpy(&mut mean, 1.0 / delta.rows() as f64, row);
    }
    let d = dot(&b, &mean);
    let flip = if d.abs() > 1e-12 * delta.frobenius_norm() {
        d < 0.0
    } else {
        b.iter().find(|x| x.abs() > 1e-12).is_some_and(|&x| x < 0.0)
    };
    if flip {
        b.iter_mut().for_each(|x| *x = -*x);
    }
    b
}

/// First principal component of `Δ`, signed so that `b · mean(Δ) ≥ 0`
/// (first non-zero coordinate positive when that dot product vanishes).
pub fn bias_direction(delta: &Matrix, centered: bool) -> Result<Vec<f64>> {
    let s = spectrum(delta, centered)?;
    Ok(orient(s.components[0].clone(), delta))
}

/// `h̃ = h − (h·b̂) b̂`.
pub fn remove_bias(h: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if h.len() != b.len() {
        return Err(Error::Shape(format!(
            "feature dim {} vs direction dim {}",
            h.len(),
            b.len()
        )));
    }
    let nb = norm(b);
    if nb == 0.0 {
        return Err(Error::Domain("bias direction has zero norm".into()));
    }
    let unit: Vec<f64> = b.iter().map(|x| x / nb).collect();
    let coef = dot(h, &unit);
    let mut out = h.to_vec();
    axpy(&mut out, -coef, &unit);
    Ok(out)
}

/// `z̃^v = g^v(h̃)`.
pub fn mitigated_embed(model: &ClassifierModel, h: &[f64], b: &[f64], v: u8) -> Result<Vec<f64>> {
    model.project(&remove_bias(h, b)?, v)
}

/// Everything the identification step produces, serializable as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasProfile {
    pub centered: bool,
    pub prototypes: Prototypes,
    /// Rows `δ_y` by class index.
    pub delta: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    pub ratios: Vec<f64>,
    pub skewness: Option<f64>,
    pub pc1_ratio: f64,
    pub bias_direction: Vec<f64>,
    /// Second principal direction, when the spectrum has one.
    pub second_component: Option<Vec<f64>>,
}

/// Prototypes → `Δ` → spectrum → `b` from precomputed features.
pub fn profile_features(
    features: &[Vec<f64>],
    labels: &[Label],
    attributes: &[u8],
    classes: usize,
    centered: bool,
) -> Result<BiasProfile> {
    let prototypes = compute_prototypes(features, labels, attributes, classes)?;
    let delta = compute_delta(&prototypes)?;
    let s = spectrum(&delta, centered)?;
    let bias_direction = orient(s.components[0].clone(), &delta);
    Ok(BiasProfile {
        centered,
        delta: delta.iter_rows().map(<[f64]>::to_vec).collect(),
        pc1_ratio: s.ratios[0],
        second_component: s.components.get(1).cloned(),
        eigenvalues: s.eigenvalues,
        ratios: s.ratios,
        skewness: s.skewness,
        bias_direction,
        prototypes,
    })
}

/// Encoder features `h = f(x)` for every sample, evaluated in parallel.
pub fn dataset_features(model: &ClassifierModel, ds: &Dataset) -> Result<Vec<Vec<f64>>> {
    ds.samples()
        .par_iter()
        .map(|s| model.forward_features(&s.features))
        .collect()
}

/// Profiles a trained model on (training) data.
pub fn profile_model(model: &ClassifierModel, ds: &Dataset, centered: bool) -> Result<BiasProfile> {
    let features = dataset_features(model, ds)?;
    profile_dataset_features(&features, ds, centered)
}

/// Profiles precomputed features of `ds`.
pub fn profile_dataset_features(
    features: &[Vec<f64>],
    ds: &Dataset,
    centered: bool,
) -> Result<BiasProfile> {
    let labels: Vec<Label> = ds.samples().iter().map(|s| s.label.clone()).collect();
    profile_features(
        features,
        &labels,
        &ds.attributes(),
        ds.space().len(),
        centered,
    )
}

/// Applies [`remove_bias`] to every feature vector.
pub fn remove_bias_all(features: &[Vec<f64>], b: &[f64]) -> Result<Vec<Vec<f64>>> {
    features.iter().map(|h| remove_bias(h, b)).collect()
}

/// Attribute labels permuted by `seed`: the null control for identification.
pub fn shuffled_attributes(attributes: &[u8], seed: u64) -> Vec<u8> {
    let mut out = attributes.to_vec();
    SeededRng::with_stream(seed, 11).shuffle(&mut out);
    out
}

/// Per-class prototypes and `δ_y` projected on the top two principal directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionPayload {
    pub axes: [Vec<f64>; 2],
    pub classes: Vec<ProjectedClass>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectedClass {
    pub class: usize,
    pub mu0: [f64; 2],
    pub mu1: [f64; 2],
    pub delta: [f64; 2],
}

pub fn projection_payload(profile: &BiasProfile) -> ProjectionPayload {
    let b = &profile.bias_direction;
    let second = profile
        .second_component
        .clone()
        .unwrap_or_else(|| vec![0.0; b.len()]);
    let project = |x: &[f64]| [dot(x, b), dot(x, &second)];
    let classes = profile
        .prototypes
        .means
        .iter()
        .zip(&profile.delta)
        .enumerate()
        .map(|(class, ([m0, m1], d))| ProjectedClass {
            class,
            mu0: project(m0),
            mu1: project(m1),
            delta: project(d),
        })
        .collect();
    ProjectionPayload {
        axes: [b.clone(), second],
        classes,
    }
}
