//! Pixelwise segmentation metrics for obstacle masks.
//!
//! The positive class is "obstacle" (mask value 1). Per-sample confusion
//! counts are micro-averaged: a set of samples is scored by summing counts
//! first. Ratios whose denominator is zero are reported as absent rather than
//! coerced to 0 or 1, with one exception: the foreground IoU of two empty
//! masks is 1.

use std::iter::Sum;
use std::ops::Add;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mask::Mask;

/// Default binarization threshold for sigmoid outputs.
pub const DEFAULT_THRESHOLD: f32 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("shape mismatch: {0:?} vs {1:?}")]
    ShapeMismatch((usize, usize), (usize, usize)),
    #[error("probability {value} at pixel {index} is outside [0, 1]")]
    InvalidProbability { index: usize, value: f32 },
    #[error("threshold {0} is outside [0, 1]")]
    InvalidThreshold(f32),
    #[error("expected {expected} probabilities, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("confusion counts are all zero")]
    ZeroTotal,
    #[error("cannot aggregate an empty set of reports")]
    EmptySet,
    #[error("cannot aggregate reports computed with different IoU modes")]
    MixedModes,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn new(tp: u64, tn: u64, fp: u64, fn_: u64) -> Self {
        Self { tp, tn, fp, fn_ }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }
}

impl Add for ConfusionCounts {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self {
            tp: self.tp + o.tp,
            tn: self.tn + o.tn,
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
        }
    }
}

impl Sum for ConfusionCounts {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), Add::add)
    }
}

/// How background pixels enter the IoU.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
#[derive(clap::ValueEnum)]
pub enum IouMode {
    /// Jaccard index of the obstacle class: `tp / (tp + fp + fn)`.
    #[default]
    Foreground,
    /// Fraction of pixels on which prediction and target agree,
    /// `(tp + tn) / total`. Numerically identical to accuracy.
    Agreement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub precision: Option<f64>,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub iou: f64,
    pub mode: IouMode,
    pub counts: ConfusionCounts,
    pub n_samples: usize,
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// `mask = value >= threshold`.
pub fn binarize(
    probabilities: &[f32],
    width: usize,
    height: usize,
    threshold: f32,
) -> Result<Mask, MetricsError> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(MetricsError::InvalidThreshold(threshold));
    }
    if probabilities.len() != width * height {
        return Err(MetricsError::WrongLength {
            expected: width * height,
            got: probabilities.len(),
        });
    }
    if let Some(index) = probabilities.iter().position(|v| !(0.0..=1.0).contains(v)) {
        return Err(MetricsError::InvalidProbability {
            index,
            value: probabilities[index],
        });
    }
    let bits = probabilities
        .iter()
        .map(|&v| (v >= threshold) as u8)
        .collect();
    Ok(Mask::from_bits(width, height, bits).expect("binary by construction"))
}

fn check_shapes(pred: &Mask, target: &Mask) -> Result<(), MetricsError> {
    if (pred.width(), pred.height()) != (target.width(), target.height()) {
        return Err(MetricsError::ShapeMismatch(
            (pred.width(), pred.height()),
            (target.width(), target.height()),
        ));
    }
    Ok(())
}

pub fn confusion(pred: &Mask, target: &Mask) -> Result<ConfusionCounts, MetricsError> {
    check_shapes(pred, target)?;
    let mut c = ConfusionCounts::default();
    for (&p, &t) in pred.as_bytes().iter().zip(target.as_bytes()) {
        match (p, t) {
            (1, 1) => c.tp += 1,
            (0, 0) => c.tn += 1,
            (1, 0) => c.fp += 1,
            _ => c.fn_ += 1,
        }
    }
    Ok(c)
}

pub fn iou_from_counts(counts: &ConfusionCounts, mode: IouMode) -> f64 {
    match mode {
        IouMode::Foreground => ratio(counts.tp, counts.tp + counts.fp + counts.fn_).unwrap_or(1.0),
        IouMode::Agreement => ratio(counts.tp + counts.tn, counts.total()).unwrap_or(1.0),
    }
}

pub fn iou(pred: &Mask, target: &Mask, mode: IouMode) -> Result<f64, MetricsError> {
    Ok(iou_from_counts(&confusion(pred, target)?, mode))
}

/// Scores one set of counts with the foreground IoU.
pub fn score(counts: &ConfusionCounts) -> Result<MetricsReport, MetricsError> {
    score_with_mode(counts, IouMode::Foreground)
}

pub fn score_with_mode(
    counts: &ConfusionCounts,
    mode: IouMode,
) -> Result<MetricsReport, MetricsError> {
    let c = counts;
    let accuracy = ratio(c.tp + c.tn, c.total()).ok_or(MetricsError::ZeroTotal)?;
    Ok(MetricsReport {
        accuracy,
        precision: ratio(c.tp, c.tp + c.fp),
        sensitivity: ratio(c.tp, c.tp + c.fn_),
        specificity: ratio(c.tn, c.tn + c.fp),
        iou: iou_from_counts(c, mode),
        mode,
        counts: *c,
        n_samples: 1,
    })
}

/// Micro-average: sums the counts of every report and rescores them.
pub fn aggregate(reports: &[MetricsReport]) -> Result<MetricsReport, MetricsError> {
    let first = reports.first().ok_or(MetricsError::EmptySet)?;
    if reports.iter().any(|r| r.mode != first.mode) {
        return Err(MetricsError::MixedModes);
    }
    let counts: ConfusionCounts = reports.iter().map(|r| r.counts).sum();
    let mut out = score_with_mode(&counts, first.mode)?;
    out.n_samples = reports.iter().map(|r| r.n_samples).sum();
    Ok(out)
}

/// Scores `(prediction, target)` pairs in parallel and micro-averages them.
pub fn evaluate(pairs: &[(Mask, Mask)], mode: IouMode) -> Result<MetricsReport, MetricsError> {
    let reports = pairs
        .par_iter()
        .map(|(p, t)| score_with_mode(&confusion(p, t)?, mode))
        .collect::<Result<Vec<_>, _>>()?;
    aggregate(&reports)
}
