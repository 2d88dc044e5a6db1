//! Counting errors, Dice, and density-weighted confusion scores.
//!
//! The confusion quantities weight each cell by ground-truth density rather
//! than counting pixels: with predicted mask `M`,
//!
//! ```text
//! TP = Σ M·D_n      FP = Σ M·D_c
//! TN = Σ (1-M)·D_c  FN = Σ (1-M)·D_n
//! ```
//!
//! so they are measured in persons. Frame sets are micro-averaged: sums are
//! accumulated over frames in order before scores are derived.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::density::DensityMap;
use crate::grid::Space;
use crate::maskgen::BinaryMask;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("empty frame set")]
    EmptySet,
    #[error("length mismatch: {0} ground-truth vs {1} predicted")]
    LengthMismatch(usize, usize),
    #[error("dimension mismatch: {expected:?} vs {found:?}")]
    DimMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("space mismatch: {expected} vs {found}")]
    SpaceMismatch { expected: Space, found: Space },
}

/// Mean absolute error and root mean squared error of per-frame counts.
pub fn mae_mse(gt_counts: &[f64], pred_counts: &[f64]) -> Result<(f64, f64), MetricsError> {
    if gt_counts.len() != pred_counts.len() {
        return Err(MetricsError::LengthMismatch(gt_counts.len(), pred_counts.len()));
    }
    if gt_counts.is_empty() {
        return Err(MetricsError::EmptySet);
    }
    let q = gt_counts.len() as f64;
    let (abs, sq) = gt_counts
        .iter()
        .zip(pred_counts)
        .fold((0.0, 0.0), |(a, s), (g, p)| {
            let e = (g - p).abs();
            (a + e, s + e * e)
        });
    Ok((abs / q, (sq / q).sqrt()))
}

fn check_dims(a: (usize, usize), b: (usize, usize)) -> Result<(), MetricsError> {
    if a == b {
        Ok(())
    } else {
        Err(MetricsError::DimMismatch {
            expected: a,
            found: b,
        })
    }
}

fn check_space(a: Space, b: Space) -> Result<(), MetricsError> {
    if a == b {
        Ok(())
    } else {
        Err(MetricsError::SpaceMismatch {
            expected: a,
            found: b,
        })
    }
}

/// Cell overlap counts between a prediction and a ground-truth mask.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OverlapCounts {
    pub both: usize,
    pub pred_only: usize,
    pub gt_only: usize,
}

impl OverlapCounts {
    pub fn of(pred: &BinaryMask, gt: &BinaryMask) -> Result<Self, MetricsError> {
        check_dims(gt.dims(), pred.dims())?;
        let mut o = OverlapCounts::default();
        for (&p, &g) in pred.grid.as_slice().iter().zip(gt.grid.as_slice()) {
            match (p != 0, g != 0) {
                (true, true) => o.both += 1,
                (true, false) => o.pred_only += 1,
                (false, true) => o.gt_only += 1,
                (false, false) => {}
            }
        }
        Ok(o)
    }

    pub fn accumulate(&mut self, other: OverlapCounts) {
        self.both += other.both;
        self.pred_only += other.pred_only;
        self.gt_only += other.gt_only;
    }

    /// `2·|P∩G| / (2·|P∩G| + |P\G| + |G\P|)`, one when both masks are empty.
    pub fn dice(&self) -> f64 {
        let denom = 2 * self.both + self.pred_only + self.gt_only;
        if denom == 0 {
            1.0
        } else {
            (2 * self.both) as f64 / denom as f64
        }
    }
}

/// Dice similarity of two masks.
pub fn dice(pred: &BinaryMask, gt: &BinaryMask) -> Result<f64, MetricsError> {
    Ok(OverlapCounts::of(pred, gt)?.dice())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ConfusionSums {
    pub tp: f64,
    pub fp: f64,
    pub tn: f64,
    #[serde(rename = "fn")]
    pub fn_: f64,
}

impl ConfusionSums {
    pub fn accumulate(&mut self, other: ConfusionSums) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.tn += other.tn;
        self.fn_ += other.fn_;
    }
}

/// Density-weighted confusion sums of a predicted mask against `D_n`/`D_c`.
pub fn density_confusion(
    pred: &BinaryMask,
    d_n: &DensityMap,
    d_c: &DensityMap,
) -> Result<ConfusionSums, MetricsError> {
    check_dims(d_n.dims(), d_c.dims())?;
    check_dims(d_n.dims(), pred.dims())?;
    check_space(d_n.space, d_c.space)?;
    check_space(d_n.space, pred.space)?;
    let mut s = ConfusionSums::default();
    let cells = pred
        .grid
        .as_slice()
        .iter()
        .zip(d_n.grid.as_slice().iter().zip(d_c.grid.as_slice()));
    for (&m, (&n, &c)) in cells {
        if m != 0 {
            s.tp += n;
            s.fp += c;
        } else {
            s.fn_ += n;
            s.tn += c;
        }
    }
    Ok(s)
}

/// Which scores hit a `0/0` and were set to zero.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UndefinedScores {
    pub precision: bool,
    pub recall: bool,
    pub specificity: bool,
    pub f1: bool,
}

impl UndefinedScores {
    pub fn any(&self) -> bool {
        self.precision || self.recall || self.specificity || self.f1
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub specificity: f64,
    pub f1: f64,
    pub undefined: UndefinedScores,
}

fn ratio(num: f64, den: f64, flag: &mut bool) -> f64 {
    if den == 0.0 {
        *flag = true;
        0.0
    } else {
        num / den
    }
}

/// Precision, recall, specificity and F1 from confusion sums.
pub fn derive_scores(c: &ConfusionSums) -> Scores {
    let mut u = UndefinedScores::default();
    let precision = ratio(c.tp, c.tp + c.fp, &mut u.precision);
    let recall = ratio(c.tp, c.tp + c.fn_, &mut u.recall);
    let specificity = ratio(c.tn, c.tn + c.fp, &mut u.specificity);
    let f1 = ratio(2.0 * precision * recall, precision + recall, &mut u.f1);
    Scores {
        precision,
        recall,
        specificity,
        f1,
        undefined: u,
    }
}

/// Inputs for one evaluated frame.
#[derive(Debug, Clone)]
pub struct FrameInput {
    pub frame_id: u64,
    pub pred: BinaryMask,
    pub d_n: DensityMap,
    pub d_c: DensityMap,
    pub gt_mask: Option<BinaryMask>,
    /// Ground-truth person count; defaults to the mass of `d_n`.
    pub gt_count: Option<f64>,
    /// Predicted person count; defaults to the density mass inside `pred`.
    pub pred_count: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameReport {
    pub frame_id: u64,
    pub gt_count: f64,
    pub pred_count: f64,
    pub dice: Option<f64>,
    #[serde(flatten)]
    pub confusion: ConfusionSums,
    #[serde(flatten)]
    pub scores: Scores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mae: f64,
    pub mse: f64,
    /// Micro-averaged Dice; absent when no frame carries a ground-truth mask.
    pub dice: Option<f64>,
    pub precision: f64,
    pub recall: f64,
    pub specificity: f64,
    pub f1: f64,
    pub confusion: ConfusionSums,
    pub undefined: UndefinedScores,
    pub frames: Vec<FrameReport>,
}

/// Per-frame results, independent across frames.
pub fn evaluate_frame(frame: &FrameInput) -> Result<(FrameReport, Option<OverlapCounts>), MetricsError> {
    let confusion = density_confusion(&frame.pred, &frame.d_n, &frame.d_c)?;
    let overlap = frame
        .gt_mask
        .as_ref()
        .map(|gt| OverlapCounts::of(&frame.pred, gt))
        .transpose()?;
    let gt_count = frame.gt_count.unwrap_or_else(|| frame.d_n.mass());
    let pred_count = frame.pred_count.unwrap_or(confusion.tp + confusion.fp);
    Ok((
        FrameReport {
            frame_id: frame.frame_id,
            gt_count,
            pred_count,
            dice: overlap.map(|o| o.dice()),
            confusion,
            scores: derive_scores(&confusion),
        },
        overlap,
    ))
}

/// Aggregates per-frame results in the given order.
pub fn aggregate(results: Vec<(FrameReport, Option<OverlapCounts>)>) -> Result<EvalReport, MetricsError> {
    if results.is_empty() {
        return Err(MetricsError::EmptySet);
    }
    let mut confusion = ConfusionSums::default();
    let mut overlap: Option<OverlapCounts> = None;
    let mut gt = Vec::with_capacity(results.len());
    let mut pred = Vec::with_capacity(results.len());
    let mut frames = Vec::with_capacity(results.len());
    for (f, o) in results {
        confusion.accumulate(f.confusion);
        if let Some(o) = o {
            overlap.get_or_insert_with(OverlapCounts::default).accumulate(o);
        }
        gt.push(f.gt_count);
        pred.push(f.pred_count);
        frames.push(f);
    }
    let (mae, mse) = mae_mse(&gt, &pred)?;
    let s = derive_scores(&confusion);
    Ok(EvalReport {
        mae,
        mse,
        dice: overlap.map(|o| o.dice()),
        precision: s.precision,
        recall: s.recall,
        specificity: s.specificity,
        f1: s.f1,
        confusion,
        undefined: s.undefined,
        frames,
    })
}

/// Evaluates a frame set sequentially.
pub fn evaluate(frames: &[FrameInput]) -> Result<EvalReport, MetricsError> {
    let results = frames.iter().map(evaluate_frame).collect::<Result<Vec<_>, _>>()?;
    aggregate(results)
}

impl EvalReport {
    /// Plain-text score table in the layout of the usual comparison tables.
    pub fn to_table(&self, method: &str) -> String {
        let mut s = String::new();
        s.push_str("| Method | Precision | Recall | Specificity | F1 |\n");
        s.push_str("|--------|-----------|--------|-------------|----|\n");
        s.push_str(&format!(
            "| {} | {:.3} | {:.3} | {:.3} | {:.3} |\n",
            method, self.precision, self.recall, self.specificity, self.f1
        ));
        s.push('\n');
        s.push_str(&format!("MAE: {:.3}\nMSE: {:.3}\n", self.mae, self.mse));
        match self.dice {
            Some(d) => s.push_str(&format!("Dice: {d:.3}\n")),
            None => s.push_str("Dice: n/a\n"),
        }
        s.push_str(&format!("Frames: {}\n", self.frames.len()));
        s
    }
}
