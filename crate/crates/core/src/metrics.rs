//! Pixel confusion counts and overlap scores.

use thiserror::Error;

use crate::mask::Mask;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("mask sizes differ: {0:?} vs {1:?}")]
    SizeMismatch((usize, usize), (usize, usize)),
    #[error("no frames to aggregate")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegMetrics {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
    pub dice: f64,
    pub sensitivity: f64,
    /// TN / (FP + TN).
    pub specificity: f64,
    /// FP / (FP + TN).
    pub fpr: f64,
}

fn ratio(num: usize, den: usize, empty: f64) -> f64 {
    if den == 0 {
        empty
    } else {
        num as f64 / den as f64
    }
}

impl SegMetrics {
    pub fn from_counts(tp: usize, fp: usize, tn: usize, fn_: usize) -> Self {
        Self {
            tp,
            fp,
            tn,
            fn_,
            dice: ratio(2 * tp, 2 * tp + fp + fn_, 1.0),
            sensitivity: ratio(tp, tp + fn_, 1.0),
            specificity: ratio(tn, fp + tn, 1.0),
            fpr: ratio(fp, fp + tn, 0.0),
        }
    }

    pub const CSV_HEADER: &'static str = "frame,tp,fp,tn,fn,dice,sensitivity,specificity,fpr";

    pub fn csv_row(&self, frame: usize) -> String {
        format!(
            "{},{},{},{},{},{:.6},{:.6},{:.6},{:.6}",
            frame, self.tp, self.fp, self.tn, self.fn_, self.dice, self.sensitivity, self.specificity, self.fpr
        )
    }
}

/// Scores `algo` against the reference `truth`.
pub fn confusion(algo: &Mask, truth: &Mask) -> Result<SegMetrics, MetricsError> {
    let (a, b) = ((algo.width(), algo.height()), (truth.width(), truth.height()));
    if a != b {
        return Err(MetricsError::SizeMismatch(a, b));
    }
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for (&x, &y) in algo.as_slice().iter().zip(truth.as_slice()) {
        match (x, y) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    Ok(SegMetrics::from_counts(tp, fp, tn, fn_))
}

/// Set-based overlap `2|A∩M| / (|A| + |M|)`.
pub fn dice_from_sets(algo: &Mask, truth: &Mask) -> f64 {
    let inter = algo.as_slice().iter().zip(truth.as_slice()).filter(|(a, b)| **a && **b).count();
    ratio(2 * inter, algo.count() + truth.count(), 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreSummary {
    pub mean: f64,
    pub min: f64,
}

impl ScoreSummary {
    fn of(values: impl Iterator<Item = f64>) -> Self {
        let (mut sum, mut min, mut n) = (0.0, f64::INFINITY, 0usize);
        for v in values {
            sum += v;
            min = min.min(v);
            n += 1;
        }
        Self { mean: sum / n as f64, min }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VideoSummary {
    pub frames: Vec<SegMetrics>,
    pub dice: ScoreSummary,
    pub sensitivity: ScoreSummary,
    pub specificity: ScoreSummary,
    pub fpr: ScoreSummary,
}

impl VideoSummary {
    pub fn csv_row(&self) -> String {
        format!(
            "mean,,,,,{:.6},{:.6},{:.6},{:.6}",
            self.dice.mean, self.sensitivity.mean, self.specificity.mean, self.fpr.mean
        )
    }

    /// Per-frame rows plus a trailing summary row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(SegMetrics::CSV_HEADER);
        out.push('\n');
        for (i, m) in self.frames.iter().enumerate() {
            out.push_str(&m.csv_row(i + 1));
            out.push('\n');
        }
        out.push_str(&self.csv_row());
        out.push('\n');
        out
    }
}

pub fn aggregate(frames: &[SegMetrics]) -> Result<VideoSummary, MetricsError> {
    if frames.is_empty() {
        return Err(MetricsError::Empty);
    }
    Ok(VideoSummary {
        frames: frames.to_vec(),
        dice: ScoreSummary::of(frames.iter().map(|m| m.dice)),
        sensitivity: ScoreSummary::of(frames.iter().map(|m| m.sensitivity)),
        specificity: ScoreSummary::of(frames.iter().map(|m| m.specificity)),
        fpr: ScoreSummary::of(frames.iter().map(|m| m.fpr)),
    })
}
