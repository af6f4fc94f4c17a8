//! Evaluation statistics over a [`PredictionSet`].
//!
//! Conventions used throughout:
//! - standard deviations are population moments (divide by n);
//! - a sample is *positive* (hypoxemic) when `ground_truth < threshold`, and
//!   is *predicted* positive when `prediction < boundary` — both strict;
//! - pooled ("micro") statistics are the headline, per-subject ("macro")
//!   variants are reported alongside.

mod report;
mod roc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::SubjectId;
use crate::pipeline::PredictionSet;

pub use report::{
    build_report, write_report, ClassificationEntry, Report, ReportConfig, RocEntry, SubjectSummary,
    REPORT_FILE, REPORT_SCHEMA_VERSION,
};
pub use roc::{default_boundaries, exhaustive_auc, roc_sweep, RocCurve, RocPoint};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("prediction set is empty")]
    Empty,
    #[error("threshold {0} outside [0, 100]")]
    InvalidThreshold(f64),
    #[error("all {n} samples are {class} at threshold {threshold}; ROC is undefined")]
    SingleClass {
        threshold: f64,
        n: usize,
        class: &'static str,
    },
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Csv { path: std::path::PathBuf, message: String },
}

pub type Result<T, E = MetricsError> = std::result::Result<T, E>;

fn non_empty(set: &PredictionSet) -> Result<()> {
    if set.is_empty() {
        Err(MetricsError::Empty)
    } else {
        Ok(())
    }
}

fn check_threshold(t: f64) -> Result<()> {
    if (0.0..=100.0).contains(&t) {
        Ok(())
    } else {
        Err(MetricsError::InvalidThreshold(t))
    }
}

/// Mean absolute error, percentage points.
pub fn mae(set: &PredictionSet) -> Result<f64> {
    non_empty(set)?;
    Ok(set.rows.iter().map(|r| r.error().abs()).sum::<f64>() / set.len() as f64)
}

/// MAE of each subject's predictions.
pub fn mae_by_subject(set: &PredictionSet) -> Result<Vec<(SubjectId, f64)>> {
    non_empty(set)?;
    set.by_subject()
        .into_iter()
        .map(|(id, s)| Ok((id, mae(&s)?)))
        .collect()
}

/// Unweighted mean of the per-subject MAEs.
pub fn mean_subject_mae(set: &PredictionSet) -> Result<f64> {
    let per = mae_by_subject(set)?;
    Ok(per.iter().map(|(_, m)| m).sum::<f64>() / per.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlandAltman {
    /// Mean of `prediction − ground_truth`.
    pub mean_diff: f64,
    pub std_diff: f64,
    /// 1.96 × `std_diff`; limits of agreement are `mean_diff ± loa_halfwidth`.
    pub loa_halfwidth: f64,
    /// `(mean of the pair, difference)` for every sample.
    #[serde(skip)]
    pub points: Vec<(f64, f64)>,
}

pub fn bland_altman(set: &PredictionSet) -> Result<BlandAltman> {
    non_empty(set)?;
    let n = set.len() as f64;
    let points: Vec<(f64, f64)> = set
        .rows
        .iter()
        .map(|r| ((r.prediction + r.ground_truth) / 2.0, r.error()))
        .collect();
    let mean_diff = points.iter().map(|p| p.1).sum::<f64>() / n;
    let var = points.iter().map(|p| (p.1 - mean_diff).powi(2)).sum::<f64>() / n;
    let std_diff = var.sqrt();
    Ok(BlandAltman {
        mean_diff,
        std_diff,
        loa_halfwidth: 1.96 * std_diff,
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// `tp / (tp + fn)`, undefined without positives.
    pub fn sensitivity(&self) -> Option<f64> {
        let p = self.tp + self.fn_;
        (p > 0).then(|| self.tp as f64 / p as f64)
    }

    /// `tn / (tn + fp)`, undefined without negatives.
    pub fn specificity(&self) -> Option<f64> {
        let n = self.tn + self.fp;
        (n > 0).then(|| self.tn as f64 / n as f64)
    }

    pub fn tpr(&self) -> f64 {
        self.sensitivity().unwrap_or(0.0)
    }

    pub fn fpr(&self) -> f64 {
        self.specificity().map_or(0.0, |s| 1.0 - s)
    }
}

/// Confusion counts with hypoxemia defined as `ground_truth < threshold` and
/// flagged when `prediction < boundary`.
pub fn classify(set: &PredictionSet, threshold: f64, boundary: f64) -> Result<ConfusionCounts> {
    non_empty(set)?;
    check_threshold(threshold)?;
    check_threshold(boundary)?;
    let mut c = ConfusionCounts {
        tp: 0,
        fp: 0,
        tn: 0,
        fn_: 0,
    };
    for r in &set.rows {
        match (r.ground_truth < threshold, r.prediction < boundary) {
            (true, true) => c.tp += 1,
            (true, false) => c.fn_ += 1,
            (false, true) => c.fp += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

/// Spearman rank correlation with average ranks for ties; `None` when either
/// side is constant or fewer than two points are given.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for k in i..=j {
                r[idx[k]] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    (vx > 0.0 && vy > 0.0).then(|| cov / (vx * vy).sqrt())
}
