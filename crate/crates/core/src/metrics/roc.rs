use serde::{Deserialize, Serialize};

use super::{check_threshold, classify, non_empty, MetricsError, Result};
use crate::pipeline::PredictionSet;

/// Decision boundaries 70, 70.5, …, 100.
pub fn default_boundaries() -> Vec<f64> {
    (0..=60).map(|k| 70.0 + 0.5 * k as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub boundary: f64,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub threshold: f64,
    pub positives: usize,
    pub negatives: usize,
    /// One point per requested boundary, ascending.
    pub points: Vec<RocPoint>,
    /// Area under the full empirical curve (every distinct prediction used as
    /// a boundary); equals the probability that a random hypoxemic sample is
    /// predicted lower than a random normal one, ties counting half.
    pub auc: f64,
    /// Trapezoid area under the swept points, anchored at (0,0) and (1,1).
    pub sweep_auc: f64,
    /// Swept boundary whose point lies nearest to (0, 1).
    pub best_boundary: f64,
}

fn class_counts(set: &PredictionSet, threshold: f64) -> Result<(usize, usize)> {
    non_empty(set)?;
    check_threshold(threshold)?;
    let pos = set.rows.iter().filter(|r| r.ground_truth < threshold).count();
    let neg = set.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(MetricsError::SingleClass {
            threshold,
            n: set.len(),
            class: if pos == 0 { "normal" } else { "hypoxemic" },
        });
    }
    Ok((pos, neg))
}

/// Trapezoid rule over points sorted by (fpr, tpr).
fn trapezoid(mut pts: Vec<(f64, f64)>) -> f64 {
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.windows(2).map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0).sum()
}

/// AUC of the full empirical ROC at `threshold`.
pub fn exhaustive_auc(set: &PredictionSet, threshold: f64) -> Result<f64> {
    let (pos, neg) = class_counts(set, threshold)?;
    let mut rows: Vec<(f64, bool)> = set
        .rows
        .iter()
        .map(|r| (r.prediction, r.ground_truth < threshold))
        .collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Raise the boundary past each distinct prediction in turn.
    let mut pts = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < rows.len() {
        let v = rows[i].0;
        while i < rows.len() && rows[i].0 == v {
            if rows[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        pts.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
    }
    Ok(trapezoid(pts))
}

pub fn roc_sweep(set: &PredictionSet, threshold: f64, boundaries: &[f64]) -> Result<RocCurve> {
    let (positives, negatives) = class_counts(set, threshold)?;
    let mut sorted = boundaries.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let points = sorted
        .iter()
        .map(|&b| {
            let c = classify(set, threshold, b)?;
            Ok(RocPoint {
                boundary: b,
                fpr: c.fpr(),
                tpr: c.tpr(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut anchored: Vec<(f64, f64)> = points.iter().map(|p| (p.fpr, p.tpr)).collect();
    anchored.push((0.0, 0.0));
    anchored.push((1.0, 1.0));
    let best_boundary = points
        .iter()
        .map(|p| (p.boundary, p.fpr.powi(2) + (1.0 - p.tpr).powi(2)))
        .fold(None::<(f64, f64)>, |best, (b, d)| match best {
            Some((_, bd)) if bd <= d => best,
            _ => Some((b, d)),
        })
        .map_or(f64::NAN, |(b, _)| b);
    Ok(RocCurve {
        threshold,
        positives,
        negatives,
        points,
        auc: exhaustive_auc(set, threshold)?,
        sweep_auc: trapezoid(anchored),
        best_boundary,
    })
}
