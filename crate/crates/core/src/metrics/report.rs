use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    bland_altman, classify, default_boundaries, mae, mean_subject_mae, roc_sweep, BlandAltman,
    ConfusionCounts, MetricsError, Result, RocCurve,
};
use crate::ingest::SubjectId;
use crate::pipeline::{write_ablation_csv, AblationRow, PredictionSet};

pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReportConfig {
    /// Hypoxemia thresholds for classification tables and ROC curves.
    pub thresholds: Vec<f64>,
    pub boundaries: Vec<f64>,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            thresholds: vec![95.0, 90.0, 85.0],
            boundaries: default_boundaries(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectSummary {
    pub subject_id: SubjectId,
    pub samples: usize,
    pub mae: f64,
    pub bland_altman: BlandAltman,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectCounts {
    pub subject_id: SubjectId,
    pub counts: ConfusionCounts,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
}

/// Confusion table at one (threshold, boundary) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationEntry {
    pub threshold: f64,
    pub boundary: f64,
    /// `"threshold"` when the boundary equals the threshold, `"roc_best"`
    /// when it is the pooled ROC point nearest (0, 1).
    pub boundary_source: String,
    pub counts: ConfusionCounts,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub per_subject: Vec<SubjectCounts>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocEntry {
    pub threshold: f64,
    /// Pooled curve; absent when only one class occurs at this threshold.
    pub pooled: Option<RocCurve>,
    /// Mean of the per-subject AUCs that are defined.
    pub macro_auc: Option<f64>,
    pub per_subject_auc: Vec<(SubjectId, Option<f64>)>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    /// Headline: unweighted mean of per-subject MAEs.
    pub mean_subject_mae: f64,
    pub pooled_mae: f64,
    pub bland_altman: BlandAltman,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub samples: usize,
    pub aggregate: Aggregate,
    pub subjects: Vec<SubjectSummary>,
    pub classification: Vec<ClassificationEntry>,
    pub roc: Vec<RocEntry>,
    pub ablation: Vec<AblationRow>,
}

fn entry(set: &PredictionSet, threshold: f64, boundary: f64, source: &str) -> Result<ClassificationEntry> {
    let counts = classify(set, threshold, boundary)?;
    let per_subject = set
        .by_subject()
        .into_iter()
        .map(|(subject_id, s)| {
            let c = classify(&s, threshold, boundary)?;
            Ok(SubjectCounts {
                subject_id,
                counts: c,
                sensitivity: c.sensitivity(),
                specificity: c.specificity(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ClassificationEntry {
        threshold,
        boundary,
        boundary_source: source.into(),
        counts,
        sensitivity: counts.sensitivity(),
        specificity: counts.specificity(),
        per_subject,
    })
}

fn roc_entry(set: &PredictionSet, threshold: f64, boundaries: &[f64]) -> Result<RocEntry> {
    let (pooled, note) = match roc_sweep(set, threshold, boundaries) {
        Ok(c) => (Some(c), None),
        Err(e @ MetricsError::SingleClass { .. }) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    let per_subject_auc: Vec<(SubjectId, Option<f64>)> = set
        .by_subject()
        .into_iter()
        .map(|(id, s)| (id, roc_sweep(&s, threshold, boundaries).ok().map(|c| c.auc)))
        .collect();
    let defined: Vec<f64> = per_subject_auc.iter().filter_map(|(_, a)| *a).collect();
    let macro_auc = (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64);
    Ok(RocEntry {
        threshold,
        pooled,
        macro_auc,
        per_subject_auc,
        note,
    })
}

pub fn build_report(set: &PredictionSet, config: &ReportConfig, ablation: &[AblationRow]) -> Result<Report> {
    let subjects = set
        .by_subject()
        .into_iter()
        .map(|(subject_id, s)| {
            Ok(SubjectSummary {
                subject_id,
                samples: s.len(),
                mae: mae(&s)?,
                bland_altman: bland_altman(&s)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut classification = Vec::new();
    let mut roc = Vec::new();
    for &t in &config.thresholds {
        let r = roc_entry(set, t, &config.boundaries)?;
        classification.push(entry(set, t, t, "threshold")?);
        if let Some(c) = &r.pooled {
            classification.push(entry(set, t, c.best_boundary, "roc_best")?);
        }
        roc.push(r);
    }
    Ok(Report {
        schema_version: REPORT_SCHEMA_VERSION,
        samples: set.len(),
        aggregate: Aggregate {
            mean_subject_mae: mean_subject_mae(set)?,
            pooled_mae: mae(set)?,
            bland_altman: bland_altman(set)?,
        },
        subjects,
        classification,
        roc,
        ablation: ablation.to_vec(),
    })
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> MetricsError + '_ {
    move |source| MetricsError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_csv<R: Serialize>(path: &Path, rows: impl IntoIterator<Item = R>) -> Result<()> {
    let err = |e: csv::Error| MetricsError::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    for r in rows {
        w.serialize(r).map_err(err)?;
    }
    w.flush().map_err(io(path))
}

#[derive(Serialize)]
struct RegressionRow {
    hand: crate::ingest::Hand,
    t_sec: f64,
    ground_truth: f64,
    prediction: f64,
}

#[derive(Serialize)]
struct BlandAltmanRow {
    subject_id: SubjectId,
    mean: f64,
    diff: f64,
}

/// Writes `report.json` and the plot-ready CSVs into `dir`.
pub fn write_report(report: &Report, set: &PredictionSet, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io(dir))?;
    let path = dir.join(REPORT_FILE);
    let json = serde_json::to_string_pretty(report).expect("report serializes");
    fs::write(&path, json + "\n").map_err(io(&path))?;

    for (id, s) in set.by_subject() {
        write_csv(
            &dir.join(format!("regression_{id}.csv")),
            s.rows.iter().map(|r| RegressionRow {
                hand: r.hand,
                t_sec: r.t_sec,
                ground_truth: r.ground_truth,
                prediction: r.prediction,
            }),
        )?;
    }
    write_csv(
        &dir.join("bland_altman.csv"),
        set.rows.iter().map(|r| BlandAltmanRow {
            subject_id: r.subject_id,
            mean: (r.prediction + r.ground_truth) / 2.0,
            diff: r.error(),
        }),
    )?;
    for r in &report.roc {
        if let Some(c) = &r.pooled {
            write_csv(&dir.join(format!("roc_{}.csv", r.threshold)), &c.points)?;
        }
    }
    if !report.ablation.is_empty() {
        let path = dir.join("ablation.csv");
        write_ablation_csv(&report.ablation, &path).map_err(|e| MetricsError::Csv {
            path,
            message: e.to_string(),
        })?;
    }
    Ok(())
}
