use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::train::{mae_of, predict, train_split, EpochRecord, TrainedSplit};
use super::{PipelineError, Prediction, PredictionSet, Result, TrainConfig};
use crate::ingest::dataset::Dataset;
use crate::ingest::{make_split_plan, ChannelStats, SubjectId};
use crate::nn::Network;

/// Everything produced by one split of a LOOCV run.
#[derive(Debug, Clone)]
pub struct SplitOutcome {
    pub split_id: usize,
    pub test: SubjectId,
    pub val: SubjectId,
    pub train: Vec<SubjectId>,
    pub stats: ChannelStats,
    pub network: Network,
    pub history: Vec<EpochRecord>,
    pub best_epoch: Option<usize>,
    pub best_val_mae: Option<f64>,
    pub baseline_val_mae: f64,
    pub train_label_mean: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub test_mae: f64,
}

#[derive(Debug, Clone)]
pub struct LoocvResult {
    pub predictions: PredictionSet,
    pub splits: Vec<SplitOutcome>,
}

impl LoocvResult {
    /// MAE over all test samples of all splits.
    pub fn pooled_mae(&self) -> f64 {
        let n: usize = self.splits.iter().map(|s| s.n_test).sum();
        self.splits.iter().map(|s| s.test_mae * s.n_test as f64).sum::<f64>() / n as f64
    }

    /// MAE of predicting each split's training-label mean for its test subject.
    pub fn constant_predictor_mae(&self) -> f64 {
        let mut sum = 0.0;
        for r in &self.predictions.rows {
            sum += (r.ground_truth - self.splits[r.split_id].train_label_mean).abs();
        }
        sum / self.predictions.len() as f64
    }
}

/// One row of a data-ablation table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub floor: f64,
    /// Mean of the per-subject test MAEs.
    pub mae: f64,
    pub pooled_mae: f64,
    pub samples: usize,
}

fn with_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| PipelineError::InvalidConfig(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Trains every split of the rotation plan and predicts each held-out
/// subject with the model that never saw it.
///
/// Splits run concurrently on `jobs` threads (0 = one per core); the output
/// is in split order regardless of completion order.
pub fn run_loocv(dataset: &Dataset, config: &TrainConfig, jobs: usize) -> Result<LoocvResult> {
    config.validate()?;
    let plan = make_split_plan(&dataset.subjects(), &config.subject_exclusions)?;
    let outcomes = with_pool(jobs, || {
        plan.splits
            .par_iter()
            .enumerate()
            .map(|(split_id, split)| {
                let wrap = |e: PipelineError| PipelineError::Split {
                    split_id,
                    test: split.test,
                    source: Box::new(e),
                };
                let (prepared, trained) = train_split(dataset, split_id, split, config).map_err(wrap)?;
                let preds = predict(&trained.network, &prepared.test, config.clamp_predictions).map_err(wrap)?;
                let TrainedSplit {
                    network,
                    history,
                    best_epoch,
                    best_val_mae,
                    baseline_val_mae,
                } = trained;
                let rows: Vec<Prediction> = prepared
                    .test
                    .iter()
                    .zip(&preds)
                    .map(|(s, &p)| Prediction {
                        split_id,
                        subject_id: s.subject_id,
                        hand: s.hand,
                        t_sec: s.center_time,
                        ground_truth: s.label,
                        prediction: p,
                    })
                    .collect();
                let outcome = SplitOutcome {
                    split_id,
                    test: split.test,
                    val: split.val,
                    train: split.train.iter().copied().collect(),
                    stats: prepared.stats,
                    network,
                    history,
                    best_epoch,
                    best_val_mae,
                    baseline_val_mae,
                    train_label_mean: prepared.train_label_mean,
                    n_train: prepared.train.len(),
                    n_test: prepared.test.len(),
                    test_mae: mae_of(&preds, &prepared.test),
                };
                Ok((outcome, rows))
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let mut predictions = PredictionSet::default();
    let mut splits = Vec::with_capacity(outcomes.len());
    for (outcome, rows) in outcomes {
        predictions.rows.extend(rows);
        splits.push(outcome);
    }
    Ok(LoocvResult { predictions, splits })
}

/// Reruns the full LOOCV once per label floor, dropping every sample whose
/// ground truth is below the floor from training, validation and test.
pub fn ablation_run(dataset: &Dataset, config: &TrainConfig, floors: &[f64], jobs: usize) -> Result<Vec<AblationRow>> {
    if let Some(f) = floors.iter().find(|f| !(70.0..100.0).contains(*f)) {
        return Err(PipelineError::InvalidConfig(format!("ablation floor {f} outside [70, 100)")));
    }
    floors
        .iter()
        .map(|&floor| {
            let cfg = TrainConfig {
                floor_spo2: floor,
                ..config.clone()
            };
            let run = run_loocv(dataset, &cfg, jobs)?;
            let per_subject: Vec<f64> = run
                .predictions
                .by_subject()
                .values()
                .map(|s| s.rows.iter().map(|r| r.error().abs()).sum::<f64>() / s.len() as f64)
                .collect();
            Ok(AblationRow {
                floor,
                mae: per_subject.iter().sum::<f64>() / per_subject.len() as f64,
                pooled_mae: run.pooled_mae(),
                samples: run.predictions.len(),
            })
        })
        .collect()
}

pub fn write_ablation_csv(rows: &[AblationRow], path: &Path) -> Result<()> {
    let err = |e: csv::Error| PipelineError::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    for r in rows {
        w.serialize(r).map_err(err)?;
    }
    w.flush().map_err(|e| err(e.into()))
}

pub fn read_ablation_csv(path: &Path) -> Result<Vec<AblationRow>> {
    let err = |e: csv::Error| PipelineError::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    csv::Reader::from_path(path)
        .map_err(err)?
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(err)
}
