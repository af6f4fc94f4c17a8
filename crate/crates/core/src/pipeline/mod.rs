//! Leave-one-subject-out training and evaluation.
//!
//! For every split the channel statistics are computed from the training
//! subjects' recordings only, a fresh network is trained with Adam on
//! shuffled minibatches, and the epoch with the lowest validation MAE is kept
//! for predicting the held-out test subject.

mod loocv;
mod predictions;
mod train;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{IngestError, SubjectId};
use crate::nn::{AdamConfig, Architecture, NnError};

pub use loocv::{
    ablation_run, read_ablation_csv, run_loocv, write_ablation_csv, AblationRow, LoocvResult,
    SplitOutcome,
};
pub use predictions::{Prediction, PredictionSet};
pub use train::{
    prepare_split, train_split, train_prepared, EpochRecord, PreparedSplit, TrainedSplit,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("split {split_id}: no {role} samples")]
    EmptyRole { split_id: usize, role: &'static str },
    #[error("split {split_id}: subject {subject} leaks into the {role} set")]
    Leakage {
        split_id: usize,
        subject: SubjectId,
        role: &'static str,
    },
    #[error("split {split_id} (test subject {test}): {source}")]
    Split {
        split_id: usize,
        test: SubjectId,
        #[source]
        source: Box<PipelineError>,
    },
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error("{path}: {message}")]
    Csv { path: std::path::PathBuf, message: String },
}

impl PipelineError {
    /// Innermost error, looking through split wrappers.
    pub fn root(&self) -> &PipelineError {
        match self {
            PipelineError::Split { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T, E = PipelineError> = std::result::Result<T, E>;

/// Training hyper-parameters and data selection for a LOOCV run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub lr: f64,
    pub decay_epoch: usize,
    pub decay_factor: f64,
    pub l2: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub floor_spo2: f64,
    pub subject_exclusions: Vec<SubjectId>,
    /// Clamp predictions to `[0, 100]` for validation and test.
    pub clamp_predictions: bool,
    pub architecture: Architecture,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let adam = AdamConfig::default();
        TrainConfig {
            lr: adam.lr,
            decay_epoch: adam.decay_epoch,
            decay_factor: adam.decay_factor,
            l2: adam.l2,
            epochs: 120,
            batch_size: 64,
            seed: 0,
            floor_spo2: crate::DEFAULT_FLOOR_SPO2,
            subject_exclusions: Vec::new(),
            clamp_predictions: false,
            architecture: Architecture::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(PipelineError::InvalidConfig(m));
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad(format!("lr must be positive, got {}", self.lr));
        }
        if !(0.0..=100.0).contains(&self.floor_spo2) {
            return bad(format!("floor_spo2 {} outside [0, 100]", self.floor_spo2));
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1".into());
        }
        if !(self.decay_factor > 0.0) || !(self.l2 >= 0.0) {
            return bad("decay_factor must be positive and l2 non-negative".into());
        }
        self.architecture
            .validate()
            .map_err(|e| PipelineError::InvalidConfig(format!("architecture: {e}")))?;
        if self.architecture.window != crate::WINDOW_FRAMES {
            return bad(format!(
                "architecture window {} does not match the {}-frame sample windows",
                self.architecture.window,
                crate::WINDOW_FRAMES
            ));
        }
        Ok(())
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            lr: self.lr,
            l2: self.l2,
            decay_epoch: self.decay_epoch,
            decay_factor: self.decay_factor,
            ..AdamConfig::default()
        }
    }
}
