use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{PipelineError, Result};
use crate::ingest::{Hand, SubjectId};

/// One test-sample prediction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub split_id: usize,
    pub subject_id: SubjectId,
    pub hand: Hand,
    pub t_sec: f64,
    pub ground_truth: f64,
    pub prediction: f64,
}

impl Prediction {
    pub fn error(&self) -> f64 {
        self.prediction - self.ground_truth
    }
}

/// Test predictions from every split of a run, in split order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PredictionSet {
    pub rows: Vec<Prediction>,
}

fn csv_err(path: &Path, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

impl PredictionSet {
    pub fn new(rows: Vec<Prediction>) -> Self {
        PredictionSet { rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn subjects(&self) -> Vec<SubjectId> {
        self.by_subject().into_keys().collect()
    }

    pub fn by_subject(&self) -> BTreeMap<SubjectId, PredictionSet> {
        let mut out: BTreeMap<SubjectId, PredictionSet> = BTreeMap::new();
        for r in &self.rows {
            out.entry(r.subject_id).or_default().rows.push(*r);
        }
        out
    }

    pub fn filter(&self, keep: impl Fn(&Prediction) -> bool) -> PredictionSet {
        PredictionSet::new(self.rows.iter().copied().filter(|r| keep(r)).collect())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
        for r in &self.rows {
            w.serialize(r).map_err(|e| csv_err(path, e))?;
        }
        w.flush().map_err(|e| csv_err(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<PredictionSet> {
        let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
        let rows = r
            .deserialize()
            .collect::<std::result::Result<Vec<Prediction>, _>>()
            .map_err(|e| csv_err(path, e))?;
        Ok(PredictionSet { rows })
    }
}
