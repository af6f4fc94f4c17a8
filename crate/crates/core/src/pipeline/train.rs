use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{PipelineError, Result, TrainConfig};
use crate::ingest::dataset::Dataset;
use crate::ingest::{compute_channel_stats, standardize, window_samples, ChannelStats, Sample, Split, SubjectId};
use crate::nn::{AdamState, Network};

/// Largest number of windows pushed through one forward pass at inference.
const INFERENCE_CHUNK: usize = 512;

/// Standardized samples for one split, ready for training.
#[derive(Debug, Clone)]
pub struct PreparedSplit {
    pub split_id: usize,
    pub split: Split,
    pub stats: ChannelStats,
    pub train: Vec<Sample>,
    pub val: Vec<Sample>,
    pub test: Vec<Sample>,
    pub train_label_mean: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub lr: f64,
    /// Sample-weighted mean of the minibatch losses over the epoch.
    pub train_loss: f64,
    pub train_mse: f64,
    pub val_mae: f64,
}

#[derive(Debug, Clone)]
pub struct TrainedSplit {
    /// Parameters from the epoch with the lowest validation MAE, or the
    /// initial network when no epochs were run.
    pub network: Network,
    pub history: Vec<EpochRecord>,
    pub best_epoch: Option<usize>,
    pub best_val_mae: Option<f64>,
    /// Validation MAE of always predicting the training-label mean.
    pub baseline_val_mae: f64,
}

fn check_role(
    split_id: usize,
    role: &'static str,
    samples: &[Sample],
    allowed: &BTreeSet<SubjectId>,
) -> Result<()> {
    if let Some(s) = samples.iter().find(|s| !allowed.contains(&s.subject_id)) {
        return Err(PipelineError::Leakage {
            split_id,
            subject: s.subject_id,
            role,
        });
    }
    Ok(())
}

/// Cuts, filters and standardizes the windows for each role of `split`.
///
/// Channel statistics come from the training subjects' recordings only.
pub fn prepare_split(dataset: &Dataset, split_id: usize, split: &Split, config: &TrainConfig) -> Result<PreparedSplit> {
    let train_recs = dataset
        .hands
        .iter()
        .filter(|h| split.train.contains(&h.subject_id()))
        .map(|h| &h.recording);
    let stats = compute_channel_stats(train_recs)?;
    let cut = |ids: &BTreeSet<SubjectId>| -> Result<Vec<Sample>> {
        let mut out = Vec::new();
        for h in dataset.hands.iter().filter(|h| ids.contains(&h.subject_id())) {
            out.extend(window_samples(&h.recording, &h.truth, config.floor_spo2)?);
        }
        Ok(standardize(out, &stats))
    };
    let test_ids = BTreeSet::from([split.test]);
    let val_ids = BTreeSet::from([split.val]);
    let (train, val, test) = (cut(&split.train)?, cut(&val_ids)?, cut(&test_ids)?);
    for (role, samples) in [("train", &train), ("validation", &val), ("test", &test)] {
        if samples.is_empty() {
            return Err(PipelineError::EmptyRole { split_id, role });
        }
    }
    // Test and validation subjects must never appear among training samples.
    check_role(split_id, "train", &train, &split.train)?;
    check_role(split_id, "validation", &val, &val_ids)?;
    check_role(split_id, "test", &test, &test_ids)?;
    if split.train.contains(&split.test) || split.train.contains(&split.val) || split.val == split.test {
        return Err(PipelineError::Leakage {
            split_id,
            subject: split.test,
            role: "train",
        });
    }
    let train_label_mean = train.iter().map(|s| s.label).sum::<f64>() / train.len() as f64;
    Ok(PreparedSplit {
        split_id,
        split: split.clone(),
        stats,
        train,
        val,
        test,
        train_label_mean,
    })
}

/// Predictions for standardized samples, clamped to `[0, 100]` if asked.
pub(crate) fn predict(net: &Network, samples: &[Sample], clamp: bool) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(samples.len());
    for chunk in samples.chunks(INFERENCE_CHUNK) {
        let refs: Vec<&[f64]> = chunk.iter().map(|s| s.window.as_slice()).collect();
        out.extend(net.forward_batch(&refs)?);
    }
    if clamp {
        out.iter_mut().for_each(|p| *p = p.clamp(0.0, 100.0));
    }
    Ok(out)
}

pub(crate) fn mae_of(preds: &[f64], samples: &[Sample]) -> f64 {
    preds.iter().zip(samples).map(|(p, s)| (p - s.label).abs()).sum::<f64>() / samples.len() as f64
}

/// Per-split random streams derived from the run seed and the test subject,
/// so results do not depend on which splits run or in what order.
fn split_rng(seed: u64, test: SubjectId, purpose: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((test.0 as u64) << 8) | purpose);
    rng
}

/// Trains a network on a prepared split and keeps the best-validation epoch.
pub fn train_prepared(p: &PreparedSplit, config: &TrainConfig) -> Result<TrainedSplit> {
    config.validate()?;
    let mut init_rng = split_rng(config.seed, p.split.test, 0);
    let mut shuffle_rng = split_rng(config.seed, p.split.test, 1);
    let mut net = Network::init(config.architecture, p.stats, p.train_label_mean, &mut init_rng)?;
    let baseline_val_mae =
        p.val.iter().map(|s| (s.label - p.train_label_mean).abs()).sum::<f64>() / p.val.len() as f64;

    let mut opt = AdamState::for_network(config.adam(), &net)?;
    let mut best: Option<(usize, f64, Network)> = None;
    let mut history = Vec::with_capacity(config.epochs);
    let mut order: Vec<usize> = (0..p.train.len()).collect();
    for epoch in 0..config.epochs {
        order.shuffle(&mut shuffle_rng);
        let (mut loss_sum, mut mse_sum) = (0.0, 0.0);
        for batch in order.chunks(config.batch_size) {
            let windows: Vec<&[f64]> = batch.iter().map(|&i| p.train[i].window.as_slice()).collect();
            let labels: Vec<f64> = batch.iter().map(|&i| p.train[i].label).collect();
            let (loss, grads) = net.backward(&windows, &labels, config.l2)?;
            loss_sum += loss.total * batch.len() as f64;
            mse_sum += loss.mse * batch.len() as f64;
            opt.step_network(&mut net, &grads, epoch)?;
        }
        let val_mae = mae_of(&predict(&net, &p.val, config.clamp_predictions)?, &p.val);
        let n = p.train.len() as f64;
        history.push(EpochRecord {
            epoch,
            lr: opt.effective_lr(epoch),
            train_loss: loss_sum / n,
            train_mse: mse_sum / n,
            val_mae,
        });
        if best.as_ref().is_none_or(|b| val_mae < b.1) {
            best = Some((epoch, val_mae, net.clone()));
        }
    }
    Ok(match best {
        Some((epoch, mae, network)) => TrainedSplit {
            network,
            history,
            best_epoch: Some(epoch),
            best_val_mae: Some(mae),
            baseline_val_mae,
        },
        None => TrainedSplit {
            network: net,
            history,
            best_epoch: None,
            best_val_mae: None,
            baseline_val_mae,
        },
    })
}

/// [`prepare_split`] followed by [`train_prepared`].
pub fn train_split(dataset: &Dataset, split_id: usize, split: &Split, config: &TrainConfig) -> Result<(PreparedSplit, TrainedSplit)> {
    config.validate()?;
    let prepared = prepare_split(dataset, split_id, split, config)?;
    let trained = train_prepared(&prepared, config)?;
    Ok((prepared, trained))
}
