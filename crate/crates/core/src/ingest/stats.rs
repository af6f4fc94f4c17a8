use serde::{Deserialize, Serialize};

use super::{IngestError, PpgRecording, Result, Sample};
use crate::{CHANNELS, WINDOW_FRAMES};

/// Lower bound applied to every channel standard deviation.
pub const STD_FLOOR: f64 = 1e-6;

/// Per-channel standardization statistics (population moments).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelStats {
    pub mean: [f64; 3],
    pub std: [f64; 3],
}

impl ChannelStats {
    pub const IDENTITY: ChannelStats = ChannelStats {
        mean: [0.0; 3],
        std: [1.0; 3],
    };
}

impl Default for ChannelStats {
    fn default() -> Self {
        Self::IDENTITY
    }
}

/// Length-weighted channel moments over the training recordings.
///
/// Each recording contributes its own mean and variance; these are pooled
/// with weights proportional to recording length, which is the same as
/// taking moments over the concatenated columns.
pub fn compute_channel_stats<'a, I>(train: I) -> Result<ChannelStats>
where
    I: IntoIterator<Item = &'a PpgRecording>,
{
    // (n, mean, m2) per channel, merged pairwise
    let mut acc = [(0usize, 0.0f64, 0.0f64); CHANNELS];
    let mut any = false;
    for rec in train {
        any = true;
        let n = rec.len();
        if n == 0 {
            continue;
        }
        for (c, slot) in acc.iter_mut().enumerate() {
            let xs = rec.channel(c);
            let mean = xs.iter().sum::<f64>() / n as f64;
            let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
            let (na, ma, sa) = *slot;
            let total = na + n;
            let delta = mean - ma;
            let merged_mean = ma + delta * n as f64 / total as f64;
            let merged_m2 = sa + m2 + delta * delta * (na as f64 * n as f64) / total as f64;
            *slot = (total, merged_mean, merged_m2);
        }
    }
    if !any || acc[0].0 == 0 {
        return Err(IngestError::NoRecordings);
    }
    let mean = acc.map(|(_, m, _)| m);
    let std = acc.map(|(n, _, m2)| (m2 / n as f64).sqrt().max(STD_FLOOR));
    Ok(ChannelStats { mean, std })
}

fn map_windows(samples: &mut [Sample], f: impl Fn(usize, f64) -> f64) {
    for s in samples {
        for (i, x) in s.window.iter_mut().enumerate() {
            *x = f(i / WINDOW_FRAMES, *x);
        }
    }
}

/// Maps each window entry `x` in channel `c` to `(x - mean_c) / std_c`.
pub fn standardize(mut samples: Vec<Sample>, stats: &ChannelStats) -> Vec<Sample> {
    map_windows(&mut samples, |c, x| (x - stats.mean[c]) / stats.std[c]);
    samples
}

/// Affine inverse of [`standardize`].
pub fn destandardize(mut samples: Vec<Sample>, stats: &ChannelStats) -> Vec<Sample> {
    map_windows(&mut samples, |c, x| x * stats.std[c] + stats.mean[c]);
    samples
}
