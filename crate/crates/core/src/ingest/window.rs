use super::{GroundTruthSeries, Hand, IngestError, PpgRecording, Result, SubjectId};
use crate::{CHANNELS, WINDOW_FRAMES};

/// One 3×90 window (row-major: R row, G row, B row) paired with the reference
/// SpO₂ reading at its centre.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub window: Vec<f64>,
    pub label: f64,
    pub subject_id: SubjectId,
    pub hand: Hand,
    pub center_time: f64,
}

impl Sample {
    pub fn row(&self, c: usize) -> &[f64] {
        &self.window[c * WINDOW_FRAMES..(c + 1) * WINDOW_FRAMES]
    }
}

/// Frame index nearest to `t_sec`; exact half-frame ties go to the earlier frame.
pub(crate) fn nearest_frame(t_sec: f64, fps: f64) -> Option<usize> {
    let idx = (t_sec * fps - 0.5).ceil();
    (idx >= 0.0 && idx.is_finite()).then_some(idx as usize)
}

/// Cuts one window per reading, centred on the frame nearest the reading.
///
/// The window spans frames `[c - 45, c + 45)`. Readings whose window would
/// run off either end of the recording are dropped, as are readings whose
/// SpO₂ is below `floor_spo2`.
pub fn window_samples(
    rec: &PpgRecording,
    gt: &GroundTruthSeries,
    floor_spo2: f64,
) -> Result<Vec<Sample>> {
    let n = rec.len();
    if n < WINDOW_FRAMES {
        return Err(IngestError::RecordingTooShort {
            frames: n,
            window: WINDOW_FRAMES,
        });
    }
    let half = WINDOW_FRAMES / 2;
    let mut out = Vec::new();
    for reading in gt.readings() {
        if reading.spo2 < floor_spo2 {
            continue;
        }
        let Some(c) = nearest_frame(reading.t_sec, rec.fps) else {
            continue;
        };
        if c < half || c + half > n {
            continue;
        }
        let start = c - half;
        let mut window = Vec::with_capacity(CHANNELS * WINDOW_FRAMES);
        for ch in 0..CHANNELS {
            window.extend_from_slice(&rec.channel(ch)[start..start + WINDOW_FRAMES]);
        }
        out.push(Sample {
            window,
            label: reading.spo2,
            subject_id: rec.subject_id,
            hand: rec.hand,
            center_time: reading.t_sec,
        });
    }
    Ok(out)
}
