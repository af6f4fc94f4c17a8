//! Recording ingestion: frame decoding, channel-mean PPG extraction,
//! windowing against reference SpO₂, training statistics and LOOCV splits.

pub mod dataset;
mod frames;
mod split;
mod stats;
mod window;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dataset::{Dataset, HandMeta, HandRecording};
pub use frames::{
    extract_ppg, extract_ppg_from_reader, read_frames, write_frames, CaptureMeta, FrameHeader,
    FrameSequence, FRAME_MAGIC,
};
pub use split::{make_split_plan, Split, SplitPlan, MIN_SUBJECTS};
pub use stats::{compute_channel_stats, destandardize, standardize, ChannelStats, STD_FLOOR};
pub use window::{window_samples, Sample};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("frame sequence is empty")]
    EmptySequence,
    #[error("frame {index} has {actual} bytes, expected {expected} for {width}x{height} RGB")]
    InconsistentFrame {
        index: usize,
        width: u32,
        height: u32,
        expected: usize,
        actual: usize,
    },
    #[error("invalid frame dimensions {width}x{height}")]
    InvalidDimensions { width: u32, height: u32 },
    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: String, found: String },
    #[error("truncated frame file: expected {expected} bytes of payload, found {actual}")]
    Truncated { expected: u64, actual: u64 },
    #[error("recording has {frames} frames, fewer than one {window}-frame window")]
    RecordingTooShort { frames: usize, window: usize },
    #[error("channel matrix must have 3 equal-length rows")]
    RaggedChannels,
    #[error("channel value {value} at column {column} outside [0, 255]")]
    ValueOutOfRange { value: f64, column: usize },
    #[error("ground truth reading {index}: {reason}")]
    InvalidReading { index: usize, reason: String },
    #[error("need at least {required} subjects for LOOCV, found {found}")]
    TooFewSubjects { required: usize, found: usize },
    #[error("no training recordings supplied")]
    NoRecordings,
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl IngestError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        IngestError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        IngestError::Parse {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

pub type Result<T, E = IngestError> = std::result::Result<T, E>;

/// Study participant. Both hands of a subject share one id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SubjectId(pub u32);

impl fmt::Display for SubjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for SubjectId {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.trim().parse().map(SubjectId)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hand {
    Left,
    Right,
}

impl Hand {
    pub const BOTH: [Hand; 2] = [Hand::Left, Hand::Right];

    pub fn as_str(self) -> &'static str {
        match self {
            Hand::Left => "left",
            Hand::Right => "right",
        }
    }
}

impl fmt::Display for Hand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Hand {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "left" => Ok(Hand::Left),
            "right" => Ok(Hand::Right),
            other => Err(format!("unknown hand {other:?}")),
        }
    }
}

/// One reference oximeter reading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reading {
    pub t_sec: f64,
    pub spo2: f64,
}

/// Timestamped reference SpO₂ readings for one hand-subject.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroundTruthSeries {
    readings: Vec<Reading>,
}

impl GroundTruthSeries {
    /// Validates that readings lie in [0, 100] with strictly increasing times.
    pub fn new(readings: Vec<Reading>) -> Result<Self> {
        for (i, r) in readings.iter().enumerate() {
            if !(0.0..=100.0).contains(&r.spo2) {
                return Err(IngestError::InvalidReading {
                    index: i,
                    reason: format!("spo2 {} outside [0, 100]", r.spo2),
                });
            }
            if !r.t_sec.is_finite() {
                return Err(IngestError::InvalidReading {
                    index: i,
                    reason: "non-finite timestamp".into(),
                });
            }
            if i > 0 && r.t_sec <= readings[i - 1].t_sec {
                return Err(IngestError::InvalidReading {
                    index: i,
                    reason: format!(
                        "timestamp {} not after previous {}",
                        r.t_sec,
                        readings[i - 1].t_sec
                    ),
                });
            }
        }
        Ok(GroundTruthSeries { readings })
    }

    pub fn readings(&self) -> &[Reading] {
        &self.readings
    }

    pub fn len(&self) -> usize {
        self.readings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.readings.is_empty()
    }

    /// Linear interpolation of SpO₂ at `t`, held constant outside the series.
    pub fn spo2_at(&self, t: f64) -> Option<f64> {
        let r = &self.readings;
        let first = r.first()?;
        let last = r.last()?;
        if t <= first.t_sec {
            return Some(first.spo2);
        }
        if t >= last.t_sec {
            return Some(last.spo2);
        }
        let hi = r.partition_point(|x| x.t_sec <= t);
        let (a, b) = (r[hi - 1], r[hi]);
        let w = (t - a.t_sec) / (b.t_sec - a.t_sec);
        Some(a.spo2 + w * (b.spo2 - a.spo2))
    }
}

/// Channel-mean time series of one hand-subject: a 3×n matrix (rows R, G, B).
#[derive(Debug, Clone, PartialEq)]
pub struct PpgRecording {
    channels: [Vec<f64>; 3],
    pub fps: f64,
    pub gains: [f64; 3],
    pub hand: Hand,
    pub subject_id: SubjectId,
    pub tissue_flags: Vec<String>,
}

impl PpgRecording {
    pub fn new(channels: [Vec<f64>; 3], meta: &CaptureMeta) -> Result<Self> {
        let n = channels[0].len();
        if channels.iter().any(|c| c.len() != n) {
            return Err(IngestError::RaggedChannels);
        }
        for row in &channels {
            if let Some((column, &value)) = row
                .iter()
                .enumerate()
                .find(|(_, v)| !(0.0..=255.0).contains(*v))
            {
                return Err(IngestError::ValueOutOfRange { value, column });
            }
        }
        Ok(PpgRecording {
            channels,
            fps: meta.fps,
            gains: meta.gains,
            hand: meta.hand,
            subject_id: meta.subject_id,
            tissue_flags: meta.tissue_flags.clone(),
        })
    }

    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        &self.channels[c]
    }

    pub fn channels(&self) -> &[Vec<f64>; 3] {
        &self.channels
    }

    pub fn column(&self, j: usize) -> [f64; 3] {
        [
            self.channels[0][j],
            self.channels[1][j],
            self.channels[2][j],
        ]
    }

    pub fn duration_sec(&self) -> f64 {
        self.len() as f64 / self.fps
    }

    pub fn meta(&self) -> CaptureMeta {
        CaptureMeta {
            fps: self.fps,
            gains: self.gains,
            hand: self.hand,
            subject_id: self.subject_id,
            tissue_flags: self.tissue_flags.clone(),
        }
    }
}
