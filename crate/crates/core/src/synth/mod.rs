//! Synthetic varied-FiO₂ studies.
//!
//! A study is a set of subjects whose SpO₂ is walked down a staircase of
//! plateaus. Each subject's trajectory is rendered into red/green/blue
//! channel means through a simple reflectance model:
//!
//! ```text
//! x_c(t) = DC_c(s) · (1 + damping · PI_c(s) · pulse(t))          pre-gain
//! y_c(t) = quantize(clip(g_c · x_c(t) + dc_shift + drift(t) + noise))
//! ```
//!
//! The red/blue perfusion-index ratio follows the empirical ratio-of-ratios
//! curve `R(s) = (110 − s) / 25`, so `s = 110 − 25·R` recovers saturation
//! from noiseless windows. See [`calibration`].

pub mod calibration;
mod render;
mod study;
mod trajectory;

use thiserror::Error;

pub use render::{render_frames, render_ppg, CameraModel, ClipPolicy, RenderOutput, TissueProfile};
pub use study::{build_study, generate_study, LabelHistogram, StudySpec, StudySummary, STUDY_FILE};
pub use trajectory::{trajectory, ProtocolSpec, MIN_PLATEAU_SEC};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid protocol: {0}")]
    InvalidProtocol(String),
    #[error("{plateaus} plateaus do not fit in {duration} s (each needs at least {min} s)")]
    InfeasiblePlateaus {
        plateaus: usize,
        duration: f64,
        min: f64,
    },
    #[error("invalid camera model: {0}")]
    InvalidCamera(String),
    #[error("channel {channel} is clipped on every frame ({fraction:.3} of samples); lower its gain")]
    FullyClipped { channel: usize, fraction: f64 },
    #[error("ground truth series is empty")]
    EmptyTruth,
    #[error(transparent)]
    Ingest(#[from] crate::ingest::IngestError),
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = SynthError> = std::result::Result<T, E>;
