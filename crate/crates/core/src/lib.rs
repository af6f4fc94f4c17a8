//! Smartphone-camera pulse oximetry.
//!
//! The crate covers the whole offline pipeline:
//!
//! ```text
//! raw RGB frames ──► ingest::extract_ppg ──► 3×n channel means
//!                                              │
//!   reference SpO₂ ──► ingest::window_samples ─┴► 3×90 labelled windows
//!                                              │
//!                      pipeline::run_loocv ◄───┘  (per-split standardization,
//!                              │                   Adam-trained CNN, best-val
//!                              ▼                   checkpoint selection)
//!                       PredictionSet ──► metrics::report (MAE, Bland-Altman,
//!                                                          sens/spec, ROC)
//! ```
//!
//! [`synth`] renders stair-stepped desaturation studies in the same on-disk
//! layout that [`ingest::dataset`] reads, so every stage can be exercised
//! without clinical data.

pub mod ingest;
pub mod metrics;
pub mod nn;
pub mod pipeline;
pub mod synth;

pub use ingest::{
    ChannelStats, FrameSequence, GroundTruthSeries, Hand, PpgRecording, Sample, SplitPlan,
    SubjectId,
};
pub use nn::{AdamState, Architecture, LossValue, Network};
pub use pipeline::{PredictionSet, TrainConfig};

/// Number of frames in one model input window (3 s at 30 fps).
pub const WINDOW_FRAMES: usize = 90;

/// Number of colour channels (R, G, B).
pub const CHANNELS: usize = 3;

/// Default lower bound on ground-truth SpO₂ for a usable sample.
pub const DEFAULT_FLOOR_SPO2: f64 = 70.0;
