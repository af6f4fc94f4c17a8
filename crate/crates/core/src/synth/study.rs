use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::render::{render_ppg, CameraModel, TissueProfile};
use super::trajectory::{trajectory, ProtocolSpec};
use super::{Result, SynthError};
use crate::ingest::{
    window_samples, CaptureMeta, Dataset, Hand, HandMeta, HandRecording, SubjectId,
};

/// File written at the dataset root describing how it was generated.
pub const STUDY_FILE: &str = "study.json";

/// Parameters for a whole synthetic study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StudySpec {
    pub n_subjects: usize,
    pub seed: u64,
    pub fps: f64,
    /// Template protocol; duration, heart rate and seed vary per subject.
    pub protocol: ProtocolSpec,
    pub camera: CameraModel,
    /// Tissue aberrations keyed by subject id; absent subjects are normal.
    pub tissue: BTreeMap<u32, TissueProfile>,
    /// Relative spread of protocol duration across subjects.
    pub duration_jitter: f64,
    /// Heart-rate spread across subjects, beats/minute.
    pub heart_rate_jitter: f64,
    /// Relative spread of base intensity across subjects.
    pub intensity_jitter: f64,
    /// Additional relative spread between the two hands of a subject.
    pub hand_intensity_jitter: f64,
}

impl Default for StudySpec {
    fn default() -> Self {
        StudySpec {
            n_subjects: 6,
            seed: 0,
            fps: 30.0,
            protocol: ProtocolSpec::default(),
            camera: CameraModel::default(),
            tissue: BTreeMap::new(),
            duration_jitter: 0.125,
            heart_rate_jitter: 10.0,
            intensity_jitter: 0.06,
            hand_intensity_jitter: 0.02,
        }
    }
}

/// Label counts per 5-point bin from 50 to 100 (the last bin includes 100).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelHistogram {
    pub lower_edges: Vec<u32>,
    pub counts: Vec<usize>,
}

impl LabelHistogram {
    const LO: u32 = 50;
    const WIDTH: u32 = 5;
    const BINS: usize = 10;

    pub fn new() -> Self {
        LabelHistogram {
            lower_edges: (0..Self::BINS as u32).map(|k| Self::LO + k * Self::WIDTH).collect(),
            counts: vec![0; Self::BINS],
        }
    }

    pub fn add(&mut self, label: f64) {
        let k = ((label - Self::LO as f64) / Self::WIDTH as f64).floor();
        let k = (k.max(0.0) as usize).min(Self::BINS - 1);
        self.counts[k] += 1;
    }

    /// Samples with labels in `[lo, hi)`; both edges must be bin edges.
    pub fn count_in(&self, lo: u32, hi: u32) -> usize {
        self.lower_edges
            .iter()
            .zip(&self.counts)
            .filter(|(&e, _)| e >= lo && e < hi)
            .map(|(_, &c)| c)
            .sum()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

impl Default for LabelHistogram {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudySummary {
    pub subjects: usize,
    pub recordings: usize,
    pub frames: usize,
    /// Windows above the default label floor.
    pub samples: usize,
    pub histogram: LabelHistogram,
    /// Largest clipped fraction seen on any channel of any recording.
    pub max_clipped_fraction: f64,
}

#[derive(Serialize)]
struct StudyFile<'a> {
    spec: &'a StudySpec,
    summary: &'a StudySummary,
}

fn tissue_flags(t: &TissueProfile) -> Vec<String> {
    if !t.is_aberrant() {
        Vec::new()
    } else if *t == TissueProfile::callus() {
        vec!["callus".into()]
    } else {
        vec![format!("ac_damping={},dc_shift={}", t.ac_damping, t.dc_shift)]
    }
}

fn build_subject(spec: &StudySpec, id: SubjectId, seed: u64) -> Result<(Vec<HandRecording>, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spread = |rng: &mut ChaCha8Rng, w: f64| if w > 0.0 { rng.random_range(-w..=w) } else { 0.0 };
    let protocol = ProtocolSpec {
        duration: (spec.protocol.duration * (1.0 + spread(&mut rng, spec.duration_jitter))).round(),
        heart_rate: spec.protocol.heart_rate + spread(&mut rng, spec.heart_rate_jitter),
        seed: rng.random(),
        ..spec.protocol.clone()
    };
    let truth = trajectory(&protocol)?;
    let subject_scale: [f64; 3] = std::array::from_fn(|_| 1.0 + spread(&mut rng, spec.intensity_jitter));
    let tissue = spec.tissue.get(&id.0).copied().unwrap_or_default();

    let mut hands = Vec::with_capacity(2);
    let mut clipped = 0.0f64;
    for hand in Hand::BOTH {
        let hand_seed: u64 = rng.random();
        let mut camera = spec.camera.clone();
        for c in 0..3 {
            camera.base_intensity[c] *=
                subject_scale[c] * (1.0 + spread(&mut rng, spec.hand_intensity_jitter));
        }
        let meta = HandMeta {
            fps: spec.fps,
            gains: camera.gains,
            tissue_flags: tissue_flags(&tissue),
            skin_tone: None,
            gender: None,
            notes: format!("synthetic; heart rate {:.1} bpm", protocol.heart_rate),
            seed: Some(hand_seed),
        };
        let capture: CaptureMeta = meta.capture(id, hand);
        let out = render_ppg(&truth, &camera, &tissue, &capture, protocol.heart_rate, hand_seed)?;
        clipped = out.clipped_fraction.iter().copied().fold(clipped, f64::max);
        hands.push(HandRecording {
            recording: out.recording,
            truth: truth.clone(),
            meta,
        });
    }
    Ok((hands, clipped))
}

fn validate(spec: &StudySpec) -> Result<()> {
    if spec.n_subjects < crate::ingest::MIN_SUBJECTS {
        return Err(SynthError::InvalidProtocol(format!(
            "need at least {} subjects, got {}",
            crate::ingest::MIN_SUBJECTS,
            spec.n_subjects
        )));
    }
    if !(spec.fps > 0.0) {
        return Err(SynthError::InvalidProtocol(format!("fps {} must be positive", spec.fps)));
    }
    if !(0.0..0.5).contains(&spec.duration_jitter)
        || !(0.0..0.5).contains(&spec.intensity_jitter)
        || !(0.0..0.5).contains(&spec.hand_intensity_jitter)
        || spec.heart_rate_jitter < 0.0
    {
        return Err(SynthError::InvalidProtocol("jitter out of range".into()));
    }
    spec.protocol.validate()?;
    spec.camera.validate()
}

/// Renders a study in memory. Subjects are numbered `1..=n_subjects`.
pub fn build_study(spec: &StudySpec) -> Result<(Dataset, StudySummary)> {
    validate(spec)?;
    let mut seeder = ChaCha8Rng::seed_from_u64(spec.seed);
    let seeds: Vec<u64> = (0..spec.n_subjects).map(|_| seeder.random()).collect();
    let subjects = seeds
        .par_iter()
        .enumerate()
        .map(|(i, &seed)| build_subject(spec, SubjectId(i as u32 + 1), seed))
        .collect::<Result<Vec<_>>>()?;

    let mut histogram = LabelHistogram::new();
    let mut hands = Vec::new();
    let mut max_clipped = 0.0f64;
    for (subject_hands, clipped) in subjects {
        max_clipped = max_clipped.max(clipped);
        hands.extend(subject_hands);
    }
    for h in &hands {
        for s in window_samples(&h.recording, &h.truth, crate::DEFAULT_FLOOR_SPO2)? {
            histogram.add(s.label);
        }
    }
    let summary = StudySummary {
        subjects: spec.n_subjects,
        recordings: hands.len(),
        frames: hands.iter().map(|h| h.recording.len()).sum(),
        samples: histogram.total(),
        histogram,
        max_clipped_fraction: max_clipped,
    };
    Ok((Dataset { hands }, summary))
}

/// Renders a study and writes it, plus [`STUDY_FILE`], under `out_dir`.
pub fn generate_study(spec: &StudySpec, out_dir: &Path) -> Result<StudySummary> {
    let (dataset, summary) = build_study(spec)?;
    fs::create_dir_all(out_dir).map_err(|source| SynthError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    dataset.write(out_dir)?;
    let path = out_dir.join(STUDY_FILE);
    let json = serde_json::to_string_pretty(&StudyFile {
        spec,
        summary: &summary,
    })
    .expect("study serializes");
    fs::write(&path, json + "\n").map_err(|source| SynthError::Io { path, source })?;
    Ok(summary)
}
