//! On-disk dataset layout:
//!
//! ```text
//! <root>/subject_<id>/<left|right>/ppg.csv    frame_idx,t_sec,r_mean,g_mean,b_mean
//!                                  spo2.csv   t_sec,spo2
//!                                  meta.json  fps, gains, tissue_flags, ...
//! ```

use std::collections::BTreeSet;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{
    CaptureMeta, GroundTruthSeries, Hand, IngestError, PpgRecording, Reading, Result, SubjectId,
};

pub const PPG_FILE: &str = "ppg.csv";
pub const SPO2_FILE: &str = "spo2.csv";
pub const META_FILE: &str = "meta.json";

/// Contents of a hand directory's `meta.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HandMeta {
    pub fps: f64,
    pub gains: [f64; 3],
    #[serde(default)]
    pub tissue_flags: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skin_tone: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gender: Option<String>,
    #[serde(default)]
    pub notes: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl HandMeta {
    pub fn capture(&self, subject_id: SubjectId, hand: Hand) -> CaptureMeta {
        CaptureMeta {
            fps: self.fps,
            gains: self.gains,
            hand,
            subject_id,
            tissue_flags: self.tissue_flags.clone(),
        }
    }
}

/// Everything recorded for one hand of one subject.
#[derive(Debug, Clone, PartialEq)]
pub struct HandRecording {
    pub recording: PpgRecording,
    pub truth: GroundTruthSeries,
    pub meta: HandMeta,
}

impl HandRecording {
    pub fn subject_id(&self) -> SubjectId {
        self.recording.subject_id
    }

    pub fn hand(&self) -> Hand {
        self.recording.hand
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub hands: Vec<HandRecording>,
}

#[derive(Serialize, Deserialize)]
struct PpgRow {
    frame_idx: usize,
    t_sec: f64,
    r_mean: f64,
    g_mean: f64,
    b_mean: f64,
}

impl Dataset {
    pub fn subjects(&self) -> Vec<SubjectId> {
        self.hands
            .iter()
            .map(|h| h.subject_id())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    pub fn hands_of(&self, subject: SubjectId) -> impl Iterator<Item = &HandRecording> {
        self.hands.iter().filter(move |h| h.subject_id() == subject)
    }

    /// Reads every `subject_<id>/<hand>` directory under `root`, ordered by
    /// subject id then hand.
    pub fn load(root: &Path) -> Result<Dataset> {
        let entries = fs::read_dir(root).map_err(|e| IngestError::io(root, e))?;
        let mut subject_dirs = Vec::new();
        for entry in entries {
            let entry = entry.map_err(|e| IngestError::io(root, e))?;
            let name = entry.file_name().to_string_lossy().into_owned();
            if let Some(id) = name.strip_prefix("subject_") {
                let id: SubjectId = id
                    .parse()
                    .map_err(|e| IngestError::parse(entry.path(), format!("bad subject id: {e}")))?;
                subject_dirs.push((id, entry.path()));
            }
        }
        subject_dirs.sort();
        let mut hands = Vec::new();
        for (id, dir) in subject_dirs {
            for hand in Hand::BOTH {
                let hand_dir = dir.join(hand.as_str());
                if hand_dir.is_dir() {
                    hands.push(read_hand(&hand_dir, id, hand)?);
                }
            }
        }
        if hands.is_empty() {
            return Err(IngestError::parse(root, "no subject_<id>/<hand> directories found"));
        }
        Ok(Dataset { hands })
    }

    pub fn write(&self, root: &Path) -> Result<()> {
        for h in &self.hands {
            write_hand(root, h)?;
        }
        Ok(())
    }
}

pub fn hand_dir(root: &Path, subject: SubjectId, hand: Hand) -> PathBuf {
    root.join(format!("subject_{subject}")).join(hand.as_str())
}

pub fn read_hand(dir: &Path, subject: SubjectId, hand: Hand) -> Result<HandRecording> {
    let meta_path = dir.join(META_FILE);
    let meta_text = fs::read_to_string(&meta_path).map_err(|e| IngestError::io(&meta_path, e))?;
    let meta: HandMeta =
        serde_json::from_str(&meta_text).map_err(|e| IngestError::parse(&meta_path, e))?;
    let recording = read_ppg_csv(&dir.join(PPG_FILE), &meta.capture(subject, hand))?;
    let truth = read_spo2_csv(&dir.join(SPO2_FILE))?;
    Ok(HandRecording {
        recording,
        truth,
        meta,
    })
}

pub fn write_hand(root: &Path, h: &HandRecording) -> Result<()> {
    let dir = hand_dir(root, h.subject_id(), h.hand());
    fs::create_dir_all(&dir).map_err(|e| IngestError::io(&dir, e))?;
    write_ppg_csv(&dir.join(PPG_FILE), &h.recording)?;
    write_spo2_csv(&dir.join(SPO2_FILE), &h.truth)?;
    let meta_path = dir.join(META_FILE);
    let json = serde_json::to_string_pretty(&h.meta).expect("meta serializes");
    fs::write(&meta_path, json + "\n").map_err(|e| IngestError::io(&meta_path, e))
}

fn csv_err(path: &Path, e: csv::Error) -> IngestError {
    IngestError::parse(path, e)
}

pub fn read_ppg_csv(path: &Path, meta: &CaptureMeta) -> Result<PpgRecording> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut channels: [Vec<f64>; 3] = Default::default();
    for (i, row) in rdr.deserialize::<PpgRow>().enumerate() {
        let row = row.map_err(|e| csv_err(path, e))?;
        if row.frame_idx != i {
            return Err(IngestError::parse(
                path,
                format!("row {i}: frame_idx {} out of sequence", row.frame_idx),
            ));
        }
        channels[0].push(row.r_mean);
        channels[1].push(row.g_mean);
        channels[2].push(row.b_mean);
    }
    PpgRecording::new(channels, meta)
}

pub fn write_ppg_csv(path: &Path, rec: &PpgRecording) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    for j in 0..rec.len() {
        let [r, g, b] = rec.column(j);
        w.serialize(PpgRow {
            frame_idx: j,
            t_sec: j as f64 / rec.fps,
            r_mean: r,
            g_mean: g,
            b_mean: b,
        })
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| IngestError::io(path, e))
}

pub fn read_spo2_csv(path: &Path) -> Result<GroundTruthSeries> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let readings = rdr
        .deserialize::<Reading>()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| csv_err(path, e))?;
    GroundTruthSeries::new(readings).map_err(|e| IngestError::parse(path, e))
}

pub fn write_spo2_csv(path: &Path, gt: &GroundTruthSeries) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    for r in gt.readings() {
        w.serialize(r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| IngestError::io(path, e))
}

/// SHA-256 of one file, hex encoded.
pub fn file_sha256(path: &Path) -> Result<String> {
    let mut f = fs::File::open(path).map_err(|e| IngestError::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf).map_err(|e| IngestError::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

/// Content hash of a directory tree: relative paths and file bytes, in
/// sorted path order. Top-level names in `skip` are ignored.
pub fn tree_sha256(root: &Path, skip: &[&str]) -> Result<String> {
    let mut files = Vec::new();
    collect_files(root, root, skip, &mut files)?;
    files.sort();
    let mut hasher = Sha256::new();
    for rel in files {
        let rel_str = rel.to_string_lossy().replace('\\', "/");
        let bytes = fs::read(root.join(&rel)).map_err(|e| IngestError::io(root.join(&rel), e))?;
        hasher.update((rel_str.len() as u64).to_le_bytes());
        hasher.update(rel_str.as_bytes());
        hasher.update((bytes.len() as u64).to_le_bytes());
        hasher.update(&bytes);
    }
    Ok(hex::encode(hasher.finalize()))
}

fn collect_files(root: &Path, dir: &Path, skip: &[&str], out: &mut Vec<PathBuf>) -> Result<()> {
    for entry in fs::read_dir(dir).map_err(|e| IngestError::io(dir, e))? {
        let entry = entry.map_err(|e| IngestError::io(dir, e))?;
        let path = entry.path();
        if dir == root && skip.iter().any(|s| entry.file_name() == *s) {
            continue;
        }
        if path.is_dir() {
            collect_files(root, &path, skip, out)?;
        } else {
            out.push(path.strip_prefix(root).unwrap().to_path_buf());
        }
    }
    Ok(())
}
