use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{Hand, IngestError, PpgRecording, Result, SubjectId};

/// Magic prefix of a raw frame file.
pub const FRAME_MAGIC: &[u8; 6] = b"CAMOX1";

const HEADER_LEN: usize = 6 + 4 * 4;

/// Capture metadata attached to an extracted recording.
#[derive(Debug, Clone, PartialEq)]
pub struct CaptureMeta {
    pub fps: f64,
    pub gains: [f64; 3],
    pub hand: Hand,
    pub subject_id: SubjectId,
    pub tissue_flags: Vec<String>,
}

impl CaptureMeta {
    pub fn new(subject_id: SubjectId, hand: Hand) -> Self {
        CaptureMeta {
            fps: 30.0,
            gains: [1.0, 3.0, 18.0],
            hand,
            subject_id,
            tissue_flags: Vec::new(),
        }
    }
}

/// An ordered list of RGB24 frames, each `width * height * 3` bytes, row-major
/// and channel-interleaved.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    width: u32,
    height: u32,
    fps: u32,
    frames: Vec<Vec<u8>>,
}

impl FrameSequence {
    pub fn new(width: u32, height: u32, fps: u32, frames: Vec<Vec<u8>>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(IngestError::InvalidDimensions { width, height });
        }
        let expected = frame_bytes(width, height);
        for (index, f) in frames.iter().enumerate() {
            if f.len() != expected {
                return Err(IngestError::InconsistentFrame {
                    index,
                    width,
                    height,
                    expected,
                    actual: f.len(),
                });
            }
        }
        Ok(FrameSequence {
            width,
            height,
            fps,
            frames,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn fps(&self) -> u32 {
        self.fps
    }

    pub fn frames(&self) -> &[Vec<u8>] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn header(&self) -> FrameHeader {
        FrameHeader {
            width: self.width,
            height: self.height,
            fps: self.fps,
            frame_count: self.frames.len() as u32,
        }
    }
}

fn frame_bytes(width: u32, height: u32) -> usize {
    width as usize * height as usize * 3
}

/// Per-channel arithmetic mean over all pixels of one frame.
fn frame_means(frame: &[u8]) -> [f64; 3] {
    let mut sums = [0u64; 3];
    for px in frame.chunks_exact(3) {
        sums[0] += px[0] as u64;
        sums[1] += px[1] as u64;
        sums[2] += px[2] as u64;
    }
    let n = (frame.len() / 3) as f64;
    sums.map(|s| s as f64 / n)
}

/// Reduces every frame to its (R, G, B) channel means.
///
/// The recording's frame rate is taken from the sequence; the rest of the
/// capture metadata is copied from `meta`.
pub fn extract_ppg(frames: &FrameSequence, meta: &CaptureMeta) -> Result<PpgRecording> {
    if frames.is_empty() {
        return Err(IngestError::EmptySequence);
    }
    let mut channels: [Vec<f64>; 3] = Default::default();
    for c in channels.iter_mut() {
        c.reserve(frames.len());
    }
    for frame in frames.frames() {
        let m = frame_means(frame);
        for c in 0..3 {
            channels[c].push(m[c]);
        }
    }
    let meta = CaptureMeta {
        fps: frames.fps() as f64,
        ..meta.clone()
    };
    PpgRecording::new(channels, &meta)
}

/// Fixed-size header of a raw frame file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameHeader {
    pub width: u32,
    pub height: u32,
    pub fps: u32,
    pub frame_count: u32,
}

impl FrameHeader {
    pub fn payload_len(&self) -> u64 {
        self.frame_count as u64 * frame_bytes(self.width, self.height) as u64
    }

    fn read(r: &mut impl Read) -> Result<Self> {
        let mut buf = [0u8; HEADER_LEN];
        let got = read_full(r, &mut buf).map_err(|e| IngestError::io("<frames>", e))?;
        if got < FRAME_MAGIC.len() || &buf[..6] != FRAME_MAGIC {
            return Err(IngestError::BadMagic {
                expected: String::from_utf8_lossy(FRAME_MAGIC).into_owned(),
                found: String::from_utf8_lossy(&buf[..got.min(6)]).into_owned(),
            });
        }
        if got < HEADER_LEN {
            return Err(IngestError::Truncated {
                expected: HEADER_LEN as u64,
                actual: got as u64,
            });
        }
        let word = |i: usize| u32::from_le_bytes(buf[6 + 4 * i..10 + 4 * i].try_into().unwrap());
        let header = FrameHeader {
            width: word(0),
            height: word(1),
            fps: word(2),
            frame_count: word(3),
        };
        if header.width == 0 || header.height == 0 {
            return Err(IngestError::InvalidDimensions {
                width: header.width,
                height: header.height,
            });
        }
        Ok(header)
    }

    fn write(&self, w: &mut impl Write) -> std::io::Result<()> {
        w.write_all(FRAME_MAGIC)?;
        for v in [self.width, self.height, self.fps, self.frame_count] {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }
}

fn read_full(r: &mut impl Read, buf: &mut [u8]) -> std::io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(filled)
}

fn truncated(header: &FrameHeader, frames_read: u64, partial: usize, rest: &mut impl Read) -> IngestError {
    let tail = std::io::copy(rest, &mut std::io::sink()).unwrap_or(0);
    let fb = frame_bytes(header.width, header.height) as u64;
    IngestError::Truncated {
        expected: header.payload_len(),
        actual: frames_read * fb + partial as u64 + tail,
    }
}

/// Streams a raw frame file, extracting channel means without holding
/// every frame in memory.
pub fn extract_ppg_from_reader(mut r: impl Read, meta: &CaptureMeta) -> Result<PpgRecording> {
    let header = FrameHeader::read(&mut r)?;
    if header.frame_count == 0 {
        return Err(IngestError::EmptySequence);
    }
    let mut buf = vec![0u8; frame_bytes(header.width, header.height)];
    let mut channels: [Vec<f64>; 3] = Default::default();
    for i in 0..header.frame_count as u64 {
        let got = read_full(&mut r, &mut buf).map_err(|e| IngestError::io("<frames>", e))?;
        if got < buf.len() {
            return Err(truncated(&header, i, got, &mut r));
        }
        let m = frame_means(&buf);
        for c in 0..3 {
            channels[c].push(m[c]);
        }
    }
    let meta = CaptureMeta {
        fps: header.fps as f64,
        ..meta.clone()
    };
    PpgRecording::new(channels, &meta)
}

/// Loads a whole raw frame file into memory.
pub fn read_frames(path: &Path) -> Result<FrameSequence> {
    let file = File::open(path).map_err(|e| IngestError::io(path, e))?;
    let mut r = BufReader::new(file);
    let header = FrameHeader::read(&mut r)?;
    let fb = frame_bytes(header.width, header.height);
    let mut frames = Vec::with_capacity(header.frame_count as usize);
    for i in 0..header.frame_count as u64 {
        let mut buf = vec![0u8; fb];
        let got = read_full(&mut r, &mut buf).map_err(|e| IngestError::io(path, e))?;
        if got < fb {
            return Err(truncated(&header, i, got, &mut r));
        }
        frames.push(buf);
    }
    FrameSequence::new(header.width, header.height, header.fps, frames)
}

pub fn write_frames(path: &Path, frames: &FrameSequence) -> Result<()> {
    let file = File::create(path).map_err(|e| IngestError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| IngestError::io(path, e);
    frames.header().write(&mut w).map_err(io)?;
    for f in frames.frames() {
        w.write_all(f).map_err(io)?;
    }
    w.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta() -> CaptureMeta {
        CaptureMeta::new(SubjectId(1), Hand::Left)
    }

    fn constant_frame(w: u32, h: u32, px: [u8; 3]) -> Vec<u8> {
        px.iter().copied().cycle().take(frame_bytes(w, h)).collect()
    }

    #[test]
    fn constant_frame_gives_its_colour() {
        let seq = FrameSequence::new(176, 144, 30, vec![constant_frame(176, 144, [10, 20, 30])])
            .unwrap();
        let rec = extract_ppg(&seq, &meta()).unwrap();
        assert_eq!(rec.column(0), [10.0, 20.0, 30.0]);
    }

    #[test]
    fn n_frames_give_3_by_n() {
        let frames = (0..7u8)
            .map(|i| constant_frame(176, 144, [i, i, i]))
            .collect();
        let rec = extract_ppg(&FrameSequence::new(176, 144, 30, frames).unwrap(), &meta()).unwrap();
        assert_eq!(rec.len(), 7);
        assert_eq!(rec.channels().len(), 3);
    }

    #[test]
    fn half_black_half_white_red() {
        let (w, h) = (176u32, 144u32);
        let mut frame = constant_frame(w, h, [0, 0, 0]);
        let npx = (w * h) as usize;
        for p in 0..npx / 2 {
            frame[3 * (2 * p)] = 255;
        }
        // direct summation over the raw buffer
        let oracle = frame.iter().step_by(3).map(|&v| v as f64).sum::<f64>() / npx as f64;
        assert_eq!(oracle, 127.5);
        let rec = extract_ppg(&FrameSequence::new(w, h, 30, vec![frame]).unwrap(), &meta()).unwrap();
        assert_eq!(rec.channel(0)[0], oracle);
    }

    #[test]
    fn rejects_empty_and_ragged() {
        let empty = FrameSequence::new(4, 4, 30, vec![]).unwrap();
        assert!(matches!(extract_ppg(&empty, &meta()), Err(IngestError::EmptySequence)));
        let ragged = FrameSequence::new(4, 4, 30, vec![vec![0; 48], vec![0; 47]]);
        assert!(matches!(ragged, Err(IngestError::InconsistentFrame { index: 1, .. })));
    }

    #[test]
    fn file_round_trip_and_truncation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.bin");
        let frames = (0..5u8).map(|i| constant_frame(8, 6, [i, 2 * i, 3 * i])).collect();
        let seq = FrameSequence::new(8, 6, 30, frames).unwrap();
        write_frames(&path, &seq).unwrap();
        assert_eq!(read_frames(&path).unwrap(), seq);

        let streamed =
            extract_ppg_from_reader(std::fs::File::open(&path).unwrap(), &meta()).unwrap();
        assert_eq!(streamed, extract_ppg(&seq, &meta()).unwrap());

        let bytes = std::fs::read(&path).unwrap();
        let cut = &bytes[..bytes.len() - 10];
        match extract_ppg_from_reader(cut, &meta()) {
            Err(IngestError::Truncated { expected, actual }) => {
                assert_eq!(expected, 5 * 8 * 6 * 3);
                assert_eq!(actual, expected - 10);
            }
            other => panic!("expected truncation, got {other:?}"),
        }
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(
            extract_ppg_from_reader(&bad[..], &meta()),
            Err(IngestError::BadMagic { .. })
        ));
    }
}
