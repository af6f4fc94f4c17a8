use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::calibration::ratio_for_spo2;
use super::{Result, SynthError};
use crate::ingest::{CaptureMeta, FrameSequence, GroundTruthSeries, PpgRecording};

/// Blue perfusion index (AC/DC), chosen so that a unit-RMS pulse gives a
/// blue standard deviation of about 6.86 on a mean of 51.5.
const BLUE_PERFUSION: f64 = 6.86 / 51.5;
const GREEN_PERFUSION: f64 = 0.08;
/// Relative amplitude and phase of the second pulse harmonic.
const HARMONIC_GAIN: f64 = 0.4;
const HARMONIC_PHASE: f64 = -PI / 3.0;
/// Slow heart-rate modulation (fraction of rate, period in seconds).
const HRV_DEPTH: f64 = 0.05;
const HRV_PERIOD: f64 = 30.0;

/// What happens when amplified intensities leave the sensor range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClipPolicy {
    /// Refuse to render a channel that is clipped on every frame.
    #[default]
    Reject,
    /// Saturate silently, as an auto-exposure camera would.
    Saturate,
}

/// Sensor model: per-channel analogue gains, quantization and noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CameraModel {
    pub gains: [f64; 3],
    pub bit_depth: u32,
    /// Std of additive Gaussian noise per frame, output intensity units.
    pub noise_sigma: f64,
    /// Amplitude of the slow sinusoidal baseline drift, output units.
    pub drift_amplitude: f64,
    pub drift_period: f64,
    /// Pre-gain DC intensity per channel at 100 % saturation.
    pub base_intensity: [f64; 3],
    /// Fractional red DC loss per SpO₂ point below 100. Off by default: the
    /// level cue is swamped by between-subject intensity differences.
    pub red_dc_slope: f64,
    pub width: u32,
    pub height: u32,
    pub clip_policy: ClipPolicy,
}

impl Default for CameraModel {
    fn default() -> Self {
        CameraModel {
            gains: [1.0, 3.0, 18.0],
            bit_depth: 8,
            noise_sigma: 0.5,
            drift_amplitude: 2.0,
            drift_period: 60.0,
            base_intensity: [120.0, 100.0 / 3.0, 51.5 / 18.0],
            red_dc_slope: 0.0,
            width: 176,
            height: 144,
            clip_policy: ClipPolicy::Reject,
        }
    }
}

impl CameraModel {
    pub fn max_value(&self) -> f64 {
        ((1u64 << self.bit_depth) - 1) as f64
    }

    /// Same camera with noise and drift switched off.
    pub fn noiseless(&self) -> Self {
        CameraModel {
            noise_sigma: 0.0,
            drift_amplitude: 0.0,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(SynthError::InvalidCamera(m.into()));
        if !(1..=16).contains(&self.bit_depth) {
            return bad("bit depth must be within 1..=16");
        }
        if self.gains.iter().any(|g| !(*g > 0.0)) {
            return bad("gains must be positive");
        }
        if self.base_intensity.iter().any(|b| !(*b > 0.0)) {
            return bad("base intensities must be positive");
        }
        if self.noise_sigma < 0.0 || self.drift_amplitude < 0.0 || !(self.drift_period > 0.0) {
            return bad("noise and drift must be non-negative with a positive period");
        }
        if self.width == 0 || self.height == 0 {
            return bad("frame size must be non-zero");
        }
        Ok(())
    }
}

/// Skin-tissue aberration: damped pulsatile component and raised baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TissueProfile {
    pub ac_damping: f64,
    /// Added to every channel after amplification, intensity units.
    pub dc_shift: f64,
}

impl Default for TissueProfile {
    fn default() -> Self {
        TissueProfile {
            ac_damping: 1.0,
            dc_shift: 0.0,
        }
    }
}

impl TissueProfile {
    /// Thickened fingertip skin: half the pulsatile amplitude and a blue
    /// baseline lifted from about 51.5 to about 84.5.
    pub fn callus() -> Self {
        TissueProfile {
            ac_damping: 0.5,
            dc_shift: 33.0,
        }
    }

    pub fn is_aberrant(&self) -> bool {
        *self != TissueProfile::default()
    }
}

/// Rendered recording plus the fraction of clipped samples per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderOutput {
    pub recording: PpgRecording,
    pub clipped_fraction: [f64; 3],
    /// Amplified intensities before noise, clipping and quantization.
    pub clean: [Vec<f64>; 3],
}

/// Unit-RMS periodic pulse with a sharper systolic upstroke.
pub(crate) fn pulse_shape(phase: f64) -> f64 {
    let rms = (0.5 + 0.5 * HARMONIC_GAIN * HARMONIC_GAIN).sqrt();
    (phase.sin() + HARMONIC_GAIN * (2.0 * phase + HARMONIC_PHASE).sin()) / rms
}

/// Cardiac phase with a slow sinusoidal rate modulation.
fn cardiac_phase(t: f64, heart_rate: f64, offset: f64) -> f64 {
    let f = heart_rate / 60.0;
    let w = 2.0 * PI / HRV_PERIOD;
    offset + 2.0 * PI * f * (t + HRV_DEPTH / w * (1.0 - (w * t).cos()))
}

/// Pre-gain DC and perfusion index per channel at saturation `s`.
pub(crate) fn channel_model(camera: &CameraModel, s: f64) -> [(f64, f64); 3] {
    let red_dc = camera.base_intensity[0] * (1.0 - camera.red_dc_slope * (100.0 - s));
    let red_pi = ratio_for_spo2(s) * BLUE_PERFUSION;
    [
        (red_dc, red_pi),
        (camera.base_intensity[1], GREEN_PERFUSION),
        (camera.base_intensity[2], BLUE_PERFUSION),
    ]
}

/// Renders channel means for a hand whose saturation follows `gt`.
pub fn render_ppg(
    gt: &GroundTruthSeries,
    camera: &CameraModel,
    tissue: &TissueProfile,
    meta: &CaptureMeta,
    heart_rate: f64,
    seed: u64,
) -> Result<RenderOutput> {
    camera.validate()?;
    if gt.is_empty() {
        return Err(SynthError::EmptyTruth);
    }
    if !(tissue.ac_damping > 0.0 && tissue.ac_damping <= 1.0) {
        return Err(SynthError::InvalidCamera(format!(
            "ac_damping {} outside (0, 1]",
            tissue.ac_damping
        )));
    }
    let fps = meta.fps;
    let last = gt.readings().last().unwrap().t_sec;
    let n = ((last + 1.0) * fps).round() as usize;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pulse_offset = rng.random_range(0.0..2.0 * PI);
    let drift_offset = rng.random_range(0.0..2.0 * PI);
    let noise = Normal::new(0.0, camera.noise_sigma.max(0.0)).expect("finite sigma");
    let top = camera.max_value();

    let mut clean: [Vec<f64>; 3] = Default::default();
    let mut out: [Vec<f64>; 3] = Default::default();
    let mut clipped = [0usize; 3];
    for j in 0..n {
        let t = j as f64 / fps;
        let s = gt.spo2_at(t).unwrap();
        let p = pulse_shape(cardiac_phase(t, heart_rate, pulse_offset));
        let drift = camera.drift_amplitude
            * (2.0 * PI * t / camera.drift_period + drift_offset).sin();
        let model = channel_model(camera, s);
        for c in 0..3 {
            let (dc, pi) = model[c];
            let amplified = camera.gains[c] * dc * (1.0 + tissue.ac_damping * pi * p);
            clean[c].push(amplified);
            let mut v = amplified + tissue.dc_shift + drift;
            if camera.noise_sigma > 0.0 {
                v += noise.sample(&mut rng);
            }
            if v < 0.0 || v > top {
                clipped[c] += 1;
            }
            out[c].push(v.clamp(0.0, top).round());
        }
    }
    let clipped_fraction = clipped.map(|k| k as f64 / n as f64);
    if camera.clip_policy == ClipPolicy::Reject {
        if let Some(channel) = clipped.iter().position(|&k| k == n) {
            return Err(SynthError::FullyClipped {
                channel,
                fraction: clipped_fraction[channel],
            });
        }
    }
    // Quantized values may exceed 255 for bit depths above 8; squeeze them
    // into the 8-bit range the recording type carries.
    if top > 255.0 {
        for row in out.iter_mut() {
            for v in row.iter_mut() {
                *v = (*v * 255.0 / top).round();
            }
        }
    }
    let recording = PpgRecording::new(out, meta)?;
    Ok(RenderOutput {
        recording,
        clipped_fraction,
        clean,
    })
}

/// Constant-colour frames whose channel means reproduce the recording after
/// rounding to 8 bits.
pub fn render_frames(rec: &PpgRecording, camera: &CameraModel) -> Result<FrameSequence> {
    let px = camera.width as usize * camera.height as usize;
    let frames = (0..rec.len())
        .map(|j| {
            let rgb = rec.column(j).map(|v| v.round().clamp(0.0, 255.0) as u8);
            let mut f = Vec::with_capacity(px * 3);
            for _ in 0..px {
                f.extend_from_slice(&rgb);
            }
            f
        })
        .collect();
    Ok(FrameSequence::new(
        camera.width,
        camera.height,
        rec.fps.round() as u32,
        frames,
    )?)
}
