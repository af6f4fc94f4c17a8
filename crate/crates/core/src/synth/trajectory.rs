use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Result, SynthError};
use crate::ingest::{GroundTruthSeries, Reading};

/// Shortest plateau the staircase may contain.
pub const MIN_PLATEAU_SEC: f64 = 20.0;

/// Longest smoothing ramp between two plateaus.
const MAX_RAMP_SEC: f64 = 30.0;

/// Stair-stepped desaturation protocol for one subject.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProtocolSpec {
    pub duration: f64,
    pub start_spo2: f64,
    pub floor_spo2: f64,
    pub n_plateaus: usize,
    /// Each plateau after the first is offset by `U(-jitter, jitter)`.
    pub plateau_jitter: f64,
    pub heart_rate: f64,
    pub seed: u64,
}

impl Default for ProtocolSpec {
    fn default() -> Self {
        ProtocolSpec {
            duration: 960.0,
            start_spo2: 98.0,
            floor_spo2: 70.0,
            n_plateaus: 8,
            plateau_jitter: 1.0,
            heart_rate: 75.0,
            seed: 0,
        }
    }
}

impl ProtocolSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(SynthError::InvalidProtocol(m));
        if !(self.floor_spo2 < self.start_spo2 && self.start_spo2 <= 100.0) {
            return bad(format!(
                "need floor < start <= 100, got floor {} start {}",
                self.floor_spo2, self.start_spo2
            ));
        }
        if self.floor_spo2 < 2.0 {
            return bad(format!("floor {} too low", self.floor_spo2));
        }
        if !(self.duration >= 3.0) {
            return bad(format!("duration {} s shorter than one 3 s window", self.duration));
        }
        if !(0.0..=1.5).contains(&self.plateau_jitter) {
            return bad(format!("plateau jitter {} outside [0, 1.5]", self.plateau_jitter));
        }
        if !(20.0..=250.0).contains(&self.heart_rate) {
            return bad(format!("heart rate {} bpm outside [20, 250]", self.heart_rate));
        }
        if self.n_plateaus == 0 || self.duration / (self.n_plateaus as f64) < MIN_PLATEAU_SEC {
            return Err(SynthError::InfeasiblePlateaus {
                plateaus: self.n_plateaus,
                duration: self.duration,
                min: MIN_PLATEAU_SEC,
            });
        }
        if self.n_plateaus > 1 {
            let step = (self.start_spo2 - self.floor_spo2) / (self.n_plateaus - 1) as f64;
            if 2.0 * self.plateau_jitter >= step && self.plateau_jitter > 0.0 {
                return bad(format!(
                    "jitter {} too large for {step:.2}-point plateau steps",
                    self.plateau_jitter
                ));
            }
        }
        Ok(())
    }

    /// Plateau levels, first at `start_spo2`, last near `floor_spo2`.
    pub fn plateau_levels(&self) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let n = self.n_plateaus;
        (0..n)
            .map(|k| {
                if k == 0 {
                    return self.start_spo2;
                }
                let base = self.start_spo2
                    - (self.start_spo2 - self.floor_spo2) * k as f64 / (n - 1) as f64;
                let jitter = if self.plateau_jitter > 0.0 {
                    rng.random_range(-self.plateau_jitter..=self.plateau_jitter)
                } else {
                    0.0
                };
                (base + jitter).min(100.0)
            })
            .collect()
    }
}

/// Reference SpO₂ at 1 Hz: plateaus joined by raised-cosine ramps, rounded
/// to whole percent like a bedside oximeter display.
pub fn trajectory(spec: &ProtocolSpec) -> Result<GroundTruthSeries> {
    spec.validate()?;
    let levels = spec.plateau_levels();
    let n = levels.len();
    let plateau = spec.duration / n as f64;
    let ramp = MAX_RAMP_SEC.min(plateau / 2.0);
    let count = spec.duration.floor() as usize;
    let lo = spec.floor_spo2 - 2.0;
    let readings = (0..count)
        .map(|i| {
            let t = i as f64;
            let k = ((t / plateau).floor() as usize).min(n - 1);
            let mut s = levels[k];
            // ramp straddling the boundary into plateau k or k + 1
            for (b, from, to) in [(k, k.wrapping_sub(1), k), (k + 1, k, k + 1)] {
                if b == 0 || b >= n {
                    continue;
                }
                let start = b as f64 * plateau - ramp / 2.0;
                let u = (t - start) / ramp;
                if (0.0..1.0).contains(&u) {
                    s = levels[from] + (levels[to] - levels[from]) * (1.0 - (PI * u).cos()) / 2.0;
                }
            }
            Reading {
                t_sec: t,
                spo2: s.round().clamp(lo, 100.0),
            }
        })
        .collect();
    Ok(GroundTruthSeries::new(readings)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_plateau_is_constant() {
        let spec = ProtocolSpec {
            n_plateaus: 1,
            ..ProtocolSpec::default()
        };
        let gt = trajectory(&spec).unwrap();
        assert!(gt.readings().iter().all(|r| r.spo2 == 98.0));
    }

    #[test]
    fn default_bounds_and_staircase() {
        for seed in 0..20 {
            let spec = ProtocolSpec {
                seed,
                ..ProtocolSpec::default()
            };
            let gt = trajectory(&spec).unwrap();
            assert_eq!(gt.len(), 960);
            let vals: Vec<f64> = gt.readings().iter().map(|r| r.spo2).collect();
            assert!(vals.iter().all(|&v| (68.0..=100.0).contains(&v)));
            // plateau means over the flat middle of each plateau
            let means: Vec<f64> = (0..8)
                .map(|k| {
                    let mid = &vals[k * 120 + 20..k * 120 + 100];
                    mid.iter().sum::<f64>() / mid.len() as f64
                })
                .collect();
            assert!(means.windows(2).all(|w| w[1] <= w[0]), "{means:?}");
        }
    }

    #[test]
    fn ramps_are_smooth() {
        let gt = trajectory(&ProtocolSpec::default()).unwrap();
        let r = gt.readings();
        assert!(r.windows(2).all(|w| (w[1].spo2 - w[0].spo2).abs() <= 1.0));
    }

    #[test]
    fn infeasible_and_invalid() {
        let too_many = ProtocolSpec {
            n_plateaus: 100,
            ..ProtocolSpec::default()
        };
        assert!(matches!(
            trajectory(&too_many),
            Err(SynthError::InfeasiblePlateaus { .. })
        ));
        let inverted = ProtocolSpec {
            floor_spo2: 99.0,
            ..ProtocolSpec::default()
        };
        assert!(matches!(trajectory(&inverted), Err(SynthError::InvalidProtocol(_))));
    }
}
