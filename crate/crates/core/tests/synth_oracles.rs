use std::collections::BTreeMap;

use camox::ingest::{window_samples, CaptureMeta, GroundTruthSeries, Hand, Reading, SubjectId};
use camox::synth::calibration::{estimate_spo2, window_ratio};
use camox::synth::{
    build_study, render_ppg, trajectory, CameraModel, ClipPolicy, ProtocolSpec, StudySpec,
    TissueProfile,
};
use proptest::prelude::*;

fn std(xs: &[f64]) -> f64 {
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64).sqrt()
}

fn meta() -> CaptureMeta {
    CaptureMeta::new(SubjectId(1), Hand::Right)
}

fn flat(seconds: usize, s: f64) -> GroundTruthSeries {
    GroundTruthSeries::new(
        (0..seconds)
            .map(|t| Reading {
                t_sec: t as f64,
                spo2: s,
            })
            .collect(),
    )
    .unwrap()
}

#[test]
fn noiseless_ratio_of_ratios_recovers_every_window() {
    let camera = CameraModel::default().noiseless();
    for seed in 0..3 {
        let gt = trajectory(&ProtocolSpec {
            seed,
            ..ProtocolSpec::default()
        })
        .unwrap();
        let out = render_ppg(&gt, &camera, &TissueProfile::default(), &meta(), 60.0 + 10.0 * seed as f64, seed).unwrap();
        let samples = window_samples(&out.recording, &gt, 0.0).unwrap();
        assert!(samples.len() > 900);
        let worst = samples
            .iter()
            .map(|s| (estimate_spo2(s.row(0), s.row(2)) - s.label).abs())
            .fold(0.0, f64::max);
        assert!(worst <= 1.0, "seed {seed}: worst error {worst}");
    }
}

#[test]
fn clipped_channel_loses_its_pulse() {
    let base = CameraModel {
        clip_policy: ClipPolicy::Saturate,
        ..CameraModel::default()
    };
    let hot = CameraModel {
        gains: [1.0, 3.0 * 4.0, 18.0],
        ..base.clone()
    };
    let gt = flat(60, 95.0);
    let normal = render_ppg(&gt, &base, &TissueProfile::default(), &meta(), 75.0, 4).unwrap();
    let clipped = render_ppg(&gt, &hot, &TissueProfile::default(), &meta(), 75.0, 4).unwrap();
    assert!(clipped.clipped_fraction[1] >= 0.99, "{:?}", clipped.clipped_fraction);
    let ratio = std(clipped.recording.channel(1)) / std(normal.recording.channel(1));
    assert!(ratio < 0.1, "green std ratio {ratio}");
    // Reject policy refuses the fully clipped channel instead.
    let strict = CameraModel {
        clip_policy: ClipPolicy::Reject,
        ..hot
    };
    assert!(render_ppg(&gt, &strict, &TissueProfile::default(), &meta(), 75.0, 4).is_err());
}

#[test]
fn default_study_populates_hypoxemic_ranges() {
    let (ds, summary) = build_study(&StudySpec::default()).unwrap();
    assert_eq!(ds.hands.len(), 12);
    for h in &ds.hands {
        let minutes = h.recording.duration_sec() / 60.0;
        assert!((13.0..=19.0).contains(&minutes), "{minutes} min");
        for c in 0..3 {
            assert!(h
                .recording
                .channel(c)
                .iter()
                .all(|&v| v.fract() == 0.0 && (0.0..=255.0).contains(&v)));
        }
    }
    assert!(summary.histogram.count_in(65, 80) >= 1000, "{:?}", summary.histogram);
    assert!(summary.histogram.count_in(80, 90) >= 1000, "{:?}", summary.histogram);
    assert_eq!(summary.max_clipped_fraction, 0.0);
}

#[test]
fn callus_signature_is_confined_to_flagged_subject() {
    let spec = StudySpec {
        n_subjects: 4,
        protocol: ProtocolSpec {
            duration: 240.0,
            n_plateaus: 4,
            ..ProtocolSpec::default()
        },
        tissue: BTreeMap::from([(3, TissueProfile::callus())]),
        ..StudySpec::default()
    };
    let (ds, _) = build_study(&spec).unwrap();
    for h in &ds.hands {
        let blue = h.recording.channel(2);
        let mean = blue.iter().sum::<f64>() / blue.len() as f64;
        let ac = std(blue);
        if h.subject_id() == SubjectId(3) {
            assert_eq!(h.meta.tissue_flags, vec!["callus".to_string()]);
            assert!(mean > 75.0 && ac < 4.5, "callus mean {mean} std {ac}");
        } else {
            assert!(h.meta.tissue_flags.is_empty());
            assert!(mean < 60.0 && ac > 5.5, "normal mean {mean} std {ac}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ratio_increases_as_saturation_falls(s in 70.0f64..99.5, ds in 0.5f64..5.0, seed in 0u64..1000) {
        let hi = (s + ds).min(100.0);
        let camera = CameraModel::default().noiseless();
        let r = |level: f64| {
            let out = render_ppg(&flat(4, level), &camera, &TissueProfile::default(), &meta(), 75.0, seed).unwrap();
            let rec = out.recording;
            window_ratio(&rec.channel(0)[15..105], &rec.channel(2)[15..105])
        };
        prop_assert!(r(s) > r(hi));
    }

    #[test]
    fn rendered_values_are_8_bit_integers(s in 60.0f64..100.0, hr in 40.0f64..160.0, seed in 0u64..1000) {
        let out = render_ppg(&flat(3, s), &CameraModel::default(), &TissueProfile::callus(), &meta(), hr, seed).unwrap();
        for c in 0..3 {
            prop_assert!(out.recording.channel(c).iter().all(|&v| v.fract() == 0.0 && (0.0..=255.0).contains(&v)));
        }
    }
}
