use camox::ingest::dataset::Dataset;
use camox::ingest::{compute_channel_stats, make_split_plan, window_samples, SubjectId};
use camox::pipeline::{ablation_run, prepare_split, run_loocv, train_split, PipelineError, TrainConfig};
use camox::synth::{build_study, ProtocolSpec, StudySpec};

fn study(n: usize, seed: u64) -> Dataset {
    let spec = StudySpec {
        n_subjects: n,
        seed,
        protocol: ProtocolSpec {
            duration: 200.0,
            n_plateaus: 5,
            ..ProtocolSpec::default()
        },
        duration_jitter: 0.1,
        ..StudySpec::default()
    };
    build_study(&spec).unwrap().0
}

fn quick() -> TrainConfig {
    TrainConfig {
        epochs: 2,
        batch_size: 128,
        lr: 1e-4,
        ..TrainConfig::default()
    }
}

#[test]
fn three_subjects_give_three_splits_covering_all_samples() {
    let ds = study(3, 1);
    let expected: usize = ds
        .hands
        .iter()
        .map(|h| window_samples(&h.recording, &h.truth, 70.0).unwrap().len())
        .sum();
    let run = run_loocv(&ds, &quick(), 1).unwrap();
    assert_eq!(run.splits.len(), 3);
    assert_eq!(run.predictions.len(), expected);
    for r in &run.predictions.rows {
        let split = &run.splits[r.split_id];
        assert_eq!(split.test, r.subject_id);
        assert!(!split.train.contains(&r.subject_id) && split.val != r.subject_id);
        assert!(r.ground_truth >= 70.0);
    }
    // Pooled MAE equals the sample-weighted mean of per-split MAEs.
    let direct = camox::metrics::mae(&run.predictions).unwrap();
    assert!((run.pooled_mae() - direct).abs() <= 1e-9);
}

#[test]
fn exclusion_removes_subject() {
    let ds = study(4, 2);
    let cfg = TrainConfig {
        subject_exclusions: vec![SubjectId(3)],
        epochs: 1,
        ..quick()
    };
    let run = run_loocv(&ds, &cfg, 1).unwrap();
    assert_eq!(run.predictions.subjects(), vec![SubjectId(1), SubjectId(2), SubjectId(4)]);
    for s in &run.splits {
        assert!(!s.train.contains(&SubjectId(3)) && s.val != SubjectId(3));
    }
}

#[test]
fn zero_epochs_returns_initial_network() {
    let ds = study(3, 3);
    let plan = make_split_plan(&ds.subjects(), &[]).unwrap();
    let cfg = TrainConfig {
        epochs: 0,
        ..quick()
    };
    let (p, t) = train_split(&ds, 0, &plan.splits[0], &cfg).unwrap();
    assert!(t.history.is_empty());
    assert_eq!(t.best_epoch, None);
    // The untrained network predicts close to the training-label mean.
    let pred = t.network.forward(&p.val[0].window).unwrap();
    assert!((pred - p.train_label_mean).abs() < 5.0, "{pred} vs {}", p.train_label_mean);
}

#[test]
fn statistics_come_from_training_subjects_only() {
    let ds = study(4, 4);
    let plan = make_split_plan(&ds.subjects(), &[]).unwrap();
    for (i, split) in plan.splits.iter().enumerate() {
        let p = prepare_split(&ds, i, split, &quick()).unwrap();
        let train_only = compute_channel_stats(
            ds.hands.iter().filter(|h| split.train.contains(&h.subject_id())).map(|h| &h.recording),
        )
        .unwrap();
        assert_eq!(p.stats, train_only);
        assert!(p.train.iter().all(|s| split.train.contains(&s.subject_id)));
        assert!(p.val.iter().all(|s| s.subject_id == split.val));
        assert!(p.test.iter().all(|s| s.subject_id == split.test));
    }
}

#[test]
fn runs_are_reproducible_and_thread_count_independent() {
    let ds = study(3, 5);
    let a = run_loocv(&ds, &quick(), 1).unwrap();
    let b = run_loocv(&ds, &quick(), 3).unwrap();
    assert_eq!(a.predictions, b.predictions);
    for (x, y) in a.splits.iter().zip(&b.splits) {
        assert_eq!(x.network, y.network);
        assert_eq!(x.history, y.history);
    }
    let other = run_loocv(&ds, &TrainConfig { seed: 9, ..quick() }, 1).unwrap();
    assert_ne!(a.predictions, other.predictions);
}

#[test]
fn best_epoch_is_the_validation_minimum() {
    let ds = study(3, 6);
    let run = run_loocv(&ds, &TrainConfig { epochs: 4, ..quick() }, 1).unwrap();
    for s in &run.splits {
        let best = s.best_epoch.unwrap();
        let min = s.history.iter().map(|h| h.val_mae).fold(f64::INFINITY, f64::min);
        assert_eq!(s.history[best].val_mae, min);
        assert_eq!(s.best_val_mae, Some(min));
    }
}

#[test]
fn ablation_at_default_floor_matches_loocv() {
    let ds = study(3, 7);
    let cfg = TrainConfig { epochs: 1, ..quick() };
    let rows = ablation_run(&ds, &cfg, &[70.0, 85.0], 1).unwrap();
    let run = run_loocv(&ds, &cfg, 1).unwrap();
    assert_eq!(rows[0].pooled_mae, run.pooled_mae());
    assert_eq!(rows[0].samples, run.predictions.len());
    assert!(rows[1].samples < rows[0].samples);
    assert!(ablation_run(&ds, &cfg, &[65.0], 1).is_err());
}

#[test]
fn too_few_subjects_after_exclusion() {
    let ds = study(3, 8);
    let cfg = TrainConfig {
        subject_exclusions: vec![SubjectId(1)],
        ..quick()
    };
    assert!(matches!(run_loocv(&ds, &cfg, 1), Err(PipelineError::Ingest(_))));
}

#[test]
fn floor_leaving_a_role_empty_names_the_split() {
    let ds = study(3, 9);
    let cfg = TrainConfig {
        floor_spo2: 99.5,
        ..quick()
    };
    match run_loocv(&ds, &cfg, 1) {
        Err(e @ PipelineError::Split { .. }) => {
            assert!(matches!(e.root(), PipelineError::EmptyRole { .. }), "{e}");
        }
        other => panic!("expected split error, got {other:?}"),
    }
}
