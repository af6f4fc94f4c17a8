use std::fs::{self, File};
use std::io::BufReader;
use std::path::Path;
use std::process::ExitCode;

use camox::ingest::dataset::{write_ppg_csv, Dataset};
use camox::ingest::{extract_ppg_from_reader, CaptureMeta, Hand, SubjectId};
use camox::metrics::{build_report, spearman, write_report, ReportConfig};
use camox::nn::checkpoint;
use camox::pipeline::{ablation_run, read_ablation_csv, run_loocv, write_ablation_csv, PredictionSet, TrainConfig};
use camox::synth::{generate_study, StudySpec, TissueProfile};
use serde::de::DeserializeOwned;
use serde_json::json;

use crate::error::{CliError, CliResult, Exit};
use crate::manifest::{dataset_hash, now_unix, RunManifest};
use crate::{ExtractArgs, Global, ReportArgs, SynthArgs, TrainArgs};

pub const PREDICTIONS_FILE: &str = "predictions.csv";
pub const TRAINING_FILE: &str = "training.json";
pub const ABLATION_FILE: &str = "ablation.csv";
pub const DEFAULT_FLOORS: [f64; 5] = [70.0, 75.0, 80.0, 85.0, 90.0];

fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

/// Creates `dir`, refusing to mix outputs with an earlier run's files.
fn fresh_dir(dir: &Path) -> CliResult<()> {
    if dir.exists() {
        let mut entries = fs::read_dir(dir).map_err(|e| CliError::data(format!("{}: {e}", dir.display())))?;
        if entries.next().is_some() {
            return Err(CliError::usage(format!("output directory {} is not empty", dir.display())));
        }
    }
    fs::create_dir_all(dir).map_err(|e| CliError::data(format!("{}: {e}", dir.display())))
}

fn write_text(path: &Path, text: String) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

pub fn synth(g: &Global, a: SynthArgs) -> CliResult<ExitCode> {
    let started = now_unix();
    let mut spec: StudySpec = match a.spec.as_ref().or(g.config.as_ref()) {
        Some(p) => read_json(p)?,
        None => StudySpec::default(),
    };
    if let Some(seed) = g.seed {
        spec.seed = seed;
    }
    if let Some(n) = a.subjects {
        spec.n_subjects = n;
    }
    for id in &a.callus {
        spec.tissue.insert(*id, TissueProfile::callus());
    }
    fresh_dir(&a.out)?;
    let summary = generate_study(&spec, &a.out)?;
    let mut m = RunManifest::new("synth", spec.seed, &spec, started);
    m.dataset_root = Some(a.out.clone());
    m.dataset_hash = Some(dataset_hash(&a.out)?);
    let m = m.finish(&a.out)?;

    println!(
        "synthetic study: {} subjects, {} recordings, {} frames, {} samples at floor 70",
        summary.subjects, summary.recordings, summary.frames, summary.samples
    );
    println!("label histogram:");
    for (lo, n) in summary.histogram.lower_edges.iter().zip(&summary.histogram.counts) {
        if *lo >= 60 {
            println!("  [{lo:>3}, {:>3})  {n:>6}", lo + 5);
        }
    }
    println!(
        "65-80%: {}  80-90%: {}",
        summary.histogram.count_in(65, 80),
        summary.histogram.count_in(80, 90)
    );
    println!("dataset hash {}", m.dataset_hash.unwrap_or_default());
    Ok(ExitCode::SUCCESS)
}

pub fn extract(_g: &Global, a: ExtractArgs) -> CliResult<ExitCode> {
    let hand = match a.hand.as_str() {
        "left" => Hand::Left,
        "right" => Hand::Right,
        other => return Err(CliError::usage(format!("hand must be left or right, got {other:?}"))),
    };
    let file = File::open(&a.frames).map_err(|e| CliError::data(format!("{}: {e}", a.frames.display())))?;
    let meta = CaptureMeta::new(SubjectId(a.subject), hand);
    // A malformed container is a bad argument, not a damaged dataset.
    let rec = extract_ppg_from_reader(BufReader::new(file), &meta).map_err(|e| CliError {
        exit: Exit::Usage,
        message: format!("{}: {e}", a.frames.display()),
    })?;
    write_ppg_csv(&a.out, &rec)?;
    println!("{} frames at {} fps -> {}", rec.len(), rec.fps, a.out.display());
    Ok(ExitCode::SUCCESS)
}

fn train_config(g: &Global, a: &TrainArgs) -> CliResult<TrainConfig> {
    let mut c: TrainConfig = match &g.config {
        Some(p) => read_json(p)?,
        None => TrainConfig::default(),
    };
    if let Some(s) = g.seed {
        c.seed = s;
    }
    if let Some(e) = a.epochs {
        c.epochs = e;
    }
    if let Some(lr) = a.lr {
        c.lr = lr;
    }
    if let Some(b) = a.batch_size {
        c.batch_size = b;
    }
    if let Some(f) = a.floor {
        c.floor_spo2 = f;
    }
    if a.clamp {
        c.clamp_predictions = true;
    }
    for id in &a.exclude {
        if !c.subject_exclusions.contains(&SubjectId(*id)) {
            c.subject_exclusions.push(SubjectId(*id));
        }
    }
    c.validate()?;
    Ok(c)
}

fn load_dataset(root: &Path) -> CliResult<Dataset> {
    Dataset::load(root).map_err(|e| CliError::from(e).context(format!("loading dataset {}", root.display())))
}

pub fn train(g: &Global, a: TrainArgs) -> CliResult<ExitCode> {
    let started = now_unix();
    let config = train_config(g, &a)?;
    let ds = load_dataset(&a.data)?;
    fresh_dir(&a.out)?;
    let run = run_loocv(&ds, &config, g.jobs)?;

    let ckpt_dir = a.out.join("checkpoints");
    fs::create_dir_all(&ckpt_dir).map_err(|e| CliError::data(format!("{}: {e}", ckpt_dir.display())))?;
    let mut splits = Vec::new();
    for s in &run.splits {
        let echo = json!({
            "config": config,
            "split_id": s.split_id,
            "test": s.test,
            "val": s.val,
            "train": s.train,
            "best_epoch": s.best_epoch,
        });
        checkpoint::save(&ckpt_dir.join(format!("split_{}.camoxnn", s.split_id)), &s.network, &echo.to_string())?;
        eprintln!(
            "split {} (test {}, val {}): best epoch {} val MAE {} (constant {:.3}), test MAE {:.3} on {} samples",
            s.split_id,
            s.test,
            s.val,
            s.best_epoch.map_or("-".into(), |e| e.to_string()),
            s.best_val_mae.map_or("-".into(), |m| format!("{m:.3}")),
            s.baseline_val_mae,
            s.test_mae,
            s.n_test
        );
        splits.push(json!({
            "split_id": s.split_id,
            "test": s.test,
            "val": s.val,
            "train": s.train,
            "channel_stats": s.stats,
            "train_label_mean": s.train_label_mean,
            "n_train": s.n_train,
            "n_test": s.n_test,
            "best_epoch": s.best_epoch,
            "best_val_mae": s.best_val_mae,
            "baseline_val_mae": s.baseline_val_mae,
            "test_mae": s.test_mae,
            "history": s.history,
        }));
    }
    run.predictions.write_csv(&a.out.join(PREDICTIONS_FILE))?;
    let pooled = run.pooled_mae();
    let constant = run.constant_predictor_mae();
    let training = json!({
        "config": config,
        "pooled_mae": pooled,
        "constant_predictor_mae": constant,
        "splits": splits,
    });
    write_text(
        &a.out.join(TRAINING_FILE),
        serde_json::to_string_pretty(&training).expect("json") + "\n",
    )?;

    let mut m = RunManifest::new("train", config.seed, &config, started);
    m.dataset_root = Some(a.data.clone());
    m.dataset_hash = Some(dataset_hash(&a.data)?);
    m.finish(&a.out)?;
    println!(
        "{} predictions for {} subjects; pooled MAE {pooled:.3} (constant predictor {constant:.3})",
        run.predictions.len(),
        run.predictions.subjects().len()
    );
    if config.epochs == 0 {
        eprintln!("warning: epochs = 0, no training was performed; outputs come from initial networks");
        return Ok(ExitCode::from(Exit::Usage as u8));
    }
    Ok(ExitCode::SUCCESS)
}

pub fn ablate(g: &Global, a: TrainArgs) -> CliResult<ExitCode> {
    let started = now_unix();
    let config = train_config(g, &a)?;
    let floors = if a.floors.is_empty() {
        DEFAULT_FLOORS.to_vec()
    } else {
        a.floors.clone()
    };
    let ds = load_dataset(&a.data)?;
    fresh_dir(&a.out)?;
    let rows = ablation_run(&ds, &config, &floors, g.jobs)?;
    write_ablation_csv(&rows, &a.out.join(ABLATION_FILE))?;
    let mut m = RunManifest::new("ablate", config.seed, &json!({ "train": config, "floors": floors }), started);
    m.dataset_root = Some(a.data.clone());
    m.dataset_hash = Some(dataset_hash(&a.data)?);
    m.finish(&a.out)?;

    println!("floor   MAE    pooled  samples");
    for r in &rows {
        println!("{:>5.1}  {:>6.3}  {:>6.3}  {:>7}", r.floor, r.mae, r.pooled_mae, r.samples);
    }
    let fl: Vec<f64> = rows.iter().map(|r| r.floor).collect();
    let mae: Vec<f64> = rows.iter().map(|r| r.mae).collect();
    if let Some(rho) = spearman(&fl, &mae) {
        println!("Spearman(floor, MAE) = {rho:.3}");
    }
    Ok(ExitCode::SUCCESS)
}

fn pct(x: Option<f64>) -> String {
    x.map_or("n/a".into(), |v| format!("{:.1}%", 100.0 * v))
}

pub fn report(g: &Global, a: ReportArgs) -> CliResult<ExitCode> {
    let started = now_unix();
    let mut config: ReportConfig = match &g.config {
        Some(p) => read_json(p)?,
        None => ReportConfig::default(),
    };
    if !a.thresholds.is_empty() {
        config.thresholds = a.thresholds.clone();
    }
    let set = PredictionSet::read_csv(&a.predictions)?;
    let ablation = match &a.ablation {
        Some(p) => read_ablation_csv(p)?,
        None => Vec::new(),
    };
    fresh_dir(&a.out)?;
    let report = build_report(&set, &config, &ablation)?;
    write_report(&report, &set, &a.out)?;
    let mut m = RunManifest::new("report", g.seed.unwrap_or(0), &config, started);
    m.config = json!({ "report": config, "predictions": a.predictions, "ablation": a.ablation });
    m.finish(&a.out)?;

    let agg = &report.aggregate;
    println!(
        "{} samples, {} subjects; MAE {:.3} (per-subject mean), {:.3} (pooled)",
        report.samples,
        report.subjects.len(),
        agg.mean_subject_mae,
        agg.pooled_mae
    );
    println!(
        "Bland-Altman: mu {:.3}, LOA ±{:.3}",
        agg.bland_altman.mean_diff, agg.bland_altman.loa_halfwidth
    );
    for s in &report.subjects {
        println!(
            "  subject {}: MAE {:.3}, mu {:.3}, LOA ±{:.3} ({} samples)",
            s.subject_id, s.mae, s.bland_altman.mean_diff, s.bland_altman.loa_halfwidth, s.samples
        );
    }
    for c in &report.classification {
        println!(
            "threshold {} boundary {} ({}): sensitivity {}, specificity {}",
            c.threshold,
            c.boundary,
            c.boundary_source,
            pct(c.sensitivity),
            pct(c.specificity)
        );
    }
    for r in &report.roc {
        match (&r.pooled, &r.note) {
            (Some(c), _) => println!(
                "threshold {}: AUC {:.3} (swept {:.3}, per-subject mean {}), best boundary {}",
                r.threshold,
                c.auc,
                c.sweep_auc,
                r.macro_auc.map_or("n/a".into(), |v| format!("{v:.3}")),
                c.best_boundary
            ),
            (None, note) => eprintln!(
                "warning: threshold {}: ROC omitted: {}",
                r.threshold,
                note.as_deref().unwrap_or("undefined")
            ),
        }
    }
    Ok(ExitCode::SUCCESS)
}
