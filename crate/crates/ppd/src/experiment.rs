//! End-to-end evaluation: corpus → features → grid search → final model → test metrics.
//!
//! Every random choice is derived from the master seed with
//! [`derive_seed`](ppd_core::rng::derive_seed):
//!
//! | use                      | phase          | id                |
//! |--------------------------|----------------|-------------------|
//! | stego synthesis          | `stego`        | cover file name   |
//! | calibration embedding    | `calibration`  | image id          |
//! | train/test split         | `split`        | group (file name) |
//! | cross-validation folds   | `fold`         | image id          |
//!
//! Outputs that must be reproducible (report, features, model, grid, ROC) carry no
//! timing; wall and CPU times go to a separate timing record.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use cpu_time::ProcessTime;
use rayon::prelude::*;
use serde::Serialize;

use ppd_core::embed::{embed_rate, EmbedParams};
use ppd_core::metrics::{auc, roc_curve, Confusion, MetricsError, RocPoint};
use ppd_core::ppd::{extract_features, pattern_count, PpdError, PpdParams};
use ppd_core::rng::{derive_seed, PRNG_NAME};
use ppd_core::svm::{
    cell_accuracy, predict, prepare_cv, select_best, train_smo, GridCell, GridSpec, Label, LabeledSample, SmoOptions,
    SvmError, SvmModel,
};

use crate::cache::{format_f64, save_cache, CacheError, FeatureRecord};
use crate::config::{ExperimentConfig, StegoSource};
use crate::corpus::{file_name, list_images, split_groups, CorpusItem, Half};
use crate::imageio::{load_image, ImageIoError};
use crate::modelfile::{save_model, ModelFileError};

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("no images found in {0}")]
    EmptyCorpus(String),
    #[error("cover and stego sets differ in size ({covers} vs {stegos})")]
    Unbalanced { covers: usize, stegos: usize },
    #[error("{id}: {source}")]
    Image { id: String, source: ImageIoError },
    #[error("feature dimension drift: {id} has {actual}, expected {expected}")]
    DimensionDrift { id: String, expected: usize, actual: usize },
    #[error("image {0} appears in both training and test sets")]
    Overlap(String),
    #[error("no images to time")]
    NothingToTime,
    #[error(transparent)]
    Ppd(#[from] PpdError),
    #[error(transparent)]
    Svm(#[from] SvmError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Cache(#[from] CacheError),
    #[error(transparent)]
    Model(#[from] ModelFileError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io { path: path.display().to_string(), source }
}

/// Deterministic summary of one evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub levels: u32,
    pub feature_dim: usize,
    pub master_seed: u64,
    pub prng: String,
    pub smoothing: String,
    /// `"dir"` or the synthesis rate.
    pub stego_source: String,
    pub train_fraction: f64,
    pub folds: usize,
    pub grid_cells: usize,
    pub train_cover: usize,
    pub train_stego: usize,
    pub test_cover: usize,
    pub test_stego: usize,
    pub best_c: f64,
    pub best_gamma: f64,
    pub cv_accuracy: f64,
    pub support_vectors: usize,
    pub accuracy: f64,
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub training_accuracy: f64,
    pub auc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseTime {
    pub phase: String,
    pub wall_seconds: f64,
    pub cpu_seconds: f64,
}

/// Everything an evaluation produces.
#[derive(Debug, Clone)]
pub struct EvalOutcome {
    pub report: EvalReport,
    pub timing: Vec<PhaseTime>,
    pub grid: Vec<GridCell>,
    pub model: SvmModel,
    pub records: Vec<FeatureRecord>,
    pub train_ids: Vec<String>,
    pub test_ids: Vec<String>,
    pub roc: Vec<RocPoint>,
}

struct Stopwatch {
    wall: Instant,
    cpu: ProcessTime,
}

impl Stopwatch {
    fn start() -> Self {
        Stopwatch { wall: Instant::now(), cpu: ProcessTime::now() }
    }

    fn lap(&mut self, phase: &str, out: &mut Vec<PhaseTime>) {
        out.push(PhaseTime {
            phase: phase.into(),
            wall_seconds: self.wall.elapsed().as_secs_f64(),
            cpu_seconds: self.cpu.elapsed().as_secs_f64(),
        });
        *self = Stopwatch::start();
    }
}

/// Lists covers and stego images (or stego synthesis jobs) for a configuration.
pub fn collect_corpus(config: &ExperimentConfig) -> Result<Vec<CorpusItem>, ExperimentError> {
    let covers = list_images(&config.cover_dir).map_err(io_err(&config.cover_dir))?;
    if covers.is_empty() {
        return Err(ExperimentError::EmptyCorpus(config.cover_dir.display().to_string()));
    }
    let mut items: Vec<CorpusItem> = covers
        .iter()
        .map(|p| {
            let name = file_name(p);
            CorpusItem { id: format!("cover/{name}"), group: name, label: Label::Cover, path: p.clone(), embed_seed: None }
        })
        .collect();
    match &config.stego {
        StegoSource::Embed { .. } => {
            for p in &covers {
                let name = file_name(p);
                items.push(CorpusItem {
                    id: format!("stego/{name}"),
                    embed_seed: Some(derive_seed(config.master_seed, "stego", &name)),
                    group: name,
                    label: Label::Stego,
                    path: p.clone(),
                });
            }
        }
        StegoSource::Dir(dir) => {
            let stegos = list_images(dir).map_err(io_err(dir))?;
            if stegos.is_empty() {
                return Err(ExperimentError::EmptyCorpus(dir.display().to_string()));
            }
            if stegos.len() != covers.len() {
                return Err(ExperimentError::Unbalanced { covers: covers.len(), stegos: stegos.len() });
            }
            for p in stegos {
                let name = file_name(&p);
                items.push(CorpusItem {
                    id: format!("stego/{name}"),
                    group: name,
                    label: Label::Stego,
                    path: p,
                    embed_seed: None,
                });
            }
        }
    }
    Ok(items)
}

/// Loads (or synthesises) each item and extracts its features, in parallel, in order.
pub fn extract_corpus_features(
    items: &[CorpusItem],
    levels: u32,
    master_seed: u64,
    stego_rate: Option<f64>,
) -> Result<Vec<FeatureRecord>, ExperimentError> {
    items
        .par_iter()
        .map(|it| {
            let mut img = load_image(&it.path).map_err(|source| ExperimentError::Image { id: it.id.clone(), source })?;
            if let (Some(seed), Some(rate)) = (it.embed_seed, stego_rate) {
                img = embed_rate(&img, &EmbedParams::new(seed, rate).expect("validated rate"));
            }
            let seed = derive_seed(master_seed, "calibration", &it.id);
            let f = extract_features(&img, &PpdParams::new(levels, seed).expect("validated S"));
            Ok(FeatureRecord { image_id: it.id.clone(), label: it.label.into(), levels, seed, features: f.values })
        })
        .collect()
}

/// Cross-validated accuracy of every grid cell, cells evaluated in parallel.
pub fn parallel_grid_search(
    data: &[LabeledSample],
    grid: &GridSpec,
    seed: u64,
    opts: &SmoOptions,
) -> Result<(f64, f64, f64, Vec<GridCell>), SvmError> {
    if grid.c_values.is_empty() || grid.gamma_values.is_empty() {
        return Err(SvmError::EmptyGrid);
    }
    let cv = prepare_cv(data, grid.folds, seed)?;
    let cells: Vec<(f64, f64)> =
        grid.c_values.iter().flat_map(|&c| grid.gamma_values.iter().map(move |&g| (c, g))).collect();
    let table = cells
        .par_iter()
        .map(|&(c, gamma)| Ok(GridCell { c, gamma, accuracy: cell_accuracy(&cv, c, gamma, opts)? }))
        .collect::<Result<Vec<_>, _>>()?;
    let (c, g, a) = select_best(&table)?;
    Ok((c, g, a, table))
}

/// `(decision value, true label)` for each sample.
pub fn score(model: &SvmModel, samples: &[LabeledSample]) -> Result<Vec<(f64, Label)>, SvmError> {
    samples.iter().map(|s| predict(model, &s.features).map(|(v, _)| (v, s.label))).collect()
}

pub fn run_evaluation(config: &ExperimentConfig) -> Result<EvalOutcome, ExperimentError> {
    let mut timing = Vec::new();
    let mut watch = Stopwatch::start();

    let items = collect_corpus(config)?;
    let rate = match config.stego {
        StegoSource::Embed { rate } => Some(rate),
        StegoSource::Dir(_) => None,
    };
    let records = extract_corpus_features(&items, config.levels, config.master_seed, rate)?;
    let dim = pattern_count(config.levels);
    if let Some(r) = records.iter().find(|r| r.features.len() != dim) {
        return Err(ExperimentError::DimensionDrift { id: r.image_id.clone(), expected: dim, actual: r.features.len() });
    }
    watch.lap("features", &mut timing);

    let halves = split_groups(&items, config.train_fraction, config.master_seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (rec, half) in records.iter().zip(&halves) {
        let sample = rec.to_sample().expect("corpus items are labelled");
        match half {
            Half::Train => train.push(sample),
            Half::Test => test.push(sample),
        }
    }
    if let Some(s) = train.iter().find(|s| test.iter().any(|t| t.id == s.id)) {
        return Err(ExperimentError::Overlap(s.id.clone()));
    }

    let (best_c, best_gamma, cv_acc, grid) = parallel_grid_search(&train, &config.grid, config.master_seed, &config.smo)?;
    watch.lap("grid_search", &mut timing);

    let mut model = train_smo(&train, best_c, best_gamma, &config.smo)?;
    model.metadata.levels = Some(config.levels);
    model.metadata.master_seed = Some(config.master_seed);
    watch.lap("training", &mut timing);

    let train_scored = score(&model, &train)?;
    let test_scored = score(&model, &test)?;
    let train_conf = Confusion::from_pairs(train_scored.iter().map(|&(v, l)| (Label::from_decision(v), l)));
    let conf = Confusion::from_pairs(test_scored.iter().map(|&(v, l)| (Label::from_decision(v), l)));
    let roc = roc_curve(&test_scored)?;
    watch.lap("testing", &mut timing);

    let count = |set: &[LabeledSample], l: Label| set.iter().filter(|s| s.label == l).count();
    let report = EvalReport {
        levels: config.levels,
        feature_dim: dim,
        master_seed: config.master_seed,
        prng: PRNG_NAME.into(),
        smoothing: "add-one".into(),
        stego_source: rate.map_or_else(|| "dir".into(), |r| format!("embed:{r}")),
        train_fraction: config.train_fraction,
        folds: config.grid.folds,
        grid_cells: grid.len(),
        train_cover: count(&train, Label::Cover),
        train_stego: count(&train, Label::Stego),
        test_cover: count(&test, Label::Cover),
        test_stego: count(&test, Label::Stego),
        best_c,
        best_gamma,
        cv_accuracy: cv_acc,
        support_vectors: model.support_vectors.len(),
        accuracy: conf.accuracy(),
        tp: conf.tp,
        fp: conf.fp,
        tn: conf.tn,
        fn_: conf.fn_,
        training_accuracy: train_conf.accuracy(),
        auc: auc(&roc),
    };
    Ok(EvalOutcome {
        report,
        timing,
        grid,
        model,
        records,
        train_ids: train.into_iter().map(|s| s.id).collect(),
        test_ids: test.into_iter().map(|s| s.id).collect(),
        roc,
    })
}

/// Human-readable table in the layout of a results table: database, rate, accuracy,
/// confusion counts and training accuracy.
pub fn report_table(r: &EvalReport) -> String {
    let mut s = String::new();
    let rows = [
        ("Bit rate", r.stego_source.clone()),
        ("S", r.levels.to_string()),
        ("Accuracy", format!("{:.2}%", 100.0 * r.accuracy)),
        ("TP", r.tp.to_string()),
        ("FP", r.fp.to_string()),
        ("TN", r.tn.to_string()),
        ("FN", r.fn_.to_string()),
        ("Training", format!("{:.1}%", 100.0 * r.training_accuracy)),
        ("AUC", format!("{:.4}", r.auc)),
        ("C", format_f64(r.best_c)),
        ("gamma", format_f64(r.best_gamma)),
        ("CV accuracy", format!("{:.2}%", 100.0 * r.cv_accuracy)),
    ];
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    for (k, v) in rows {
        writeln!(s, "{k:<width$}  {v}").unwrap();
    }
    s
}

pub fn grid_csv(cells: &[GridCell]) -> String {
    let mut s = String::from("C,gamma,cv_accuracy\n");
    for c in cells {
        let acc = c.accuracy.map_or_else(|| "nan".to_string(), format_f64);
        writeln!(s, "{},{},{}", format_f64(c.c), format_f64(c.gamma), acc).unwrap();
    }
    s
}

pub fn roc_csv(points: &[RocPoint]) -> String {
    let mut s = String::from("fpr,tpr,threshold\n");
    for p in points {
        writeln!(s, "{},{},{}", format_f64(p.fpr), format_f64(p.tpr), format_f64(p.threshold)).unwrap();
    }
    s
}

/// Writes `report.json`, `report.txt`, `timing.json`, `features.csv`, `model.txt`,
/// `grid.csv`, `roc.csv` and `split.csv` into `dir`.
pub fn write_outcome(outcome: &EvalOutcome, dir: &Path) -> Result<(), ExperimentError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let write = |name: &str, body: &[u8]| -> Result<(), ExperimentError> {
        let path: PathBuf = dir.join(name);
        std::fs::write(&path, body).map_err(io_err(&path))
    };
    let mut json = serde_json::to_string_pretty(&outcome.report)?;
    json.push('\n');
    write("report.json", json.as_bytes())?;
    write("report.txt", report_table(&outcome.report).as_bytes())?;
    write("timing.json", serde_json::to_string_pretty(&outcome.timing)?.as_bytes())?;
    write("grid.csv", grid_csv(&outcome.grid).as_bytes())?;
    write("roc.csv", roc_csv(&outcome.roc).as_bytes())?;
    let mut split = String::from("image_id,half\n");
    for id in &outcome.train_ids {
        writeln!(split, "{id},train").unwrap();
    }
    for id in &outcome.test_ids {
        writeln!(split, "{id},test").unwrap();
    }
    write("split.csv", split.as_bytes())?;
    save_cache(dir.join("features.csv"), &outcome.records)?;
    save_model(&outcome.model, dir.join("model.txt"))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub rate: String,
    pub levels: u32,
    pub feature_dim: usize,
    pub accuracy: f64,
}

/// Runs one evaluation per `(S, rate)`. With a stego directory the rates are ignored and
/// one row per `S` is produced.
pub fn sweep_s(config: &ExperimentConfig, levels: &[u32], rates: &[f64]) -> Result<Vec<SweepRow>, ExperimentError> {
    let rate_list: Vec<Option<f64>> = match config.stego {
        StegoSource::Dir(_) => vec![None],
        StegoSource::Embed { rate } if rates.is_empty() => vec![Some(rate)],
        StegoSource::Embed { .. } => rates.iter().map(|&r| Some(r)).collect(),
    };
    let mut rows = Vec::new();
    for rate in rate_list {
        for &s in levels {
            let mut cfg = config.clone();
            cfg.levels = s;
            if let Some(r) = rate {
                cfg.stego = StegoSource::Embed { rate: r };
            }
            let out = run_evaluation(&cfg)?;
            rows.push(SweepRow {
                rate: rate.map_or_else(|| "dir".into(), |r| r.to_string()),
                levels: s,
                feature_dim: out.report.feature_dim,
                accuracy: out.report.accuracy,
            });
        }
    }
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("rate,S,feature_dim,accuracy\n");
    for r in rows {
        writeln!(s, "{},{},{},{}", r.rate, r.levels, r.feature_dim, format_f64(r.accuracy)).unwrap();
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImageTiming {
    pub image_id: String,
    pub pixels: usize,
    pub wall_seconds: f64,
    pub cpu_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingReport {
    pub levels: u32,
    pub images: Vec<ImageTiming>,
    pub total_wall_seconds: f64,
    pub total_cpu_seconds: f64,
}

/// Times feature extraction (excluding file loading), one image after another on the
/// calling thread.
pub fn time_features(paths: &[PathBuf], levels: u32, master_seed: u64) -> Result<TimingReport, ExperimentError> {
    if paths.is_empty() {
        return Err(ExperimentError::NothingToTime);
    }
    let mut images = Vec::with_capacity(paths.len());
    for p in paths {
        let id = file_name(p);
        let img = load_image(p).map_err(|source| ExperimentError::Image { id: id.clone(), source })?;
        let params = PpdParams::new(levels, derive_seed(master_seed, "calibration", &id))?;
        let watch = Stopwatch::start();
        let f = extract_features(&img, &params);
        std::hint::black_box(&f);
        images.push(ImageTiming {
            image_id: id,
            pixels: img.width() * img.height(),
            wall_seconds: watch.wall.elapsed().as_secs_f64(),
            cpu_seconds: watch.cpu.elapsed().as_secs_f64(),
        });
    }
    Ok(TimingReport {
        levels,
        total_wall_seconds: images.iter().map(|t| t.wall_seconds).sum(),
        total_cpu_seconds: images.iter().map(|t| t.cpu_seconds).sum(),
        images,
    })
}
