//! `ppd` command-line tool.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ppd::cache::{format_f64, load_cache, save_cache, FeatureRecord, SampleLabel};
use ppd::config::{ConfigBuilder, ConfigError, ExperimentConfig};
use ppd::corpus::{file_name, list_images};
use ppd::experiment::{
    parallel_grid_search, report_table, roc_csv, run_evaluation, score, sweep_csv, sweep_s, time_features,
    write_outcome,
};
use ppd::imageio::{load_image, save_image};
use ppd::modelfile::{load_model, save_model};
use ppd_core::analysis::{
    d_class_histogram, sequential_embedding_trajectory, shift_experiment, theoretical_histogram, variation_summary,
    ShiftMatrix,
};
use ppd_core::embed::{embed_rate, EmbedParams};
use ppd_core::metrics::{auc, roc_curve};
use ppd_core::ppd::{count_patterns, extract_features, pattern_from_index, PixelBlock, PpdParams};
use ppd_core::rng::derive_seed;
use ppd_core::svm::{predict, train_smo, GridSpec, LabeledSample, SmoOptions};

#[derive(Parser)]
#[command(name = "ppd", version, about = "LSB matching steganalysis with patterns of pixel differences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Embed random bits with LSB matching.
    Embed {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        rate: f64,
        #[arg(long)]
        seed: u64,
    },
    /// Extract PPD features into a CSV cache.
    Features {
        /// Image files or directories of images.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long = "s", default_value_t = 4)]
        levels: u32,
        /// Master seed; each image's calibration seed is derived from it and the file name.
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "unknown")]
        label: SampleLabel,
    },
    /// Train an SVM from a labelled feature cache.
    Train {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        folds: usize,
        /// Skip the grid search and use this C (requires --gamma).
        #[arg(long, requires = "gamma")]
        c: Option<f64>,
        #[arg(long, requires = "c")]
        gamma: Option<f64>,
    },
    /// Classify a feature cache or images with a trained model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, conflicts_with = "images")]
        features: Option<PathBuf>,
        /// Images to classify (features computed on the fly; needs --seed).
        images: Vec<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full experiment: features, grid search, training and testing.
    Evaluate(ExperimentArgs),
    /// ROC curve of a model on a labelled feature cache.
    Roc {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Accuracy for several S values (and embedding rates).
    SweepS {
        #[command(flatten)]
        experiment: ExperimentArgs,
        #[arg(long, value_delimiter = ',', default_values_t = vec![2u32, 3, 4, 5, 6, 7, 8, 9])]
        s_values: Vec<u32>,
        #[arg(long, value_delimiter = ',')]
        rates: Vec<f64>,
    },
    /// Pattern-class shifts of blocks under repeated independent embeddings.
    ShiftExperiment {
        /// Block as x12,x13,x22,x23,x33; repeatable. Defaults to three reference blocks.
        #[arg(long = "block", value_delimiter = ',', num_args = 5)]
        blocks: Vec<u8>,
        #[arg(long = "s", default_value_t = 4)]
        levels: u32,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pattern histogram of all blocks with values in [0, range-max].
    TheoreticalHist {
        #[arg(long = "s", default_value_t = 4)]
        levels: u32,
        #[arg(long, default_value_t = 7)]
        range_max: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time feature extraction per image.
    TimeFeatures {
        #[arg(required = true)]
        images: Vec<PathBuf>,
        #[arg(long = "s", default_value_t = 4)]
        levels: u32,
        #[arg(long)]
        seed: u64,
    },
    /// Pattern-class histograms over successive 1-bpp embeddings of one image.
    Trajectory {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "s", default_value_t = 4)]
        levels: u32,
        #[arg(long, default_value_t = 3)]
        steps: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-class pattern change between a cover and an embedded image.
    Variation {
        #[arg(long)]
        cover: PathBuf,
        #[arg(long)]
        stego: PathBuf,
        #[arg(long = "s", default_value_t = 4)]
        levels: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pattern histogram of one image, one row per pattern index.
    Histogram {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "s", default_value_t = 4)]
        levels: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ExperimentArgs {
    /// key=value config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    cover_dir: Option<PathBuf>,
    #[arg(long, conflicts_with = "embed_rate")]
    stego_dir: Option<PathBuf>,
    #[arg(long)]
    embed_rate: Option<f64>,
    #[arg(long = "s")]
    levels: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    split: Option<f64>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ExperimentArgs {
    fn build(&self) -> Result<ExperimentConfig, CliError> {
        let file = match &self.config {
            Some(p) => ConfigBuilder::from_file(p)?,
            None => ConfigBuilder::default(),
        };
        let flags = ConfigBuilder {
            cover_dir: self.cover_dir.clone(),
            stego_dir: self.stego_dir.clone(),
            embed_rate: self.embed_rate,
            levels: self.levels,
            seed: self.seed,
            split: self.split,
            folds: self.folds,
            output_dir: self.out.clone(),
        };
        Ok(file.overlay(flags).build()?)
    }
}

enum CliError {
    Usage(String),
    Data(String),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io { .. } => CliError::Data(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

macro_rules! data_error {
    ($($t:ty),*) => { $( impl From<$t> for CliError { fn from(e: $t) -> Self { CliError::Data(e.to_string()) } } )* };
}
data_error!(
    std::io::Error,
    ppd::imageio::ImageIoError,
    ppd::cache::CacheError,
    ppd::modelfile::ModelFileError,
    ppd::experiment::ExperimentError,
    ppd_core::svm::SvmError,
    ppd_core::ppd::PpdError,
    ppd_core::analysis::AnalysisError,
    ppd_core::metrics::MetricsError,
    serde_json::Error
);

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn emit(out: Option<&Path>, body: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, body)?,
        None => std::io::stdout().write_all(body.as_bytes())?,
    }
    Ok(())
}

fn expand_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
    let mut out = Vec::new();
    for p in inputs {
        if p.is_dir() {
            out.extend(list_images(p)?);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

fn features_for(paths: &[PathBuf], levels: u32, seed: u64, label: SampleLabel) -> Result<Vec<FeatureRecord>, CliError> {
    use rayon::prelude::*;
    paths
        .par_iter()
        .map(|p| {
            let id = file_name(p);
            let img = load_image(p)?;
            let calibration = derive_seed(seed, "calibration", &id);
            let f = extract_features(&img, &PpdParams::new(levels, calibration)?);
            Ok(FeatureRecord { image_id: id, label, levels, seed: calibration, features: f.values })
        })
        .collect()
}

fn labelled(records: &[FeatureRecord]) -> Result<Vec<LabeledSample>, CliError> {
    records
        .iter()
        .map(|r| r.to_sample().ok_or_else(|| CliError::Data(format!("{}: label is unknown", r.image_id))))
        .collect()
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Embed { input, out, rate, seed } => {
            let params = EmbedParams::new(seed, rate).map_err(|e| usage(e.to_string()))?;
            let img = load_image(&input)?;
            save_image(&embed_rate(&img, &params), &out)?;
        }
        Command::Features { inputs, out, levels, seed, label } => {
            PpdParams::new(levels, 0).map_err(|e| usage(e.to_string()))?;
            let paths = expand_inputs(&inputs)?;
            let records = features_for(&paths, levels, seed, label)?;
            match out {
                Some(p) => save_cache(p, &records)?,
                None => ppd::cache::write_cache(std::io::stdout().lock(), &records)?,
            }
        }
        Command::Train { features, out, seed, folds, c, gamma } => {
            let records = load_cache(&features)?;
            let data = labelled(&records)?;
            let opts = SmoOptions::default();
            let (c, gamma) = match (c, gamma) {
                (Some(c), Some(g)) => (c, g),
                _ => {
                    let grid = GridSpec { folds, ..GridSpec::standard() };
                    let (c, g, acc, _) = parallel_grid_search(&data, &grid, seed, &opts)?;
                    eprintln!("grid search: C={c} gamma={g} cv_accuracy={acc:.4}");
                    (c, g)
                }
            };
            let mut model = train_smo(&data, c, gamma, &opts)?;
            model.metadata.levels = records.first().map(|r| r.levels);
            model.metadata.master_seed = Some(seed);
            save_model(&model, &out)?;
        }
        Command::Predict { model, features, images, seed, out } => {
            let model = load_model(&model)?;
            let records = match features {
                Some(p) => load_cache(p)?,
                None => {
                    if images.is_empty() {
                        return Err(usage("predict needs --features or image paths"));
                    }
                    let seed = seed.ok_or_else(|| usage("--seed is required when classifying images"))?;
                    let levels = model.metadata.levels.ok_or_else(|| usage("model does not record S"))?;
                    features_for(&expand_inputs(&images)?, levels, seed, SampleLabel::Unknown)?
                }
            };
            let mut s = String::from("image_id,decision_value,predicted\n");
            for r in &records {
                let (v, label) = predict(&model, &r.features)?;
                writeln!(s, "{},{},{}", r.image_id, format_f64(v), SampleLabel::from(label)).unwrap();
            }
            emit(out.as_deref(), &s)?;
        }
        Command::Evaluate(args) => {
            let cfg = args.build()?;
            let outcome = run_evaluation(&cfg)?;
            if let Some(dir) = &cfg.output_dir {
                write_outcome(&outcome, dir)?;
            }
            print!("{}", report_table(&outcome.report));
        }
        Command::Roc { model, features, out } => {
            let model = load_model(&model)?;
            let data = labelled(&load_cache(&features)?)?;
            let points = roc_curve(&score(&model, &data)?)?;
            eprintln!("AUC {:.6}", auc(&points));
            emit(out.as_deref(), &roc_csv(&points))?;
        }
        Command::SweepS { experiment, s_values, rates } => {
            let cfg = experiment.build()?;
            if let Some(bad) = s_values.iter().find(|&&s| !(2..=16).contains(&s)) {
                return Err(usage(format!("S={bad} outside [2, 16]")));
            }
            let rows = sweep_s(&cfg, &s_values, &rates)?;
            let csv = sweep_csv(&rows);
            match &cfg.output_dir {
                Some(dir) => {
                    std::fs::create_dir_all(dir)?;
                    std::fs::write(dir.join("sweep.csv"), &csv)?;
                }
                None => print!("{csv}"),
            }
        }
        Command::ShiftExperiment { blocks, levels, trials, seed, out } => {
            PpdParams::new(levels, 0).map_err(|e| usage(e.to_string()))?;
            let blocks: Vec<PixelBlock> = if blocks.is_empty() {
                vec![
                    PixelBlock::new(100, 101, 100, 101, 100),
                    PixelBlock::new(100, 102, 102, 101, 100),
                    PixelBlock::new(102, 103, 102, 101, 100),
                ]
            } else {
                blocks.chunks(5).map(|c| PixelBlock([c[0], c[1], c[2], c[3], c[4]])).collect()
            };
            let mut s = String::from("block,source_class,destination_class,count,trials\n");
            let mut matrix = ShiftMatrix::new(levels);
            for (n, b) in blocks.iter().enumerate() {
                let row = shift_experiment(b, levels, trials, derive_seed(seed, "shift", &n.to_string()));
                matrix.add(&row);
                let name = b.0.map(|v| v.to_string()).join(" ");
                for (d, c) in row.destinations.iter().enumerate() {
                    writeln!(s, "{name},{},{d},{c},{}", row.source_class, row.trials).unwrap();
                }
            }
            emit(out.as_deref(), &s)?;
        }
        Command::TheoreticalHist { levels, range_max, out } => {
            PpdParams::new(levels, 0).map_err(|e| usage(e.to_string()))?;
            let hist = theoretical_histogram(levels, range_max)?;
            let mut s = String::from("index,pattern,count\n");
            for (k, c) in hist.iter().enumerate() {
                let p = pattern_from_index(k + 1, levels)?;
                writeln!(s, "{},{}{}{}{},{c}", k + 1, p.0[0], p.0[1], p.0[2], p.0[3]).unwrap();
            }
            emit(out.as_deref(), &s)?;
        }
        Command::TimeFeatures { images, levels, seed } => {
            PpdParams::new(levels, 0).map_err(|e| usage(e.to_string()))?;
            let paths = expand_inputs(&images)?;
            let report = time_features(&paths, levels, seed)?;
            for t in &report.images {
                println!("{}\t{} px\twall {:.3} s\tcpu {:.3} s", t.image_id, t.pixels, t.wall_seconds, t.cpu_seconds);
            }
            println!(
                "total\t{} images\twall {:.3} s\tcpu {:.3} s",
                report.images.len(),
                report.total_wall_seconds,
                report.total_cpu_seconds
            );
        }
        Command::Trajectory { input, levels, steps, seed, out } => {
            PpdParams::new(levels, 0).map_err(|e| usage(e.to_string()))?;
            let img = load_image(&input)?;
            let mut s = String::from("step,class,count\n");
            for (step, h) in sequential_embedding_trajectory(&img, levels, steps, seed).iter().enumerate() {
                for (d, c) in h.class_counts.iter().enumerate() {
                    writeln!(s, "{step},{d},{c}").unwrap();
                }
            }
            emit(out.as_deref(), &s)?;
        }
        Command::Variation { cover, stego, levels, out } => {
            PpdParams::new(levels, 0).map_err(|e| usage(e.to_string()))?;
            let a = count_patterns(&load_image(&cover)?, levels);
            let b = count_patterns(&load_image(&stego)?, levels);
            let delta = variation_summary(&a, &b)?;
            let (ha, hb) = (d_class_histogram(&a), d_class_histogram(&b));
            let mut s = String::from("class,cover,embedded,delta\n");
            for (d, ((before, after), change)) in ha.class_counts.iter().zip(&hb.class_counts).zip(&delta).enumerate() {
                writeln!(s, "{d},{before},{after},{change}").unwrap();
            }
            emit(out.as_deref(), &s)?;
        }
        Command::Histogram { input, levels, out } => {
            PpdParams::new(levels, 0).map_err(|e| usage(e.to_string()))?;
            let counts = count_patterns(&load_image(&input)?, levels);
            let mut s = String::from("index,count\n");
            for (k, c) in counts.counts.iter().enumerate() {
                writeln!(s, "{},{c}", k + 1).unwrap();
            }
            emit(out.as_deref(), &s)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
