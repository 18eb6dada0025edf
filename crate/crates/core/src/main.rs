//! `skelhar` command-line interface.
//!
//! Exit codes: 0 success, 1 runtime or data error, 2 usage error.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use skelhar::config::PipelineConfig;
use skelhar::dataset::{generate_synthetic, read_dataset, write_dataset, SynthLayout, SynthSpec};
use skelhar::experiment::{run_experiment, write_bundle};
use skelhar::features::build_feature_matrix;
use skelhar::HarError;

#[derive(Parser)]
#[command(
    name = "skelhar",
    version,
    about = "Skeleton-based human activity recognition experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic skeleton dataset CSV.
    Synth(SynthArgs),
    /// Extract a feature matrix CSV (f0..fN-1,label).
    Extract(ExtractArgs),
    /// Run one experiment and write a report bundle directory.
    Evaluate(EvaluateArgs),
    /// Run a grid of experiments and write an accuracy table CSV.
    Grid(GridArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Layout {
    Standard,
    Depth,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 16)]
    participants: u32,
    #[arg(long, default_value_t = 60)]
    frames: usize,
    /// Gaussian joint noise in meters.
    #[arg(long, default_value_t = 0.01)]
    noise: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// `depth` makes classes differ only along the depth axis.
    #[arg(long, value_enum, default_value = "standard")]
    layout: Layout,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

/// Pipeline settings; each flag overrides the same key in `--config`.
#[derive(Args, Default)]
struct PipelineFlags {
    /// Flat `key = value` config file; keys are the flag names.
    #[arg(long)]
    config: Option<PathBuf>,
    /// coordinates | velocity | acceleration
    #[arg(long)]
    modality: Option<String>,
    /// c9 | c18 | c28 | list:<Joint>,<Joint>,...
    #[arg(long)]
    joints: Option<String>,
    /// 2 | 3
    #[arg(long)]
    dims: Option<String>,
    /// `centered` or 51 comma-separated frame positions
    #[arg(long)]
    frames: Option<String>,
    /// on | off
    #[arg(long)]
    pca: Option<String>,
    /// Explained-variance threshold in (0, 1].
    #[arg(long = "pca-var")]
    pca_var: Option<String>,
    /// tree | lda | svm-cubic | knn | bagged | mlp
    #[arg(long)]
    classifier: Option<String>,
    /// Tree split budget (tree, bagged).
    #[arg(long = "max-splits")]
    max_splits: Option<String>,
    /// Ensemble size (bagged).
    #[arg(long = "n-trees")]
    n_trees: Option<String>,
    /// Neighbors (knn).
    #[arg(long)]
    k: Option<String>,
    /// Box constraint (svm-cubic).
    #[arg(long)]
    c: Option<String>,
    /// KKT tolerance (svm-cubic).
    #[arg(long)]
    tolerance: Option<String>,
    /// Hidden width (mlp).
    #[arg(long)]
    hidden: Option<String>,
    /// Training epochs (mlp).
    #[arg(long)]
    epochs: Option<String>,
    /// Learning rate (mlp).
    #[arg(long)]
    lr: Option<String>,
    /// Mini-batch size (mlp).
    #[arg(long)]
    batch: Option<String>,
    /// train,test,validation as percentages or fractions, e.g. 60,20,20
    #[arg(long)]
    split: Option<String>,
    /// class | participant
    #[arg(long)]
    stratify: Option<String>,
    #[arg(long)]
    folds: Option<String>,
    #[arg(long)]
    seed: Option<String>,
}

impl PipelineFlags {
    fn pairs(&self) -> Vec<(&'static str, &str)> {
        let all = [
            ("modality", &self.modality),
            ("joints", &self.joints),
            ("dims", &self.dims),
            ("frames", &self.frames),
            ("pca", &self.pca),
            ("pca-var", &self.pca_var),
            ("classifier", &self.classifier),
            ("max-splits", &self.max_splits),
            ("n-trees", &self.n_trees),
            ("k", &self.k),
            ("c", &self.c),
            ("tolerance", &self.tolerance),
            ("hidden", &self.hidden),
            ("epochs", &self.epochs),
            ("lr", &self.lr),
            ("batch", &self.batch),
            ("split", &self.split),
            ("stratify", &self.stratify),
            ("folds", &self.folds),
            ("seed", &self.seed),
        ];
        all.into_iter()
            .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
            .collect()
    }

    fn base(&self) -> Result<PipelineConfig, CliError> {
        match &self.config {
            None => Ok(PipelineConfig::default()),
            Some(p) => {
                let text =
                    fs::read_to_string(p).map_err(|e| CliError::Runtime(HarError::io(p, e)))?;
                PipelineConfig::parse_text(&text).map_err(usage)
            }
        }
    }

    fn build(&self) -> Result<PipelineConfig, CliError> {
        let mut cfg = self.base()?;
        cfg.apply(self.pairs()).map_err(usage)?;
        cfg.validate().map_err(usage)?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct Parallelism {
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct ExtractArgs {
    dataset: PathBuf,
    #[command(flatten)]
    pipeline: PipelineFlags,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    dataset: PathBuf,
    #[command(flatten)]
    pipeline: PipelineFlags,
    #[command(flatten)]
    parallel: Parallelism,
    /// Bundle directory.
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

/// Axis flags take comma-separated values. Separate `--joints` values with
/// `;` when a `list:` subset is involved.
#[derive(Args)]
struct GridArgs {
    dataset: PathBuf,
    #[command(flatten)]
    pipeline: PipelineFlags,
    #[command(flatten)]
    parallel: Parallelism,
    /// Table CSV (stdout when omitted).
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

enum CliError {
    Usage(String),
    Runtime(HarError),
}

fn usage(e: HarError) -> CliError {
    CliError::Usage(e.to_string())
}

impl From<HarError> for CliError {
    fn from(e: HarError) -> Self {
        CliError::Runtime(e)
    }
}

fn set_jobs(jobs: Option<usize>) -> Result<(), CliError> {
    if let Some(n) = jobs {
        if n == 0 {
            return Err(CliError::Usage("--jobs must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Runtime(HarError::io(path, e)))
}

fn cmd_synth(a: &SynthArgs) -> Result<(), CliError> {
    let spec = SynthSpec {
        n_participants: a.participants,
        frames_per_sequence: a.frames,
        noise_sigma: a.noise,
        seed: a.seed,
        layout: match a.layout {
            Layout::Standard => SynthLayout::Standard,
            Layout::Depth => SynthLayout::DepthSeparated,
        },
        ..SynthSpec::default()
    };
    spec.validate().map_err(usage)?;
    let manifest = generate_synthetic(&spec)?;
    write_dataset(&manifest, &a.output)?;
    eprintln!(
        "wrote {} sequences to {}",
        manifest.len(),
        a.output.display()
    );
    Ok(())
}

fn cmd_extract(a: &ExtractArgs) -> Result<(), CliError> {
    let cfg = a.pipeline.build()?;
    let manifest = read_dataset(&a.dataset)?;
    let m = build_feature_matrix(&manifest, &cfg.extraction, true)?;
    let labels = m.require_labels()?;
    let mut out = String::new();
    let header: Vec<String> = (0..m.n_features()).map(|i| format!("f{i}")).collect();
    let _ = writeln!(out, "{},label", header.join(","));
    for (row, label) in m.rows.outer_iter().zip(labels) {
        for v in row {
            let _ = write!(out, "{v},");
        }
        let _ = writeln!(out, "{label}");
    }
    write_text(&a.output, &out)?;
    eprintln!(
        "wrote {}x{} feature matrix to {}",
        m.n_rows(),
        m.n_features(),
        a.output.display()
    );
    Ok(())
}

fn cmd_evaluate(a: &EvaluateArgs) -> Result<(), CliError> {
    let cfg = a.pipeline.build()?;
    set_jobs(a.parallel.jobs)?;
    let manifest = read_dataset(&a.dataset)?;
    let outcome = run_experiment(&cfg, &manifest)?;
    write_bundle(&a.output, &cfg, &outcome)?;
    println!(
        "cross-validation accuracy {:.4}, validation accuracy {:.4}",
        outcome.report.cross_validation.overall_accuracy,
        outcome.report.validation.overall_accuracy
    );
    Ok(())
}

/// Splits an axis flag into values; `None` means "not swept".
fn axis(raw: &Option<String>, sep: char) -> Result<Option<Vec<String>>, CliError> {
    let Some(raw) = raw else { return Ok(None) };
    let values: Vec<String> = raw
        .split(sep)
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(String::from)
        .collect();
    if values.is_empty() {
        return Err(CliError::Usage("grid axis has no values".into()));
    }
    Ok(Some(values))
}

const GRID_AXES: [&str; 5] = ["modality", "joints", "dims", "pca", "classifier"];

fn cmd_grid(a: &GridArgs) -> Result<(), CliError> {
    let p = &a.pipeline;
    let joints_sep = if p.joints.as_deref().is_some_and(|j| j.contains("list:")) {
        ';'
    } else {
        ','
    };
    let axes = [
        axis(&p.modality, ',')?,
        axis(&p.joints, joints_sep)?,
        axis(&p.dims, ',')?,
        axis(&p.pca, ',')?,
        axis(&p.classifier, ',')?,
    ];

    // Shared settings: everything except the swept axes and hyperparameters.
    let mut base = p.base()?;
    let shared: Vec<(&str, &str)> = p
        .pairs()
        .into_iter()
        .filter(|(k, _)| {
            !GRID_AXES.contains(k) && !skelhar::config::HYPERPARAMETER_KEYS.contains(k)
        })
        .collect();
    base.apply(shared).map_err(usage)?;
    let hyper: Vec<(&str, &str)> = p
        .pairs()
        .into_iter()
        .filter(|(k, _)| skelhar::config::HYPERPARAMETER_KEYS.contains(k))
        .collect();

    // Cartesian product in declaration order, first axis outermost.
    let mut cells: Vec<Vec<(&str, String)>> = vec![vec![]];
    for (name, values) in GRID_AXES.iter().zip(&axes) {
        let Some(values) = values else { continue };
        cells = cells
            .into_iter()
            .flat_map(|c| {
                values.iter().map(move |v| {
                    let mut c = c.clone();
                    c.push((*name, v.clone()));
                    c
                })
            })
            .collect();
    }
    let configs: Vec<PipelineConfig> = cells
        .iter()
        .map(|cell| {
            let mut cfg = base.clone();
            cfg.apply(cell.iter().map(|(k, v)| (*k, v.as_str())))?;
            for (k, v) in &hyper {
                skelhar::config::set_hyperparameter(&mut cfg.classifier.model, k, v)?;
            }
            cfg.validate()?;
            Ok(cfg)
        })
        .collect::<Result<_, HarError>>()
        .map_err(usage)?;

    set_jobs(a.parallel.jobs)?;
    let manifest = read_dataset(&a.dataset)?;
    let results: Vec<_> = configs
        .par_iter()
        .map(|cfg| run_experiment(cfg, &manifest))
        .collect();

    let mut out = String::from(
        "modality,joints,dims,pca,classifier,feature_dim,model_dim,cv_accuracy,validation_accuracy\n",
    );
    for (cfg, r) in configs.iter().zip(results) {
        let r = r?.report;
        let _ = writeln!(
            out,
            "{},\"{}\",{},{},{},{},{},{:.6},{:.6}",
            cfg.extraction.modality,
            cfg.extraction.subset,
            cfg.extraction.dims,
            if cfg.pca.enabled { "on" } else { "off" },
            cfg.classifier.model,
            r.feature_dim,
            r.model_dim,
            r.cross_validation.overall_accuracy,
            r.validation.overall_accuracy
        );
    }
    match &a.output {
        Some(path) => write_text(path, &out),
        None => {
            print!("{out}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Synth(a) => cmd_synth(a),
        Command::Extract(a) => cmd_extract(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Grid(a) => cmd_grid(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
