//! enhdc: train, evaluate and sweep hyperdimensional-computing ensembles.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

use enhdc_core::{model_size_bits, ColumnSelector, Dataset, EnsembleModel};

use enhdc_cli::config::{
    self, parse_voting, DatasetConfig, ResolvedDataset, RunConfig, SweepConfig,
    DEFAULT_SPLIT_SEED,
};
use enhdc_cli::model_file;
use enhdc_cli::report::{format_kilobits, print_summary, Report, Timing};
use enhdc_cli::CliError;

#[derive(Parser)]
#[command(
    name = "enhdc",
    about = "Hyperdimensional-computing ensemble classifier toolkit",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train an ensemble from a run config; writes a model file and a JSON
    /// report.
    Train {
        /// Run configuration (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Model output path; overrides run.model_out.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Report output path; overrides run.report_out.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Global seed override.
        #[arg(long)]
        seed: Option<u64>,
        /// Voting override: hard or soft.
        #[arg(long)]
        voting: Option<String>,
        /// Retraining epoch override (0 disables retraining).
        #[arg(long)]
        retrain_epochs: Option<usize>,
        /// Emit per-sample vote records into the report.
        #[arg(long)]
        votes: bool,
        /// Dataset root override.
        #[arg(long)]
        data_dir: Option<PathBuf>,
    },
    /// Evaluate a saved model on a dataset.
    Evaluate {
        /// Model file written by train.
        #[arg(long)]
        model: PathBuf,
        /// Builtin dataset name (evaluates its test split) or a CSV/cache
        /// file path (evaluates the whole file).
        #[arg(long)]
        dataset: String,
        /// Report output path (stdout summary is always printed).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Emit per-sample vote records into the report.
        #[arg(long)]
        votes: bool,
        /// Dataset root for builtin names.
        #[arg(long)]
        data_dir: Option<PathBuf>,
        /// CSV label column name.
        #[arg(long)]
        label_column: Option<String>,
        /// CSV label column index (overrides --label-column).
        #[arg(long)]
        label_index: Option<usize>,
        /// CSV file has no header row.
        #[arg(long)]
        no_header: bool,
        /// IDX images file (with --labels, evaluates an IDX pair).
        #[arg(long)]
        images: Option<PathBuf>,
        /// IDX labels file.
        #[arg(long)]
        labels: Option<PathBuf>,
    },
    /// Run a sweep grid and write one CSV row per cell.
    Sweep {
        /// Sweep configuration (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
        /// Dataset root override.
        #[arg(long)]
        data_dir: Option<PathBuf>,
    },
    /// Print the class-hypervector storage size for a configuration.
    Size {
        /// Storage width in bits (8 or 16).
        width: u32,
        /// Hypervector dimension.
        dim: usize,
        /// Number of classes.
        classes: usize,
        /// Number of base classifiers.
        members: usize,
    },
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train {
            config,
            out,
            report,
            seed,
            voting,
            retrain_epochs,
            votes,
            data_dir,
        } => cmd_train(
            &config,
            out.as_deref(),
            report.as_deref(),
            seed,
            voting.as_deref(),
            retrain_epochs,
            votes,
            data_dir.as_deref(),
        ),
        Command::Evaluate {
            model,
            dataset,
            out,
            votes,
            data_dir,
            label_column,
            label_index,
            no_header,
            images,
            labels,
        } => cmd_evaluate(
            &model,
            &dataset,
            out.as_deref(),
            votes,
            data_dir.as_deref(),
            label_column,
            label_index,
            no_header,
            images.as_deref(),
            labels.as_deref(),
        ),
        Command::Sweep {
            config,
            out,
            data_dir,
        } => cmd_sweep(&config, &out, data_dir.as_deref()),
        Command::Size {
            width,
            dim,
            classes,
            members,
        } => cmd_size(width, dim, classes, members),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_train(
    config_path: &Path,
    model_out: Option<&Path>,
    report_out: Option<&Path>,
    seed_override: Option<u64>,
    voting_override: Option<&str>,
    retrain_epochs_override: Option<usize>,
    votes_flag: bool,
    data_dir: Option<&Path>,
) -> Result<(), CliError> {
    let run_config = RunConfig::load(config_path)?;
    let seed = seed_override.or(run_config.run.seed).unwrap_or(0);
    let voting_override = voting_override.map(parse_voting).transpose()?;
    let retrain = match retrain_epochs_override {
        Some(0) => false,
        Some(_) => true,
        None => run_config.run.retrain.unwrap_or(true),
    };
    let ensemble_config =
        run_config
            .ensemble
            .build(seed, voting_override, retrain_epochs_override)?;

    let resolved = run_config.dataset.resolve(data_dir)?;
    let train_started = Instant::now();
    let model = EnsembleModel::build_and_train(&ensemble_config, &resolved.train, retrain)?;
    let train_seconds = train_started.elapsed().as_secs_f64();

    let eval_started = Instant::now();
    let evaluation = model.evaluate(&resolved.test)?;
    let evaluate_seconds = eval_started.elapsed().as_secs_f64();

    let model_bytes = model_file::to_bytes(&model)?;
    let checksum = model_file::file_checksum(&model_bytes);
    let model_path = model_out.or(run_config.run.model_out.as_deref());
    if let Some(path) = model_path {
        std::fs::write(path, &model_bytes)
            .map_err(|e| CliError::user(format!("cannot write model {}: {e}", path.display())))?;
        println!("model written to {} (sha256 {checksum})", path.display());
    }

    let report = Report::build(
        &model,
        &resolved.test,
        &evaluation,
        seed,
        retrain,
        resolved.train.len(),
        Timing {
            train_seconds,
            evaluate_seconds,
        },
        Some(checksum),
        votes_flag || run_config.run.emit_votes,
    );
    print_summary(&report, model.voting());
    let report_path = report_out.or(run_config.run.report_out.as_deref());
    if let Some(path) = report_path {
        std::fs::write(path, report.to_json()?)
            .map_err(|e| CliError::user(format!("cannot write report {}: {e}", path.display())))?;
        println!("report written to {}", path.display());
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_evaluate(
    model_path: &Path,
    dataset: &str,
    report_out: Option<&Path>,
    votes_flag: bool,
    data_dir: Option<&Path>,
    label_column: Option<String>,
    label_index: Option<usize>,
    no_header: bool,
    images: Option<&Path>,
    labels: Option<&Path>,
) -> Result<(), CliError> {
    let model = model_file::load(model_path)?;
    let test = load_eval_dataset(
        dataset,
        data_dir,
        label_column,
        label_index,
        no_header,
        images,
        labels,
    )?;

    let eval_started = Instant::now();
    let evaluation = model.evaluate(&test)?;
    let evaluate_seconds = eval_started.elapsed().as_secs_f64();

    let report = Report::build(
        &model,
        &test,
        &evaluation,
        0,
        false,
        0,
        Timing {
            train_seconds: 0.0,
            evaluate_seconds,
        },
        None,
        votes_flag,
    );
    print_summary(&report, model.voting());
    if let Some(path) = report_out {
        std::fs::write(path, report.to_json()?)
            .map_err(|e| CliError::user(format!("cannot write report {}: {e}", path.display())))?;
        println!("report written to {}", path.display());
    }
    Ok(())
}

fn load_eval_dataset(
    dataset: &str,
    data_dir: Option<&Path>,
    label_column: Option<String>,
    label_index: Option<usize>,
    no_header: bool,
    images: Option<&Path>,
    labels: Option<&Path>,
) -> Result<Dataset, CliError> {
    if let (Some(images), Some(labels)) = (images, labels) {
        return Ok(enhdc_core::dataio::load_idx(images, labels)?);
    }
    if enhdc_core::DatasetSpec::builtin(dataset).is_some() {
        let config = DatasetConfig {
            name: Some(dataset.to_string()),
            dir: None,
            format: None,
            path: None,
            train_path: None,
            test_path: None,
            train_images: None,
            train_labels: None,
            test_images: None,
            test_labels: None,
            label_column,
            label_index,
            header: Some(!no_header),
            train_count: None,
            test_count: None,
            split_seed: Some(DEFAULT_SPLIT_SEED),
            paper_split: None,
            zscore: false,
            verify_counts: None,
        };
        let ResolvedDataset { test, .. } = config.resolve(data_dir)?;
        return Ok(test);
    }
    let path = Path::new(dataset);
    if !path.is_file() {
        return Err(CliError::user(format!(
            "dataset {dataset:?} is neither a builtin name nor an existing file"
        )));
    }
    match path.extension().and_then(|e| e.to_str()) {
        Some("ehdd") => Ok(Dataset::load_cache(path, dataset)?),
        _ => {
            let selector = if let Some(i) = label_index {
                ColumnSelector::Index(i)
            } else {
                ColumnSelector::Name(label_column.unwrap_or_else(|| "label".to_string()))
            };
            Ok(enhdc_core::dataio::load_csv(path, &selector, !no_header)?)
        }
    }
}

fn cmd_sweep(config_path: &Path, out: &Path, data_dir: Option<&Path>) -> Result<(), CliError> {
    let sweep = SweepConfig::load(config_path)?;
    let mut writer = csv::Writer::from_path(out)
        .map_err(|e| CliError::user(format!("cannot write {}: {e}", out.display())))?;
    writer
        .write_record([
            "dataset",
            "dim",
            "width",
            "encoder",
            "ensemble_size",
            "voting",
            "seed",
            "accuracy",
            "size_bits",
            "error",
        ])
        .map_err(|e| CliError::internal(format!("csv write: {e}")))?;

    for dataset_config in &sweep.dataset {
        // Load once per dataset; per-cell failures are recorded, not fatal.
        let resolved = match dataset_config.resolve(data_dir) {
            Ok(r) => r,
            Err(e) => {
                let name = dataset_config
                    .name
                    .clone()
                    .unwrap_or_else(|| "custom".to_string());
                for cell in sweep_cells(&sweep.sweep) {
                    write_row(&mut writer, &name, &cell, None, None, Some(&e.to_string()))?;
                }
                continue;
            }
        };
        for cell in sweep_cells(&sweep.sweep) {
            match run_cell(&sweep.sweep, &cell, &resolved) {
                Ok((accuracy, size_bits)) => write_row(
                    &mut writer,
                    &resolved.name,
                    &cell,
                    Some(accuracy),
                    Some(size_bits),
                    None,
                )?,
                Err(e) => write_row(
                    &mut writer,
                    &resolved.name,
                    &cell,
                    None,
                    None,
                    Some(&e.to_string()),
                )?,
            }
        }
    }
    writer
        .flush()
        .map_err(|e| CliError::internal(format!("csv flush: {e}")))?;
    println!("sweep results written to {}", out.display());
    Ok(())
}

#[derive(Debug, Clone)]
struct SweepCell {
    dim: usize,
    width: u32,
    encoder: String,
    size: usize,
    voting: String,
    seed: u64,
}

fn sweep_cells(section: &config::SweepSection) -> Vec<SweepCell> {
    let mut cells = Vec::new();
    for &dim in &section.dims {
        for &width in &section.widths {
            for encoder in &section.encoders {
                for &size in &section.sizes {
                    for voting in &section.votings {
                        for &seed in &section.seeds {
                            cells.push(SweepCell {
                                dim,
                                width,
                                encoder: encoder.clone(),
                                size,
                                voting: voting.clone(),
                                seed,
                            });
                        }
                    }
                }
            }
        }
    }
    cells
}

fn run_cell(
    section: &config::SweepSection,
    cell: &SweepCell,
    resolved: &ResolvedDataset,
) -> Result<(f64, u64), CliError> {
    let ensemble_section = config::EnsembleSection {
        preset: Some(match cell.encoder.as_str() {
            "mixed" => "mixed".to_string(),
            "enhanced" => "enhanced".to_string(),
            _ => "uniform".to_string(),
        }),
        size: Some(cell.size),
        voting: Some(cell.voting.clone()),
        dim: Some(cell.dim),
        width: Some(cell.width),
        encoder: match cell.encoder.as_str() {
            "mixed" | "enhanced" => Some("record".to_string()),
            other => Some(other.to_string()),
        },
        levels: section.levels,
        window: section.window,
        retrain_epochs: section.retrain_epochs,
        member: None,
    };
    let ensemble_config = ensemble_section.build(cell.seed, None, None)?;
    let model =
        EnsembleModel::build_and_train(&ensemble_config, &resolved.train, section.retrain)?;
    let evaluation = model.evaluate(&resolved.test)?;
    let size = enhdc_core::ensemble_size_bits(&model);
    Ok((evaluation.ensemble_accuracy, size.bits))
}

fn write_row(
    writer: &mut csv::Writer<std::fs::File>,
    dataset: &str,
    cell: &SweepCell,
    accuracy: Option<f64>,
    size_bits: Option<u64>,
    error: Option<&str>,
) -> Result<(), CliError> {
    // The enhanced preset varies dim and width per member, so those columns
    // are left empty for it.
    let enhanced = cell.encoder == "enhanced";
    let dim = if enhanced {
        String::new()
    } else {
        cell.dim.to_string()
    };
    let width = if enhanced {
        String::new()
    } else {
        cell.width.to_string()
    };
    writer
        .write_record([
            dataset,
            &dim,
            &width,
            &cell.encoder,
            &cell.size.to_string(),
            &cell.voting,
            &cell.seed.to_string(),
            &accuracy.map(|a| format!("{a:.6}")).unwrap_or_default(),
            &size_bits.map(|b| b.to_string()).unwrap_or_default(),
            error.unwrap_or(""),
        ])
        .map_err(|e| CliError::internal(format!("csv write: {e}")))
}

fn cmd_size(width: u32, dim: usize, classes: usize, members: usize) -> Result<(), CliError> {
    if width != 8 && width != 16 {
        return Err(CliError::user(format!(
            "width must be 8 or 16 bits, got {width}"
        )));
    }
    if dim == 0 || classes == 0 || members == 0 {
        return Err(CliError::user(
            "dim, classes and members must all be positive".into(),
        ));
    }
    let size = model_size_bits(width, dim, classes, members);
    println!("{width} bits x {dim} dimensions x {classes} classes x {members} classifier(s)");
    println!(
        "model size: {} bits = {} Kb = {} bytes",
        size.bits,
        format_kilobits(size.kilobits()),
        size.bytes()
    );
    Ok(())
}
