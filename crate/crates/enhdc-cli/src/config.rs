//! Run and sweep configuration files (TOML) and dataset resolution.
//!
//! Unknown keys are rejected everywhere: a typoed field is an error, not a
//! silently ignored setting.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use enhdc_core::{
    dataio, BaseClassifierConfig, ColumnSelector, DataWidth, Dataset, DatasetSpec, EncoderKind,
    EnsembleConfig, Seed, SourceFormat, Voting,
};

use crate::CliError;

/// Default seed for dataset shuffles when a config does not set one.
pub const DEFAULT_SPLIT_SEED: u64 = 2022;

/// Environment variable naming the default dataset root.
pub const DATA_DIR_ENV: &str = "ENHDC_DATA_DIR";

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: DatasetConfig,
    pub ensemble: EnsembleSection,
    #[serde(default)]
    pub run: RunSection,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::user(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::user(format!("config {}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    /// Builtin dataset name (mnist, cardio, har, isolet), resolved under the
    /// data root.
    pub name: Option<String>,
    /// Data root override; falls back to ENHDC_DATA_DIR, then ./data.
    pub dir: Option<PathBuf>,
    /// Custom source format: csv, idx or cache.
    pub format: Option<String>,
    /// Single CSV/cache file split into train/test by counts.
    pub path: Option<PathBuf>,
    pub train_path: Option<PathBuf>,
    pub test_path: Option<PathBuf>,
    pub train_images: Option<PathBuf>,
    pub train_labels: Option<PathBuf>,
    pub test_images: Option<PathBuf>,
    pub test_labels: Option<PathBuf>,
    pub label_column: Option<String>,
    pub label_index: Option<usize>,
    pub header: Option<bool>,
    /// Subsample / split sizes. For builtin datasets these default to the
    /// published split.
    pub train_count: Option<usize>,
    pub test_count: Option<usize>,
    pub split_seed: Option<u64>,
    /// mnist only: take 50000 of the 60000 canonical training samples
    /// (seeded) instead of the full canonical split. Defaults to true.
    pub paper_split: Option<bool>,
    /// Per-feature z-scoring fitted on the training split.
    #[serde(default)]
    pub zscore: bool,
    /// Verify loaded counts against the published split sizes. Defaults to
    /// true when the builtin split is used unmodified.
    pub verify_counts: Option<bool>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    /// uniform | mixed | enhanced. Ignored when explicit members are listed.
    pub preset: Option<String>,
    pub size: Option<usize>,
    pub voting: Option<String>,
    pub dim: Option<usize>,
    /// Storage width in bits: 8 or 16.
    pub width: Option<u32>,
    pub encoder: Option<String>,
    pub levels: Option<usize>,
    pub window: Option<usize>,
    pub retrain_epochs: Option<usize>,
    /// Explicit member list; overrides preset and size.
    pub member: Option<Vec<MemberSection>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemberSection {
    pub dim: Option<usize>,
    pub width: Option<u32>,
    pub encoder: Option<String>,
    pub levels: Option<usize>,
    pub window: Option<usize>,
    pub seed: Option<u64>,
    pub retrain_epochs: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub seed: Option<u64>,
    pub retrain: Option<bool>,
    pub model_out: Option<PathBuf>,
    pub report_out: Option<PathBuf>,
    #[serde(default)]
    pub emit_votes: bool,
}

pub fn parse_width(bits: u32) -> Result<DataWidth, CliError> {
    match bits {
        8 => Ok(DataWidth::Int8),
        16 => Ok(DataWidth::Int16),
        other => Err(CliError::user(format!(
            "width must be 8 or 16 bits, got {other}"
        ))),
    }
}

pub fn parse_encoder(name: &str) -> Result<EncoderKind, CliError> {
    match name {
        "record" => Ok(EncoderKind::Record),
        "ngram" => Ok(EncoderKind::NGram),
        other => Err(CliError::user(format!(
            "encoder must be 'record' or 'ngram', got {other:?}"
        ))),
    }
}

pub fn parse_voting(name: &str) -> Result<Voting, CliError> {
    match name {
        "hard" => Ok(Voting::Hard),
        "soft" => Ok(Voting::Soft),
        other => Err(CliError::user(format!(
            "voting must be 'hard' or 'soft', got {other:?}"
        ))),
    }
}

pub fn voting_name(voting: Voting) -> &'static str {
    match voting {
        Voting::Hard => "hard",
        Voting::Soft => "soft",
    }
}

pub fn encoder_name(kind: EncoderKind) -> &'static str {
    match kind {
        EncoderKind::Record => "record",
        EncoderKind::NGram => "ngram",
    }
}

impl EnsembleSection {
    /// Build the concrete ensemble configuration. `run_seed` feeds member
    /// seed derivation; a CLI --voting override wins over the file.
    pub fn build(
        &self,
        run_seed: u64,
        voting_override: Option<Voting>,
        retrain_epochs_override: Option<usize>,
    ) -> Result<EnsembleConfig, CliError> {
        let voting = match voting_override {
            Some(v) => v,
            None => parse_voting(self.voting.as_deref().unwrap_or("hard"))?,
        };
        let template = BaseClassifierConfig {
            dim: self.dim.unwrap_or(1000),
            width: parse_width(self.width.unwrap_or(8))?,
            encoder: parse_encoder(self.encoder.as_deref().unwrap_or("record"))?,
            levels: self.levels.unwrap_or(32),
            window: self.window.unwrap_or(3),
            seed: Seed(run_seed),
            retrain_epochs: retrain_epochs_override
                .or(self.retrain_epochs)
                .unwrap_or(20),
        };

        let config = if let Some(members) = &self.member {
            if members.is_empty() {
                return Err(CliError::user("ensemble.member list is empty".into()));
            }
            let members = members
                .iter()
                .enumerate()
                .map(|(i, m)| {
                    Ok(BaseClassifierConfig {
                        dim: m.dim.unwrap_or(template.dim),
                        width: m.width.map(parse_width).transpose()?.unwrap_or(template.width),
                        encoder: m
                            .encoder
                            .as_deref()
                            .map(parse_encoder)
                            .transpose()?
                            .unwrap_or(template.encoder),
                        levels: m.levels.unwrap_or(template.levels),
                        window: m.window.unwrap_or(template.window),
                        seed: m
                            .seed
                            .map(Seed)
                            .unwrap_or_else(|| enhdc_core::rng::derive_member_seed(Seed(run_seed), i)),
                        retrain_epochs: m.retrain_epochs.unwrap_or(template.retrain_epochs),
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            EnsembleConfig { members, voting }
        } else {
            let size = self.size.unwrap_or(8);
            if size == 0 {
                return Err(CliError::user("ensemble.size must be at least 1".into()));
            }
            match self.preset.as_deref().unwrap_or("uniform") {
                "uniform" => EnsembleConfig::uniform(&template, size, Seed(run_seed), voting),
                "mixed" => EnsembleConfig::mixed_encoders(&template, size, Seed(run_seed), voting),
                "enhanced" => {
                    EnsembleConfig::diversity_enhanced(&template, size, Seed(run_seed), voting)
                }
                other => {
                    return Err(CliError::user(format!(
                        "preset must be uniform, mixed or enhanced, got {other:?}"
                    )))
                }
            }
        };
        config.validate()?;
        Ok(config)
    }
}

/// A resolved train/test pair ready for training or evaluation.
pub struct ResolvedDataset {
    pub name: String,
    pub train: Dataset,
    pub test: Dataset,
}

/// Data root: CLI flag, then config field, then ENHDC_DATA_DIR, then ./data.
pub fn data_root(flag: Option<&Path>, config_dir: Option<&Path>) -> PathBuf {
    if let Some(dir) = flag {
        return dir.to_path_buf();
    }
    if let Some(dir) = config_dir {
        return dir.to_path_buf();
    }
    if let Ok(dir) = std::env::var(DATA_DIR_ENV) {
        return PathBuf::from(dir);
    }
    PathBuf::from("data")
}

fn require_file(path: &Path) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::user(format!(
            "dataset file not found: {}",
            path.display()
        )))
    }
}

impl DatasetConfig {
    fn label_selector(&self, default_name: &str) -> ColumnSelector {
        if let Some(i) = self.label_index {
            ColumnSelector::Index(i)
        } else if let Some(name) = &self.label_column {
            ColumnSelector::Name(name.clone())
        } else {
            ColumnSelector::Name(default_name.to_string())
        }
    }

    /// Load, split and (optionally) normalize the configured dataset.
    pub fn resolve(&self, data_dir_flag: Option<&Path>) -> Result<ResolvedDataset, CliError> {
        let split_seed = Seed(self.split_seed.unwrap_or(DEFAULT_SPLIT_SEED));
        let mut resolved = if let Some(name) = &self.name {
            self.resolve_builtin(name, data_dir_flag, split_seed)?
        } else {
            self.resolve_custom(split_seed)?
        };
        if self.zscore {
            let stats = resolved.train.fit_zscore();
            resolved.train.apply_zscore(&stats)?;
            resolved.test.apply_zscore(&stats)?;
        }
        Ok(resolved)
    }

    fn resolve_builtin(
        &self,
        name: &str,
        data_dir_flag: Option<&Path>,
        split_seed: Seed,
    ) -> Result<ResolvedDataset, CliError> {
        let spec = DatasetSpec::builtin(name).ok_or_else(|| {
            CliError::user(format!(
                "unknown dataset {name:?}; builtins are mnist, cardio, har, isolet"
            ))
        })?;
        let root = data_root(data_dir_flag, self.dir.as_deref()).join(name);
        let (train, test) = match (name, spec.format) {
            ("mnist", _) => {
                let train_images = root.join("train-images-idx3-ubyte");
                let train_labels = root.join("train-labels-idx1-ubyte");
                let test_images = root.join("t10k-images-idx3-ubyte");
                let test_labels = root.join("t10k-labels-idx1-ubyte");
                for p in [&train_images, &train_labels, &test_images, &test_labels] {
                    require_file(p)?;
                }
                let full_train = dataio::load_idx(&train_images, &train_labels)?;
                let test = dataio::load_idx(&test_images, &test_labels)?;
                let paper_split = self.paper_split.unwrap_or(true);
                let train = if paper_split {
                    full_train.split(spec.train_count, 0, split_seed)?.0
                } else {
                    full_train
                };
                (train, test)
            }
            ("cardio", _) => {
                let path = root.join("cardio.csv");
                require_file(&path)?;
                let full = dataio::load_csv(&path, &self.label_selector("CLASS"), self.header.unwrap_or(true))?;
                let (train, test) = full.split(spec.train_count, spec.test_count, split_seed)?;
                (train, test)
            }
            // har and isolet ship as pre-split CSV conversions.
            (_, SourceFormat::Csv) => {
                let train_path = root.join("train.csv");
                let test_path = root.join("test.csv");
                require_file(&train_path)?;
                require_file(&test_path)?;
                let selector = self.label_selector("label");
                let header = self.header.unwrap_or(true);
                let train = dataio::load_csv(&train_path, &selector, header)?;
                let test = dataio::load_csv(&test_path, &selector, header)?;
                (train, test)
            }
            _ => unreachable!("builtin table covers all formats"),
        };

        // Optional desk-scale subsampling on top of the canonical split.
        let (train, test) = self.subsample(train, test, split_seed)?;
        let canonical = self.train_count.is_none() && self.test_count.is_none();
        if self.verify_counts.unwrap_or(canonical) {
            spec.verify(&train, &test)?;
        }
        Ok(ResolvedDataset {
            name: name.to_string(),
            train,
            test,
        })
    }

    fn subsample(
        &self,
        train: Dataset,
        test: Dataset,
        split_seed: Seed,
    ) -> Result<(Dataset, Dataset), CliError> {
        let train = match self.train_count {
            Some(n) if self.name.is_some() || self.path.is_none() => {
                train.split(n, 0, split_seed)?.0
            }
            _ => train,
        };
        let test = match self.test_count {
            Some(n) if self.name.is_some() || self.path.is_none() => {
                test.split(n, 0, split_seed)?.0
            }
            _ => test,
        };
        Ok((train, test))
    }

    fn resolve_custom(&self, split_seed: Seed) -> Result<ResolvedDataset, CliError> {
        let format = self.format.as_deref().ok_or_else(|| {
            CliError::user("dataset needs either a builtin name or a format".into())
        })?;
        match format {
            "csv" => {
                let selector = self.label_selector("label");
                let header = self.header.unwrap_or(true);
                if let Some(path) = &self.path {
                    require_file(path)?;
                    let full = dataio::load_csv(path, &selector, header)?;
                    let (train_count, test_count) = match (self.train_count, self.test_count) {
                        (Some(tr), Some(te)) => (tr, te),
                        _ => {
                            // Default 90/10 split.
                            let te = full.len() / 10;
                            (full.len() - te, te)
                        }
                    };
                    let (train, test) = full.split(train_count, test_count, split_seed)?;
                    Ok(ResolvedDataset {
                        name: full_name(path),
                        train,
                        test,
                    })
                } else {
                    let train_path = self.train_path.as_ref().ok_or_else(|| {
                        CliError::user("csv dataset needs path or train_path/test_path".into())
                    })?;
                    let test_path = self.test_path.as_ref().ok_or_else(|| {
                        CliError::user("csv dataset needs test_path alongside train_path".into())
                    })?;
                    require_file(train_path)?;
                    require_file(test_path)?;
                    Ok(ResolvedDataset {
                        name: full_name(train_path),
                        train: dataio::load_csv(train_path, &selector, header)?,
                        test: dataio::load_csv(test_path, &selector, header)?,
                    })
                }
            }
            "idx" => {
                let missing = || CliError::user(
                    "idx dataset needs train_images/train_labels/test_images/test_labels".into(),
                );
                let train_images = self.train_images.as_ref().ok_or_else(missing)?;
                let train_labels = self.train_labels.as_ref().ok_or_else(missing)?;
                let test_images = self.test_images.as_ref().ok_or_else(missing)?;
                let test_labels = self.test_labels.as_ref().ok_or_else(missing)?;
                for p in [train_images, train_labels, test_images, test_labels] {
                    require_file(p)?;
                }
                let train = dataio::load_idx(train_images, train_labels)?;
                let test = dataio::load_idx(test_images, test_labels)?;
                let (train, test) = self.subsample(train, test, split_seed)?;
                Ok(ResolvedDataset {
                    name: full_name(train_images),
                    train,
                    test,
                })
            }
            "cache" => {
                let train_path = self.train_path.as_ref().ok_or_else(|| {
                    CliError::user("cache dataset needs train_path and test_path".into())
                })?;
                let test_path = self.test_path.as_ref().ok_or_else(|| {
                    CliError::user("cache dataset needs test_path alongside train_path".into())
                })?;
                require_file(train_path)?;
                require_file(test_path)?;
                Ok(ResolvedDataset {
                    name: full_name(train_path),
                    train: Dataset::load_cache(train_path, full_name(train_path))?,
                    test: Dataset::load_cache(test_path, full_name(test_path))?,
                })
            }
            other => Err(CliError::user(format!(
                "format must be csv, idx or cache, got {other:?}"
            ))),
        }
    }
}

fn full_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string())
}

/// Sweep configuration: the cross product of the listed axes runs once per
/// seed, one CSV row per cell.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub sweep: SweepSection,
    pub dataset: Vec<DatasetConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub seeds: Vec<u64>,
    pub dims: Vec<usize>,
    #[serde(default = "default_widths")]
    pub widths: Vec<u32>,
    /// record | ngram | mixed | enhanced; mixed alternates the two encoders
    /// across members, enhanced runs the full diversity preset.
    #[serde(default = "default_encoders")]
    pub encoders: Vec<String>,
    pub sizes: Vec<usize>,
    #[serde(default = "default_votings")]
    pub votings: Vec<String>,
    #[serde(default = "default_true")]
    pub retrain: bool,
    pub retrain_epochs: Option<usize>,
    pub levels: Option<usize>,
    pub window: Option<usize>,
}

fn default_widths() -> Vec<u32> {
    vec![8]
}

fn default_encoders() -> Vec<String> {
    vec!["record".to_string()]
}

fn default_votings() -> Vec<String> {
    vec!["hard".to_string()]
}

fn default_true() -> bool {
    true
}

impl SweepConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::user(format!("cannot read config {}: {e}", path.display())))?;
        let config: SweepConfig = toml::from_str(&text)
            .map_err(|e| CliError::user(format!("config {}: {e}", path.display())))?;
        if config.sweep.seeds.is_empty() {
            return Err(CliError::user("sweep.seeds must not be empty".into()));
        }
        Ok(config)
    }
}
