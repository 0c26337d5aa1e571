//! Dataset ingestion: IDX and CSV loaders, seeded splits, and the binary
//! cache format.
//!
//! Loaders run offline against local paths; labels are always remapped to
//! dense 0-based indices with the original names recorded so the mapping can
//! be inverted.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;

use crate::encoding::FeatureVector;
use crate::error::{Error, Result};
use crate::rng::{stream_rng, streams, Seed};

const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

/// Binary cache layout: magic, version, n, m, k, n*m row-major f32 (little
/// endian), then n u32 labels.
const CACHE_MAGIC: [u8; 4] = *b"EHDD";
const CACHE_VERSION: u32 = 1;

/// An in-memory labeled dataset. Labels are dense in [0, k); `label_names`
/// records the original label for each dense index.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    samples: Vec<FeatureVector>,
    labels: Vec<usize>,
    num_classes: usize,
    label_names: Vec<String>,
}

impl Dataset {
    /// Assemble from parts, validating the invariants.
    pub fn from_parts(
        name: impl Into<String>,
        samples: Vec<FeatureVector>,
        labels: Vec<usize>,
        num_classes: usize,
        label_names: Vec<String>,
    ) -> Result<Self> {
        if samples.len() != labels.len() {
            return Err(Error::DatasetMismatch {
                name: name.into(),
                detail: format!("{} samples but {} labels", samples.len(), labels.len()),
            });
        }
        if label_names.len() != num_classes {
            return Err(Error::DatasetMismatch {
                name: name.into(),
                detail: format!(
                    "{} label names for {} classes",
                    label_names.len(),
                    num_classes
                ),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(Error::LabelOutOfRange {
                label: bad,
                classes: num_classes,
            });
        }
        if let Some(first) = samples.first() {
            let m = first.len();
            if let Some(other) = samples.iter().find(|s| s.len() != m) {
                return Err(Error::FeatureCountMismatch {
                    got: other.len(),
                    expected: m,
                });
            }
        }
        Ok(Dataset {
            name: name.into(),
            samples,
            labels,
            num_classes,
            label_names,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Features per sample; 0 for an empty dataset.
    pub fn feature_count(&self) -> usize {
        self.samples.first().map_or(0, |s| s.len())
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn samples(&self) -> &[FeatureVector] {
        &self.samples
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    /// Original label name for a dense index.
    pub fn label_name(&self, dense: usize) -> &str {
        &self.label_names[dense]
    }

    /// Deterministic seeded shuffle followed by a partition into
    /// (train_count, test_count). Remaining samples are dropped.
    pub fn split(&self, train_count: usize, test_count: usize, seed: Seed) -> Result<(Dataset, Dataset)> {
        let requested = train_count + test_count;
        if requested > self.len() {
            return Err(Error::SplitTooLarge {
                requested,
                available: self.len(),
            });
        }
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.shuffle(&mut stream_rng(seed, streams::SPLIT));
        let take = |range: std::ops::Range<usize>, suffix: &str| -> Result<Dataset> {
            let idx = &order[range];
            Dataset::from_parts(
                format!("{}-{}", self.name, suffix),
                idx.iter().map(|&i| self.samples[i].clone()).collect(),
                idx.iter().map(|&i| self.labels[i]).collect(),
                self.num_classes,
                self.label_names.clone(),
            )
        };
        let train = take(0..train_count, "train")?;
        let test = take(train_count..train_count + test_count, "test")?;
        Ok((train, test))
    }

    /// Per-feature z-scoring: subtract the mean and divide by the standard
    /// deviation of each column, both computed on `self`. Returns the fitted
    /// (mean, std) pairs so a test split can reuse them.
    pub fn fit_zscore(&self) -> Vec<(f64, f64)> {
        let m = self.feature_count();
        let n = self.len().max(1) as f64;
        let mut stats = vec![(0.0f64, 0.0f64); m];
        for sample in &self.samples {
            for (j, &v) in sample.values().iter().enumerate() {
                stats[j].0 += v;
            }
        }
        for s in stats.iter_mut() {
            s.0 /= n;
        }
        for sample in &self.samples {
            for (j, &v) in sample.values().iter().enumerate() {
                let d = v - stats[j].0;
                stats[j].1 += d * d;
            }
        }
        for s in stats.iter_mut() {
            s.1 = (s.1 / n).sqrt();
            if s.1 == 0.0 {
                s.1 = 1.0;
            }
        }
        stats
    }

    /// Apply fitted z-score stats to every sample.
    pub fn apply_zscore(&mut self, stats: &[(f64, f64)]) -> Result<()> {
        if stats.len() != self.feature_count() {
            return Err(Error::FeatureCountMismatch {
                got: stats.len(),
                expected: self.feature_count(),
            });
        }
        for sample in self.samples.iter_mut() {
            let values: Vec<f64> = sample
                .values()
                .iter()
                .zip(stats)
                .map(|(&v, &(mean, std))| (v - mean) / std)
                .collect();
            *sample = FeatureVector::new(values)?;
        }
        Ok(())
    }

    /// Write the binary cache format. Features are stored as f32, so values
    /// outside f32 precision are rounded once on the first save.
    pub fn save_cache(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let mut write = |bytes: &[u8]| -> Result<()> {
            w.write_all(bytes).map_err(|e| Error::io(path, e))
        };
        write(&CACHE_MAGIC)?;
        write(&CACHE_VERSION.to_le_bytes())?;
        write(&(self.len() as u32).to_le_bytes())?;
        write(&(self.feature_count() as u32).to_le_bytes())?;
        write(&(self.num_classes as u32).to_le_bytes())?;
        for sample in &self.samples {
            for &v in sample.values() {
                write(&(v as f32).to_le_bytes())?;
            }
        }
        for &label in &self.labels {
            write(&(label as u32).to_le_bytes())?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Load the binary cache format. Label names are the dense indices
    /// rendered as strings; the cache does not carry the original names.
    pub fn load_cache(path: &Path, name: impl Into<String>) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = BufReader::new(file);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(|e| Error::io(path, e))?;
        if magic != CACHE_MAGIC {
            return Err(Error::CacheFormat {
                path: path.into(),
                detail: format!("magic {magic:?}, expected {CACHE_MAGIC:?}"),
            });
        }
        let version = read_u32_le(&mut r, path)?;
        if version != CACHE_VERSION {
            return Err(Error::CacheFormat {
                path: path.into(),
                detail: format!("version {version}, expected {CACHE_VERSION}"),
            });
        }
        let n = read_u32_le(&mut r, path)? as usize;
        let m = read_u32_le(&mut r, path)? as usize;
        let k = read_u32_le(&mut r, path)? as usize;
        let mut samples = Vec::with_capacity(n);
        let mut row = vec![0u8; m * 4];
        for _ in 0..n {
            r.read_exact(&mut row).map_err(|e| Error::io(path, e))?;
            let values: Vec<f64> = row
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
                .collect();
            samples.push(FeatureVector::new(values)?);
        }
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            labels.push(read_u32_le(&mut r, path)? as usize);
        }
        let label_names = (0..k).map(|i| i.to_string()).collect();
        Dataset::from_parts(name, samples, labels, k, label_names)
    }
}

fn read_u32_le<R: Read>(r: &mut R, path: &Path) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf).map_err(|e| Error::io(path, e))?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u32_be<R: Read>(r: &mut R, path: &Path) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf).map_err(|e| Error::io(path, e))?;
    Ok(u32::from_be_bytes(buf))
}

/// Load an IDX image/label file pair (the MNIST distribution format).
///
/// Pixels become flattened row-major features in [0, 255]; labels are the
/// stored byte values remapped densely.
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<Dataset> {
    let images = File::open(images_path).map_err(|e| Error::io(images_path, e))?;
    let mut r = BufReader::new(images);
    let magic = read_u32_be(&mut r, images_path)?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(Error::IdxBadMagic {
            path: images_path.into(),
            found: magic,
            expected: IDX_IMAGES_MAGIC,
        });
    }
    let n = read_u32_be(&mut r, images_path)? as usize;
    let rows = read_u32_be(&mut r, images_path)? as usize;
    let cols = read_u32_be(&mut r, images_path)? as usize;
    let m = rows * cols;
    let mut pixels = Vec::new();
    r.read_to_end(&mut pixels)
        .map_err(|e| Error::io(images_path, e))?;
    if pixels.len() < n * m {
        return Err(Error::IdxTruncated {
            path: images_path.into(),
            expected: n * m,
            found: pixels.len(),
        });
    }

    let labels_file = File::open(labels_path).map_err(|e| Error::io(labels_path, e))?;
    let mut r = BufReader::new(labels_file);
    let magic = read_u32_be(&mut r, labels_path)?;
    if magic != IDX_LABELS_MAGIC {
        return Err(Error::IdxBadMagic {
            path: labels_path.into(),
            found: magic,
            expected: IDX_LABELS_MAGIC,
        });
    }
    let n_labels = read_u32_be(&mut r, labels_path)? as usize;
    let mut raw_labels = Vec::new();
    r.read_to_end(&mut raw_labels)
        .map_err(|e| Error::io(labels_path, e))?;
    if raw_labels.len() < n_labels {
        return Err(Error::IdxTruncated {
            path: labels_path.into(),
            expected: n_labels,
            found: raw_labels.len(),
        });
    }
    raw_labels.truncate(n_labels);
    if n != n_labels {
        return Err(Error::IdxCountMismatch {
            images: n,
            labels: n_labels,
        });
    }

    let samples = pixels[..n * m]
        .chunks_exact(m)
        .map(|chunk| FeatureVector::new(chunk.iter().map(|&p| p as f64).collect()))
        .collect::<Result<Vec<_>>>()?;
    let (labels, label_names) = remap_labels(raw_labels.iter().map(|l| l.to_string()));
    let k = label_names.len();
    let name = images_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "idx".to_string());
    Dataset::from_parts(name, samples, labels, k, label_names)
}

/// How the label column of a CSV file is identified.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnSelector {
    Index(usize),
    Name(String),
}

/// Load an RFC-4180-style CSV file. All non-label columns become features;
/// label values are remapped to dense 0-based indices.
pub fn load_csv(path: &Path, label_column: &ColumnSelector, header: bool) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::CsvParse {
            path: path.into(),
            detail: e.to_string(),
        })?;

    let mut label_idx: Option<usize> = None;
    let mut width: Option<usize> = None;
    if header {
        let headers = reader.headers().map_err(|e| Error::CsvParse {
            path: path.into(),
            detail: e.to_string(),
        })?;
        width = Some(headers.len());
        label_idx = Some(resolve_label_column(path, label_column, Some(headers))?);
    }

    let mut raw_labels: Vec<String> = Vec::new();
    let mut samples: Vec<FeatureVector> = Vec::new();
    for (row_number, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::CsvParse {
            path: path.into(),
            detail: e.to_string(),
        })?;
        let row = row_number + if header { 2 } else { 1 };
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::CsvRaggedRow {
                path: path.into(),
                row,
                got: record.len(),
                expected,
            });
        }
        let li = match label_idx {
            Some(i) => i,
            None => {
                let i = resolve_label_column(path, label_column, None)?;
                if i >= expected {
                    return Err(Error::CsvUnknownLabelColumn {
                        path: path.into(),
                        column: format!("{i}"),
                    });
                }
                label_idx = Some(i);
                i
            }
        };
        if li >= record.len() {
            return Err(Error::CsvUnknownLabelColumn {
                path: path.into(),
                column: format!("{li}"),
            });
        }
        let mut values = Vec::with_capacity(record.len() - 1);
        for (column, field) in record.iter().enumerate() {
            if column == li {
                raw_labels.push(field.to_string());
                continue;
            }
            let value: f64 = field.parse().map_err(|_| Error::CsvNonNumeric {
                path: path.into(),
                row,
                column,
                value: field.to_string(),
            })?;
            values.push(value);
        }
        samples.push(FeatureVector::new(values)?);
    }
    if samples.is_empty() {
        return Err(Error::EmptyInput("csv dataset"));
    }
    let (labels, label_names) = remap_labels(raw_labels.into_iter());
    let k = label_names.len();
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "csv".to_string());
    Dataset::from_parts(name, samples, labels, k, label_names)
}

fn resolve_label_column(
    path: &Path,
    selector: &ColumnSelector,
    headers: Option<&csv::StringRecord>,
) -> Result<usize> {
    match selector {
        ColumnSelector::Index(i) => Ok(*i),
        ColumnSelector::Name(name) => {
            let headers = headers.ok_or_else(|| Error::CsvUnknownLabelColumn {
                path: path.into(),
                column: format!("{name} (file has no header row)"),
            })?;
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::CsvUnknownLabelColumn {
                    path: path.into(),
                    column: name.clone(),
                })
        }
    }
}

/// Remap raw label strings to dense 0-based indices. Names are sorted so the
/// mapping is independent of sample order; numeric labels sort numerically.
fn remap_labels(raw: impl Iterator<Item = String>) -> (Vec<usize>, Vec<String>) {
    let raw: Vec<String> = raw.collect();
    let mut names: Vec<String> = raw.iter().cloned().collect();
    names.sort_by(|a, b| match (a.parse::<f64>(), b.parse::<f64>()) {
        (Ok(x), Ok(y)) => x.partial_cmp(&y).unwrap_or(std::cmp::Ordering::Equal),
        _ => a.cmp(b),
    });
    names.dedup();
    let labels = raw
        .iter()
        .map(|l| names.iter().position(|n| n == l).unwrap())
        .collect();
    (labels, names)
}

/// Source format of a canonical dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceFormat {
    Idx,
    Csv,
}

/// Expected shape of a canonical dataset; loading verifies against it.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub name: &'static str,
    pub format: SourceFormat,
    pub train_count: usize,
    pub test_count: usize,
    pub num_classes: usize,
}

impl DatasetSpec {
    /// The four evaluation datasets and their published split sizes.
    pub fn builtin(name: &str) -> Option<&'static DatasetSpec> {
        BUILTIN_SPECS.iter().find(|s| s.name == name)
    }

    /// Check a loaded (train, test) pair against the expected counts.
    pub fn verify(&self, train: &Dataset, test: &Dataset) -> Result<()> {
        let mut problems = Vec::new();
        if train.len() != self.train_count {
            problems.push(format!(
                "train count {} != expected {}",
                train.len(),
                self.train_count
            ));
        }
        if test.len() != self.test_count {
            problems.push(format!(
                "test count {} != expected {}",
                test.len(),
                self.test_count
            ));
        }
        if train.num_classes() != self.num_classes {
            problems.push(format!(
                "class count {} != expected {}",
                train.num_classes(),
                self.num_classes
            ));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::DatasetMismatch {
                name: self.name.to_string(),
                detail: problems.join("; "),
            })
        }
    }
}

/// Published split sizes for the four evaluation datasets.
pub const BUILTIN_SPECS: [DatasetSpec; 4] = [
    DatasetSpec {
        name: "mnist",
        format: SourceFormat::Idx,
        train_count: 50_000,
        test_count: 10_000,
        num_classes: 10,
    },
    DatasetSpec {
        name: "cardio",
        format: SourceFormat::Csv,
        train_count: 1_913,
        test_count: 213,
        num_classes: 10,
    },
    DatasetSpec {
        name: "har",
        format: SourceFormat::Csv,
        train_count: 7_767,
        test_count: 3_162,
        num_classes: 12,
    },
    DatasetSpec {
        name: "isolet",
        format: SourceFormat::Csv,
        train_count: 6_238,
        test_count: 1_559,
        num_classes: 26,
    },
];
