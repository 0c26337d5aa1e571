//! Error type shared by every module in the crate.

use std::path::PathBuf;

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while building, training or loading models.
#[derive(Debug, Error)]
pub enum Error {
    /// Two hypervectors with different dimensions were combined.
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    /// A hypervector with no elements was requested or supplied.
    #[error("hypervector dimension must be at least 1")]
    ZeroDimension,

    /// Cosine similarity against an all-zero vector; for a class hypervector
    /// this means the class was never trained.
    #[error("zero-norm operand in cosine similarity ({context})")]
    ZeroNorm { context: &'static str },

    /// An empty collection where at least one element is required.
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    /// A feature vector contained NaN or infinity.
    #[error("non-finite feature value {value} at index {index}")]
    NonFiniteFeature { index: usize, value: f64 },

    /// Quantizer fitting found min == max, so no level structure exists.
    #[error("degenerate feature range: min == max == {value}")]
    DegenerateRange { value: f64 },

    /// Configuration field with an out-of-range or inconsistent value.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// N-gram window exceeds the hypervector dimension.
    #[error("window {window} exceeds dimension {dim}")]
    WindowTooLarge { window: usize, dim: usize },

    /// Feature vector length does not match what the encoder memories expect.
    #[error("feature count mismatch: got {got}, memories built for {expected}")]
    FeatureCountMismatch { got: usize, expected: usize },

    /// A training label at or above the declared class count.
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    /// Per-member similarity vectors disagree on the class count.
    #[error("prediction supplies {got} similarities, expected {expected}")]
    SimilarityCountMismatch { got: usize, expected: usize },

    /// Underlying I/O failure, annotated with the path involved.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// IDX file whose magic number is not the expected one.
    #[error("{path}: bad IDX magic 0x{found:08x} at offset 0, expected 0x{expected:08x}")]
    IdxBadMagic {
        path: PathBuf,
        found: u32,
        expected: u32,
    },

    /// IDX file shorter than its header declares.
    #[error("{path}: truncated IDX payload, expected {expected} bytes, found {found}")]
    IdxTruncated {
        path: PathBuf,
        expected: usize,
        found: usize,
    },

    /// Image and label IDX files disagree on the sample count.
    #[error("IDX sample count mismatch: {images} images vs {labels} labels")]
    IdxCountMismatch { images: usize, labels: usize },

    /// CSV row with a different field count than the first row.
    #[error("{path}: ragged CSV row {row}: {got} fields, expected {expected}")]
    CsvRaggedRow {
        path: PathBuf,
        row: usize,
        got: usize,
        expected: usize,
    },

    /// CSV cell that does not parse as a number.
    #[error("{path}: non-numeric value {value:?} at row {row}, column {column}")]
    CsvNonNumeric {
        path: PathBuf,
        row: usize,
        column: usize,
        value: String,
    },

    /// The requested label column is absent from the CSV file.
    #[error("{path}: label column {column:?} not found")]
    CsvUnknownLabelColumn { path: PathBuf, column: String },

    /// Low-level CSV parse failure.
    #[error("{path}: csv parse error: {detail}")]
    CsvParse { path: PathBuf, detail: String },

    /// Requested split sizes exceed the available samples.
    #[error("split counts {requested} exceed dataset size {available}")]
    SplitTooLarge { requested: usize, available: usize },

    /// Binary dataset cache with an unrecognized magic or version.
    #[error("{path}: bad cache header: {detail}")]
    CacheFormat { path: PathBuf, detail: String },

    /// Loaded dataset does not match the expected counts for its spec.
    #[error("dataset {name:?} mismatch: {detail}")]
    DatasetMismatch { name: String, detail: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
