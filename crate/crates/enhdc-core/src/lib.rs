//! Hyperdimensional-computing ensemble classification.
//!
//! The pipeline: feature vectors are encoded into high-dimensional integer
//! hypervectors (record or n-gram encoding), class hypervectors are built by
//! summing encodings per label, mispredicted samples are folded back in by
//! retraining, and several independently seeded base classifiers are combined
//! by hard or soft voting.

pub mod classifier;
pub mod dataio;
pub mod encoding;
pub mod ensemble;
pub mod error;
pub mod hypervector;
pub mod rng;

pub use classifier::{
    clip_to_width, quantize_to_width, AssociativeMemory, BaseClassifier, BaseClassifierConfig,
    Prediction, RetrainOrder,
};
pub use dataio::{ColumnSelector, Dataset, DatasetSpec, SourceFormat};
pub use encoding::{
    encode_ngram, encode_record, extend_features, BaseMemory, EncoderKind, EncoderMemories,
    FeatureVector, LevelMemory, ProjectionMemory, Quantizer,
};
pub use ensemble::{
    ensemble_size_bits, model_size_bits, vote_hard, vote_soft, EnsembleConfig,
    EnsembleEvaluation, EnsembleModel, ModelSize, VoteRecord, VoteTally, Voting,
};
pub use error::{Error, Result};
pub use hypervector::{DataWidth, Hypervector};
pub use rng::Seed;
