//! A single base HDC classifier: associative-memory training, cosine
//! inference, and error-driven retraining.
//!
//! Training and retraining accumulate in wide integers; the configured 8/16
//! bit storage width is applied only when the classifier is finalized for
//! storage, since mid-training clipping would break the linearity of the
//! class sums.

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::dataio::Dataset;
use crate::encoding::{EncoderKind, EncoderMemories, FeatureVector, Quantizer};
use crate::error::{Error, Result};
use crate::hypervector::{DataWidth, Hypervector};
use crate::rng::{stream_rng, streams, Seed};

/// One point in the base-classifier diversity space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseClassifierConfig {
    /// Hypervector dimension (1000 / 5000 / 10000 in the stock sweeps).
    pub dim: usize,
    /// Storage width for finalized class hypervectors.
    pub width: DataWidth,
    pub encoder: EncoderKind,
    /// Quantization levels for record encoding.
    pub levels: usize,
    /// Sliding-window width for n-gram encoding.
    pub window: usize,
    pub seed: Seed,
    /// Maximum retraining epochs; retraining stops early on a clean epoch.
    pub retrain_epochs: usize,
}

impl Default for BaseClassifierConfig {
    fn default() -> Self {
        BaseClassifierConfig {
            dim: 1000,
            width: DataWidth::Int8,
            encoder: EncoderKind::Record,
            levels: 32,
            window: 3,
            seed: Seed(0),
            retrain_epochs: 20,
        }
    }
}

impl BaseClassifierConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidConfig("dim must be at least 1".into()));
        }
        if self.levels < 2 {
            return Err(Error::InvalidConfig(format!(
                "levels must be at least 2, got {}",
                self.levels
            )));
        }
        if self.window == 0 {
            return Err(Error::InvalidConfig("window must be at least 1".into()));
        }
        Ok(())
    }
}

/// The trained model: one accumulated class hypervector per label.
#[derive(Debug, Clone, PartialEq)]
pub struct AssociativeMemory {
    class_hvs: Vec<Hypervector>,
    label_names: Vec<String>,
}

impl AssociativeMemory {
    /// All-zero memory, the state before training.
    pub fn zeros(dim: usize, label_names: Vec<String>) -> Result<Self> {
        if label_names.is_empty() {
            return Err(Error::EmptyInput("associative memory labels"));
        }
        let class_hvs = (0..label_names.len())
            .map(|_| Hypervector::zeros(dim))
            .collect::<Result<Vec<_>>>()?;
        Ok(AssociativeMemory {
            class_hvs,
            label_names,
        })
    }

    pub fn from_parts(class_hvs: Vec<Hypervector>, label_names: Vec<String>) -> Result<Self> {
        if class_hvs.is_empty() {
            return Err(Error::EmptyInput("associative memory classes"));
        }
        if class_hvs.len() != label_names.len() {
            return Err(Error::InvalidConfig(format!(
                "{} class hypervectors but {} label names",
                class_hvs.len(),
                label_names.len()
            )));
        }
        let dim = class_hvs[0].dim();
        if let Some(bad) = class_hvs.iter().find(|hv| hv.dim() != dim) {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: bad.dim(),
            });
        }
        Ok(AssociativeMemory {
            class_hvs,
            label_names,
        })
    }

    pub fn num_classes(&self) -> usize {
        self.class_hvs.len()
    }

    pub fn dim(&self) -> usize {
        self.class_hvs[0].dim()
    }

    pub fn class_hv(&self, label: usize) -> &Hypervector {
        &self.class_hvs[label]
    }

    pub fn class_hvs(&self) -> &[Hypervector] {
        &self.class_hvs
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    fn check_label(&self, label: usize) -> Result<()> {
        if label >= self.class_hvs.len() {
            return Err(Error::LabelOutOfRange {
                label,
                classes: self.class_hvs.len(),
            });
        }
        Ok(())
    }

    /// Add an encoded sample into a class hypervector.
    pub fn add_to_class(&mut self, label: usize, hv: &Hypervector) -> Result<()> {
        self.check_label(label)?;
        self.class_hvs[label].add_assign(hv)
    }

    /// Subtract an encoded sample from a class hypervector.
    pub fn subtract_from_class(&mut self, label: usize, hv: &Hypervector) -> Result<()> {
        self.check_label(label)?;
        self.class_hvs[label].sub_assign(hv)
    }
}

/// Saturate every stored element into the given width.
pub fn clip_to_width(memory: &AssociativeMemory, width: DataWidth) -> AssociativeMemory {
    AssociativeMemory {
        class_hvs: memory
            .class_hvs
            .iter()
            .map(|hv| hv.saturated(width))
            .collect(),
        label_names: memory.label_names.clone(),
    }
}

/// Quantize a wide memory into the given storage width.
///
/// Each class hypervector whose peak magnitude exceeds the width is first
/// divided by a positive per-class scalar (then rounded half away from
/// zero) so the whole vector lands in range; cosine similarity is invariant
/// to positive scaling, so this preserves the stored direction far better
/// than raw saturation, which flattens every large element to the same
/// bound. Saturation still runs last to absorb rounding at the edges.
pub fn quantize_to_width(memory: &AssociativeMemory, width: DataWidth) -> AssociativeMemory {
    let (_, hi) = width.bounds();
    let class_hvs = memory
        .class_hvs
        .iter()
        .map(|hv| {
            let max_abs = hv.elements().iter().map(|e| e.unsigned_abs()).max().unwrap_or(0);
            let rescaled = if max_abs > hi as u64 {
                let scale = max_abs as f64 / hi as f64;
                Hypervector::from_elements(
                    hv.elements()
                        .iter()
                        .map(|&e| (e as f64 / scale).round() as i64)
                        .collect(),
                )
                .expect("dimension preserved")
            } else {
                hv.clone()
            };
            rescaled.saturated(width)
        })
        .collect();
    AssociativeMemory {
        class_hvs,
        label_names: memory.label_names.clone(),
    }
}

/// Inference outcome: the winning label plus the similarity against every
/// class hypervector.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: usize,
    pub similarities: Vec<f64>,
}

impl Prediction {
    /// Label is the argmax of the similarities; ties go to the lowest index.
    pub fn from_similarities(similarities: Vec<f64>) -> Result<Self> {
        if similarities.is_empty() {
            return Err(Error::EmptyInput("similarities"));
        }
        let label = argmax_lowest(&similarities);
        Ok(Prediction {
            label,
            similarities,
        })
    }
}

/// Index of the maximum value; the lowest index wins ties.
pub(crate) fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Sample visiting order during retraining epochs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RetrainOrder {
    /// Training-set order, the reproducible default.
    InOrder,
    /// Fresh seeded shuffle every epoch.
    Shuffled(Seed),
}

/// A trained base classifier: its configuration, item memories, and
/// associative memory.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseClassifier {
    config: BaseClassifierConfig,
    memories: EncoderMemories,
    memory: AssociativeMemory,
    feature_count: usize,
}

impl BaseClassifier {
    /// Train on a labeled dataset: encode every sample and sum encodings per
    /// class. The result is unclipped; call [`BaseClassifier::finalize`] to
    /// apply the storage width.
    pub fn train(dataset: &Dataset, config: &BaseClassifierConfig) -> Result<Self> {
        config.validate()?;
        if dataset.is_empty() {
            return Err(Error::EmptyInput("training set"));
        }
        let quantizer = match config.encoder {
            EncoderKind::Record => Some(Quantizer::fit(dataset.samples(), config.levels)?),
            EncoderKind::NGram => None,
        };
        let memories = EncoderMemories::build(
            config.encoder,
            config.dim,
            dataset.feature_count(),
            config.levels,
            config.window,
            config.seed,
            quantizer,
        )?;
        let mut classifier = BaseClassifier {
            config: config.clone(),
            memories,
            memory: AssociativeMemory::zeros(
                config.dim,
                dataset.label_names().to_vec(),
            )?,
            feature_count: dataset.feature_count(),
        };
        let encoded = classifier.encode_batch(dataset.samples())?;
        for (hv, &label) in encoded.iter().zip(dataset.labels()) {
            classifier.memory.add_to_class(label, hv)?;
        }
        Ok(classifier)
    }

    /// Rebuild a classifier from stored parts; item memories are regenerated
    /// from the seed in `config`.
    pub fn from_parts(
        config: BaseClassifierConfig,
        quantizer: Option<Quantizer>,
        feature_count: usize,
        memory: AssociativeMemory,
    ) -> Result<Self> {
        config.validate()?;
        if memory.dim() != config.dim {
            return Err(Error::DimensionMismatch {
                left: memory.dim(),
                right: config.dim,
            });
        }
        let memories = EncoderMemories::build(
            config.encoder,
            config.dim,
            feature_count,
            config.levels,
            config.window,
            config.seed,
            quantizer,
        )?;
        Ok(BaseClassifier {
            config,
            memories,
            memory,
            feature_count,
        })
    }

    pub fn config(&self) -> &BaseClassifierConfig {
        &self.config
    }

    pub fn memories(&self) -> &EncoderMemories {
        &self.memories
    }

    pub fn memory(&self) -> &AssociativeMemory {
        &self.memory
    }

    pub fn memory_mut(&mut self) -> &mut AssociativeMemory {
        &mut self.memory
    }

    pub fn feature_count(&self) -> usize {
        self.feature_count
    }

    pub fn num_classes(&self) -> usize {
        self.memory.num_classes()
    }

    /// Encode one query with this classifier's own item memories.
    pub fn encode(&self, query: &FeatureVector) -> Result<Hypervector> {
        self.memories.encode(query)
    }

    /// Encode a batch in parallel. Order is preserved and every element is
    /// independent, so the output is identical to sequential encoding.
    pub fn encode_batch(&self, samples: &[FeatureVector]) -> Result<Vec<Hypervector>> {
        samples
            .par_iter()
            .map(|s| self.memories.encode(s))
            .collect()
    }

    fn class_norms_sq(&self) -> Vec<i128> {
        self.memory
            .class_hvs
            .iter()
            .map(|hv| hv.elements().iter().map(|&e| e as i128 * e as i128).sum())
            .collect()
    }

    /// Cosine of `encoded` against every class, reusing precomputed squared
    /// class norms. Exactly the arithmetic `infer` uses.
    fn similarities_with_norms(
        &self,
        encoded: &Hypervector,
        norms_sq: &[i128],
    ) -> Result<Vec<f64>> {
        let nq: i128 = encoded
            .elements()
            .iter()
            .map(|&e| e as i128 * e as i128)
            .sum();
        if nq == 0 {
            return Err(Error::ZeroNorm { context: "query" });
        }
        let nq = (nq as f64).sqrt();
        self.memory
            .class_hvs
            .iter()
            .zip(norms_sq)
            .map(|(class_hv, &norm_sq)| {
                if norm_sq == 0 {
                    return Err(Error::ZeroNorm {
                        context: "untrained class",
                    });
                }
                let dot = encoded.dot(class_hv)? as f64;
                Ok(dot / (nq * (norm_sq as f64).sqrt()))
            })
            .collect()
    }

    /// Classify an already-encoded query.
    pub fn infer_encoded(&self, encoded: &Hypervector) -> Result<Prediction> {
        let norms = self.class_norms_sq();
        Prediction::from_similarities(self.similarities_with_norms(encoded, &norms)?)
    }

    /// Encode a query with the classifier's own memories and return the
    /// highest-similarity class with all per-class similarities.
    pub fn infer(&self, query: &FeatureVector) -> Result<Prediction> {
        self.infer_encoded(&self.encode(query)?)
    }

    /// Classify a batch in parallel, order preserved.
    pub fn infer_batch(&self, samples: &[FeatureVector]) -> Result<Vec<Prediction>> {
        let norms = self.class_norms_sq();
        samples
            .par_iter()
            .map(|s| {
                let encoded = self.memories.encode(s)?;
                Prediction::from_similarities(self.similarities_with_norms(&encoded, &norms)?)
            })
            .collect()
    }

    /// Fraction of samples whose predicted label matches the dataset label.
    pub fn accuracy(&self, dataset: &Dataset) -> Result<f64> {
        if dataset.is_empty() {
            return Err(Error::EmptyInput("evaluation set"));
        }
        let predictions = self.infer_batch(dataset.samples())?;
        let correct = predictions
            .iter()
            .zip(dataset.labels())
            .filter(|(p, &l)| p.label == l)
            .count();
        Ok(correct as f64 / dataset.len() as f64)
    }

    /// Error-driven fine-tuning: for each misclassified sample, subtract its
    /// encoding from the wrongly predicted class and add it to the true
    /// class. Runs at most `epochs` passes, stopping early after an epoch
    /// with no updates. Returns the update count of every epoch run.
    ///
    /// Epochs are deliberately single-threaded: each update changes the
    /// memory the next prediction sees.
    pub fn retrain(
        &mut self,
        dataset: &Dataset,
        epochs: usize,
        order: RetrainOrder,
    ) -> Result<Vec<usize>> {
        if dataset.is_empty() {
            return Err(Error::EmptyInput("retraining set"));
        }
        let encoded = self.encode_batch(dataset.samples())?;
        let labels = dataset.labels();
        let mut norms_sq = self.class_norms_sq();
        let mut visit: Vec<usize> = (0..encoded.len()).collect();
        let mut shuffle_rng = match order {
            RetrainOrder::InOrder => None,
            RetrainOrder::Shuffled(seed) => Some(stream_rng(seed, streams::RETRAIN_SHUFFLE)),
        };
        let mut epoch_updates = Vec::new();
        for _ in 0..epochs {
            if let Some(rng) = shuffle_rng.as_mut() {
                visit.shuffle(rng);
            }
            let mut updates = 0usize;
            for &i in &visit {
                let similarities = self.similarities_with_norms(&encoded[i], &norms_sq)?;
                let predicted = argmax_lowest(&similarities);
                let truth = labels[i];
                if predicted != truth {
                    self.memory.subtract_from_class(predicted, &encoded[i])?;
                    self.memory.add_to_class(truth, &encoded[i])?;
                    for &label in &[predicted, truth] {
                        norms_sq[label] = self.memory.class_hvs[label]
                            .elements()
                            .iter()
                            .map(|&e| e as i128 * e as i128)
                            .sum();
                    }
                    updates += 1;
                }
            }
            epoch_updates.push(updates);
            if updates == 0 {
                break;
            }
        }
        Ok(epoch_updates)
    }

    /// Apply the configured storage width to the associative memory via
    /// [`quantize_to_width`]. Idempotent; inference afterwards sees the
    /// stored narrow values.
    pub fn finalize(&mut self) {
        self.memory = quantize_to_width(&self.memory, self.config.width);
    }
}
