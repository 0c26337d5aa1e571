//! Feature quantization, item memories, and the two encoders.
//!
//! Record encoding sums level-hypervector x base-hypervector products over
//! feature positions. N-gram encoding tiles the feature vector out to the
//! hypervector dimension and takes sliding-window dot products against a
//! random bipolar hashing vector.

use crate::error::{Error, Result};
use crate::hypervector::Hypervector;
use crate::rng::{streams, Seed};

/// A raw input sample: a nonempty sequence of finite reals.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput("feature vector"));
        }
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFiniteFeature { index, value });
            }
        }
        Ok(FeatureVector { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Maps a real feature value to one of `levels` quantization levels over the
/// global [min, max] range observed at fit time.
#[derive(Debug, Clone, PartialEq)]
pub struct Quantizer {
    min: f64,
    max: f64,
    levels: usize,
}

impl Quantizer {
    /// Construct from known bounds. `min < max` and `levels >= 2` required.
    pub fn new(min: f64, max: f64, levels: usize) -> Result<Self> {
        if levels < 2 {
            return Err(Error::InvalidConfig(format!(
                "quantizer needs at least 2 levels, got {levels}"
            )));
        }
        if !(min < max) {
            return Err(Error::DegenerateRange { value: min });
        }
        Ok(Quantizer { min, max, levels })
    }

    /// Fit on the global extrema over all features of all training samples.
    pub fn fit(training: &[FeatureVector], levels: usize) -> Result<Self> {
        if training.is_empty() {
            return Err(Error::EmptyInput("quantizer training set"));
        }
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for sample in training {
            for &v in sample.values() {
                min = min.min(v);
                max = max.max(v);
            }
        }
        Quantizer::new(min, max, levels)
    }

    /// Level index: round((v - min) / (max - min) * (levels - 1)), clamped to
    /// [0, levels - 1] so out-of-range test-time values saturate.
    pub fn quantize(&self, value: f64) -> usize {
        let scaled = (value - self.min) / (self.max - self.min) * (self.levels - 1) as f64;
        let level = scaled.round();
        if level < 0.0 {
            0
        } else if level >= self.levels as f64 {
            self.levels - 1
        } else {
            level as usize
        }
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn levels(&self) -> usize {
        self.levels
    }
}

/// One random bipolar hypervector per quantization level.
///
/// Levels are independently random, not flip-correlated: nearby levels carry
/// no built-in similarity.
///
/// A flat i8 copy of the bank backs the encoding hot path; the bank is
/// bipolar so the narrow copy is lossless.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelMemory {
    hvs: Vec<Hypervector>,
    packed: Vec<i8>,
    dim: usize,
}

impl LevelMemory {
    pub fn generate(dim: usize, levels: usize, seed: Seed) -> Result<Self> {
        if levels < 2 {
            return Err(Error::InvalidConfig(format!(
                "level memory needs at least 2 levels, got {levels}"
            )));
        }
        let hvs = (0..levels)
            .map(|i| Hypervector::random_bipolar(dim, seed, streams::LEVEL_BASE + i as u64))
            .collect::<Result<Vec<_>>>()?;
        let packed = pack_bipolar(&hvs);
        Ok(LevelMemory { hvs, packed, dim })
    }

    pub fn level(&self, index: usize) -> &Hypervector {
        &self.hvs[index]
    }

    fn packed_row(&self, index: usize) -> &[i8] {
        &self.packed[index * self.dim..(index + 1) * self.dim]
    }

    pub fn levels(&self) -> usize {
        self.hvs.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// One random bipolar hypervector per feature position.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseMemory {
    hvs: Vec<Hypervector>,
    packed: Vec<i8>,
    dim: usize,
}

impl BaseMemory {
    pub fn generate(dim: usize, feature_count: usize, seed: Seed) -> Result<Self> {
        if feature_count == 0 {
            return Err(Error::EmptyInput("base memory feature count"));
        }
        let hvs = (0..feature_count)
            .map(|i| Hypervector::random_bipolar(dim, seed, streams::BASE_BASE + i as u64))
            .collect::<Result<Vec<_>>>()?;
        let packed = pack_bipolar(&hvs);
        Ok(BaseMemory { hvs, packed, dim })
    }

    pub fn base(&self, index: usize) -> &Hypervector {
        &self.hvs[index]
    }

    fn packed_row(&self, index: usize) -> &[i8] {
        &self.packed[index * self.dim..(index + 1) * self.dim]
    }

    pub fn feature_count(&self) -> usize {
        self.hvs.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

fn pack_bipolar(hvs: &[Hypervector]) -> Vec<i8> {
    hvs.iter()
        .flat_map(|hv| hv.elements().iter().map(|&e| e as i8))
        .collect()
}

/// The dense bipolar local-hashing vector and window width for n-gram
/// encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionMemory {
    hash_hv: Hypervector,
    window: usize,
}

impl ProjectionMemory {
    pub fn generate(dim: usize, window: usize, seed: Seed) -> Result<Self> {
        if window == 0 {
            return Err(Error::InvalidConfig("window must be at least 1".into()));
        }
        if window > dim {
            return Err(Error::WindowTooLarge { window, dim });
        }
        let hash_hv = Hypervector::random_bipolar(dim, seed, streams::HASH)?;
        Ok(ProjectionMemory { hash_hv, window })
    }

    pub fn hash_hv(&self) -> &Hypervector {
        &self.hash_hv
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn dim(&self) -> usize {
        self.hash_hv.dim()
    }
}

/// Which of the two encoders a classifier uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EncoderKind {
    Record,
    NGram,
}

/// Record encoding: sum over feature positions of level HV times base HV.
/// Output elements are integers in [-m, +m] for m features.
///
/// Features sharing a quantized level are summed first and multiplied by the
/// level vector once; by distributivity over the integers this is exactly
/// the per-feature sum of products.
pub fn encode_record(
    f: &FeatureVector,
    levels: &LevelMemory,
    bases: &BaseMemory,
    quantizer: &Quantizer,
) -> Result<Hypervector> {
    if f.len() != bases.feature_count() {
        return Err(Error::FeatureCountMismatch {
            got: f.len(),
            expected: bases.feature_count(),
        });
    }
    if levels.dim() != bases.dim() {
        return Err(Error::DimensionMismatch {
            left: levels.dim(),
            right: bases.dim(),
        });
    }
    let dim = bases.dim();
    let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); levels.levels()];
    for (i, &value) in f.values().iter().enumerate() {
        buckets[quantizer.quantize(value)].push(i as u32);
    }
    let mut acc = vec![0i32; dim];
    let mut scratch = vec![0i32; dim];
    for (level, bucket) in buckets.iter().enumerate() {
        if bucket.is_empty() {
            continue;
        }
        scratch.fill(0);
        for &i in bucket {
            let row = bases.packed_row(i as usize);
            for (s, &b) in scratch.iter_mut().zip(row) {
                *s += b as i32;
            }
        }
        let level_row = levels.packed_row(level);
        for ((a, &l), &s) in acc.iter_mut().zip(level_row).zip(&scratch) {
            *a += l as i32 * s;
        }
    }
    Hypervector::from_elements(acc.into_iter().map(i64::from).collect())
}

/// Tile the feature vector until it reaches `target_dim`, then truncate to
/// exactly `target_dim`.
pub fn extend_features(f: &FeatureVector, target_dim: usize) -> Result<FeatureVector> {
    if target_dim < f.len() {
        return Err(Error::InvalidConfig(format!(
            "target dimension {target_dim} below feature length {}",
            f.len()
        )));
    }
    if target_dim == f.len() {
        return Ok(f.clone());
    }
    let extended: Vec<f64> = f.values().iter().cycle().take(target_dim).copied().collect();
    FeatureVector::new(extended)
}

/// N-gram encoding over an already-extended feature vector.
///
/// Element i is the window-w dot product of the features and the hashing
/// vector starting at i; indices past the end wrap cyclically so the output
/// keeps exactly D elements. Each dot product is rounded half-away-from-zero
/// into the integer accumulation domain (exact whenever the features are
/// integral).
pub fn encode_ngram(f: &FeatureVector, proj: &ProjectionMemory) -> Result<Hypervector> {
    let dim = proj.dim();
    if f.len() != dim {
        return Err(Error::DimensionMismatch {
            left: f.len(),
            right: dim,
        });
    }
    let window = proj.window();
    if window > dim {
        return Err(Error::WindowTooLarge { window, dim });
    }
    let values = f.values();
    let hash = proj.hash_hv().elements();
    let mut out = vec![0i64; dim];
    for i in 0..dim {
        let mut dot = 0.0f64;
        for j in 0..window {
            let idx = (i + j) % dim;
            dot += values[idx] * hash[idx] as f64;
        }
        out[i] = dot.round() as i64;
    }
    Hypervector::from_elements(out)
}

/// The item memories one classifier encodes with, plus dispatch.
#[derive(Debug, Clone, PartialEq)]
pub enum EncoderMemories {
    Record {
        levels: LevelMemory,
        bases: BaseMemory,
        quantizer: Quantizer,
    },
    NGram { projection: ProjectionMemory },
}

impl EncoderMemories {
    /// Build memories for one classifier from its seed.
    ///
    /// `quantizer` is required for record encoding (fitted on the training
    /// set) and ignored for n-gram.
    pub fn build(
        kind: EncoderKind,
        dim: usize,
        feature_count: usize,
        levels: usize,
        window: usize,
        seed: Seed,
        quantizer: Option<Quantizer>,
    ) -> Result<Self> {
        match kind {
            EncoderKind::Record => {
                let quantizer = quantizer.ok_or_else(|| {
                    Error::InvalidConfig("record encoding requires a fitted quantizer".into())
                })?;
                if quantizer.levels() != levels {
                    return Err(Error::InvalidConfig(format!(
                        "quantizer has {} levels, config expects {levels}",
                        quantizer.levels()
                    )));
                }
                Ok(EncoderMemories::Record {
                    levels: LevelMemory::generate(dim, levels, seed)?,
                    bases: BaseMemory::generate(dim, feature_count, seed)?,
                    quantizer,
                })
            }
            EncoderKind::NGram => {
                if feature_count > dim {
                    return Err(Error::InvalidConfig(format!(
                        "n-gram encoding needs dim >= feature count ({dim} < {feature_count})"
                    )));
                }
                Ok(EncoderMemories::NGram {
                    projection: ProjectionMemory::generate(dim, window, seed)?,
                })
            }
        }
    }

    pub fn kind(&self) -> EncoderKind {
        match self {
            EncoderMemories::Record { .. } => EncoderKind::Record,
            EncoderMemories::NGram { .. } => EncoderKind::NGram,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            EncoderMemories::Record { bases, .. } => bases.dim(),
            EncoderMemories::NGram { projection } => projection.dim(),
        }
    }

    /// Encode one sample: record encodes directly, n-gram extends the
    /// features to D first.
    pub fn encode(&self, f: &FeatureVector) -> Result<Hypervector> {
        match self {
            EncoderMemories::Record {
                levels,
                bases,
                quantizer,
            } => encode_record(f, levels, bases, quantizer),
            EncoderMemories::NGram { projection } => {
                let extended = extend_features(f, projection.dim())?;
                encode_ngram(&extended, projection)
            }
        }
    }

    pub fn quantizer(&self) -> Option<&Quantizer> {
        match self {
            EncoderMemories::Record { quantizer, .. } => Some(quantizer),
            EncoderMemories::NGram { .. } => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv(values: &[f64]) -> FeatureVector {
        FeatureVector::new(values.to_vec()).unwrap()
    }

    #[test]
    fn feature_vector_rejects_empty_and_non_finite() {
        assert!(matches!(
            FeatureVector::new(vec![]),
            Err(Error::EmptyInput(_))
        ));
        assert!(matches!(
            FeatureVector::new(vec![1.0, f64::NAN]),
            Err(Error::NonFiniteFeature { index: 1, .. })
        ));
    }

    #[test]
    fn quantizer_passthrough_and_rounding() {
        let training = vec![fv(&[0.0, 3.0]), fv(&[10.0, 7.0])];
        let q = Quantizer::fit(&training, 11).unwrap();
        assert_eq!(q.min(), 0.0);
        assert_eq!(q.max(), 10.0);
        assert_eq!(q.quantize(0.0), 0);
        assert_eq!(q.quantize(10.0), 10);
        assert_eq!(q.quantize(5.0), 5);
        // Out of range clamps.
        assert_eq!(q.quantize(-3.0), 0);
        assert_eq!(q.quantize(42.0), 10);
    }

    #[test]
    fn quantizer_degenerate_range_errors() {
        let training = vec![fv(&[2.0, 2.0]), fv(&[2.0])];
        assert!(matches!(
            Quantizer::fit(&training, 4),
            Err(Error::DegenerateRange { .. })
        ));
    }

    #[test]
    fn record_single_feature_is_bipolar() {
        let seed = Seed(11);
        let levels = LevelMemory::generate(64, 4, seed).unwrap();
        let bases = BaseMemory::generate(64, 1, seed).unwrap();
        let q = Quantizer::new(0.0, 3.0, 4).unwrap();
        let out = encode_record(&fv(&[2.0]), &levels, &bases, &q).unwrap();
        assert!(out.is_bipolar());
        let expected = levels.level(2).multiply(bases.base(0)).unwrap();
        assert_eq!(out, expected);
    }

    #[test]
    fn record_same_levels_same_encoding() {
        let seed = Seed(5);
        let levels = LevelMemory::generate(32, 8, seed).unwrap();
        let bases = BaseMemory::generate(32, 3, seed).unwrap();
        let q = Quantizer::new(0.0, 7.0, 8).unwrap();
        // 1.9 and 2.1 both quantize to level 2.
        let a = encode_record(&fv(&[1.9, 5.0, 0.0]), &levels, &bases, &q).unwrap();
        let b = encode_record(&fv(&[2.1, 5.0, 0.0]), &levels, &bases, &q).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn record_element_range_and_parity() {
        let seed = Seed(17);
        let m = 5;
        let levels = LevelMemory::generate(48, 4, seed).unwrap();
        let bases = BaseMemory::generate(48, m, seed).unwrap();
        let q = Quantizer::new(0.0, 3.0, 4).unwrap();
        let out = encode_record(&fv(&[0.0, 1.0, 2.0, 3.0, 1.0]), &levels, &bases, &q).unwrap();
        for &e in out.elements() {
            assert!(e.unsigned_abs() as usize <= m);
            // Sum of m odd (+-1) terms has the parity of m.
            assert_eq!(e.rem_euclid(2), m as i64 % 2);
        }
    }

    #[test]
    fn extend_tiles_and_truncates() {
        assert_eq!(
            extend_features(&fv(&[1.0, 2.0]), 3).unwrap(),
            fv(&[1.0, 2.0, 1.0])
        );
        let same = fv(&[4.0, 5.0, 6.0]);
        assert_eq!(extend_features(&same, 3).unwrap(), same);
        assert!(extend_features(&same, 2).is_err());
        // 768 features into 10000 dims: 13 full duplications appended, then cut.
        let wide = fv(&(0..768).map(|i| i as f64).collect::<Vec<_>>());
        let extended = extend_features(&wide, 10_000).unwrap();
        assert_eq!(extended.len(), 10_000);
        assert_eq!(extended.values()[768], 0.0);
        assert_eq!(extended.values()[9999], (9999 % 768) as f64);
    }

    #[test]
    fn ngram_wraps_cyclically() {
        // D = 3, w = 2, f = <1,2,1>, H_s = <1,-1,1> -> <-1,-1,2>
        let proj = ProjectionMemory {
            hash_hv: Hypervector::from_elements(vec![1, -1, 1]).unwrap(),
            window: 2,
        };
        let out = encode_ngram(&fv(&[1.0, 2.0, 1.0]), &proj).unwrap();
        assert_eq!(out.elements(), &[-1, -1, 2]);
    }

    #[test]
    fn ngram_window_one_is_elementwise_product() {
        let seed = Seed(3);
        let proj = ProjectionMemory::generate(16, 1, seed).unwrap();
        let f = fv(&(1..=16).map(|i| i as f64).collect::<Vec<_>>());
        let out = encode_ngram(&f, &proj).unwrap();
        for i in 0..16 {
            assert_eq!(
                out.elements()[i],
                (f.values()[i] as i64) * proj.hash_hv().elements()[i]
            );
        }
    }

    #[test]
    fn ngram_window_bounds() {
        assert!(matches!(
            ProjectionMemory::generate(4, 5, Seed(1)),
            Err(Error::WindowTooLarge { window: 5, dim: 4 })
        ));
        assert!(ProjectionMemory::generate(4, 4, Seed(1)).is_ok());
    }

    #[test]
    fn dispatch_matches_direct_calls() {
        let seed = Seed(23);
        let q = Quantizer::new(0.0, 9.0, 4).unwrap();
        let record = EncoderMemories::build(
            EncoderKind::Record,
            32,
            4,
            4,
            3,
            seed,
            Some(q.clone()),
        )
        .unwrap();
        let sample = fv(&[0.0, 3.0, 6.0, 9.0]);
        let via_dispatch = record.encode(&sample).unwrap();
        let levels = LevelMemory::generate(32, 4, seed).unwrap();
        let bases = BaseMemory::generate(32, 4, seed).unwrap();
        assert_eq!(
            via_dispatch,
            encode_record(&sample, &levels, &bases, &q).unwrap()
        );

        let ngram =
            EncoderMemories::build(EncoderKind::NGram, 32, 4, 4, 3, seed, None).unwrap();
        let via_dispatch = ngram.encode(&sample).unwrap();
        let proj = ProjectionMemory::generate(32, 3, seed).unwrap();
        let extended = extend_features(&sample, 32).unwrap();
        assert_eq!(via_dispatch, encode_ngram(&extended, &proj).unwrap());
    }

    #[test]
    fn record_requires_quantizer() {
        assert!(matches!(
            EncoderMemories::build(EncoderKind::Record, 32, 4, 4, 3, Seed(1), None),
            Err(Error::InvalidConfig(_))
        ));
    }
}
