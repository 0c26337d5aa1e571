//! Ensembles of diverse base classifiers with hard or soft voting.

use rayon::prelude::*;

use crate::classifier::{argmax_lowest, BaseClassifier, BaseClassifierConfig, Prediction, RetrainOrder};
use crate::dataio::Dataset;
use crate::encoding::{EncoderKind, FeatureVector};
use crate::error::{Error, Result};
use crate::hypervector::DataWidth;
use crate::rng::derive_member_seed;
use crate::Seed;

/// How member predictions are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Voting {
    /// Majority voting over member labels (the stock choice).
    #[default]
    Hard,
    /// Argmax over per-class similarity sums.
    Soft,
}

/// Configuration of a whole ensemble: an ordered list of member
/// configurations plus the voting rule.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub members: Vec<BaseClassifierConfig>,
    pub voting: Voting,
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.members.is_empty() {
            return Err(Error::EmptyInput("ensemble members"));
        }
        for member in &self.members {
            member.validate()?;
        }
        // Members must differ at least in their seeds, otherwise their item
        // memories coincide and the ensemble collapses to one classifier.
        let mut seeds: Vec<u64> = self.members.iter().map(|m| m.seed.0).collect();
        seeds.sort_unstable();
        seeds.dedup();
        if seeds.len() != self.members.len() {
            return Err(Error::InvalidConfig(
                "ensemble members must carry pairwise-distinct seeds".into(),
            ));
        }
        Ok(())
    }

    /// `count` copies of a template configuration that differ only in their
    /// derived per-member seeds.
    pub fn uniform(template: &BaseClassifierConfig, count: usize, seed: Seed, voting: Voting) -> Self {
        let members = (0..count)
            .map(|i| BaseClassifierConfig {
                seed: derive_member_seed(seed, i),
                ..template.clone()
            })
            .collect();
        EnsembleConfig { members, voting }
    }

    /// Like [`EnsembleConfig::uniform`] but alternating record and n-gram
    /// encoding across members, the stock mixed-encoder ensemble.
    pub fn mixed_encoders(
        template: &BaseClassifierConfig,
        count: usize,
        seed: Seed,
        voting: Voting,
    ) -> Self {
        let members = (0..count)
            .map(|i| BaseClassifierConfig {
                seed: derive_member_seed(seed, i),
                encoder: if i % 2 == 0 {
                    EncoderKind::Record
                } else {
                    EncoderKind::NGram
                },
                ..template.clone()
            })
            .collect();
        EnsembleConfig { members, voting }
    }

    /// The diversity-enhanced preset: members drawn round-robin from the
    /// cross product {record, n-gram} x {1000, 5000, 10000} x {int8, int16}.
    /// The enumeration alternates encoders fastest, then dimensions, then
    /// widths, so all three axes are covered at small member counts.
    pub fn diversity_enhanced(
        template: &BaseClassifierConfig,
        count: usize,
        seed: Seed,
        voting: Voting,
    ) -> Self {
        const ENCODERS: [EncoderKind; 2] = [EncoderKind::Record, EncoderKind::NGram];
        const DIMS: [usize; 3] = [1000, 5000, 10000];
        const WIDTHS: [DataWidth; 2] = [DataWidth::Int8, DataWidth::Int16];
        let mut combos = Vec::with_capacity(12);
        for &width in &WIDTHS {
            for &dim in &DIMS {
                for &encoder in &ENCODERS {
                    combos.push((encoder, dim, width));
                }
            }
        }
        let members = (0..count)
            .map(|i| {
                let (encoder, dim, width) = combos[i % combos.len()];
                BaseClassifierConfig {
                    seed: derive_member_seed(seed, i),
                    encoder,
                    dim,
                    width,
                    ..template.clone()
                }
            })
            .collect();
        EnsembleConfig { members, voting }
    }
}

/// Per-class tally backing an ensemble decision.
#[derive(Debug, Clone, PartialEq)]
pub enum VoteTally {
    /// Member vote counts per class.
    Hard(Vec<u32>),
    /// Summed member similarities per class.
    Soft(Vec<f64>),
}

/// One ensemble decision: every member's prediction, the tally, and the
/// final label.
#[derive(Debug, Clone, PartialEq)]
pub struct VoteRecord {
    pub member_predictions: Vec<Prediction>,
    pub tally: VoteTally,
    pub label: usize,
}

fn check_members(predictions: &[Prediction]) -> Result<usize> {
    if predictions.is_empty() {
        return Err(Error::EmptyInput("member predictions"));
    }
    let k = predictions[0].similarities.len();
    for p in predictions {
        if p.similarities.len() != k {
            return Err(Error::SimilarityCountMismatch {
                got: p.similarities.len(),
                expected: k,
            });
        }
    }
    Ok(k)
}

/// Majority voting. Ties on vote count are broken by the highest summed
/// similarity among the tied classes, then by the lowest class index.
pub fn vote_hard(predictions: Vec<Prediction>) -> Result<VoteRecord> {
    let k = check_members(&predictions)?;
    let mut counts = vec![0u32; k];
    let mut sums = vec![0.0f64; k];
    for p in &predictions {
        counts[p.label] += 1;
        for (s, &sim) in sums.iter_mut().zip(&p.similarities) {
            *s += sim;
        }
    }
    let top = *counts.iter().max().expect("k >= 1");
    let mut label = usize::MAX;
    let mut best_sum = f64::NEG_INFINITY;
    for c in 0..k {
        if counts[c] == top && sums[c] > best_sum {
            best_sum = sums[c];
            label = c;
        }
    }
    Ok(VoteRecord {
        member_predictions: predictions,
        tally: VoteTally::Hard(counts),
        label,
    })
}

/// Soft voting: argmax over per-class sums of member similarities; residual
/// ties go to the lowest class index.
pub fn vote_soft(predictions: Vec<Prediction>) -> Result<VoteRecord> {
    let k = check_members(&predictions)?;
    let mut sums = vec![0.0f64; k];
    for p in &predictions {
        for (s, &sim) in sums.iter_mut().zip(&p.similarities) {
            *s += sim;
        }
    }
    let label = argmax_lowest(&sums);
    Ok(VoteRecord {
        member_predictions: predictions,
        tally: VoteTally::Soft(sums),
        label,
    })
}

/// A trained ensemble: the ordered member classifiers plus the voting rule.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleModel {
    members: Vec<BaseClassifier>,
    voting: Voting,
}

impl EnsembleModel {
    /// Train every member independently on the full training set, each with
    /// its own configuration and seed. With `retrain` set, each member also
    /// runs its configured retraining epochs. Members are finalized
    /// (width-clipped) before the model is returned.
    ///
    /// Members train in parallel; each member's training is deterministic on
    /// its own, so the parallel result equals the sequential one.
    pub fn build_and_train(
        config: &EnsembleConfig,
        train_set: &Dataset,
        retrain: bool,
    ) -> Result<Self> {
        Self::build_and_train_with_order(config, train_set, retrain, RetrainOrder::InOrder)
    }

    /// [`EnsembleModel::build_and_train`] with an explicit retraining order.
    pub fn build_and_train_with_order(
        config: &EnsembleConfig,
        train_set: &Dataset,
        retrain: bool,
        order: RetrainOrder,
    ) -> Result<Self> {
        config.validate()?;
        let members = config
            .members
            .par_iter()
            .map(|member_config| {
                let mut member = BaseClassifier::train(train_set, member_config)?;
                if retrain && member_config.retrain_epochs > 0 {
                    member.retrain(train_set, member_config.retrain_epochs, order)?;
                }
                member.finalize();
                Ok(member)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(EnsembleModel {
            members,
            voting: config.voting,
        })
    }

    pub fn from_parts(members: Vec<BaseClassifier>, voting: Voting) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::EmptyInput("ensemble members"));
        }
        let k = members[0].num_classes();
        if let Some(bad) = members.iter().find(|m| m.num_classes() != k) {
            return Err(Error::SimilarityCountMismatch {
                got: bad.num_classes(),
                expected: k,
            });
        }
        Ok(EnsembleModel { members, voting })
    }

    pub fn members(&self) -> &[BaseClassifier] {
        &self.members
    }

    pub fn voting(&self) -> Voting {
        self.voting
    }

    pub fn num_classes(&self) -> usize {
        self.members[0].num_classes()
    }

    /// Run every member on the query (each with its own encoding) and apply
    /// the configured voting rule.
    pub fn infer(&self, query: &FeatureVector) -> Result<VoteRecord> {
        let predictions = self
            .members
            .iter()
            .map(|m| m.infer(query))
            .collect::<Result<Vec<_>>>()?;
        match self.voting {
            Voting::Hard => vote_hard(predictions),
            Voting::Soft => vote_soft(predictions),
        }
    }

    /// Batch inference, parallel over queries, order preserved.
    pub fn infer_batch(&self, queries: &[FeatureVector]) -> Result<Vec<VoteRecord>> {
        queries.par_iter().map(|q| self.infer(q)).collect()
    }

    /// Ensemble accuracy and per-member accuracies over a dataset, from one
    /// shared batch of vote records.
    pub fn evaluate(&self, dataset: &Dataset) -> Result<EnsembleEvaluation> {
        if dataset.is_empty() {
            return Err(Error::EmptyInput("evaluation set"));
        }
        let votes = self.infer_batch(dataset.samples())?;
        Ok(EnsembleEvaluation::from_votes(votes, dataset))
    }
}

/// Evaluation summary derived from per-sample vote records.
#[derive(Debug, Clone)]
pub struct EnsembleEvaluation {
    pub votes: Vec<VoteRecord>,
    pub ensemble_accuracy: f64,
    pub member_accuracies: Vec<f64>,
    /// confusion[truth][predicted] over the ensemble's final labels.
    pub confusion: Vec<Vec<usize>>,
}

impl EnsembleEvaluation {
    pub fn from_votes(votes: Vec<VoteRecord>, dataset: &Dataset) -> Self {
        let n = votes.len();
        let k = dataset.num_classes();
        let member_count = votes.first().map_or(0, |v| v.member_predictions.len());
        let mut correct = 0usize;
        let mut member_correct = vec![0usize; member_count];
        let mut confusion = vec![vec![0usize; k]; k];
        for (vote, &truth) in votes.iter().zip(dataset.labels()) {
            if vote.label == truth {
                correct += 1;
            }
            confusion[truth][vote.label] += 1;
            for (mc, p) in member_correct.iter_mut().zip(&vote.member_predictions) {
                if p.label == truth {
                    *mc += 1;
                }
            }
        }
        EnsembleEvaluation {
            votes,
            ensemble_accuracy: correct as f64 / n.max(1) as f64,
            member_accuracies: member_correct
                .iter()
                .map(|&c| c as f64 / n.max(1) as f64)
                .collect(),
            confusion,
        }
    }
}

/// Storage footprint of class hypervectors, the quantity the dimensionality
/// and width trade-offs are about.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelSize {
    pub bits: u64,
}

impl ModelSize {
    pub fn kilobits(self) -> f64 {
        self.bits as f64 / 1000.0
    }

    pub fn bytes(self) -> u64 {
        self.bits.div_ceil(8)
    }
}

/// width_bits x dim x classes x classifiers, the associative-memory storage
/// cost of a uniform ensemble.
pub fn model_size_bits(width_bits: u32, dim: usize, classes: usize, classifiers: usize) -> ModelSize {
    ModelSize {
        bits: width_bits as u64 * dim as u64 * classes as u64 * classifiers as u64,
    }
}

/// Total class-hypervector storage of a heterogeneous trained ensemble.
pub fn ensemble_size_bits(model: &EnsembleModel) -> ModelSize {
    let bits = model
        .members()
        .iter()
        .map(|m| {
            model_size_bits(m.config().width.bits(), m.config().dim, m.num_classes(), 1).bits
        })
        .sum();
    ModelSize { bits }
}
