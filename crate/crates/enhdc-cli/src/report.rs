//! JSON run reports.
//!
//! Everything in a report except the `timing` block is a pure function of
//! the config and dataset bytes; `timing` is wall-clock measurement and is
//! the one field that varies between identical runs.

use serde::Serialize;

use enhdc_core::{
    ensemble_size_bits, Dataset, EnsembleEvaluation, EnsembleModel, VoteTally, Voting,
};

use crate::config::{encoder_name, voting_name};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub run: RunEcho,
    pub dataset: DatasetSummary,
    pub members: Vec<MemberReport>,
    pub ensemble_accuracy: f64,
    /// confusion[truth][predicted] over ensemble final labels.
    pub confusion_matrix: Vec<Vec<usize>>,
    pub model_size: SizeReport,
    pub timing: Timing,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub votes: Option<Vec<VoteReport>>,
}

/// Enough of the resolved configuration to rerun the experiment.
#[derive(Debug, Serialize)]
pub struct RunEcho {
    pub seed: u64,
    pub voting: &'static str,
    pub retrain: bool,
    pub member_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_checksum_sha256: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct DatasetSummary {
    pub name: String,
    pub train_count: usize,
    pub test_count: usize,
    pub feature_count: usize,
    pub classes: usize,
    pub label_names: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct MemberReport {
    pub index: usize,
    pub dim: usize,
    pub width_bits: u32,
    pub encoder: &'static str,
    pub levels: usize,
    pub window: usize,
    pub seed: u64,
    pub accuracy: f64,
}

#[derive(Debug, Serialize)]
pub struct SizeReport {
    pub bits: u64,
    pub kilobits: f64,
    pub bytes: u64,
    pub per_member_bits: Vec<u64>,
}

#[derive(Debug, Default, Serialize)]
pub struct Timing {
    pub train_seconds: f64,
    pub evaluate_seconds: f64,
}

#[derive(Debug, Serialize)]
pub struct VoteReport {
    pub index: usize,
    pub truth: usize,
    pub predicted: usize,
    pub member_labels: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hard_counts: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub soft_sums: Option<Vec<f64>>,
}

impl Report {
    pub fn build(
        model: &EnsembleModel,
        test: &Dataset,
        evaluation: &EnsembleEvaluation,
        seed: u64,
        retrain: bool,
        train_count: usize,
        timing: Timing,
        model_checksum: Option<String>,
        emit_votes: bool,
    ) -> Report {
        let members = model
            .members()
            .iter()
            .enumerate()
            .map(|(index, member)| {
                let config = member.config();
                MemberReport {
                    index,
                    dim: config.dim,
                    width_bits: config.width.bits(),
                    encoder: encoder_name(config.encoder),
                    levels: config.levels,
                    window: config.window,
                    seed: config.seed.0,
                    accuracy: evaluation.member_accuracies[index],
                }
            })
            .collect();
        let per_member_bits: Vec<u64> = model
            .members()
            .iter()
            .map(|m| {
                enhdc_core::model_size_bits(
                    m.config().width.bits(),
                    m.config().dim,
                    m.num_classes(),
                    1,
                )
                .bits
            })
            .collect();
        let total = ensemble_size_bits(model);
        let votes = emit_votes.then(|| {
            evaluation
                .votes
                .iter()
                .zip(test.labels())
                .enumerate()
                .map(|(index, (vote, &truth))| VoteReport {
                    index,
                    truth,
                    predicted: vote.label,
                    member_labels: vote.member_predictions.iter().map(|p| p.label).collect(),
                    hard_counts: match &vote.tally {
                        VoteTally::Hard(counts) => Some(counts.clone()),
                        VoteTally::Soft(_) => None,
                    },
                    soft_sums: match &vote.tally {
                        VoteTally::Soft(sums) => Some(sums.clone()),
                        VoteTally::Hard(_) => None,
                    },
                })
                .collect()
        });
        Report {
            schema_version: REPORT_SCHEMA_VERSION,
            run: RunEcho {
                seed,
                voting: voting_name(model.voting()),
                retrain,
                member_count: model.members().len(),
                model_checksum_sha256: model_checksum,
            },
            dataset: DatasetSummary {
                name: test.name.clone(),
                train_count,
                test_count: test.len(),
                feature_count: test.feature_count(),
                classes: test.num_classes(),
                label_names: test.label_names().to_vec(),
            },
            members,
            ensemble_accuracy: evaluation.ensemble_accuracy,
            confusion_matrix: evaluation.confusion.clone(),
            model_size: SizeReport {
                bits: total.bits,
                kilobits: total.kilobits(),
                bytes: total.bytes(),
                per_member_bits,
            },
            timing,
            votes,
        }
    }

    pub fn to_json(&self) -> Result<String, crate::CliError> {
        serde_json::to_string_pretty(self)
            .map_err(|e| crate::CliError::internal(format!("report serialization: {e}")))
    }
}

/// Human-oriented one-screen summary printed after train/evaluate.
pub fn print_summary(report: &Report, voting: Voting) {
    println!(
        "dataset {} ({} train / {} test, {} features, {} classes)",
        report.dataset.name,
        report.dataset.train_count,
        report.dataset.test_count,
        report.dataset.feature_count,
        report.dataset.classes
    );
    for m in &report.members {
        println!(
            "  member {:>2}: d={:<6} {}b {:<6} acc {:.4}",
            m.index, m.dim, m.width_bits, m.encoder, m.accuracy
        );
    }
    println!(
        "ensemble ({} members, {} voting): accuracy {:.4}",
        report.members.len(),
        voting_name(voting),
        report.ensemble_accuracy
    );
    println!(
        "model size: {} bits = {} Kb = {} bytes",
        report.model_size.bits,
        format_kilobits(report.model_size.kilobits),
        report.model_size.bytes
    );
}

/// Render kilobits without a trailing ".000" when the value is whole.
pub fn format_kilobits(kb: f64) -> String {
    if kb.fract() == 0.0 {
        format!("{}", kb as u64)
    } else {
        format!("{kb:.3}")
    }
}
