//! Acceptance criteria that live at the CLI boundary: bit-level run
//! reproducibility, model round-trips, and the shipped full-scale sweep
//! configuration.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use enhdc_cli::{config::SweepConfig, model_file};
use enhdc_core::{
    BaseClassifierConfig, Dataset, EnsembleConfig, EnsembleModel, FeatureVector, Seed, Voting,
};

fn enhdc() -> Command {
    Command::new(env!("CARGO_BIN_EXE_enhdc"))
}

fn run(args: &[&str]) -> Output {
    enhdc().args(args).output().expect("binary runs")
}

fn write_toy_csv(path: &Path, rows: usize, classes: usize) {
    let mut body = String::from("a,b,c,d,e,label\n");
    for i in 0..rows {
        let class = i % classes;
        let jitter = ((i * 37) % 11) as f64 - 5.0;
        let center = class as f64 * 3.0;
        body.push_str(&format!(
            "{},{},{},{},{},c{}\n",
            center + jitter * 0.4,
            center - jitter * 0.3,
            12.0 - center + jitter * 0.2,
            center * 0.5 + jitter,
            (class * class) as f64 - jitter * 0.1,
            class
        ));
    }
    std::fs::write(path, body).unwrap();
}

fn strip_timing(report_json: &str) -> serde_json::Value {
    let mut value: serde_json::Value = serde_json::from_str(report_json).unwrap();
    value
        .as_object_mut()
        .expect("report is an object")
        .remove("timing")
        .expect("report carries a timing block");
    value
}

/// Criterion 9: identical config + data give byte-identical model files and
/// identical reports (the wall-clock timing block is the one field excluded
/// from the comparison).
#[test]
fn criterion_9_reproducibility() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("toy.csv");
    write_toy_csv(&csv, 150, 3);
    let config_path = dir.path().join("run.toml");
    std::fs::write(
        &config_path,
        format!(
            r#"
[dataset]
format = "csv"
path = {csv:?}
label_column = "label"
header = true
train_count = 100
test_count = 50

[ensemble]
preset = "mixed"
size = 4
dim = 128
width = 8
encoder = "record"
levels = 8
window = 3
retrain_epochs = 5

[run]
seed = 31
retrain = true
"#
        ),
    )
    .unwrap();

    let mut models = Vec::new();
    let mut reports = Vec::new();
    for run_index in 0..2 {
        let model = dir.path().join(format!("model{run_index}.ehdc"));
        let report = dir.path().join(format!("report{run_index}.json"));
        let out = run(&[
            "train",
            "--config",
            config_path.to_str().unwrap(),
            "--out",
            model.to_str().unwrap(),
            "--report",
            report.to_str().unwrap(),
            "--votes",
        ]);
        assert!(
            out.status.success(),
            "train run {run_index} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        models.push(std::fs::read(&model).unwrap());
        reports.push(std::fs::read_to_string(&report).unwrap());
    }
    assert_eq!(models[0], models[1], "model files differ between runs");
    assert_eq!(
        strip_timing(&reports[0]),
        strip_timing(&reports[1]),
        "reports differ between runs outside the timing block"
    );
    println!(
        "acceptance criterion 9 (reproducibility): PASS — two train runs produced \
         byte-identical model files ({} bytes) and identical reports (timing excluded)",
        models[0].len()
    );
}

/// Model round-trip: save -> load -> evaluate equals in-memory evaluation on
/// every test sample.
#[test]
fn model_round_trip_matches_in_memory_evaluation() {
    let full = toy_dataset(240, 4);
    let (train, test) = full.split(160, 80, Seed(5)).unwrap();
    let template = BaseClassifierConfig {
        dim: 96,
        levels: 8,
        ..BaseClassifierConfig::default()
    };
    let config = EnsembleConfig::diversity_enhanced(&template, 5, Seed(17), Voting::Soft);
    let model = EnsembleModel::build_and_train(&config, &train, true).unwrap();

    let bytes = model_file::to_bytes(&model).unwrap();
    let loaded = model_file::from_bytes(&bytes).unwrap();

    let direct = model.infer_batch(test.samples()).unwrap();
    let reloaded = loaded.infer_batch(test.samples()).unwrap();
    assert_eq!(direct.len(), reloaded.len());
    for (a, b) in direct.iter().zip(&reloaded) {
        assert_eq!(a.label, b.label);
        assert_eq!(a.tally, b.tally);
        for (pa, pb) in a.member_predictions.iter().zip(&b.member_predictions) {
            assert_eq!(pa.label, pb.label);
            assert_eq!(pa.similarities, pb.similarities);
        }
    }
    println!(
        "model round trip: PASS — {} test samples, predictions identical after save/load",
        test.len()
    );
}

fn toy_dataset(rows: usize, classes: usize) -> Dataset {
    let mut samples = Vec::new();
    let mut labels = Vec::new();
    for i in 0..rows {
        let class = i % classes;
        let jitter = ((i * 29) % 13) as f64 - 6.0;
        let center = class as f64 * 3.5;
        samples.push(
            FeatureVector::new(vec![
                center + jitter * 0.5,
                center - jitter * 0.25,
                14.0 - center + jitter * 0.3,
                center * 0.75 + jitter,
            ])
            .unwrap(),
        );
        labels.push(class);
    }
    Dataset::from_parts(
        "toy",
        samples,
        labels,
        classes,
        (0..classes).map(|c| format!("c{c}")).collect(),
    )
    .unwrap()
}

fn repo_config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("..")
        .join("..")
        .join("configs")
        .join(name)
}

/// Criterion 10: headline per-dataset accuracies are figure-read values and
/// are not asserted as exact numbers; the trend criteria stand in for them,
/// and a documented full-scale sweep configuration ships for complete runs.
#[test]
fn criterion_10_full_scale_sweep_config_ships() {
    let path = repo_config("full_paper_sweep.toml");
    assert!(path.is_file(), "missing {}", path.display());
    let sweep = SweepConfig::load(&path).expect("full sweep config parses");
    let dataset_names: Vec<&str> = sweep
        .dataset
        .iter()
        .filter_map(|d| d.name.as_deref())
        .collect();
    for expected in ["mnist", "cardio", "har", "isolet"] {
        assert!(
            dataset_names.contains(&expected),
            "full sweep config misses {expected}"
        );
    }
    for size in 2..=12usize {
        assert!(
            sweep.sweep.sizes.contains(&size),
            "full sweep config misses ensemble size {size}"
        );
    }
    for dim in [1000usize, 5000, 10000] {
        assert!(
            sweep.sweep.dims.contains(&dim),
            "full sweep config misses dimension {dim}"
        );
    }
    // The enhanced-diversity preset ships alongside.
    let enhanced = repo_config("enhanced_sweep.toml");
    assert!(enhanced.is_file(), "missing {}", enhanced.display());
    SweepConfig::load(&enhanced).expect("enhanced sweep config parses");

    println!(
        "acceptance criterion 10 (full-scale note): PASS — headline per-dataset accuracies are \
         not asserted as exact numbers (trend criteria 6-8 substitute); full sweep config ships \
         with all four datasets, D in {{1000,5000,10000}}, sizes 2..=12"
    );
}
