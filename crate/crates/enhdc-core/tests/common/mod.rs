//! Shared fixtures for the acceptance suite: dataset resolution with
//! synthetic stand-ins when the canonical files are absent.

use std::path::PathBuf;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use enhdc_core::{dataio, rng::stream_rng, Dataset, FeatureVector, Seed};

/// Dataset root: ENHDC_DATA_DIR or the repo-level data directory.
pub fn data_dir() -> PathBuf {
    std::env::var("ENHDC_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|_| {
            PathBuf::from(env!("CARGO_MANIFEST_DIR"))
                .join("..")
                .join("..")
                .join("data")
        })
}

/// Gaussian class blobs: k templates in [0, 10]^m, per-sample noise, labels
/// round-robin. Deterministic in the seed.
pub fn synth_blobs(name: &str, n: usize, m: usize, k: usize, seed: u64, noise: f64) -> Dataset {
    let mut rng = stream_rng(Seed(seed), 9_000);
    let templates: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..m).map(|_| rng.gen_range(0.0..10.0)).collect())
        .collect();
    let normal = Normal::new(0.0, noise).expect("valid sigma");
    let mut samples = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let label = i % k;
        let values: Vec<f64> = templates[label]
            .iter()
            .map(|&t| (t + normal.sample(&mut rng)).clamp(-5.0, 15.0))
            .collect();
        samples.push(FeatureVector::new(values).expect("finite"));
        labels.push(label);
    }
    Dataset::from_parts(
        name,
        samples,
        labels,
        k,
        (0..k).map(|i| i.to_string()).collect(),
    )
    .expect("consistent parts")
}

/// A resolved desk-scale train/test pair plus whether it came from the real
/// files or a synthetic stand-in.
pub struct TrendDataset {
    pub name: &'static str,
    pub train: Dataset,
    pub test: Dataset,
    pub synthetic: bool,
}

/// MNIST subsampled to `train_n`/`test_n` from the canonical IDX files when
/// present; otherwise a seeded stand-in of identical shape.
pub fn mnist_desk(train_n: usize, test_n: usize, subsample_seed: u64) -> TrendDataset {
    let dir = data_dir().join("mnist");
    let paths = [
        dir.join("train-images-idx3-ubyte"),
        dir.join("train-labels-idx1-ubyte"),
        dir.join("t10k-images-idx3-ubyte"),
        dir.join("t10k-labels-idx1-ubyte"),
    ];
    if paths.iter().all(|p| p.is_file()) {
        let train = dataio::load_idx(&paths[0], &paths[1]).expect("mnist train loads");
        let test = dataio::load_idx(&paths[2], &paths[3]).expect("mnist test loads");
        let (train, _) = train
            .split(train_n, 0, Seed(subsample_seed))
            .expect("subsample train");
        let (test, _) = test
            .split(test_n, 0, Seed(subsample_seed))
            .expect("subsample test");
        TrendDataset {
            name: "mnist",
            train,
            test,
            synthetic: false,
        }
    } else {
        let full = synth_blobs("mnist-stand-in", train_n + test_n, 784, 10, 77, 2.8);
        let (train, test) = full
            .split(train_n, test_n, Seed(subsample_seed))
            .expect("split stand-in");
        TrendDataset {
            name: "mnist",
            train,
            test,
            synthetic: true,
        }
    }
}

/// Full CARDIO (1913/213 seeded split of the 2126-row file) when the real
/// CSV is present; otherwise a seeded stand-in of identical shape.
pub fn cardio_full(split_seed: u64) -> TrendDataset {
    let path = data_dir().join("cardio").join("cardio.csv");
    if path.is_file() {
        let full = dataio::load_csv(
            &path,
            &enhdc_core::ColumnSelector::Name("CLASS".into()),
            true,
        )
        .expect("cardio loads");
        let (train, test) = full.split(1913, 213, Seed(split_seed)).expect("cardio split");
        TrendDataset {
            name: "cardio",
            train,
            test,
            synthetic: false,
        }
    } else {
        let full = synth_blobs("cardio-stand-in", 2126, 21, 10, 7, 2.8);
        let (train, test) = full.split(1913, 213, Seed(split_seed)).expect("split stand-in");
        TrendDataset {
            name: "cardio",
            train,
            test,
            synthetic: true,
        }
    }
}

pub fn provenance(synthetic: bool) -> &'static str {
    if synthetic {
        "synthetic stand-in (canonical files not found)"
    } else {
        "canonical files"
    }
}
