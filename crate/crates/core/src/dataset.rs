//! Synthetic regression data: noisy samples of `sin(2nπx)` on equally
//! spaced abscissae in `[0,1]`, with independent noise streams for the
//! train and test splits.

use std::f64::consts::PI;
use std::path::Path;

use rand_distr::{Distribution, Normal};

use crate::rng::{stream_rng, STREAM_TEST_NOISE, STREAM_TRAIN_NOISE};
use crate::{Error, Result};

/// A train/test pair drawn from the target `f(x) = sin(2nπx)`.
///
/// `xs` and `xs_test` are strictly increasing in `[0,1]` with both endpoints
/// included. The clean arrays carry the noiseless target; the noisy arrays
/// add `N(0, σ²)` draws from per-split generator streams, so regenerating
/// with the same seed is bit-identical and the two splits are independent.
///
/// `freq_n`, `noise_sigma`, and `seed` record provenance for generated data;
/// datasets read back from CSV carry zero placeholders there (the file
/// format stores only the samples).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub xs: Vec<f64>,
    pub ys_train: Vec<f64>,
    pub ys_clean: Vec<f64>,
    pub xs_test: Vec<f64>,
    pub ys_test_noisy: Vec<f64>,
    pub ys_test_clean: Vec<f64>,
    pub freq_n: u32,
    pub noise_sigma: f64,
    pub seed: u64,
}

const DATASET_HEADER: [&str; 4] = ["split", "x", "y_noisy", "y_clean"];

fn equally_spaced(n: usize) -> Vec<f64> {
    let last = (n - 1) as f64;
    (0..n).map(|i| i as f64 / last).collect()
}

fn target(freq_n: u32, x: f64) -> f64 {
    (2.0 * f64::from(freq_n) * PI * x).sin()
}

/// Samples `n_train` train and `n_test` test points of `sin(2nπx)` plus
/// Gaussian noise. Both splits are equally spaced over `[0,1]` including
/// the endpoints.
pub fn generate_dataset(
    n_train: usize,
    n_test: usize,
    freq_n: u32,
    noise_sigma: f64,
    seed: u64,
) -> Result<Dataset> {
    if n_train < 2 {
        return Err(Error::InvalidDataset(format!(
            "n_train must be at least 2, got {n_train}"
        )));
    }
    if n_test < 2 {
        return Err(Error::InvalidDataset(format!(
            "n_test must be at least 2, got {n_test}"
        )));
    }
    if noise_sigma < 0.0 || !noise_sigma.is_finite() {
        return Err(Error::InvalidDataset(format!(
            "noise_sigma must be finite and nonnegative, got {noise_sigma}"
        )));
    }

    let noise = Normal::new(0.0, noise_sigma)
        .map_err(|e| Error::InvalidDataset(format!("noise distribution: {e}")))?;

    let xs = equally_spaced(n_train);
    let ys_clean: Vec<f64> = xs.iter().map(|&x| target(freq_n, x)).collect();
    let mut train_rng = stream_rng(seed, STREAM_TRAIN_NOISE);
    let ys_train: Vec<f64> = ys_clean
        .iter()
        .map(|&y| y + noise.sample(&mut train_rng))
        .collect();

    let xs_test = equally_spaced(n_test);
    let ys_test_clean: Vec<f64> = xs_test.iter().map(|&x| target(freq_n, x)).collect();
    let mut test_rng = stream_rng(seed, STREAM_TEST_NOISE);
    let ys_test_noisy: Vec<f64> = ys_test_clean
        .iter()
        .map(|&y| y + noise.sample(&mut test_rng))
        .collect();

    Ok(Dataset {
        xs,
        ys_train,
        ys_clean,
        xs_test,
        ys_test_noisy,
        ys_test_clean,
        freq_n,
        noise_sigma,
        seed,
    })
}

impl Dataset {
    /// Short provenance tag used by downstream artifacts.
    pub fn tag(&self) -> String {
        format!(
            "sin(2*{}*pi*x) n_train={} n_test={} sigma={} seed={}",
            self.freq_n,
            self.xs.len(),
            self.xs_test.len(),
            self.noise_sigma,
            self.seed
        )
    }

    /// Writes both splits as CSV rows `(split, x, y_noisy, y_clean)`.
    pub fn export_csv(&self, path: &Path) -> Result<()> {
        let mut writer = csv::Writer::from_path(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: std::io::Error::other(e),
        })?;
        let io_err = |e: csv::Error| Error::Io {
            path: path.display().to_string(),
            source: std::io::Error::other(e),
        };
        writer.write_record(DATASET_HEADER).map_err(io_err)?;
        for i in 0..self.xs.len() {
            writer
                .write_record([
                    "train".to_string(),
                    format!("{}", self.xs[i]),
                    format!("{}", self.ys_train[i]),
                    format!("{}", self.ys_clean[i]),
                ])
                .map_err(io_err)?;
        }
        for i in 0..self.xs_test.len() {
            writer
                .write_record([
                    "test".to_string(),
                    format!("{}", self.xs_test[i]),
                    format!("{}", self.ys_test_noisy[i]),
                    format!("{}", self.ys_test_clean[i]),
                ])
                .map_err(io_err)?;
        }
        writer.flush().map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })
    }

    /// Reads a dataset exported by [`Dataset::export_csv`]. Validates the
    /// header, the value ranges (x in [0,1], finite targets), and strictly
    /// increasing abscissae per split. Generator metadata is not stored in
    /// the file, so `freq_n`, `noise_sigma`, and `seed` come back as zero.
    pub fn import_csv(path: &Path) -> Result<Dataset> {
        let display = path.display().to_string();
        let format_err = |message: String| Error::CsvFormat {
            path: display.clone(),
            message,
        };
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(path)
            .map_err(|e| Error::Io {
                path: display.clone(),
                source: std::io::Error::other(e),
            })?;

        let header = reader
            .headers()
            .map_err(|e| format_err(format!("unreadable header: {e}")))?;
        if header != DATASET_HEADER.as_slice() {
            return Err(format_err(format!(
                "expected header {DATASET_HEADER:?}, found {header:?}"
            )));
        }

        let mut train: Vec<(f64, f64, f64)> = Vec::new();
        let mut test: Vec<(f64, f64, f64)> = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let record = record.map_err(|e| format_err(format!("row {}: {e}", row + 2)))?;
            if record.len() != 4 {
                return Err(format_err(format!(
                    "row {}: expected 4 fields, found {}",
                    row + 2,
                    record.len()
                )));
            }
            let field = |idx: usize, name: &str| -> Result<f64> {
                let raw = record.get(idx).unwrap_or("");
                raw.parse::<f64>().map_err(|_| {
                    format_err(format!("row {}: {name} is not a number: {raw:?}", row + 2))
                })
            };
            let x = field(1, "x")?;
            let y_noisy = field(2, "y_noisy")?;
            let y_clean = field(3, "y_clean")?;
            if !(0.0..=1.0).contains(&x) {
                return Err(format_err(format!(
                    "row {}: x out of range [0,1]: {x}",
                    row + 2
                )));
            }
            if !y_noisy.is_finite() || !y_clean.is_finite() {
                return Err(format_err(format!("row {}: non-finite target", row + 2)));
            }
            match record.get(0) {
                Some("train") => train.push((x, y_noisy, y_clean)),
                Some("test") => test.push((x, y_noisy, y_clean)),
                other => {
                    return Err(format_err(format!(
                        "row {}: split must be 'train' or 'test', found {other:?}",
                        row + 2
                    )))
                }
            }
        }

        for (name, rows) in [("train", &train), ("test", &test)] {
            if rows.is_empty() {
                return Err(format_err(format!("no {name} rows")));
            }
            if !rows.windows(2).all(|w| w[0].0 < w[1].0) {
                return Err(format_err(format!(
                    "{name} abscissae must be strictly increasing"
                )));
            }
        }

        Ok(Dataset {
            xs: train.iter().map(|r| r.0).collect(),
            ys_train: train.iter().map(|r| r.1).collect(),
            ys_clean: train.iter().map(|r| r.2).collect(),
            xs_test: test.iter().map(|r| r.0).collect(),
            ys_test_noisy: test.iter().map(|r| r.1).collect(),
            ys_test_clean: test.iter().map(|r| r.2).collect(),
            freq_n: 0,
            noise_sigma: 0.0,
            seed: 0,
        })
    }
}
