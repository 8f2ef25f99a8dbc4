//! Experiment configuration: named profiles, the `key = value` config file
//! grammar, field-level validation, and λ grid construction.
//!
//! Config file grammar (one setting per line):
//!
//! ```text
//! # full-line comments and blank lines are ignored
//! key = value
//! ```
//!
//! Keys are exactly the field names below; later lines override earlier
//! ones. Overall precedence: built-in defaults < `--profile` < `--config`
//! file < individual command-line flags.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use landscape_core::Family;

/// Full description of one experiment. Field names double as config-file
/// keys.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub family: Family,
    pub freq_n: u32,
    pub n_train: usize,
    pub n_test: usize,
    pub noise_sigma: f64,
    pub max_index: u32,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_count: usize,
    pub temperature: f64,
    pub seed: u64,
    pub output_dir: PathBuf,
}

/// All config problems found in one pass, each message naming its field (and
/// line, when it came from a file).
#[derive(Debug)]
pub struct ConfigError(pub Vec<String>);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid configuration:")?;
        for message in &self.0 {
            writeln!(f, "  - {message}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig::profile("poly6").expect("built-in profile")
    }
}

impl ExperimentConfig {
    /// Named parameter bundles for the three stock experiments. Train-set
    /// sizes are tuned per family so the overfitting tail is visible: small
    /// samples for the least-squares families (whose test-loss inflation
    /// scales with params/n_train), a large one for trees.
    pub fn profile(name: &str) -> Option<ExperimentConfig> {
        let poly6 = ExperimentConfig {
            family: Family::Polynomial,
            freq_n: 3,
            n_train: 24,
            n_test: 512,
            noise_sigma: 0.25,
            max_index: 15,
            lambda_min: 1e-3,
            lambda_max: 1e3,
            lambda_count: 241,
            temperature: 1.0,
            seed: 42,
            output_dir: PathBuf::from("out"),
        };
        match name {
            "poly6" => Some(poly6),
            "fourier4" => Some(ExperimentConfig {
                family: Family::Fourier,
                freq_n: 2,
                n_train: 64,
                max_index: 12,
                ..poly6
            }),
            "tree4" => Some(ExperimentConfig {
                family: Family::Tree,
                freq_n: 2,
                n_train: 256,
                max_index: 12,
                ..poly6
            }),
            _ => None,
        }
    }

    pub const PROFILE_NAMES: [&'static str; 3] = ["poly6", "fourier4", "tree4"];

    /// Applies `key = value` lines on top of the current values. Collects
    /// every malformed line instead of stopping at the first.
    pub fn apply_config_text(&mut self, text: &str) -> Result<(), ConfigError> {
        let mut errors = Vec::new();
        for (index, raw) in text.lines().enumerate() {
            let line_no = index + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                errors.push(format!(
                    "line {line_no}: expected `key = value`, found {line:?}"
                ));
                continue;
            };
            if let Err(message) = self.set_field(key.trim(), value.trim()) {
                errors.push(format!("line {line_no}: {message}"));
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(ConfigError(errors))
        }
    }

    fn set_field(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn parse<T: FromStr>(field: &str, value: &str) -> Result<T, String>
        where
            T::Err: fmt::Display,
        {
            value
                .parse()
                .map_err(|e| format!("{field}: cannot parse {value:?}: {e}"))
        }
        match key {
            "family" => self.family = parse("family", value)?,
            "freq_n" => self.freq_n = parse("freq_n", value)?,
            "n_train" => self.n_train = parse("n_train", value)?,
            "n_test" => self.n_test = parse("n_test", value)?,
            "noise_sigma" => self.noise_sigma = parse("noise_sigma", value)?,
            "max_index" => self.max_index = parse("max_index", value)?,
            "lambda_min" => self.lambda_min = parse("lambda_min", value)?,
            "lambda_max" => self.lambda_max = parse("lambda_max", value)?,
            "lambda_count" => self.lambda_count = parse("lambda_count", value)?,
            "temperature" => self.temperature = parse("temperature", value)?,
            "seed" => self.seed = parse("seed", value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    /// Checks every field, reporting all problems at once.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut errors = Vec::new();
        if self.n_train < 2 {
            errors.push(format!(
                "n_train: need at least 2 points, got {}",
                self.n_train
            ));
        }
        if self.n_test < 2 {
            errors.push(format!(
                "n_test: need at least 2 points, got {}",
                self.n_test
            ));
        }
        if !self.noise_sigma.is_finite() || self.noise_sigma < 0.0 {
            errors.push(format!(
                "noise_sigma: must be finite and nonnegative, got {}",
                self.noise_sigma
            ));
        }
        let max_params = match self.family {
            Family::Polynomial => Some(self.max_index as usize + 1),
            Family::Fourier => Some(2 * self.max_index as usize + 1),
            Family::Tree => None,
        };
        if let Some(p) = max_params {
            if p > self.n_train {
                errors.push(format!(
                    "max_index: {} {} coefficients exceed n_train = {}",
                    self.family, p, self.n_train
                ));
            }
        }
        if !self.lambda_min.is_finite() || self.lambda_min < 0.0 {
            errors.push(format!(
                "lambda_min: must be finite and nonnegative, got {}",
                self.lambda_min
            ));
        }
        if !self.lambda_max.is_finite() || self.lambda_max <= self.lambda_min {
            errors.push(format!(
                "lambda_max: must be finite and above lambda_min, got {}",
                self.lambda_max
            ));
        }
        if self.lambda_count < 2 {
            errors.push(format!(
                "lambda_count: need at least 2 grid points, got {}",
                self.lambda_count
            ));
        }
        if !self.temperature.is_finite() || self.temperature < 0.0 {
            errors.push(format!(
                "temperature: must be finite and nonnegative, got {}",
                self.temperature
            ));
        }
        if self.output_dir.as_os_str().is_empty() {
            errors.push("output_dir: must not be empty".into());
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(ConfigError(errors))
        }
    }

    /// The λ grid: log-spaced when `lambda_min > 0`, linear when it is 0
    /// (where a log grid is undefined). Both endpoints are pinned exactly.
    pub fn lambda_grid(&self) -> Vec<f64> {
        let count = self.lambda_count;
        let steps = (count - 1) as f64;
        let mut grid: Vec<f64> = if self.lambda_min > 0.0 {
            let log_min = self.lambda_min.ln();
            let log_max = self.lambda_max.ln();
            (0..count)
                .map(|i| (log_min + (log_max - log_min) * i as f64 / steps).exp())
                .collect()
        } else {
            (0..count)
                .map(|i| self.lambda_min + (self.lambda_max - self.lambda_min) * i as f64 / steps)
                .collect()
        };
        grid[0] = self.lambda_min;
        *grid.last_mut().expect("count >= 2") = self.lambda_max;
        grid
    }

    /// Config echo in the same `key = value` grammar the parser accepts, so
    /// a summary block can be replayed as a config file.
    pub fn to_config_text(&self) -> String {
        format!(
            "family = {}\nfreq_n = {}\nn_train = {}\nn_test = {}\nnoise_sigma = {}\n\
             max_index = {}\nlambda_min = {}\nlambda_max = {}\nlambda_count = {}\n\
             temperature = {}\nseed = {}\noutput_dir = {}\n",
            self.family,
            self.freq_n,
            self.n_train,
            self.n_test,
            self.noise_sigma,
            self.max_index,
            self.lambda_min,
            self.lambda_max,
            self.lambda_count,
            self.temperature,
            self.seed,
            self.output_dir.display()
        )
    }
}
