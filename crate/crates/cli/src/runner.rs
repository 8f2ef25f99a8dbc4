//! One full experiment: dataset → model space → structure function →
//! free-energy sweeps at T = 0 and at the configured temperature →
//! breakpoints → elbow, plus emission of every output file.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use landscape_core::duality::{
    detect_kinks, elbow_from_test_loss, export_breakpoints_csv, structure_function,
    EnvelopeBreakpoint, StructureFunction,
};
use landscape_core::thermo::{sweep_lambda, FreeEnergyCurve};
use landscape_core::{enumerate_space, generate_dataset, Dataset, Error, ModelSpace, Result};

use crate::config::ExperimentConfig;

/// Default divergence factor: flag the first complexity whose noisy test SSE
/// exceeds its running minimum by more than 10%.
pub const DIVERGENCE_FACTOR: f64 = 1.1;

/// Everything one experiment computes, kept in memory so exports and
/// consistency checks work off a single source of truth. The per-model
/// table lives in `space`; `cold_curve` is the exact T = 0 envelope and
/// `warm_curve` the Gibbs scan at the configured temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub dataset: Dataset,
    pub space: ModelSpace,
    pub structure: StructureFunction,
    pub cold_curve: FreeEnergyCurve,
    pub warm_curve: FreeEnergyCurve,
    pub breakpoints: Vec<EnvelopeBreakpoint>,
    pub elbow_alpha_star: u32,
    pub version: &'static str,
}

impl RunReport {
    /// Breakpoint λ values — each one is a resonance where the winning
    /// complexity changes.
    pub fn resonance_lambdas(&self) -> Vec<f64> {
        self.breakpoints.iter().map(|bp| bp.lambda).collect()
    }
}

/// Runs every computation stage without touching the filesystem.
pub fn compute_report(config: &ExperimentConfig) -> Result<RunReport> {
    let dataset = generate_dataset(
        config.n_train,
        config.n_test,
        config.freq_n,
        config.noise_sigma,
        config.seed,
    )?;
    let space = enumerate_space(&dataset, config.family, config.max_index)?;
    let structure = structure_function(&space);
    let grid = config.lambda_grid();
    let cold_curve = sweep_lambda(&space, &grid, 0.0)?;
    let warm_curve = sweep_lambda(&space, &grid, config.temperature)?;
    let breakpoints = detect_kinks(&space);
    let elbow_alpha_star = elbow_from_test_loss(&space);
    Ok(RunReport {
        config: config.clone(),
        dataset,
        space,
        structure,
        cold_curve,
        warm_curve,
        breakpoints,
        elbow_alpha_star,
        version: env!("CARGO_PKG_VERSION"),
    })
}

/// One row of the train/test divergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceRow {
    pub complexity: u32,
    pub train_sse: f64,
    pub test_sse_noisy: f64,
    /// Noisy test SSE over its running minimum (inclusive of this row).
    pub ratio: f64,
    pub flagged: bool,
}

/// Per-complexity train/test comparison with the overfitting flag.
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceTable {
    pub rows: Vec<DivergenceRow>,
    /// First complexity whose ratio exceeds `factor`, if any.
    pub flagged_complexity: Option<u32>,
    pub factor: f64,
}

/// Tabulates test-vs-train SSE by complexity and flags the first complexity
/// where the noisy test SSE exceeds its running minimum by more than
/// `factor`. A zero running minimum gives ratio 1 when the current value is
/// also zero and +∞ otherwise.
pub fn compare_train_test(report: &RunReport, factor: f64) -> DivergenceTable {
    let mut rows = Vec::with_capacity(report.space.len());
    let mut flagged_complexity = None;
    let mut running_min = f64::INFINITY;
    for point in report.space.points() {
        let test = point.test_loss_noisy;
        if test < running_min {
            running_min = test;
        }
        let ratio = if running_min == 0.0 {
            if test == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        } else {
            test / running_min
        };
        let flagged = ratio > factor;
        if flagged && flagged_complexity.is_none() {
            flagged_complexity = Some(point.complexity);
        }
        rows.push(DivergenceRow {
            complexity: point.complexity,
            train_sse: point.train_loss,
            test_sse_noisy: test,
            ratio,
            flagged,
        });
    }
    DivergenceTable {
        rows,
        flagged_complexity,
        factor,
    }
}

fn csv_io_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::Io {
        path: path.display().to_string(),
        source: std::io::Error::other(e),
    }
}

fn export_divergence_csv(table: &DivergenceTable, path: &Path) -> Result<()> {
    let io_err = csv_io_err(path);
    let mut writer = csv::Writer::from_path(path).map_err(&io_err)?;
    writer
        .write_record([
            "complexity",
            "train_sse",
            "test_sse_noisy",
            "ratio",
            "flagged",
        ])
        .map_err(&io_err)?;
    for row in &table.rows {
        writer
            .write_record([
                format!("{}", row.complexity),
                format!("{}", row.train_sse),
                format!("{}", row.test_sse_noisy),
                format!("{}", row.ratio),
                if row.flagged { "1" } else { "0" }.to_string(),
            ])
            .map_err(&io_err)?;
    }
    writer.flush().map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn export_loss_vs_complexity_csv(space: &ModelSpace, path: &Path) -> Result<()> {
    let io_err = csv_io_err(path);
    let mut writer = csv::Writer::from_path(path).map_err(&io_err)?;
    writer
        .write_record([
            "complexity",
            "train_sse",
            "test_sse_clean",
            "test_sse_noisy",
        ])
        .map_err(&io_err)?;
    for point in space.points() {
        writer
            .write_record([
                format!("{}", point.complexity),
                format!("{}", point.train_loss),
                format!("{}", point.test_loss_clean),
                format!("{}", point.test_loss_noisy),
            ])
            .map_err(&io_err)?;
    }
    writer.flush().map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

/// Writes the per-figure data files into the report's output directory:
/// `loss_vs_complexity.csv` (train and test series), `free_energy.csv`
/// (T = 0 envelope), `susceptibility.csv` (configured-T scan), and
/// `breakpoints.csv` (kink markers; header-only when there are none).
pub fn emit_plot_data(report: &RunReport) -> Result<()> {
    let dir = &report.config.output_dir;
    export_loss_vs_complexity_csv(&report.space, &dir.join("loss_vs_complexity.csv"))?;
    report.cold_curve.export_csv(&dir.join("free_energy.csv"))?;
    report
        .warm_curve
        .export_csv(&dir.join("susceptibility.csv"))?;
    export_breakpoints_csv(&report.breakpoints, &dir.join("breakpoints.csv"))
}

/// Renders the human-readable summary. All floats use a fixed 9-significant-
/// digit scientific format so reruns are byte-identical.
fn render_summary(report: &RunReport, table: &DivergenceTable) -> String {
    let config = &report.config;
    let mut out = String::new();
    let _ = writeln!(out, "landscape {}", report.version);
    let _ = writeln!(out, "dataset: {}", report.dataset.tag());
    let _ = writeln!(out, "\n[config]");
    out.push_str(&config.to_config_text());

    let _ = writeln!(out, "\n[models]");
    let _ = writeln!(
        out,
        "complexity  train_sse       test_sse_clean  test_sse_noisy"
    );
    for p in report.space.points() {
        let _ = writeln!(
            out,
            "{:>10}  {:.8e}  {:.8e}  {:.8e}",
            p.complexity, p.train_loss, p.test_loss_clean, p.test_loss_noisy
        );
    }

    let _ = writeln!(out, "\n[structure function]");
    for (alpha, h) in report.structure.alphas.iter().zip(&report.structure.h) {
        let _ = writeln!(out, "h({alpha}) = {h:.8e}");
    }

    let _ = writeln!(out, "\n[resonance lambda values]");
    if report.breakpoints.is_empty() {
        let _ = writeln!(out, "none (the envelope has a single winner)");
    }
    for bp in &report.breakpoints {
        let in_range = config.lambda_min < bp.lambda && bp.lambda < config.lambda_max;
        let _ = writeln!(
            out,
            "lambda = {:.8e}  winner {} -> {}  ({})",
            bp.lambda,
            bp.slope_before,
            bp.slope_after,
            if in_range {
                "within lambda grid"
            } else {
                "outside lambda grid"
            }
        );
    }

    let elbow_test = report
        .space
        .points()
        .iter()
        .find(|p| p.complexity == report.elbow_alpha_star)
        .map(|p| p.test_loss_noisy)
        .unwrap_or(f64::NAN);
    let _ = writeln!(out, "\n[elbow]");
    let _ = writeln!(
        out,
        "alpha* = {} (test_sse_noisy = {:.8e})",
        report.elbow_alpha_star, elbow_test
    );
    match table.flagged_complexity {
        Some(c) => {
            let _ = writeln!(
                out,
                "divergence: test SSE first exceeds {:.8e} x running minimum at complexity {}",
                table.factor, c
            );
        }
        None => {
            let _ = writeln!(
                out,
                "divergence: test SSE never exceeds {:.8e} x running minimum",
                table.factor
            );
        }
    }

    let cold = &report.cold_curve;
    let warm = &report.warm_curve;
    let last = cold.lambdas.len() - 1;
    let _ = writeln!(out, "\n[free energy]");
    let _ = writeln!(
        out,
        "F({:.8e}) = {:.8e}   F({:.8e}) = {:.8e}   (T = 0 envelope)",
        cold.lambdas[0], cold.free_energy[0], cold.lambdas[last], cold.free_energy[last]
    );
    let peak = warm
        .chi
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let _ = writeln!(
        out,
        "chi peak at lambda = {:.8e}: chi = {:.8e}   (T = {:.8e})",
        warm.lambdas[peak], warm.chi[peak], warm.temperature
    );
    out
}

/// Executes the full experiment and writes every artifact into
/// `config.output_dir`: `dataset.csv`, `structure_function.csv`, the plot
/// data from [`emit_plot_data`], `divergence.csv`, and `summary.txt`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunReport> {
    let report = compute_report(config)?;
    let dir = &config.output_dir;
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.display().to_string(),
        source,
    })?;
    report.dataset.export_csv(&dir.join("dataset.csv"))?;
    report
        .structure
        .export_csv(&dir.join("structure_function.csv"))?;
    emit_plot_data(&report)?;
    let table = compare_train_test(&report, DIVERGENCE_FACTOR);
    export_divergence_csv(&table, &dir.join("divergence.csv"))?;
    let summary_path = dir.join("summary.txt");
    fs::write(&summary_path, render_summary(&report, &table)).map_err(|source| Error::Io {
        path: summary_path.display().to_string(),
        source,
    })?;
    Ok(report)
}
