//! Black-box tests of the `landscape` binary: artifacts, exit codes, config
//! precedence, and the duality identity across the file layer.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use landscape_core::duality::{fenchel_h_to_f, StructureFunction};

fn landscape(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_landscape"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary should spawn")
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn first_line(path: &Path) -> String {
    fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
        .lines()
        .next()
        .unwrap_or_default()
        .to_owned()
}

#[test]
fn run_writes_artifacts_with_exact_headers() {
    let tmp = tempfile::tempdir().unwrap();
    let output = landscape(
        &["run", "--profile", "poly6", "--output-dir", "out"],
        tmp.path(),
    );
    assert!(output.status.success(), "stderr: {}", stderr(&output));

    let out = tmp.path().join("out");
    for (file, header) in [
        ("dataset.csv", "split,x,y_noisy,y_clean"),
        ("structure_function.csv", "alpha,h"),
        ("free_energy.csv", "lambda,F,mean_comp,chi"),
        ("susceptibility.csv", "lambda,F,mean_comp,chi"),
        ("breakpoints.csv", "lambda,slope_before,slope_after"),
        (
            "loss_vs_complexity.csv",
            "complexity,train_sse,test_sse_clean,test_sse_noisy",
        ),
        (
            "divergence.csv",
            "complexity,train_sse,test_sse_noisy,ratio,flagged",
        ),
    ] {
        assert_eq!(first_line(&out.join(file)), header, "{file}");
    }
    assert!(out.join("summary.txt").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    for dir in ["a", "b"] {
        let output = landscape(
            &["run", "--profile", "fourier4", "--output-dir", dir],
            tmp.path(),
        );
        assert!(output.status.success(), "stderr: {}", stderr(&output));
    }
    for entry in fs::read_dir(tmp.path().join("a")).unwrap() {
        let name = entry.unwrap().file_name();
        let left = fs::read(tmp.path().join("a").join(&name)).unwrap();
        let right = fs::read(tmp.path().join("b").join(&name)).unwrap();
        if name == "summary.txt" {
            // the config echo names the output directory; everything else matches
            let strip = |bytes: &[u8]| {
                String::from_utf8_lossy(bytes)
                    .lines()
                    .filter(|l| !l.starts_with("output_dir"))
                    .collect::<Vec<_>>()
                    .join("\n")
            };
            assert_eq!(strip(&left), strip(&right));
        } else {
            assert_eq!(left, right, "{name:?} differs between reruns");
        }
    }
}

#[test]
fn free_energy_csv_is_the_fenchel_dual_of_structure_function_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let output = landscape(
        &["run", "--profile", "poly6", "--output-dir", "out"],
        tmp.path(),
    );
    assert!(output.status.success(), "stderr: {}", stderr(&output));
    let out = tmp.path().join("out");

    let mut alphas = Vec::new();
    let mut h = Vec::new();
    let sf_text = fs::read_to_string(out.join("structure_function.csv")).unwrap();
    for line in sf_text.lines().skip(1) {
        let (a, v) = line.split_once(',').unwrap();
        alphas.push(a.parse::<u32>().unwrap());
        h.push(v.parse::<f64>().unwrap());
    }
    let sf = StructureFunction {
        alphas,
        h,
        source_tag: String::new(),
    };

    let fe_text = fs::read_to_string(out.join("free_energy.csv")).unwrap();
    let mut rows = 0;
    for line in fe_text.lines().skip(1) {
        let mut fields = line.split(',');
        let lambda: f64 = fields.next().unwrap().parse().unwrap();
        let f: f64 = fields.next().unwrap().parse().unwrap();
        // Display output round-trips f64 exactly, so the identity survives
        // the file layer bit-for-bit.
        assert_eq!(
            f.to_bits(),
            fenchel_h_to_f(&sf, lambda).to_bits(),
            "F mismatch at lambda {lambda}"
        );
        rows += 1;
    }
    assert_eq!(rows, 241);
}

#[test]
fn invalid_configuration_exits_2_and_names_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let output = landscape(&["run", "--profile", "poly6", "--n-train", "1"], tmp.path());
    assert_eq!(output.status.code(), Some(2));
    assert!(
        stderr(&output).contains("n_train"),
        "stderr: {}",
        stderr(&output)
    );
}

#[test]
fn unknown_family_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let output = landscape(&["run", "--family", "quux"], tmp.path());
    assert_eq!(output.status.code(), Some(2));
    assert!(
        stderr(&output).contains("family"),
        "stderr: {}",
        stderr(&output)
    );
}

#[test]
fn missing_config_file_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    let output = landscape(&["run", "--config", "does-not-exist.cfg"], tmp.path());
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn malformed_config_file_exits_2_with_line_number() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("bad.cfg"), "seed = 7\nn_train = lots\n").unwrap();
    let output = landscape(&["run", "--config", "bad.cfg"], tmp.path());
    assert_eq!(output.status.code(), Some(2));
    let message = stderr(&output);
    assert!(message.contains("line 2"), "stderr: {message}");
}

#[test]
fn config_file_overrides_profile_and_flags_override_file() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("exp.cfg"), "seed = 7\nn_test = 64\n").unwrap();
    let output = landscape(
        &[
            "run",
            "--profile",
            "fourier4",
            "--config",
            "exp.cfg",
            "--n-test",
            "32",
            "--output-dir",
            "out",
        ],
        tmp.path(),
    );
    assert!(output.status.success(), "stderr: {}", stderr(&output));
    let summary = fs::read_to_string(tmp.path().join("out/summary.txt")).unwrap();
    assert!(
        summary.contains("family = fourier"),
        "profile value survives"
    );
    assert!(
        summary.contains("seed = 7"),
        "config file overrides the profile"
    );
    assert!(
        summary.contains("n_test = 32"),
        "flag overrides the config file"
    );
}

#[test]
fn check_subcommand_reports_four_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let output = landscape(&["check"], tmp.path());
    assert!(output.status.success(), "stderr: {}", stderr(&output));
    let lines: Vec<String> = stdout(&output)
        .lines()
        .filter(|l| l.starts_with("check "))
        .map(str::to_owned)
        .collect();
    assert_eq!(lines.len(), 4, "stdout: {}", stdout(&output));
    assert!(lines.iter().all(|l| l.contains(": PASS")), "{lines:?}");
}

#[test]
fn sweep_with_trace_writes_structure_and_chain_files() {
    let tmp = tempfile::tempdir().unwrap();
    let output = landscape(
        &[
            "sweep",
            "--profile",
            "poly6",
            "--lambda-count",
            "5",
            "--trace",
            "--output-dir",
            "out",
        ],
        tmp.path(),
    );
    assert!(output.status.success(), "stderr: {}", stderr(&output));
    let out = tmp.path().join("out");
    assert_eq!(
        first_line(&out.join("sa_structure.csv")),
        "lambda,d_star,best_action,acceptance_rate,exact_d_star,matches_exact"
    );
    assert_eq!(
        first_line(&out.join("chain_trace.csv")),
        "step,temperature,state_index,action,accepted"
    );
    let rows = fs::read_to_string(out.join("sa_structure.csv"))
        .unwrap()
        .lines()
        .count();
    assert_eq!(rows, 6, "header plus one row per lambda");
}

#[test]
fn summary_marks_breakpoints_against_the_lambda_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let output = landscape(
        &[
            "run",
            "--profile",
            "poly6",
            "--lambda-max",
            "0.5",
            "--output-dir",
            "out",
        ],
        tmp.path(),
    );
    assert!(output.status.success(), "stderr: {}", stderr(&output));
    let summary = fs::read_to_string(tmp.path().join("out/summary.txt")).unwrap();
    assert!(summary.contains("(within lambda grid)"), "{summary}");
    assert!(summary.contains("(outside lambda grid)"), "{summary}");
}
