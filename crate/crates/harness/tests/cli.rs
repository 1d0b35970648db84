//! End-to-end tests of the `cvi-bench` binary: spec parsing and validation,
//! run/sweep/compare flows, exit codes, and output artifacts. Specs run from
//! temporary directories so relative output paths land there.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bench(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cvi-bench"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary spawns")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn sample_spec(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../specs")
        .join(name)
}

/// Copies a shipped sample spec into `dir` and returns the copy's file name.
fn stage_sample(dir: &Path, name: &str) -> String {
    std::fs::copy(sample_spec(name), dir.join(name)).expect("sample spec exists");
    name.to_string()
}

fn write_spec(dir: &Path, name: &str, body: &str) -> String {
    std::fs::write(dir.join(name), body).unwrap();
    name.to_string()
}

// ---------------------------------------------------------------------------
// run

#[test]
fn run_reference_spec_writes_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let spec = stage_sample(dir.path(), "cbg_acvi_reference.toml");
    let out = bench(dir.path(), &["run", &spec]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("51 rows"), "stdout: {}", stdout(&out));

    let csv = std::fs::read_to_string(dir.path().join("out/cbg_acvi.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 52, "header + 51 records");
    assert!(lines[0].starts_with("iter,outer,inner,wall_time_s,"));
    assert!(lines[1].starts_with("0,0,0,"));

    let svg = std::fs::read_to_string(dir.path().join("out/cbg_acvi.svg")).unwrap();
    assert!(svg.contains("<svg"), "plot file holds an SVG document");
    assert!(svg.contains("dist_to_solution"), "plot labels the chosen metric");
}

#[test]
fn remaining_sample_specs_execute_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    for name in [
        "cbg_acvi_single_outer.toml",
        "cbg_acvi_inexact.toml",
        "forsaken_eg.toml",
        "ghbg_fw.toml",
    ] {
        let spec = stage_sample(dir.path(), name);
        let out = bench(dir.path(), &["run", &spec]);
        assert_eq!(code(&out), 0, "{name} failed: {}", stderr(&out));
    }
    let sweep = stage_sample(dir.path(), "hbg_eta_sweep.toml");
    let out = bench(dir.path(), &["sweep", &sweep]);
    assert_eq!(code(&out), 0, "sweep sample failed: {}", stderr(&out));
    assert!(stdout(&out).contains("45 runs"), "9 eta values x 5 methods");
}

#[test]
fn zero_iteration_budget_emits_only_the_initial_row() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        dir.path(),
        "zero.toml",
        r#"
[problem]
name = "cbg"

[method]
name = "gda"
gamma = 0.1

[budget]
max_iters = 0

[outputs]
csv = "zero.csv"
"#,
    );
    let out = bench(dir.path(), &["run", &spec]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("zero.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2, "header plus the initial record only");
}

// ---------------------------------------------------------------------------
// validation failures (exit 2)

#[test]
fn unknown_method_name_exits_2_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        dir.path(),
        "bad.toml",
        r#"
[problem]
name = "cbg"

[method]
name = "acvi_typo"

[budget]
max_iters = 10

[outputs]
csv = "out.csv"
"#,
    );
    let out = bench(dir.path(), &["run", &spec]);
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains("acvi_typo"), "names the unknown method: {err}");
    assert!(err.contains("acvi"), "lists known candidates: {err}");
}

#[test]
fn misspelled_hyperparameter_key_exits_2_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        dir.path(),
        "typo.toml",
        r#"
[problem]
name = "cbg"

[method]
name = "acvi"
betaa = 0.08
mu_init = 1e-5
delta = 0.5
outers = 5
inners = 2

[budget]
max_iters = 10

[outputs]
csv = "out.csv"
"#,
    );
    let out = bench(dir.path(), &["run", &spec]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("betaa"), "names the bad key: {}", stderr(&out));
}

#[test]
fn run_without_method_section_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        dir.path(),
        "nomethod.toml",
        r#"
[problem]
name = "cbg"

[budget]
max_iters = 10

[outputs]
csv = "out.csv"
"#,
    );
    let out = bench(dir.path(), &["run", &spec]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("method"), "stderr: {}", stderr(&out));
}

// ---------------------------------------------------------------------------
// solver failures (exit 3)

#[test]
fn solver_failure_exits_3_and_leaves_a_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    // The 2D bilinear game has an unbounded feasible set, so it offers no
    // linear minimization oracle and the conditional-gradient method fails.
    let spec = write_spec(
        dir.path(),
        "fw_cbg.toml",
        r#"
[problem]
name = "cbg"

[method]
name = "fw"

[budget]
max_iters = 10

[outputs]
csv = "fw.csv"
"#,
    );
    let out = bench(dir.path(), &["run", &spec]);
    assert_eq!(code(&out), 3, "stderr: {}", stderr(&out));
    let sidecar = std::fs::read_to_string(dir.path().join("fw.csv.err.txt")).unwrap();
    assert!(
        sidecar.contains("linear minimization"),
        "sidecar records the failure: {sidecar}"
    );
    assert!(!dir.path().join("fw.csv").exists(), "no partial CSV is left behind");
}

// ---------------------------------------------------------------------------
// compare

#[test]
fn compare_identical_files_reports_zero_deviation() {
    let dir = tempfile::tempdir().unwrap();
    let spec = stage_sample(dir.path(), "cbg_acvi_single_outer.toml");
    assert_eq!(code(&bench(dir.path(), &["run", &spec])), 0);
    let csv = "out/cbg_acvi_single_outer.csv";
    let out = bench(dir.path(), &["compare", csv, csv]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("max deviation: 0"), "stdout: {}", stdout(&out));
}

#[test]
fn compare_exact_vs_inexact_within_fixture_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let exact = stage_sample(dir.path(), "cbg_acvi_single_outer.toml");
    let inexact = stage_sample(dir.path(), "cbg_acvi_inexact.toml");
    assert_eq!(code(&bench(dir.path(), &["run", &exact])), 0);
    assert_eq!(code(&bench(dir.path(), &["run", &inexact])), 0);

    let a = "out/cbg_acvi_single_outer.csv";
    let b = "out/cbg_acvi_inexact.csv";
    let within = bench(dir.path(), &["compare", a, b, "--tol", "1e-4"]);
    assert_eq!(code(&within), 0, "stderr: {}", stderr(&within));

    // The runs differ, so the zero-tolerance default flags them.
    let strict = bench(dir.path(), &["compare", a, b]);
    assert_eq!(code(&strict), 1);
    assert!(stderr(&strict).contains("exceeds tolerance"));
}

#[test]
fn pinned_problem_seed_makes_run_seed_irrelevant() {
    let dir = tempfile::tempdir().unwrap();
    let body = |run_seed: u64, csv: &str| {
        format!(
            r#"
run_seed = {run_seed}

[problem]
name = "toy_gan"
num_samples = 200
seed = 3

[method]
name = "gda"
gamma = 0.05

[budget]
max_iters = 20

[outputs]
csv = "{csv}"
"#
        )
    };
    let a = write_spec(dir.path(), "gan_a.toml", &body(1, "a.csv"));
    let b = write_spec(dir.path(), "gan_b.toml", &body(2, "b.csv"));
    assert_eq!(code(&bench(dir.path(), &["run", &a])), 0);
    assert_eq!(code(&bench(dir.path(), &["run", &b])), 0);
    let out = bench(dir.path(), &["compare", "a.csv", "b.csv"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("max deviation: 0"));
}

#[test]
fn compare_missing_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = bench(dir.path(), &["compare", "absent_a.csv", "absent_b.csv"]);
    assert_eq!(code(&out), 2);
}

// ---------------------------------------------------------------------------
// sweep

#[test]
fn single_value_sweep_matches_a_plain_run() {
    let dir = tempfile::tempdir().unwrap();
    let method_block = r#"
name = "acvi"
beta = 0.5
mu_init = 1e-6
delta = 0.5
outers = 10
inners = 1
x_solver = "affine"
"#;
    let run = write_spec(
        dir.path(),
        "run.toml",
        &format!(
            r#"
[problem]
name = "hbg"
eta = 0.5
n = 40

[method]
{method_block}

[budget]
max_iters = 10

[outputs]
csv = "run.csv"
"#
        ),
    );
    let sweep = write_spec(
        dir.path(),
        "sweep.toml",
        &format!(
            r#"
[problem]
name = "hbg"
n = 40

[budget]
max_iters = 10

[sweep]
axis = "eta"
values = [0.5]
summary_csv = "sum.csv"

[[sweep.method]]
{method_block}
"#
        ),
    );
    assert_eq!(code(&bench(dir.path(), &["run", &run])), 0);
    let out = bench(dir.path(), &["sweep", &sweep]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    let per_run = "sum_eta_0.5_m1_acvi.csv";
    assert!(dir.path().join(per_run).exists(), "per-run CSV retained");
    let cmp = bench(dir.path(), &["compare", "run.csv", per_run]);
    assert_eq!(code(&cmp), 0, "stderr: {}", stderr(&cmp));
    assert!(stdout(&cmp).contains("max deviation: 0"));
}

#[test]
fn error_threshold_sweep_fills_the_summary() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        dir.path(),
        "thresh.toml",
        r#"
[problem]
name = "hbg"
eta = 0.5
n = 40

[budget]
max_iters = 30

[stop]
metric = "relative_error"
threshold = 0.5

[sweep]
axis = "error_threshold"
values = [0.5, 0.02]
summary_csv = "sum.csv"

[[sweep.method]]
name = "acvi"
beta = 0.5
mu_init = 1e-6
delta = 0.5
outers = 30
inners = 1
x_solver = "affine"
"#,
    );
    let out = bench(dir.path(), &["sweep", &spec]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let summary = std::fs::read_to_string(dir.path().join("sum.csv")).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(
        lines[0],
        "axis_value,method,iters_to_threshold,final_metric,wall_time_s,capped"
    );
    assert_eq!(lines.len(), 3, "header + one row per threshold");
    // A looser threshold is reached in no more updates than a tighter one.
    let iters = |line: &str| line.split(',').nth(2).unwrap().parse::<u64>().unwrap();
    assert!(iters(lines[1]) <= iters(lines[2]), "summary: {summary}");
}

#[test]
fn thread_env_var_must_be_a_positive_integer() {
    let dir = tempfile::tempdir().unwrap();
    let spec = stage_sample(dir.path(), "hbg_eta_sweep.toml");
    for bad in ["abc", "0"] {
        let out = Command::new(env!("CARGO_BIN_EXE_cvi-bench"))
            .current_dir(dir.path())
            .env("CVI_SOLVE_THREADS", bad)
            .args(["sweep", &spec])
            .output()
            .unwrap();
        assert_eq!(code(&out), 2, "CVI_SOLVE_THREADS={bad}");
        assert!(stderr(&out).contains("CVI_SOLVE_THREADS"), "stderr: {}", stderr(&out));
    }
}

// ---------------------------------------------------------------------------
// listings

#[test]
fn listings_cover_every_problem_and_method() {
    let dir = tempfile::tempdir().unwrap();
    let problems = stdout(&bench(dir.path(), &["list-problems"]));
    for name in ["cbg", "ratio_game", "forsaken", "toy_gan", "hbg", "ghbg", "gghbg"] {
        assert!(problems.contains(name), "missing problem {name}: {problems}");
    }
    let methods = stdout(&bench(dir.path(), &["list-methods"]));
    for name in ["acvi", "acvi_inexact", "vacvi", "gda", "eg", "ogda", "la", "fw"] {
        assert!(methods.contains(name), "missing method {name}: {methods}");
    }
}
