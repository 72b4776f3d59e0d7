//! End-to-end tests of the command-line binary: spawn the real executable,
//! check output contracts (headers, row counts, float fidelity, ordering,
//! determinism) and the documented exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sombrero"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary should spawn")
}

fn stdout_of(out: &Output) -> String {
    assert!(
        out.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).expect("stdout should be UTF-8")
}

/// Fresh scratch directory under the target-specific temp root.
fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sombrero-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).expect("scratch dir should be creatable");
    dir
}

/// Parse a CSV body (header + rows of comma-separated fields).
fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines
        .next()
        .expect("CSV needs a header")
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    (header, rows)
}

fn field_f64(row: &[String], idx: usize) -> f64 {
    row[idx].parse().expect("numeric field should parse")
}

// -- levels -----------------------------------------------------------------

#[test]
fn zero_radius_levels_are_the_exact_oscillator_ladder() {
    let out = stdout_of(&run(&["levels", "--r0", "0", "--m", "0", "--count", "3"]));
    let (header, rows) = parse_csv(&out);
    assert_eq!(header, ["r0", "m", "n_r", "eps", "residual", "degraded"]);
    assert_eq!(rows.len(), 3);
    for (k, row) in rows.iter().enumerate() {
        assert_eq!(field_f64(row, 3), 2.0 * k as f64 + 1.0, "eps at n_r = {k}");
        assert_eq!(field_f64(row, 4), 0.0, "exact limit carries zero residual");
        assert_eq!(row[5], "false");
    }
}

#[test]
fn m_range_emits_one_block_per_m_with_ascending_levels() {
    let out = stdout_of(&run(&[
        "levels", "--r0", "2", "--m", "0..2", "--count", "4",
    ]));
    let (_, rows) = parse_csv(&out);
    assert_eq!(rows.len(), 12, "3 m-values × 4 levels");
    for m in 0..3 {
        let block: Vec<_> = rows
            .iter()
            .filter(|r| r[1] == m.to_string())
            .collect();
        assert_eq!(block.len(), 4, "m = {m} block");
        for (k, row) in block.iter().enumerate() {
            assert_eq!(row[2], k.to_string(), "n_r labels ascend");
        }
        assert!(
            block
                .windows(2)
                .all(|w| field_f64(w[0], 3) < field_f64(w[1], 3)),
            "eps ascends within the m = {m} block"
        );
    }
}

#[test]
fn levels_agree_with_the_committed_finite_difference_table() {
    // The golden table ships with the repository; its rows were produced by
    // the finite-difference eigensolver with Richardson extrapolation.
    let golden_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/oracle_golden.csv");
    let golden = std::fs::read_to_string(golden_path).expect("golden table should be readable");
    let (_, golden_rows) = parse_csv(&golden);

    let out = stdout_of(&run(&["levels", "--r0", "4", "--m", "0", "--count", "2"]));
    let (_, rows) = parse_csv(&out);
    for (k, row) in rows.iter().enumerate() {
        let reference = golden_rows
            .iter()
            .find(|g| g[0] == "0" && field_f64(g, 1) == 4.0 && g[2] == k.to_string())
            .map(|g| field_f64(g, 3))
            .expect("golden row should exist");
        let eps = field_f64(row, 3);
        assert!(
            (eps - reference).abs() <= 5e-4,
            "level {k}: {eps} vs golden {reference}"
        );
    }
}

#[test]
fn json_output_carries_the_same_fields() {
    let out = stdout_of(&run(&[
        "levels", "--r0", "1.5", "--m", "1", "--count", "2", "--format", "json",
    ]));
    let rows: serde_json::Value = serde_json::from_str(&out).expect("JSON should parse");
    let rows = rows.as_array().expect("top level is an array");
    assert_eq!(rows.len(), 2);
    for (k, row) in rows.iter().enumerate() {
        assert_eq!(row["m"], 1);
        assert_eq!(row["n_r"], k as u64);
        assert_eq!(row["r0"], 1.5);
        assert!(row["eps"].as_f64().unwrap() > 0.0);
        assert_eq!(row["degraded"], false);
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = ["levels", "--r0", "3.7", "--m", "0..2", "--count", "3"];
    let first = run(&args);
    let second = run(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout, "output must be deterministic");
}

// -- exit codes ---------------------------------------------------------------

#[test]
fn argument_errors_exit_with_one() {
    let unknown = run(&["levels", "--r0", "1", "--no-such-flag"]);
    assert_eq!(unknown.status.code(), Some(1), "unknown flag");

    let bad_range = run(&["levels", "--r0", "1", "--m", "2..0"]);
    assert_eq!(bad_range.status.code(), Some(1), "empty m range");

    let bad_count = run(&["levels", "--r0", "1", "--count", "0"]);
    assert_eq!(bad_count.status.code(), Some(1), "zero count");
}

#[test]
fn solver_domain_errors_exit_with_two() {
    let out = run(&["levels", "--r0", "-1", "--m", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        !String::from_utf8_lossy(&out.stderr).is_empty(),
        "failure reason goes to stderr"
    );
}

#[test]
fn help_exits_cleanly() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
}

// -- scan ---------------------------------------------------------------------

#[test]
fn scan_writes_curve_files_and_the_barrier_reference() {
    let dir = scratch("scan");
    let out = run(&[
        "scan", "--m", "0", "--nr-max", "1",
        "--r0-min", "0.5", "--r0-max", "1.5", "--points", "3",
        "--out-dir", dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());

    for name in ["curve_m0_nr0.csv", "curve_m0_nr1.csv", "parabola.csv"] {
        assert!(dir.join(name).exists(), "{name} should be written");
    }
    let curve = std::fs::read_to_string(dir.join("curve_m0_nr0.csv")).unwrap();
    let (header, rows) = parse_csv(&curve);
    assert_eq!(header, ["r0", "eps", "residual", "degraded"]);
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| field_f64(r, 2) <= 1e-9), "clean residuals");

    let parabola = std::fs::read_to_string(dir.join("parabola.csv")).unwrap();
    let (_, rows) = parse_csv(&parabola);
    for row in &rows {
        let r0 = field_f64(row, 0);
        assert_eq!(field_f64(row, 1), 0.25 * r0 * r0, "barrier = r0²/4");
    }
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn scan_presets_select_m_but_respect_grid_flags() {
    let dir = scratch("preset");
    let out = run(&[
        "scan", "--preset", "fig2",
        "--r0-min", "1.0", "--r0-max", "2.0", "--points", "3",
        "--out-dir", dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    // fig2 is the m = 1 diagram with five curves (n_r ≤ 4).
    for n_r in 0..=4 {
        assert!(dir.join(format!("curve_m1_nr{n_r}.csv")).exists());
    }
    assert!(!dir.join("curve_m0_nr0.csv").exists());
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn scan_runs_are_file_for_file_deterministic() {
    let (da, db) = (scratch("det-a"), scratch("det-b"));
    for dir in [&da, &db] {
        let out = run(&[
            "scan", "--m", "1", "--nr-max", "0",
            "--r0-min", "0.8", "--r0-max", "1.2", "--points", "3",
            "--out-dir", dir.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    let a = std::fs::read(da.join("curve_m1_nr0.csv")).unwrap();
    let b = std::fs::read(db.join("curve_m1_nr0.csv")).unwrap();
    assert_eq!(a, b, "same invocation, same bytes");
    let _ = std::fs::remove_dir_all(&da);
    let _ = std::fs::remove_dir_all(&db);
}

// -- density --------------------------------------------------------------------

#[test]
fn density_emits_a_nonnegative_profile_split_at_the_rim() {
    let dir = scratch("density");
    let out = run(&[
        "density", "--m", "0", "--nr", "0", "--r0", "1.5",
        "--samples", "50", "--out-dir", dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());

    let text = std::fs::read_to_string(dir.join("density_m0_nr0_r0_1.500.csv")).unwrap();
    let (header, rows) = parse_csv(&text);
    assert_eq!(header, ["r", "rR2", "region"]);
    assert_eq!(rows.len(), 50);
    assert_eq!(field_f64(&rows[0], 0), 0.0);
    assert_eq!(field_f64(&rows[0], 1), 0.0, "r·R² vanishes at the origin");

    let mut switches = 0;
    for pair in rows.windows(2) {
        assert!(field_f64(&pair[1], 1) >= 0.0, "density is nonnegative");
        assert!(
            field_f64(&pair[1], 0) > field_f64(&pair[0], 0),
            "radii ascend"
        );
        if pair[0][2] != pair[1][2] {
            switches += 1;
        }
    }
    assert_eq!(switches, 1, "region flips in → out exactly once");
    let boundary = rows.iter().rposition(|r| r[2] == "in").unwrap();
    assert!(field_f64(&rows[boundary], 0) <= 1.5);
    assert!(field_f64(&rows[boundary + 1], 0) > 1.5);
    let _ = std::fs::remove_dir_all(&dir);
}

// -- clusters ---------------------------------------------------------------------

#[test]
fn n_cluster_membership_matches_the_shell_decomposition() {
    let dir = scratch("clusters");
    let out = run(&[
        "clusters", "--kind", "n", "--label", "2",
        "--r0-min", "0.5", "--r0-max", "1.5", "--points", "3",
        "--out-dir", dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("cluster_n2.json")).unwrap())
            .unwrap();
    assert_eq!(summary["kind"], "n");
    assert_eq!(summary["label"], 2);
    let members = summary["members"].as_array().unwrap();
    // n = 2 decomposes into (m, n_r) = (2, 0) and (0, 1): ⌊n/2⌋ + 1 members.
    assert_eq!(members.len(), 2);
    let pairs: Vec<(i64, u64)> = members
        .iter()
        .map(|m| (m["m"].as_i64().unwrap(), m["n_r"].as_u64().unwrap()))
        .collect();
    assert!(pairs.contains(&(2, 0)));
    assert!(pairs.contains(&(0, 1)));
    for member in members {
        assert!(dir.join(member["file"].as_str().unwrap()).exists());
    }
    let _ = std::fs::remove_dir_all(&dir);
}

// -- asym -------------------------------------------------------------------------

#[test]
fn asym_reports_the_small_well_slope_near_minus_quarter() {
    let out = stdout_of(&run(&["asym", "--m", "0", "--nr-max", "0"]));
    let report: serde_json::Value = serde_json::from_str(&out).expect("JSON should parse");
    let curves = report["curves"].as_array().unwrap();
    assert_eq!(curves.len(), 1);
    let c_small = curves[0]["c_small"].as_f64().unwrap();
    assert!(
        (c_small + 0.25).abs() < 0.05,
        "small-well quadratic coefficient ≈ −1/4, got {c_small}"
    );
    let a_fit = curves[0]["a_fit"].as_f64().unwrap();
    assert!(a_fit > 0.0 && a_fit.is_finite());
    assert!(curves[0]["exponent_fit"].as_f64().unwrap().is_finite());
}

// -- validate ---------------------------------------------------------------------

#[test]
fn quick_validation_passes_and_reports_each_check() {
    let out = run(&["validate", "--quick"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(
        out.status.code(),
        Some(0),
        "quick battery should pass:\n{text}"
    );
    for check in [
        "kernel-identities",
        "circular-limit",
        "oracle-equivalence",
        "hellmann-feynman",
        "normalization",
        "wide-well-adjudication",
    ] {
        assert!(text.contains(check), "missing check line: {check}");
    }
    assert!(!text.contains("FAIL"), "no failing checks:\n{text}");
}
