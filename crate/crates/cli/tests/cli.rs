//! End-to-end tests over the compiled binary: fixture generation, scanning
//! with and without VEX, enrichment, path inspection, and benchmark scoring.

use std::collections::BTreeSet;
use std::path::Path;
use std::process::{Command, Output};

fn vexpath(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vexpath"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("exit code")
}

struct Env {
    dir: tempfile::TempDir,
}

impl Env {
    fn with_fixtures() -> Env {
        let dir = tempfile::tempdir().unwrap();
        let gen = vexpath(&["bench", "gen", "-o", "fx"], dir.path());
        assert_eq!(exit_code(&gen), 0, "bench gen failed: {}", stdout(&gen));
        Env { dir }
    }

    fn path(&self) -> &Path {
        self.dir.path()
    }
}

#[test]
fn bench_gen_prints_manifest() {
    let env = Env::with_fixtures();
    let output = vexpath(&["bench", "gen", "-o", "fx2"], env.path());
    let text = stdout(&output);
    for name in [
        "sbom-cycloneDX.json",
        "sbom-cycloneDX-with-variants.json",
        "sbom-spdx.json",
        "sbom-spdx-with-variants.json",
        "lib1.vex.json",
        "expected-matrix.json",
    ] {
        assert!(text.contains(name), "manifest missing {name}:\n{text}");
    }
}

#[test]
fn scan_unreachable_with_vex_is_clean() {
    let env = Env::with_fixtures();
    let output = vexpath(
        &[
            "scan",
            "--sbom",
            "fx/study1/app-unreachable.cdx.json",
            "--db",
            "fx/db",
            "--vex",
            "fx/study1/lib1.vex.json",
        ],
        env.path(),
    );
    assert_eq!(exit_code(&output), 0, "{}", stdout(&output));
    assert!(stdout(&output).contains("suppressed"));
}

#[test]
fn scan_static_enriched_with_vex_reports() {
    let env = Env::with_fixtures();
    let output = vexpath(
        &[
            "scan",
            "--sbom",
            "fx/study1/app-static.enriched.cdx.json",
            "--db",
            "fx/db",
            "--vex",
            "fx/study1/lib1.vex.json",
        ],
        env.path(),
    );
    assert_eq!(exit_code(&output), 1);
    let text = stdout(&output);
    assert!(text.contains("CVE-2017-5645"));
    assert!(text.contains("uncovered path: app-static -> log4j-core"));
}

#[test]
fn scan_missing_db_is_input_error() {
    let env = Env::with_fixtures();
    let output = vexpath(
        &[
            "scan",
            "--sbom",
            "fx/study1/app-static.cdx.json",
            "--db",
            "fx/no-such-db",
        ],
        env.path(),
    );
    assert_eq!(exit_code(&output), 2);
    assert!(String::from_utf8_lossy(&output.stderr).contains("error"));
}

#[test]
fn scan_json_output_is_stable() {
    let env = Env::with_fixtures();
    let args = [
        "scan",
        "--sbom",
        "fx/study2/sbom-spdx-with-variants.json",
        "--db",
        "fx/db",
        "--format",
        "json",
    ];
    let first = vexpath(&args, env.path());
    let second = vexpath(&args, env.path());
    assert_eq!(stdout(&first), stdout(&second));
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&first)).expect("valid JSON");
    let findings = parsed["findings"].as_array().unwrap();
    assert!(findings
        .iter()
        .any(|f| f["via_lineage"] == serde_json::json!(true)));
}

#[test]
fn enrich_recovers_static_edge_and_scan_reports_it() {
    let env = Env::with_fixtures();
    let output = vexpath(
        &[
            "enrich",
            "--sbom",
            "fx/study1/app-static.cdx.json",
            "--jars",
            "fx/study1/jars/app-static",
            "-o",
            "enriched.json",
        ],
        env.path(),
    );
    assert_eq!(exit_code(&output), 0);
    let text = stdout(&output);
    assert!(text.contains("1 edge(s) added"), "{text}");
    assert!(text.contains("app-static -> log4j-core"));

    // The enriched SBOM now defeats the VEX suppression.
    let scan = vexpath(
        &[
            "scan",
            "--sbom",
            "enriched.json",
            "--db",
            "fx/db",
            "--vex",
            "fx/study1/lib1.vex.json",
        ],
        env.path(),
    );
    assert_eq!(exit_code(&scan), 1);
}

#[test]
fn enrich_unreachable_adds_nothing_but_writes_output() {
    let env = Env::with_fixtures();
    let output = vexpath(
        &[
            "enrich",
            "--sbom",
            "fx/study1/app-unreachable.cdx.json",
            "--jars",
            "fx/study1/jars/app-unreachable",
            "-o",
            "out.json",
        ],
        env.path(),
    );
    assert_eq!(exit_code(&output), 0);
    assert!(stdout(&output).contains("0 edge(s) added"));
    assert!(env.path().join("out.json").exists());
}

#[test]
fn enrich_missing_jar_dir_is_input_error() {
    let env = Env::with_fixtures();
    let output = vexpath(
        &[
            "enrich",
            "--sbom",
            "fx/study1/app-static.cdx.json",
            "--jars",
            "fx/no-such-dir",
            "-o",
            "out.json",
        ],
        env.path(),
    );
    assert_eq!(exit_code(&output), 2);
}

#[test]
fn paths_shows_covered_and_uncovered_routes() {
    let env = Env::with_fixtures();

    // Transitive-only chain: a single covered path.
    let covered = vexpath(
        &[
            "paths",
            "--sbom",
            "fx/study1/app-unreachable.cdx.json",
            "--component",
            "log4j-core",
            "--vex",
            "fx/study1/lib1.vex.json",
        ],
        env.path(),
    );
    assert_eq!(exit_code(&covered), 0);
    let text = stdout(&covered);
    assert!(text.contains("path 1: app-unreachable -> lib1 -> log4j-core"));
    assert!(text.contains("covered by not_affected"));
    assert!(!text.contains("uncovered"));

    // With the hidden code edge: two paths, one outside the product scope.
    let split = vexpath(
        &[
            "paths",
            "--sbom",
            "fx/study1/app-static.enriched.cdx.json",
            "--component",
            "log4j-core",
            "--vex",
            "fx/study1/lib1.vex.json",
        ],
        env.path(),
    );
    let text = stdout(&split);
    assert!(text.contains("path 2: app-static -> log4j-core"));
    assert!(text.contains("uncovered"));
}

#[test]
fn paths_unknown_component_is_input_error() {
    let env = Env::with_fixtures();
    let output = vexpath(
        &[
            "paths",
            "--sbom",
            "fx/study1/app-static.cdx.json",
            "--component",
            "ghost",
        ],
        env.path(),
    );
    assert_eq!(exit_code(&output), 2);
}

/// Runs the scanner per expected-matrix row, builds normalized reports from
/// its JSON output, and scores them: every case passes.
#[test]
fn full_matrix_scores_clean_through_the_binary() {
    let env = Env::with_fixtures();
    let matrix: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(env.path().join("fx/expected-matrix.json")).unwrap(),
    )
    .unwrap();

    let mut report_paths: Vec<String> = Vec::new();
    for (i, row) in matrix["rows"].as_array().unwrap().iter().enumerate() {
        let case = row["case"].as_str().unwrap();
        let phase = row["phase"].as_str().unwrap();
        let inputs: Vec<&str> = row["inputs"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_str().unwrap())
            .collect();

        let sbom = format!("fx/{}", inputs[0]);
        let mut args: Vec<String> = vec![
            "scan".into(),
            "--sbom".into(),
            sbom,
            "--db".into(),
            "fx/db".into(),
        ];
        for input in &inputs {
            if input.contains(".vex.") {
                args.push("--vex".into());
                args.push(format!("fx/{input}"));
            }
        }
        args.push("--format".into());
        args.push("json".into());

        let arg_refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let output = vexpath(&arg_refs, env.path());
        let parsed: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
        let detected: BTreeSet<String> = parsed["findings"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|f| f["verdict"] != serde_json::json!("suppressed"))
            .map(|f| f["advisory"].as_str().unwrap().to_string())
            .collect();

        let report = serde_json::json!({ "case": case, "phase": phase, "detected": detected });
        let rel = format!("report-{i}.json");
        std::fs::write(
            env.path().join(&rel),
            serde_json::to_string_pretty(&report).unwrap(),
        )
        .unwrap();
        report_paths.push(rel);
    }

    let mut args: Vec<&str> = vec![
        "bench",
        "score",
        "--expected",
        "fx/expected-matrix.json",
        "--reports",
    ];
    args.extend(report_paths.iter().map(String::as_str));
    let score = vexpath(&args, env.path());
    let text = stdout(&score);
    assert_eq!(exit_code(&score), 0, "{text}");
    assert!(text.contains("passed 12 failed 0"), "{text}");
}

#[test]
fn bench_score_flags_failing_case() {
    let env = Env::with_fixtures();
    // A report claiming detection where suppression is expected.
    std::fs::write(
        env.path().join("bad-report.json"),
        serde_json::json!({
            "case": "app-unreachable",
            "phase": "with-vex",
            "detected": ["CVE-2017-5645"]
        })
        .to_string(),
    )
    .unwrap();
    let output = vexpath(
        &[
            "bench",
            "score",
            "--expected",
            "fx/expected-matrix.json",
            "--reports",
            "bad-report.json",
        ],
        env.path(),
    );
    assert_eq!(exit_code(&output), 1);
    assert!(stdout(&output).contains("FAIL app-unreachable"));
}

#[test]
fn bench_score_unknown_case_is_input_error() {
    let env = Env::with_fixtures();
    std::fs::write(
        env.path().join("report.json"),
        serde_json::json!({ "case": "mystery", "phase": "base", "detected": [] }).to_string(),
    )
    .unwrap();
    let output = vexpath(
        &[
            "bench",
            "score",
            "--expected",
            "fx/expected-matrix.json",
            "--reports",
            "report.json",
        ],
        env.path(),
    );
    assert_eq!(exit_code(&output), 2);
}

#[test]
fn scan_spdx_format_is_autodetected() {
    let env = Env::with_fixtures();
    let output = vexpath(
        &[
            "scan",
            "--sbom",
            "fx/study2/sbom-spdx.json",
            "--db",
            "fx/db",
        ],
        env.path(),
    );
    assert_eq!(exit_code(&output), 0);
    assert!(stdout(&output).contains("no findings"));
}
