//! Benchmark fixtures and scoring.
//!
//! `generate_fixtures` writes a self-contained corpus: the suppression-scope
//! application SBOMs (plain and enriched) with their VEX document and
//! compiled jar sets, the variant-lineage SBOMs in both formats, the
//! fixture advisory database, and an expected-result matrix. `score`
//! compares normalized findings reports against that matrix. The emulation
//! harness reproduces the two identity-only suppression strategies observed
//! in the wild — product-PURL-only and subcomponent-only matching — as
//! negative baselines.

pub mod classgen;
pub mod fixtures;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::sbom::SbomDocument;
use crate::vex::{AppliedStatement, SuppressionVerdict, VerdictOutcome, VexDocument};
use crate::vulndb::Finding;

/// The OpenVEX document for the suppression-scope corpus: lib1 is not
/// affected by the advisory in
/// its log4j-core dependency.
pub const LIB1_VEX_JSON: &str = r#"{
  "@context": "https://openvex.dev/ns/v0.2.0",
  "@id": "https://example.invalid/vex/lib1-CVE-2017-5645",
  "author": "example",
  "timestamp": "2024-01-01T00:00:00Z",
  "version": 1,
  "statements": [
    {
      "vulnerability": { "name": "CVE-2017-5645" },
      "products": [
        {
          "@id": "pkg:maven/example/lib1@1.0-SNAPSHOT",
          "subcomponents": [
            { "@id": "pkg:maven/org.apache.logging.log4j/log4j-core@2.8.1" }
          ]
        }
      ],
      "status": "not_affected",
      "justification": "vulnerable_code_not_in_execute_path"
    }
  ]
}
"#;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    Base,
    WithVex,
    VariantMatrix,
}

impl Phase {
    pub fn token(&self) -> &'static str {
        match self {
            Phase::Base => "base",
            Phase::WithVex => "with-vex",
            Phase::VariantMatrix => "variant-matrix",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expectation {
    Detected,
    NotDetected,
}

/// One expected-matrix row: a test case in a given phase with its input
/// files (relative to the fixture root) and per-advisory expectations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCase {
    #[serde(rename = "case")]
    pub id: String,
    pub phase: Phase,
    pub inputs: Vec<String>,
    pub expected: BTreeMap<String, Expectation>,
}

/// A normalized findings report for one case: the advisories a scan left
/// visible (reported or annotated, not suppressed).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizedReport {
    pub case: String,
    pub phase: Phase,
    pub detected: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseResult {
    pub id: String,
    pub phase: Phase,
    pub expected: BTreeMap<String, Expectation>,
    pub actual: BTreeSet<String>,
    pub pass: bool,
}

#[derive(Debug, Clone, Default)]
pub struct ScoreReport {
    pub per_case: Vec<CaseResult>,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum ScoreError {
    #[error("unknown case {case:?} in phase {phase:?}: no expected row")]
    UnknownCase { case: String, phase: String },
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
}

/// Scores reports against the matrix. A case passes iff, for every advisory
/// the row names, presence in the report matches the expectation. Advisories
/// outside the row are ignored.
pub fn score(matrix: &[TestCase], reports: &[NormalizedReport]) -> Result<ScoreReport, ScoreError> {
    let mut out = ScoreReport::default();
    for report in reports {
        let row = matrix
            .iter()
            .find(|r| r.id == report.case && r.phase == report.phase)
            .ok_or_else(|| ScoreError::UnknownCase {
                case: report.case.clone(),
                phase: report.phase.token().to_string(),
            })?;
        let pass = row.expected.iter().all(|(advisory, expectation)| {
            report.detected.contains(advisory) == (*expectation == Expectation::Detected)
        });
        if pass {
            out.passed += 1;
        } else {
            out.failed += 1;
        }
        out.per_case.push(CaseResult {
            id: row.id.clone(),
            phase: row.phase,
            expected: row.expected.clone(),
            actual: report.detected.clone(),
            pass,
        });
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct MatrixFile {
    rows: Vec<TestCase>,
}

/// File-based scoring: the expected matrix plus one normalized report per
/// file.
pub fn score_files(expected: &Path, reports: &[PathBuf]) -> Result<ScoreReport, ScoreError> {
    let read = |path: &Path| -> Result<String, ScoreError> {
        fs::read_to_string(path).map_err(|e| ScoreError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })
    };
    let matrix: MatrixFile =
        serde_json::from_str(&read(expected)?).map_err(|e| ScoreError::Io {
            path: expected.display().to_string(),
            reason: e.to_string(),
        })?;
    let mut parsed = Vec::new();
    for path in reports {
        let report: NormalizedReport =
            serde_json::from_str(&read(path)?).map_err(|e| ScoreError::Io {
                path: path.display().to_string(),
                reason: e.to_string(),
            })?;
        parsed.push(report);
    }
    score(&matrix.rows, &parsed)
}

/// Builds the normalized report for a scanned case: an advisory counts as
/// detected unless its verdict is `Suppressed`.
pub fn normalized_report(case: &str, phase: Phase, findings: &[Finding]) -> NormalizedReport {
    let detected = findings
        .iter()
        .filter(|f| {
            f.verdict
                .as_ref()
                .map(|v| v.outcome != VerdictOutcome::Suppressed)
                .unwrap_or(true)
        })
        .map(|f| f.vuln_id.clone())
        .collect();
    NormalizedReport {
        case: case.to_string(),
        phase,
        detected,
    }
}

#[derive(Debug, thiserror::Error)]
#[error("cannot write {path}: {source}")]
pub struct FixtureError {
    pub path: String,
    #[source]
    pub source: std::io::Error,
}

/// Writes the whole fixture corpus under `outdir` and returns the manifest
/// of written files (paths relative to `outdir`, sorted). Generation is
/// deterministic: two runs produce byte-identical trees.
pub fn generate_fixtures(outdir: &Path) -> Result<Vec<PathBuf>, FixtureError> {
    let mut manifest: Vec<PathBuf> = Vec::new();
    let mut write = |rel: PathBuf, bytes: Vec<u8>| -> Result<(), FixtureError> {
        let full = outdir.join(&rel);
        let context = |source| FixtureError {
            path: full.display().to_string(),
            source,
        };
        if let Some(parent) = full.parent() {
            fs::create_dir_all(parent).map_err(context)?;
        }
        fs::write(&full, bytes).map_err(context)?;
        manifest.push(rel);
        Ok(())
    };

    for case in fixtures::STUDY1_CASES {
        write(
            PathBuf::from(format!("study1/{case}.cdx.json")),
            crate::sbom::serialize_cyclonedx(&fixtures::study1_doc(case, false)).into_bytes(),
        )?;
        for (jar_name, bytes) in fixtures::study1_jars(case) {
            write(
                PathBuf::from(format!("study1/jars/{case}/{jar_name}")),
                bytes,
            )?;
        }
    }
    for case in fixtures::STUDY1_REACHABLE {
        write(
            PathBuf::from(format!("study1/{case}.enriched.cdx.json")),
            crate::sbom::serialize_cyclonedx(&fixtures::study1_doc(case, true)).into_bytes(),
        )?;
    }
    write(
        PathBuf::from("study1/lib1.vex.json"),
        LIB1_VEX_JSON.as_bytes().to_vec(),
    )?;

    write(
        PathBuf::from("study2/sbom-cycloneDX.json"),
        fixtures::study2_cdx_text(false).into_bytes(),
    )?;
    write(
        PathBuf::from("study2/sbom-cycloneDX-with-variants.json"),
        fixtures::study2_cdx_text(true).into_bytes(),
    )?;
    write(
        PathBuf::from("study2/sbom-spdx.json"),
        fixtures::study2_spdx_text(false).into_bytes(),
    )?;
    write(
        PathBuf::from("study2/sbom-spdx-with-variants.json"),
        fixtures::study2_spdx_text(true).into_bytes(),
    )?;

    for (name, text) in fixtures::db_records() {
        write(PathBuf::from(format!("db/{name}")), text.into_bytes())?;
    }
    write(
        PathBuf::from("db/README.md"),
        fixtures::DB_README.as_bytes().to_vec(),
    )?;

    let matrix = MatrixFile {
        rows: fixtures::expected_matrix(),
    };
    let mut matrix_text = serde_json::to_string_pretty(&matrix).expect("serializable");
    matrix_text.push('\n');
    write(
        PathBuf::from("expected-matrix.json"),
        matrix_text.into_bytes(),
    )?;

    manifest.sort();
    Ok(manifest)
}

/// The two suppression strategies the emulation reproduces. Both ignore
/// dependency paths; they are retained as negative baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmulationMode {
    /// Match statement products against the scanned artifact (the document
    /// root) only. The product of a library-level statement never matches
    /// the downstream application, so suppression silently never applies.
    ProductPurlOnly,
    /// Match statement subcomponents against the finding's component only.
    /// One statement about a library then clears the finding globally, even
    /// where the vulnerable code is reachable around the product.
    SubcomponentOnly,
}

/// Applies an identity-only suppression strategy, filling verdicts without
/// any path computation.
pub fn emulate_suppression(
    mode: EmulationMode,
    findings: Vec<Finding>,
    doc: &SbomDocument,
    vex_docs: &[VexDocument],
) -> Vec<Finding> {
    findings
        .into_iter()
        .map(|mut finding| {
            let mut applied = None;
            'documents: for vex in vex_docs {
                for (index, statement) in vex.statements.iter().enumerate() {
                    if !statement.status.is_suppressing()
                        || !statement.matches_vulnerability(&finding)
                    {
                        continue;
                    }
                    let (candidates, target) = match mode {
                        EmulationMode::ProductPurlOnly => {
                            (&statement.products, doc.component(&doc.root_ref))
                        }
                        EmulationMode::SubcomponentOnly => (
                            &statement.subcomponents,
                            doc.component(&finding.component_ref),
                        ),
                    };
                    let matched = candidates.iter().filter_map(|p| p.as_purl()).find(|purl| {
                        target
                            .and_then(|c| c.identity.as_ref())
                            .map(|identity| identity.matches(purl))
                            .unwrap_or(false)
                    });
                    if let Some(purl) = matched {
                        applied = Some(AppliedStatement {
                            statement_index: index,
                            source_path: vex.source_path.clone(),
                            status: statement.status,
                            product: purl.to_string(),
                            whole_tree: false,
                        });
                        break 'documents;
                    }
                }
            }
            let (outcome, applied_statements) = match applied {
                Some(a) => (VerdictOutcome::Suppressed, vec![a]),
                None => (VerdictOutcome::Reported, Vec::new()),
            };
            finding.verdict = Some(SuppressionVerdict {
                outcome,
                covered_paths: Vec::new(),
                uncovered_paths: Vec::new(),
                applied_statements,
                path_coverage: Vec::new(),
                fallback: false,
            });
            finding
        })
        .collect()
}
