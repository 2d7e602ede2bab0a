//! Command-line surface for the scanner pipeline.
//!
//! Exit codes follow the usual scanner convention so CI gates work
//! unchanged: 0 = clean (nothing reported), 1 = reported findings or failed
//! benchmark cases, 2 = input error.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use vexpath_core::bench;
use vexpath_core::enrich;
use vexpath_core::sbom::{self, SbomDocument};
use vexpath_core::vex::{self, VerdictOutcome, VexDocument, DEFAULT_PATH_CAP};
use vexpath_core::vulndb;

#[derive(Parser)]
#[command(
    name = "vexpath",
    version,
    about = "SBOM scanning with path-sensitive VEX suppression and variant-lineage matching"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan an SBOM against an offline advisory database, applying
    /// path-sensitive VEX suppression.
    Scan {
        /// SBOM file (CycloneDX or SPDX JSON; format auto-detected).
        #[arg(long)]
        sbom: PathBuf,
        /// Advisory database directory (one JSON record per file).
        #[arg(long)]
        db: PathBuf,
        /// OpenVEX document; repeatable, applied in input order.
        #[arg(long = "vex")]
        vex: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
        format: OutputFormat,
        /// Simple-path cap before falling back to reachable-set semantics.
        #[arg(long, default_value_t = DEFAULT_PATH_CAP)]
        path_cap: usize,
    },
    /// Enrich a CycloneDX SBOM with statically explicit edges recovered from
    /// compiled jars.
    Enrich {
        #[arg(long)]
        sbom: PathBuf,
        /// Directory of jars to index.
        #[arg(long)]
        jars: PathBuf,
        /// Output path for the enriched SBOM.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Benchmark fixture generation and scoring.
    Bench {
        #[command(subcommand)]
        command: BenchCommand,
    },
    /// Show every root-to-component dependency path and which VEX statement
    /// (if any) covers it.
    Paths {
        #[arg(long)]
        sbom: PathBuf,
        /// Component ref (CycloneDX bom-ref / SPDX SPDXID).
        #[arg(long)]
        component: String,
        #[arg(long = "vex")]
        vex: Vec<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_PATH_CAP)]
        path_cap: usize,
    },
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Write the benchmark fixture corpus.
    Gen {
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Score normalized findings reports against the expected matrix.
    Score {
        #[arg(long)]
        expected: PathBuf,
        #[arg(long = "reports", num_args = 1..)]
        reports: Vec<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Json,
    Table,
}

/// Input-level failure: printed to stderr, exit 2.
struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Scan {
            sbom,
            db,
            vex,
            format,
            path_cap,
        } => cmd_scan(&sbom, &db, &vex, format, path_cap),
        Command::Enrich { sbom, jars, output } => cmd_enrich(&sbom, &jars, &output),
        Command::Bench { command } => match command {
            BenchCommand::Gen { output } => cmd_bench_gen(&output),
            BenchCommand::Score { expected, reports } => cmd_bench_score(&expected, &reports),
        },
        Command::Paths {
            sbom,
            component,
            vex,
            path_cap,
        } => cmd_paths(&sbom, &component, &vex, path_cap),
    };
    match result {
        Ok(code) => code,
        Err(InputError(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn read_file(path: &Path) -> Result<String, InputError> {
    fs::read_to_string(path).map_err(|e| InputError(format!("cannot read {}: {e}", path.display())))
}

/// Auto-detects the SBOM format from document content.
fn load_sbom(path: &Path) -> Result<SbomDocument, InputError> {
    let text = read_file(path)?;
    let probe: Value = serde_json::from_str(&text)
        .map_err(|e| InputError(format!("{}: invalid JSON: {e}", path.display())))?;
    let doc = if probe.get("bomFormat").is_some() {
        sbom::parse_cyclonedx(&text)?
    } else if probe.get("spdxVersion").is_some() {
        sbom::parse_spdx(&text)?
    } else {
        return Err(InputError(format!(
            "{}: neither a CycloneDX nor an SPDX document",
            path.display()
        )));
    };
    for diagnostic in &doc.diagnostics {
        eprintln!("warning: {}: {diagnostic}", path.display());
    }
    Ok(doc)
}

fn load_vex_documents(paths: &[PathBuf]) -> Result<Vec<VexDocument>, InputError> {
    paths
        .iter()
        .map(|path| {
            let text = read_file(path)?;
            Ok(vex::parse_openvex(&text, &path.display().to_string())?)
        })
        .collect()
}

fn cmd_scan(
    sbom_path: &Path,
    db_path: &Path,
    vex_paths: &[PathBuf],
    format: OutputFormat,
    path_cap: usize,
) -> Result<ExitCode, InputError> {
    let doc = load_sbom(sbom_path)?;
    let db = vulndb::load_db(db_path)?;
    for diagnostic in &db.diagnostics {
        eprintln!("warning: {diagnostic}");
    }
    let vex_docs = load_vex_documents(vex_paths)?;

    let findings = vulndb::scan_sbom(&db, &doc);
    let findings = vex::apply_vex_with_cap(findings, &doc, &vex_docs, path_cap);

    let reported = findings
        .iter()
        .filter(|f| {
            f.verdict
                .as_ref()
                .map(|v| v.outcome != VerdictOutcome::Suppressed)
                .unwrap_or(true)
        })
        .count();

    match format {
        OutputFormat::Json => println!("{}", findings_json(&findings)),
        OutputFormat::Table => print_findings_table(&findings),
    }

    Ok(if reported == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn findings_json(findings: &[vulndb::Finding]) -> String {
    let mut summary: BTreeMap<&str, usize> = [
        ("reported", 0),
        ("suppressed", 0),
        ("reported-annotated", 0),
    ]
    .into();
    let entries: Vec<Value> = findings
        .iter()
        .map(|f| {
            let verdict = f.verdict.as_ref();
            let outcome = verdict.map(|v| v.outcome.token()).unwrap_or("reported");
            *summary.entry(outcome).or_default() += 1;
            json!({
                "advisory": f.vuln_id,
                "component": f.component_ref,
                "purl": f.matched_identity.to_string(),
                "via_lineage": f.via_lineage,
                "verdict": outcome,
                "paths": f.paths,
                "covered_paths": verdict.map(|v| v.covered_paths.clone()).unwrap_or_default(),
                "uncovered_paths": verdict.map(|v| v.uncovered_paths.clone()).unwrap_or_default(),
                "applied_statements": verdict
                    .map(|v| {
                        v.applied_statements
                            .iter()
                            .map(|a| {
                                json!({
                                    "statement": a.statement_index,
                                    "source": a.source_path,
                                    "status": a.status.token(),
                                    "product": a.product,
                                })
                            })
                            .collect::<Vec<_>>()
                    })
                    .unwrap_or_default(),
            })
        })
        .collect();
    serde_json::to_string_pretty(&json!({ "findings": entries, "summary": summary }))
        .expect("serializable")
}

fn print_findings_table(findings: &[vulndb::Finding]) {
    if findings.is_empty() {
        println!("no findings");
        return;
    }
    for f in findings {
        let verdict = f.verdict.as_ref();
        let outcome = verdict.map(|v| v.outcome.token()).unwrap_or("reported");
        let lineage = if f.via_lineage { " [lineage]" } else { "" };
        let uncovered = verdict.map(|v| v.uncovered_paths.len()).unwrap_or_default();
        println!(
            "{outcome:<20} {:<16} {}{lineage} paths={} uncovered={uncovered}",
            f.vuln_id,
            f.component_ref,
            f.paths.len(),
        );
        if let Some(v) = verdict {
            for idx in &v.uncovered_paths {
                println!("  uncovered path: {}", f.paths[*idx].join(" -> "));
            }
        }
    }
}

fn cmd_enrich(sbom_path: &Path, jar_dir: &Path, out_path: &Path) -> Result<ExitCode, InputError> {
    let doc = load_sbom(sbom_path)?;
    let entries = fs::read_dir(jar_dir)
        .map_err(|e| InputError(format!("cannot read {}: {e}", jar_dir.display())))?;
    let mut jar_paths: Vec<PathBuf> = entries
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("jar"))
        .collect();
    jar_paths.sort();

    let mut indices = Vec::new();
    for path in &jar_paths {
        let bytes = fs::read(path)
            .map_err(|e| InputError(format!("cannot read {}: {e}", path.display())))?;
        match enrich::index_jar(&bytes, &path.display().to_string()) {
            Ok(index) => indices.push(index),
            Err(e) => eprintln!("warning: {}: {e}; jar skipped", path.display()),
        }
    }

    let result = enrich::compute_enrichment(&doc, &indices);
    for diagnostic in &result.diagnostics {
        eprintln!("warning: {diagnostic}");
    }
    let enriched = enrich::enrich_sbom(&doc, &result.edges);
    let text = sbom::serialize_cyclonedx(&enriched);
    fs::write(out_path, text)
        .map_err(|e| InputError(format!("cannot write {}: {e}", out_path.display())))?;

    println!("{} edge(s) added", result.edges.len());
    for edge in &result.edges {
        println!("  {} -> {}", edge.from_ref, edge.to_ref);
        for (src, dst) in &edge.sites {
            println!("    site: {src} -> {dst}");
        }
    }
    if !result.unmapped_references.is_empty() {
        println!(
            "{} referenced class(es) owned by no known component",
            result.unmapped_references.len()
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_bench_gen(outdir: &Path) -> Result<ExitCode, InputError> {
    let manifest = bench::generate_fixtures(outdir)?;
    for path in &manifest {
        println!("{}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_bench_score(expected: &Path, reports: &[PathBuf]) -> Result<ExitCode, InputError> {
    let result = bench::score_files(expected, reports)?;
    for case in &result.per_case {
        let verdict = if case.pass { "PASS" } else { "FAIL" };
        let expected: Vec<String> = case
            .expected
            .iter()
            .map(|(advisory, e)| {
                format!(
                    "{advisory}={}",
                    match e {
                        bench::Expectation::Detected => "detected",
                        bench::Expectation::NotDetected => "not-detected",
                    }
                )
            })
            .collect();
        let actual: Vec<&str> = case.actual.iter().map(String::as_str).collect();
        println!(
            "{verdict} {} ({}): expected [{}], detected [{}]",
            case.id,
            case.phase.token(),
            expected.join(", "),
            actual.join(", ")
        );
    }
    println!("passed {} failed {}", result.passed, result.failed);
    Ok(if result.failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_paths(
    sbom_path: &Path,
    component: &str,
    vex_paths: &[PathBuf],
    path_cap: usize,
) -> Result<ExitCode, InputError> {
    let doc = load_sbom(sbom_path)?;
    if doc.component(component).is_none() {
        return Err(InputError(format!("unknown component ref {component:?}")));
    }
    let vex_docs = load_vex_documents(vex_paths)?;
    let paths = vex::enumerate_paths(&doc, component, path_cap)?;
    if paths.is_empty() {
        println!(
            "no dependency path from {} reaches {component}",
            doc.root_ref
        );
        return Ok(ExitCode::SUCCESS);
    }
    for (i, path) in paths.iter().enumerate() {
        println!("path {}: {}", i + 1, path.join(" -> "));
        match vex::covering_statement(&doc, path, &vex_docs) {
            Some(cover) => println!(
                "  covered by {} statement #{} ({}) for {} (product {})",
                cover.statement.status.token(),
                cover.statement_index,
                cover.source_path,
                cover.statement.vulnerability,
                cover.product
            ),
            None => println!("  uncovered"),
        }
    }
    Ok(ExitCode::SUCCESS)
}
