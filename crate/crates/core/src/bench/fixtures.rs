//! Benchmark fixture content: two study corpora, a three-record advisory
//! database, an OpenVEX document, and the expected-result matrix.
//!
//! The suppression-scope corpus (`study1/`): four applications over the
//! chain app -> lib1 -> log4j-core@2.8.1, differing in how (or whether)
//! application code reaches log4j directly; enriched variants carry the
//! hidden code edge. The variant-lineage corpus (`study2/`): a clone of
//! log4j-api@2.10.0 under a custom identity, with and without variant
//! lineage metadata, in both SBOM formats.

use serde_json::{json, Value};

use crate::bench::classgen::ClassBuilder;
use crate::bench::{Expectation, Phase, TestCase};
use crate::enrich::write_stored_archive;
use crate::identity::{LineageSource, Purl};
use crate::sbom::{
    serialize_cyclonedx, Component, DependencyEdge, EdgeKind, LineageLink, SbomDocument, SbomFormat,
};

pub const STUDY1_CASES: [&str; 4] = [
    "app-static",
    "app-dynamic",
    "app-reflective",
    "app-unreachable",
];
/// The three cases whose vulnerable code is reachable from application code.
pub const STUDY1_REACHABLE: [&str; 3] = ["app-static", "app-dynamic", "app-reflective"];

pub const LIB1_PURL: &str = "pkg:maven/example/lib1@1.0-SNAPSHOT";
pub const LOG4J_CORE_PURL: &str = "pkg:maven/org.apache.logging.log4j/log4j-core@2.8.1";
pub const CLONE_PURL: &str = "pkg:maven/uk.co.nichesolutions.logging.log4j/log4j-api@2.6.3-CUSTOM";
pub const UPSTREAM_PURL: &str = "pkg:maven/org.apache.logging.log4j/log4j-api@2.10.0";

pub const CVE_LOG4J_CORE: &str = "CVE-2017-5645";
pub const CVE_LOG4SHELL: &str = "CVE-2021-44228";
pub const CVE_LOG4SHELL_FOLLOWUP: &str = "CVE-2021-45046";

fn component(ref_id: &str, name: &str, purl: &str, ctype: &str) -> Component {
    let mut c = Component::new(ref_id, name, Some(Purl::parse(purl).expect("fixture purl")));
    c.raw_properties
        .push(("cdx-json:type".to_string(), format!("\"{ctype}\"")));
    c
}

/// The suppression-scope component graph for one test case, optionally with the
/// hidden code-level edge the enrichment analysis (or a richer one) would
/// recover.
pub fn study1_doc(case: &str, enriched: bool) -> SbomDocument {
    let app_purl = format!("pkg:maven/example/{case}@1.0-SNAPSHOT");
    let mut doc = SbomDocument::new(
        SbomFormat::CycloneDx,
        component(case, case, &app_purl, "application"),
    );
    doc.push_component(component("lib1", "lib1", LIB1_PURL, "library"))
        .unwrap();
    doc.push_component(component(
        "log4j-core",
        "log4j-core",
        LOG4J_CORE_PURL,
        "library",
    ))
    .unwrap();
    doc.edges.push(DependencyEdge::declared(case, "lib1"));
    doc.edges
        .push(DependencyEdge::declared("lib1", "log4j-core"));

    if enriched {
        let edge = match case {
            "app-static" => Some(DependencyEdge::code(
                case,
                "log4j-core",
                EdgeKind::StaticExplicit,
                "example/app/Main -> org/apache/logging/log4j/core/Logger",
                "constant-pool-scan",
            )),
            "app-dynamic" => Some(DependencyEdge::code(
                case,
                "log4j-core",
                EdgeKind::DynamicDispatch,
                "example/app/Main -> example/lib1/LogProvider -> org/apache/logging/log4j/core/Logger",
                "dispatch-analysis",
            )),
            "app-reflective" => Some(DependencyEdge::code(
                case,
                "log4j-core",
                EdgeKind::Reflective,
                "example/app/Main: forName(\"org.apache.logging.log4j.core.Logger\")",
                "string-literal-analysis",
            )),
            _ => None,
        };
        doc.edges.extend(edge);
    }
    doc
}

/// The variant-lineage CycloneDX document: app -> clone, optionally with the clone's
/// upstream identity recorded in pedigree variants.
pub fn study2_cdx_doc(with_variants: bool) -> SbomDocument {
    let mut doc = SbomDocument::new(
        SbomFormat::CycloneDx,
        component("app", "app", "pkg:maven/example/app@1.0.0", "application"),
    );
    doc.push_component(component(
        "log4j-api-clone",
        "log4j-api",
        CLONE_PURL,
        "library",
    ))
    .unwrap();
    doc.edges
        .push(DependencyEdge::declared("app", "log4j-api-clone"));
    if with_variants {
        doc.push_lineage(LineageLink {
            subject: "log4j-api-clone".to_string(),
            upstream: Purl::parse(UPSTREAM_PURL).unwrap(),
            source: LineageSource::CycloneDxPedigree,
        });
    }
    doc
}

pub fn study2_cdx_text(with_variants: bool) -> String {
    serialize_cyclonedx(&study2_cdx_doc(with_variants))
}

/// The variant-lineage SPDX document. The with-variants form lists the upstream artifact
/// as a package (SPDX relationships need both endpoints as elements) and
/// links the cloned package to the original with HAS_VARIANT.
pub fn study2_spdx_text(with_variants: bool) -> String {
    let mut packages = vec![
        spdx_package("SPDXRef-app", "app", "1.0.0", "pkg:maven/example/app@1.0.0"),
        spdx_package(
            "SPDXRef-log4j-api-clone",
            "log4j-api",
            "2.6.3-CUSTOM",
            CLONE_PURL,
        ),
    ];
    let mut relationships = vec![
        json!({
            "spdxElementId": "SPDXRef-DOCUMENT",
            "relationshipType": "DESCRIBES",
            "relatedSpdxElement": "SPDXRef-app"
        }),
        json!({
            "spdxElementId": "SPDXRef-app",
            "relationshipType": "DEPENDS_ON",
            "relatedSpdxElement": "SPDXRef-log4j-api-clone"
        }),
    ];
    if with_variants {
        packages.push(spdx_package(
            "SPDXRef-log4j-api-upstream",
            "log4j-api",
            "2.10.0",
            UPSTREAM_PURL,
        ));
        relationships.push(json!({
            "spdxElementId": "SPDXRef-log4j-api-clone",
            "relationshipType": "HAS_VARIANT",
            "relatedSpdxElement": "SPDXRef-log4j-api-upstream"
        }));
    }
    let doc = json!({
        "spdxVersion": "SPDX-2.3",
        "dataLicense": "CC0-1.0",
        "SPDXID": "SPDXRef-DOCUMENT",
        "name": "variant-app",
        "documentNamespace": "https://example.invalid/spdxdocs/variant-app",
        "creationInfo": {
            "created": "2024-01-01T00:00:00Z",
            "creators": ["Tool: vexpath"]
        },
        "packages": packages,
        "relationships": relationships
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("serializable");
    text.push('\n');
    text
}

fn spdx_package(spdx_id: &str, name: &str, version: &str, purl: &str) -> Value {
    json!({
        "SPDXID": spdx_id,
        "name": name,
        "versionInfo": version,
        "downloadLocation": "NOASSERTION",
        "externalRefs": [
            {
                "referenceCategory": "PACKAGE-MANAGER",
                "referenceType": "purl",
                "referenceLocator": purl
            }
        ]
    })
}

/// The three advisory records, as (file name, JSON text) pairs.
pub fn db_records() -> Vec<(String, String)> {
    let records = vec![
        json!({
            "id": CVE_LOG4J_CORE,
            "aliases": ["GHSA-fxph-q3j8-mv87"],
            "summary": "Apache Log4j socket server deserializes untrusted data, which can lead to remote code execution.",
            "severity": "critical",
            "affected": [
                {
                    "package": { "purl": "pkg:maven/org.apache.logging.log4j/log4j-core" },
                    "ranges": [
                        { "events": [ { "introduced": "2.0" }, { "fixed": "2.8.2" } ] }
                    ]
                }
            ]
        }),
        json!({
            "id": CVE_LOG4SHELL,
            "aliases": ["GHSA-jfh8-c2jp-5v3q"],
            "summary": "JNDI lookup features allow remote code execution via attacker-controlled log messages.",
            "severity": "critical",
            "affected": [
                {
                    "package": { "purl": "pkg:maven/org.apache.logging.log4j/log4j-api" },
                    "ranges": [
                        { "events": [ { "introduced": "2.0" }, { "fixed": "2.15.0" } ] }
                    ]
                }
            ]
        }),
        json!({
            "id": CVE_LOG4SHELL_FOLLOWUP,
            "aliases": ["GHSA-7rjr-3q55-vv33"],
            "summary": "Incomplete fix for CVE-2021-44228 allows denial of service and, in some configurations, remote code execution.",
            "severity": "critical",
            "affected": [
                {
                    "package": { "purl": "pkg:maven/org.apache.logging.log4j/log4j-api" },
                    "ranges": [
                        { "events": [ { "introduced": "2.0" }, { "fixed": "2.16.0" } ] }
                    ]
                }
            ]
        }),
    ];
    records
        .into_iter()
        .map(|r| {
            let id = r["id"].as_str().unwrap().to_string();
            let mut text = serde_json::to_string_pretty(&r).expect("serializable");
            text.push('\n');
            (format!("{id}.json"), text)
        })
        .collect()
}

pub const DB_README: &str = "\
# Fixture vulnerability database

Hand-authored advisory records in an OSV-style JSON subset
(`{id, aliases, summary, severity, affected[].package.purl,
affected[].ranges[].events}`), one record per file.

Attribution note: CVE-2021-44228 and CVE-2021-45046 are recorded here
against `org.apache.logging.log4j/log4j-api` so that the variant-lineage
benchmark (a clone of `log4j-api@2.10.0`) exercises identity expansion
against a single upstream package. Public advisories attribute both CVEs
to `log4j-core`. These records are test fixtures, not advisory data.
";

/// Class files for one suppression-scope application jar. All four variants call into
/// lib1; they differ in how the log4j reference appears.
fn app_main_class(case: &str) -> Vec<u8> {
    let builder =
        ClassBuilder::new("example/app/Main").method_ref("example/lib1/Lib1Api", "greet", "()V");
    match case {
        // Explicit type reference: the log4j class is named in the pool.
        "app-static" => builder
            .method_ref(
                "org/apache/logging/log4j/core/Logger",
                "error",
                "(Ljava/lang/String;)V",
            )
            .build(),
        // Interface only at the call site: no log4j name anywhere.
        "app-dynamic" => builder
            .interface_method_ref("example/lib1/LogProvider", "log", "(Ljava/lang/String;)V")
            .build(),
        // Class name only inside a string literal.
        "app-reflective" => builder
            .method_ref(
                "java/lang/Class",
                "forName",
                "(Ljava/lang/String;)Ljava/lang/Class;",
            )
            .string_literal("org.apache.logging.log4j.core.Logger")
            .build(),
        // No hidden code-level dependency at all.
        "app-unreachable" => builder.build(),
        other => panic!("unknown study1 case {other}"),
    }
}

fn pom_properties(group: &str, artifact: &str, version: &str) -> (String, Vec<u8>) {
    (
        format!("META-INF/maven/{group}/{artifact}/pom.properties"),
        format!("#fixture\ngroupId={group}\nartifactId={artifact}\nversion={version}\n")
            .into_bytes(),
    )
}

/// The jar set for one suppression-scope case: the application jar plus its two
/// dependencies, as (file name, archive bytes) pairs.
pub fn study1_jars(case: &str) -> Vec<(String, Vec<u8>)> {
    let app_jar = write_stored_archive(&[
        pom_properties("example", case, "1.0-SNAPSHOT"),
        ("example/app/Main.class".to_string(), app_main_class(case)),
    ]);

    let lib1_jar = write_stored_archive(&[
        pom_properties("example", "lib1", "1.0-SNAPSHOT"),
        (
            "example/lib1/Lib1Api.class".to_string(),
            ClassBuilder::new("example/lib1/Lib1Api")
                .method_ref(
                    "org/apache/logging/log4j/core/Logger",
                    "error",
                    "(Ljava/lang/String;)V",
                )
                .build(),
        ),
        (
            "example/lib1/LogProvider.class".to_string(),
            ClassBuilder::new("example/lib1/LogProvider")
                .class_ref("org/apache/logging/log4j/core/Logger")
                .build(),
        ),
    ]);

    let log4j_jar = write_stored_archive(&[
        pom_properties("org.apache.logging.log4j", "log4j-core", "2.8.1"),
        (
            "org/apache/logging/log4j/core/Logger.class".to_string(),
            ClassBuilder::new("org/apache/logging/log4j/core/Logger")
                .class_ref("org/apache/logging/log4j/core/config/Configuration")
                .build(),
        ),
        (
            "org/apache/logging/log4j/core/config/Configuration.class".to_string(),
            ClassBuilder::new("org/apache/logging/log4j/core/config/Configuration").build(),
        ),
    ]);

    vec![
        (format!("{case}-1.0-SNAPSHOT.jar"), app_jar),
        ("lib1-1.0-SNAPSHOT.jar".to_string(), lib1_jar),
        ("log4j-core-2.8.1.jar".to_string(), log4j_jar),
    ]
}

/// The full expected-result matrix:
/// * base phase — identity-only scanning flags the advisory in all four
///   applications (the vulnerable artifact is present regardless of
///   reachability);
/// * with-vex phase — path-sensitive suppression keeps the three reachable
///   cases detected and clears only app-unreachable;
/// * variant-matrix phase — no detection without lineage metadata, both
///   advisories with it, in either format.
pub fn expected_matrix() -> Vec<TestCase> {
    let mut rows = Vec::new();

    for case in STUDY1_CASES {
        rows.push(TestCase {
            id: case.to_string(),
            phase: Phase::Base,
            inputs: vec![format!("study1/{case}.cdx.json"), "db".to_string()],
            expected: [(CVE_LOG4J_CORE.to_string(), Expectation::Detected)].into(),
        });
    }

    for case in STUDY1_CASES {
        let sbom = if STUDY1_REACHABLE.contains(&case) {
            format!("study1/{case}.enriched.cdx.json")
        } else {
            format!("study1/{case}.cdx.json")
        };
        let expectation = if case == "app-unreachable" {
            Expectation::NotDetected
        } else {
            Expectation::Detected
        };
        rows.push(TestCase {
            id: case.to_string(),
            phase: Phase::WithVex,
            inputs: vec![sbom, "study1/lib1.vex.json".to_string(), "db".to_string()],
            expected: [(CVE_LOG4J_CORE.to_string(), expectation)].into(),
        });
    }

    let variant_cases = [
        (
            "cdx",
            "study2/sbom-cycloneDX.json",
            Expectation::NotDetected,
        ),
        (
            "cdx-variants",
            "study2/sbom-cycloneDX-with-variants.json",
            Expectation::Detected,
        ),
        ("spdx", "study2/sbom-spdx.json", Expectation::NotDetected),
        (
            "spdx-variants",
            "study2/sbom-spdx-with-variants.json",
            Expectation::Detected,
        ),
    ];
    for (id, input, expectation) in variant_cases {
        rows.push(TestCase {
            id: id.to_string(),
            phase: Phase::VariantMatrix,
            inputs: vec![input.to_string(), "db".to_string()],
            expected: [
                (CVE_LOG4SHELL.to_string(), expectation),
                (CVE_LOG4SHELL_FOLLOWUP.to_string(), expectation),
            ]
            .into(),
        });
    }

    rows
}
