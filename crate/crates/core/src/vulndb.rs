//! Offline vulnerability database and identity-based component matching.
//!
//! The database is a directory of OSV-style JSON records, one per file:
//!
//! ```json
//! {
//!   "id": "CVE-2017-5645",
//!   "aliases": ["GHSA-fxph-q3j8-mv87"],
//!   "summary": "...",
//!   "severity": "critical",
//!   "affected": [
//!     { "package": { "purl": "pkg:maven/org.apache.logging.log4j/log4j-core" },
//!       "ranges": [ { "events": [ { "introduced": "2.0" }, { "fixed": "2.8.2" } ] } ],
//!       "versions": [] }
//!   ]
//! }
//! ```
//!
//! Matching consults the primary PURL and every lineage PURL of a component;
//! lineage hits are flagged so reports can show that the match fired on an
//! upstream identity rather than the component's own.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::identity::{
    ComponentIdentity, PackageKey, Purl, RangeEvent, RangeEventKind, VersionKey, VersionRange,
};
use crate::sbom::SbomDocument;
use crate::vex::SuppressionVerdict;

#[derive(Debug, thiserror::Error)]
pub enum DbError {
    #[error("cannot read database directory {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// One advisory.
#[derive(Debug, Clone)]
pub struct VulnRecord {
    pub id: String,
    pub aliases: Vec<String>,
    pub summary: String,
    pub severity: Option<String>,
    pub affected: Vec<AffectedPackage>,
}

/// A package the advisory applies to. The purl never carries a version;
/// applicability comes from the ranges.
#[derive(Debug, Clone)]
pub struct AffectedPackage {
    pub package: Purl,
    pub ranges: Vec<VersionRange>,
}

impl AffectedPackage {
    fn applies_to_version(&self, version: &VersionKey) -> bool {
        self.ranges.iter().any(|r| r.contains(version))
    }
}

/// In-memory database indexed by (type, namespace, name).
#[derive(Debug, Default)]
pub struct VulnDatabase {
    records: Vec<VulnRecord>,
    index: BTreeMap<PackageKey, Vec<usize>>,
    /// Per-file load problems; the offending files are skipped, not fatal.
    pub diagnostics: Vec<String>,
}

impl VulnDatabase {
    pub fn records(&self) -> &[VulnRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn insert(&mut self, record: VulnRecord) -> Result<(), String> {
        if self.records.iter().any(|r| r.id == record.id) {
            return Err(format!("duplicate advisory id {:?}", record.id));
        }
        let idx = self.records.len();
        for affected in &record.affected {
            self.index
                .entry(affected.package.package_key())
                .or_default()
                .push(idx);
        }
        self.records.push(record);
        Ok(())
    }
}

// Serde shapes for the on-disk record subset.
#[derive(Deserialize)]
struct RawRecord {
    id: String,
    #[serde(default)]
    aliases: Vec<String>,
    #[serde(default)]
    summary: String,
    #[serde(default)]
    severity: Option<String>,
    #[serde(default)]
    affected: Vec<RawAffected>,
}

#[derive(Deserialize)]
struct RawAffected {
    package: RawPackage,
    #[serde(default)]
    ranges: Vec<RawRange>,
    #[serde(default)]
    versions: Vec<String>,
}

#[derive(Deserialize)]
struct RawPackage {
    purl: String,
}

#[derive(Deserialize)]
struct RawRange {
    #[serde(default)]
    events: Vec<BTreeMap<String, String>>,
}

fn convert_record(raw: RawRecord) -> Result<VulnRecord, String> {
    let mut affected = Vec::new();
    for entry in raw.affected {
        let package = Purl::parse(&entry.package.purl).map_err(|e| e.to_string())?;
        if package.version().is_some() {
            return Err(format!(
                "affected package {} carries a version; use ranges instead",
                entry.package.purl
            ));
        }
        let mut ranges = Vec::new();
        for range in entry.ranges {
            let mut events = Vec::new();
            for event in range.events {
                for (key, version) in event {
                    let kind = match key.as_str() {
                        "introduced" => RangeEventKind::Introduced,
                        "fixed" => RangeEventKind::Fixed,
                        "last_affected" => RangeEventKind::LastAffected,
                        other => return Err(format!("unknown range event {other:?}")),
                    };
                    events.push(RangeEvent {
                        kind,
                        version: VersionKey::parse(&version),
                    });
                }
            }
            ranges.push(VersionRange {
                events,
                exact: Vec::new(),
            });
        }
        if !entry.versions.is_empty() {
            ranges.push(VersionRange::exact_versions(
                entry.versions.iter().map(String::as_str),
            ));
        }
        affected.push(AffectedPackage { package, ranges });
    }
    Ok(VulnRecord {
        id: raw.id,
        aliases: raw.aliases,
        summary: raw.summary,
        severity: raw.severity,
        affected,
    })
}

/// Loads every `*.json` record under `path`. Malformed or unreadable files
/// are skipped with a diagnostic; an empty directory yields an empty, legal
/// database.
pub fn load_db(path: &Path) -> Result<VulnDatabase, DbError> {
    let entries = fs::read_dir(path).map_err(|source| DbError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut files: Vec<_> = entries
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("json"))
        .collect();
    files.sort();

    let mut db = VulnDatabase::default();
    for file in files {
        let label = file.display().to_string();
        let text = match fs::read_to_string(&file) {
            Ok(text) => text,
            Err(e) => {
                db.diagnostics
                    .push(format!("malformed record {label}: unreadable: {e}"));
                continue;
            }
        };
        let raw: RawRecord = match serde_json::from_str(&text) {
            Ok(raw) => raw,
            Err(e) => {
                db.diagnostics
                    .push(format!("malformed record {label}: {e}"));
                continue;
            }
        };
        match convert_record(raw) {
            Ok(record) => {
                if let Err(e) = db.insert(record) {
                    db.diagnostics
                        .push(format!("malformed record {label}: {e}"));
                }
            }
            Err(e) => db
                .diagnostics
                .push(format!("malformed record {label}: {e}")),
        }
    }
    Ok(db)
}

/// One (record, matched identity) hit for a component.
#[derive(Debug, Clone)]
pub struct IdentityMatch<'a> {
    pub record: &'a VulnRecord,
    pub matched: Purl,
    pub via_lineage: bool,
}

/// Matches a component identity set against the database. Primary identity
/// first, then lineage identities in insertion order; per identity the hits
/// come back sorted by advisory id. Identities without a version never match
/// (range containment needs one).
pub fn match_component<'a>(
    db: &'a VulnDatabase,
    identity: &ComponentIdentity,
) -> Vec<IdentityMatch<'a>> {
    let mut out = Vec::new();
    for (purl, via_lineage) in identity.all() {
        let Some(version) = purl.version().map(VersionKey::parse) else {
            continue;
        };
        let key = purl.package_key();
        let mut hits: Vec<&VulnRecord> = db
            .index
            .get(&key)
            .into_iter()
            .flatten()
            .map(|&i| &db.records[i])
            .filter(|record| {
                record
                    .affected
                    .iter()
                    .any(|a| a.package.package_key() == key && a.applies_to_version(&version))
            })
            .collect();
        hits.sort_by(|a, b| a.id.cmp(&b.id));
        hits.dedup_by(|a, b| a.id == b.id);
        out.extend(hits.into_iter().map(|record| IdentityMatch {
            record,
            matched: purl.clone(),
            via_lineage,
        }));
    }
    out
}

/// A per-(component, advisory) match. Paths and the suppression verdict are
/// filled in by the vex module.
#[derive(Debug, Clone)]
pub struct Finding {
    pub vuln_id: String,
    /// Alias identifiers of the advisory, carried so VEX statements naming an
    /// alias (e.g. a GHSA id) still match.
    pub aliases: Vec<String>,
    pub component_ref: String,
    pub matched_identity: Purl,
    pub via_lineage: bool,
    pub paths: Vec<Vec<String>>,
    pub verdict: Option<SuppressionVerdict>,
}

impl Finding {
    /// All identifiers this finding answers to.
    pub fn identifiers(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.vuln_id.as_str()).chain(self.aliases.iter().map(String::as_str))
    }
}

/// Scans every component of a document, returning one finding per
/// (component, advisory) pair, ordered by component ref then advisory id.
/// When both the primary and a lineage identity hit the same advisory the
/// primary match wins.
pub fn scan_sbom(db: &VulnDatabase, doc: &SbomDocument) -> Vec<Finding> {
    let mut refs: Vec<&str> = doc.components.iter().map(|c| c.ref_id.as_str()).collect();
    refs.sort();

    let mut findings = Vec::new();
    for ref_id in refs {
        let component = doc.component(ref_id).expect("ref enumerated from doc");
        let Some(identity) = &component.identity else {
            continue;
        };
        let mut per_advisory: BTreeMap<&str, IdentityMatch> = BTreeMap::new();
        for hit in match_component(db, identity) {
            let advisory: &str = hit.record.id.as_str();
            per_advisory
                .entry(advisory)
                .and_modify(|existing| {
                    if existing.via_lineage && !hit.via_lineage {
                        *existing = hit.clone();
                    }
                })
                .or_insert(hit);
        }
        for (vuln_id, hit) in per_advisory {
            findings.push(Finding {
                vuln_id: vuln_id.to_string(),
                aliases: hit.record.aliases.clone(),
                component_ref: ref_id.to_string(),
                matched_identity: hit.matched,
                via_lineage: hit.via_lineage,
                paths: Vec::new(),
                verdict: None,
            });
        }
    }
    findings
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::identity::LineageSource;

    pub(crate) fn record(id: &str, purl: &str, introduced: &str, fixed: &str) -> VulnRecord {
        VulnRecord {
            id: id.to_string(),
            aliases: Vec::new(),
            summary: String::new(),
            severity: None,
            affected: vec![AffectedPackage {
                package: Purl::parse(purl).unwrap(),
                ranges: vec![VersionRange::introduced_fixed(introduced, fixed)],
            }],
        }
    }

    fn fixture_db() -> VulnDatabase {
        let mut db = VulnDatabase::default();
        db.insert(record(
            "CVE-2017-5645",
            "pkg:maven/org.apache.logging.log4j/log4j-core",
            "2.0",
            "2.8.2",
        ))
        .unwrap();
        db.insert(record(
            "CVE-2021-44228",
            "pkg:maven/org.apache.logging.log4j/log4j-api",
            "2.0",
            "2.15.0",
        ))
        .unwrap();
        db.insert(record(
            "CVE-2021-45046",
            "pkg:maven/org.apache.logging.log4j/log4j-api",
            "2.0",
            "2.16.0",
        ))
        .unwrap();
        db
    }

    #[test]
    fn matches_log4j_core_directly() {
        let db = fixture_db();
        let identity = ComponentIdentity::new(
            Purl::parse("pkg:maven/org.apache.logging.log4j/log4j-core@2.8.1").unwrap(),
        );
        let hits = match_component(&db, &identity);
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].record.id, "CVE-2017-5645");
        assert!(!hits[0].via_lineage);
    }

    #[test]
    fn clone_matches_only_through_lineage() {
        let db = fixture_db();
        let clone_purl =
            Purl::parse("pkg:maven/uk.co.nichesolutions.logging.log4j/log4j-api@2.6.3-CUSTOM")
                .unwrap();

        let bare = ComponentIdentity::new(clone_purl.clone());
        assert!(match_component(&db, &bare).is_empty());

        let mut with_lineage = ComponentIdentity::new(clone_purl);
        with_lineage.add_lineage(
            Purl::parse("pkg:maven/org.apache.logging.log4j/log4j-api@2.10.0").unwrap(),
            LineageSource::CycloneDxPedigree,
        );
        let hits = match_component(&db, &with_lineage);
        let ids: Vec<&str> = hits.iter().map(|h| h.record.id.as_str()).collect();
        assert_eq!(ids, ["CVE-2021-44228", "CVE-2021-45046"]);
        assert!(hits.iter().all(|h| h.via_lineage));
    }

    #[test]
    fn fixed_version_is_outside_range() {
        let db = fixture_db();
        let identity = ComponentIdentity::new(
            Purl::parse("pkg:maven/org.apache.logging.log4j/log4j-core@2.8.2").unwrap(),
        );
        assert!(match_component(&db, &identity).is_empty());
    }

    #[test]
    fn empty_sbom_yields_zero_findings() {
        use crate::sbom::{Component, SbomDocument, SbomFormat};
        let db = fixture_db();
        let doc = SbomDocument::new(
            SbomFormat::CycloneDx,
            Component::new(
                "app",
                "app",
                Some(Purl::parse("pkg:maven/example/app@1.0").unwrap()),
            ),
        );
        assert!(scan_sbom(&db, &doc).is_empty());
    }

    #[test]
    fn scan_is_invariant_under_component_permutation() {
        use crate::sbom::{Component, DependencyEdge, SbomDocument, SbomFormat};
        let db = fixture_db();
        let mut doc = SbomDocument::new(
            SbomFormat::CycloneDx,
            Component::new(
                "app",
                "app",
                Some(Purl::parse("pkg:maven/example/app@1.0").unwrap()),
            ),
        );
        doc.push_component(Component::new(
            "log4j-core",
            "log4j-core",
            Some(Purl::parse("pkg:maven/org.apache.logging.log4j/log4j-core@2.8.1").unwrap()),
        ))
        .unwrap();
        doc.push_component(Component::new(
            "log4j-api",
            "log4j-api",
            Some(Purl::parse("pkg:maven/org.apache.logging.log4j/log4j-api@2.10.0").unwrap()),
        ))
        .unwrap();
        doc.edges
            .push(DependencyEdge::declared("app", "log4j-core"));
        doc.edges.push(DependencyEdge::declared("app", "log4j-api"));

        let baseline: Vec<(String, String)> = scan_sbom(&db, &doc)
            .into_iter()
            .map(|f| (f.component_ref, f.vuln_id))
            .collect();
        assert_eq!(baseline.len(), 3);

        let mut shuffled = doc.clone();
        shuffled.components.reverse();
        let reordered: Vec<(String, String)> = scan_sbom(&db, &shuffled)
            .into_iter()
            .map(|f| (f.component_ref, f.vuln_id))
            .collect();
        assert_eq!(baseline, reordered);
    }

    #[test]
    fn removing_lineage_removes_exactly_lineage_findings() {
        use crate::sbom::{Component, DependencyEdge, LineageLink, SbomDocument, SbomFormat};
        let db = fixture_db();
        let clone_purl =
            Purl::parse("pkg:maven/uk.co.nichesolutions.logging.log4j/log4j-api@2.6.3-CUSTOM")
                .unwrap();
        let mut with_lineage = SbomDocument::new(
            SbomFormat::CycloneDx,
            Component::new(
                "app",
                "app",
                Some(Purl::parse("pkg:maven/example/app@1.0").unwrap()),
            ),
        );
        with_lineage
            .push_component(Component::new("clone", "log4j-api", Some(clone_purl)))
            .unwrap();
        with_lineage
            .edges
            .push(DependencyEdge::declared("app", "clone"));
        let without_lineage = with_lineage.clone();
        with_lineage.push_lineage(LineageLink {
            subject: "clone".to_string(),
            upstream: Purl::parse("pkg:maven/org.apache.logging.log4j/log4j-api@2.10.0").unwrap(),
            source: LineageSource::CycloneDxPedigree,
        });

        let full = scan_sbom(&db, &with_lineage);
        let reduced = scan_sbom(&db, &without_lineage);
        assert!(full.iter().all(|f| f.via_lineage));
        assert_eq!(full.len(), 2);
        assert!(reduced.is_empty());
    }

    #[test]
    fn load_db_skips_bad_files() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("good.json"),
            r#"{ "id": "CVE-1", "affected": [ { "package": { "purl": "pkg:maven/a/b" },
                "ranges": [ { "events": [ { "introduced": "1.0" }, { "fixed": "2.0" } ] } ] } ] }"#,
        )
        .unwrap();
        std::fs::write(dir.path().join("bad.json"), "{ not json").unwrap();
        let db = load_db(dir.path()).unwrap();
        assert_eq!(db.len(), 1);
        assert_eq!(db.diagnostics.len(), 1);
        assert!(db.diagnostics[0].contains("bad.json"));
    }

    #[test]
    fn empty_dir_is_legal() {
        let dir = tempfile::tempdir().unwrap();
        let db = load_db(dir.path()).unwrap();
        assert!(db.is_empty());
        assert!(db.diagnostics.is_empty());
    }

    #[test]
    fn versioned_affected_purl_is_malformed() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("versioned.json"),
            r#"{ "id": "CVE-1", "affected": [ { "package": { "purl": "pkg:maven/a/b@1.0" } } ] }"#,
        )
        .unwrap();
        let db = load_db(dir.path()).unwrap();
        assert!(db.is_empty());
        assert_eq!(db.diagnostics.len(), 1);
    }
}
