//! Bytecode-level SBOM enrichment.
//!
//! Indexes compiled JARs, maps JVM class names to SBOM components through
//! each jar's embedded Maven coordinates, scans class files for named type
//! references, and writes any cross-component reference missing from the
//! declared dependency graph back into the SBOM as a statically explicit
//! edge. The constant-pool scan covers only statically explicit references;
//! virtual dispatch and reflection never name the target class in the pool
//! and stay out of reach of this technique.

pub mod classfile;
pub mod zip;

pub use classfile::{scan_class, ClassReferenceSet};
pub use zip::{read_archive, write_stored_archive, ZipEntry};

use std::collections::{BTreeMap, BTreeSet};

use crate::sbom::{DependencyEdge, EdgeKind, SbomDocument};

/// Technique tag stamped on edges produced by this module.
pub const TECHNIQUE: &str = "constant-pool-scan";

/// Reference prefixes that never map to SBOM components. Platform classes
/// ship with the JVM, not as supply-chain components.
pub const DEFAULT_EXCLUDE_PREFIXES: &[&str] = &["java/", "javax/"];

/// Archive rejected (bad central directory, truncated data). The jar is
/// skipped with a diagnostic.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed archive: {reason}")]
pub struct MalformedArchive {
    pub reason: String,
}

impl MalformedArchive {
    pub(crate) fn new(reason: impl Into<String>) -> Self {
        MalformedArchive {
            reason: reason.into(),
        }
    }
}

/// Class file rejected (truncated pool, bad tag). The class is skipped with
/// a diagnostic.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed class file: {reason}")]
pub struct MalformedClassFile {
    pub reason: String,
}

impl MalformedClassFile {
    pub(crate) fn new(reason: impl Into<String>) -> Self {
        MalformedClassFile {
            reason: reason.into(),
        }
    }
}

/// Maven coordinates recovered from a jar. Group is absent when only the
/// `artifact-version.jar` filename convention was available.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MavenCoords {
    pub group: Option<String>,
    pub artifact: String,
    pub version: String,
}

/// One class entry inside an indexed jar.
#[derive(Debug, Clone)]
pub struct ClassEntry {
    /// Archive entry locator.
    pub entry_name: String,
    pub bytes: Vec<u8>,
}

/// An indexed jar: its coordinates and every class it carries.
#[derive(Debug, Clone)]
pub struct JarIndex {
    pub jar_path: String,
    pub coords: Option<MavenCoords>,
    pub classes: BTreeMap<String, ClassEntry>,
}

/// Indexes a jar: records all `*.class` entries (multi-release overlays
/// under `META-INF/versions/` are skipped; the base entries are what gets
/// scanned) and extracts Maven coordinates from `pom.properties`, falling
/// back to the `artifact-version.jar` filename convention.
pub fn index_jar(bytes: &[u8], jar_path: &str) -> Result<JarIndex, MalformedArchive> {
    let entries = read_archive(bytes)?;
    let mut classes = BTreeMap::new();
    let mut coords = None;

    for entry in entries {
        if entry.name.starts_with("META-INF/versions/") {
            continue;
        }
        if let Some(class_name) = entry.name.strip_suffix(".class") {
            classes.insert(
                class_name.to_string(),
                ClassEntry {
                    entry_name: entry.name.clone(),
                    bytes: entry.data,
                },
            );
        } else if coords.is_none()
            && entry.name.starts_with("META-INF/maven/")
            && entry.name.ends_with("/pom.properties")
        {
            coords = parse_pom_properties(&entry.data);
        }
    }

    if coords.is_none() {
        coords = coords_from_filename(jar_path);
    }

    Ok(JarIndex {
        jar_path: jar_path.to_string(),
        coords,
        classes,
    })
}

fn parse_pom_properties(data: &[u8]) -> Option<MavenCoords> {
    let text = String::from_utf8_lossy(data);
    let mut group = None;
    let mut artifact = None;
    let mut version = None;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            continue;
        };
        match key.trim() {
            "groupId" => group = Some(value.trim().to_string()),
            "artifactId" => artifact = Some(value.trim().to_string()),
            "version" => version = Some(value.trim().to_string()),
            _ => {}
        }
    }
    Some(MavenCoords {
        group: Some(group?),
        artifact: artifact?,
        version: version?,
    })
}

/// `artifact-version.jar`: the version starts at the first dash followed by a
/// digit, so `log4j-core-2.8.1.jar` and `lib1-1.0-SNAPSHOT.jar` both split
/// correctly.
fn coords_from_filename(jar_path: &str) -> Option<MavenCoords> {
    let file = jar_path.rsplit(['/', '\\']).next()?;
    let stem = file.strip_suffix(".jar")?;
    let bytes = stem.as_bytes();
    for i in 0..bytes.len().saturating_sub(1) {
        if bytes[i] == b'-' && bytes[i + 1].is_ascii_digit() {
            return Some(MavenCoords {
                group: None,
                artifact: stem[..i].to_string(),
                version: stem[i + 1..].to_string(),
            });
        }
    }
    None
}

/// Where a class resolves: its owning component and the jar it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassOwner {
    pub component_ref: String,
    pub jar_index: usize,
}

/// Class-name to component mapping built from jar coordinates.
#[derive(Debug, Default)]
pub struct ClassMap {
    pub map: BTreeMap<String, ClassOwner>,
    /// Shading suspects: a class present in more than one jar, with all
    /// owners listed. Resolution is first-wins in jar input order.
    pub diagnostics: Vec<String>,
}

fn jar_component_ref(coords: &MavenCoords, doc: &SbomDocument) -> Option<String> {
    doc.components
        .iter()
        .find(|c| {
            let Some(identity) = &c.identity else {
                return false;
            };
            let purl = identity.primary();
            if !purl.name().eq_ignore_ascii_case(&coords.artifact) {
                return false;
            }
            if purl.version() != Some(coords.version.as_str()) {
                return false;
            }
            match (&coords.group, purl.namespace()) {
                (Some(group), Some(ns)) => group.eq_ignore_ascii_case(ns),
                (Some(_), None) => false,
                // Filename-derived coordinates carry no group; match on
                // artifact and version alone.
                (None, _) => true,
            }
        })
        .map(|c| c.ref_id.clone())
}

/// Maps every class in the given jars to the SBOM component whose PURL
/// matches the jar's coordinates. Classes in jars with no matching component
/// are excluded; duplicate class names resolve to the first jar in input
/// order with a diagnostic listing all owners.
pub fn build_class_map(indices: &[JarIndex], doc: &SbomDocument) -> ClassMap {
    let mut out = ClassMap::default();
    let mut owners: BTreeMap<&str, Vec<&str>> = BTreeMap::new();

    for (jar_index, jar) in indices.iter().enumerate() {
        let component_ref = jar.coords.as_ref().and_then(|c| jar_component_ref(c, doc));
        for class_name in jar.classes.keys() {
            owners
                .entry(class_name.as_str())
                .or_default()
                .push(jar.jar_path.as_str());
            if let Some(component_ref) = &component_ref {
                out.map.entry(class_name.clone()).or_insert(ClassOwner {
                    component_ref: component_ref.clone(),
                    jar_index,
                });
            }
        }
    }

    for (class_name, jars) in owners {
        if jars.len() > 1 {
            out.diagnostics.push(format!(
                "class {class_name} present in multiple jars (shading suspect), first wins: {}",
                jars.join(", ")
            ));
        }
    }
    out
}

/// A hidden cross-component edge recovered from bytecode, with every
/// (source class, referenced class) pair that witnessed it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnrichmentEdge {
    pub from_ref: String,
    pub to_ref: String,
    pub sites: Vec<(String, String)>,
}

/// Output of [`compute_enrichment`]: the edges plus scan observations.
#[derive(Debug, Default)]
pub struct EnrichmentResult {
    pub edges: Vec<EnrichmentEdge>,
    /// Referenced classes owned by no known component (counted, no edges).
    pub unmapped_references: BTreeSet<String>,
    pub diagnostics: Vec<String>,
}

pub fn compute_enrichment(doc: &SbomDocument, indices: &[JarIndex]) -> EnrichmentResult {
    compute_enrichment_with_excludes(doc, indices, DEFAULT_EXCLUDE_PREFIXES)
}

/// Scans every mapped class and yields an edge for each cross-component
/// reference whose target is not among the source component's declared
/// direct dependencies. Output order is deterministic (sorted by from/to and
/// site) and independent of jar input order except for the documented
/// duplicate-class tie-break.
pub fn compute_enrichment_with_excludes(
    doc: &SbomDocument,
    indices: &[JarIndex],
    exclude_prefixes: &[&str],
) -> EnrichmentResult {
    let class_map = build_class_map(indices, doc);
    let mut result = EnrichmentResult {
        diagnostics: class_map.diagnostics.clone(),
        ..Default::default()
    };

    let mut edges: BTreeMap<(String, String), Vec<(String, String)>> = BTreeMap::new();
    for (class_name, owner) in &class_map.map {
        let entry = &indices[owner.jar_index].classes[class_name];
        let refs = match scan_class(&entry.bytes) {
            Ok(refs) => refs,
            Err(e) => {
                result.diagnostics.push(format!(
                    "{}: class {class_name} skipped: {e}",
                    indices[owner.jar_index].jar_path
                ));
                continue;
            }
        };
        let declared = doc.declared_direct_deps(&owner.component_ref);
        for referenced in &refs.referenced {
            if exclude_prefixes.iter().any(|p| referenced.starts_with(p)) {
                continue;
            }
            let Some(target) = class_map.map.get(referenced) else {
                result.unmapped_references.insert(referenced.clone());
                continue;
            };
            if target.component_ref == owner.component_ref {
                continue;
            }
            if declared.contains(target.component_ref.as_str()) {
                continue;
            }
            edges
                .entry((owner.component_ref.clone(), target.component_ref.clone()))
                .or_default()
                .push((class_name.clone(), referenced.clone()));
        }
    }

    result.edges = edges
        .into_iter()
        .map(|((from_ref, to_ref), mut sites)| {
            sites.sort();
            sites.dedup();
            EnrichmentEdge {
                from_ref,
                to_ref,
                sites,
            }
        })
        .collect();
    result
}

/// Merges enrichment edges into the document as `StaticExplicit` edges with
/// call-site provenance. Idempotent: an edge already present contributes
/// nothing.
pub fn enrich_sbom(doc: &SbomDocument, edges: &[EnrichmentEdge]) -> SbomDocument {
    let mut out = doc.clone();
    for edge in edges {
        let exists = out.edges.iter().any(|e| {
            e.from == edge.from_ref && e.to == edge.to_ref && e.kind == EdgeKind::StaticExplicit
        });
        if exists {
            continue;
        }
        let site = edge
            .sites
            .iter()
            .map(|(src, dst)| format!("{src} -> {dst}"))
            .collect::<Vec<_>>()
            .join("; ");
        out.edges.push(DependencyEdge::code(
            edge.from_ref.clone(),
            edge.to_ref.clone(),
            EdgeKind::StaticExplicit,
            site,
            TECHNIQUE,
        ));
    }
    out
}
