//! SPDX JSON ingestion (2.3 subset: packages, relationships, externalRefs).

use serde_json::Value;

use crate::identity::{LineageSource, Purl};
use crate::sbom::{
    Component, DependencyEdge, LineageLink, MalformedSbom, SbomDocument, SbomFormat,
};

/// Parses an SPDX JSON document. The DESCRIBES target becomes the root;
/// DEPENDS_ON relationships become declared edges; HAS_VARIANT relationships
/// become lineage links in both directions of interpretation (producers
/// disagree on orientation, and identity expansion is harmless either way —
/// a match always reports which identity fired).
pub fn parse_spdx(text: &str) -> Result<SbomDocument, MalformedSbom> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| MalformedSbom::new("$", format!("invalid JSON: {e}")))?;
    let obj = value
        .as_object()
        .ok_or_else(|| MalformedSbom::new("$", "document is not a JSON object"))?;

    if obj.get("spdxVersion").and_then(Value::as_str).is_none() {
        return Err(MalformedSbom::new("spdxVersion", "missing"));
    }

    let mut diagnostics = Vec::new();
    let mut components = Vec::new();
    for (i, package) in obj
        .get("packages")
        .and_then(Value::as_array)
        .into_iter()
        .flatten()
        .enumerate()
    {
        let path = format!("packages[{i}]");
        let spdx_id = package
            .get("SPDXID")
            .and_then(Value::as_str)
            .ok_or_else(|| MalformedSbom::new(format!("{path}.SPDXID"), "missing"))?;
        let name = package
            .get("name")
            .and_then(Value::as_str)
            .unwrap_or(spdx_id);
        let purl_text = package
            .get("externalRefs")
            .and_then(Value::as_array)
            .into_iter()
            .flatten()
            .find(|r| r.get("referenceType").and_then(Value::as_str) == Some("purl"))
            .and_then(|r| r.get("referenceLocator"))
            .and_then(Value::as_str);
        let identity = match purl_text {
            Some(text) => match Purl::parse(text) {
                Ok(purl) => Some(purl),
                Err(e) => {
                    diagnostics.push(format!(
                        "{path}: unusable purl ({e}); package is unmatchable"
                    ));
                    None
                }
            },
            None => {
                diagnostics.push(format!(
                    "{path}: no purl externalRef; package is unmatchable"
                ));
                None
            }
        };
        components.push(Component::new(spdx_id, name, identity));
    }

    // Root: exactly one DESCRIBES target, from documentDescribes[] or a
    // DESCRIBES relationship off the document element.
    let mut described: Vec<String> = obj
        .get("documentDescribes")
        .and_then(Value::as_array)
        .into_iter()
        .flatten()
        .filter_map(Value::as_str)
        .map(str::to_string)
        .collect();

    let relationships = obj.get("relationships").and_then(Value::as_array);
    for rel in relationships.into_iter().flatten() {
        if rel.get("relationshipType").and_then(Value::as_str) == Some("DESCRIBES") {
            if let Some(target) = rel.get("relatedSpdxElement").and_then(Value::as_str) {
                described.push(target.to_string());
            }
        }
    }
    described.sort();
    described.dedup();
    let root_ref = match described.as_slice() {
        [one] => one.clone(),
        [] => return Err(MalformedSbom::new("relationships", "no DESCRIBES target")),
        many => {
            return Err(MalformedSbom::new(
                "relationships",
                format!("multiple DESCRIBES targets: {many:?}"),
            ))
        }
    };
    if !components.iter().any(|c| c.ref_id == root_ref) {
        return Err(MalformedSbom::new(
            "relationships",
            format!("DESCRIBES target {root_ref:?} is not a package"),
        ));
    }

    let mut doc = SbomDocument {
        format: SbomFormat::Spdx,
        root_ref,
        components,
        edges: Vec::new(),
        lineage: Vec::new(),
        diagnostics,
    };

    for (i, rel) in relationships.into_iter().flatten().enumerate() {
        let path = format!("relationships[{i}]");
        let rel_type = rel
            .get("relationshipType")
            .and_then(Value::as_str)
            .unwrap_or("");
        if !matches!(rel_type, "DEPENDS_ON" | "HAS_VARIANT") {
            continue;
        }
        let from = rel
            .get("spdxElementId")
            .and_then(Value::as_str)
            .ok_or_else(|| MalformedSbom::new(format!("{path}.spdxElementId"), "missing"))?;
        let to = rel
            .get("relatedSpdxElement")
            .and_then(Value::as_str)
            .ok_or_else(|| MalformedSbom::new(format!("{path}.relatedSpdxElement"), "missing"))?;
        for end in [from, to] {
            if doc.component(end).is_none() {
                return Err(MalformedSbom::new(
                    path.clone(),
                    format!("unresolvable ref {end:?}"),
                ));
            }
        }
        match rel_type {
            "DEPENDS_ON" => doc.edges.push(DependencyEdge::declared(from, to)),
            "HAS_VARIANT" => {
                let purl_of = |doc: &SbomDocument, ref_id: &str| {
                    doc.component(ref_id)
                        .and_then(|c| c.identity.as_ref())
                        .map(|i| i.primary().clone())
                };
                let to_purl = purl_of(&doc, to);
                let from_purl = purl_of(&doc, from);
                if let Some(upstream) = to_purl {
                    doc.push_lineage(LineageLink {
                        subject: from.to_string(),
                        upstream,
                        source: LineageSource::SpdxHasVariant,
                    });
                }
                if let Some(upstream) = from_purl {
                    doc.push_lineage(LineageLink {
                        subject: to.to_string(),
                        upstream,
                        source: LineageSource::SpdxHasVariant,
                    });
                }
            }
            _ => unreachable!(),
        }
    }

    doc.validate()?;
    Ok(doc)
}
