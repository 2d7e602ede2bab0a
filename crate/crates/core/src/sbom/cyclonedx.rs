//! CycloneDX JSON ingestion (spec >= 1.4 subset) and serialization.
//!
//! Consumed on parse: `metadata.component`, `components[]` (bom-ref, name,
//! purl, `pedigree.variants[]`, `properties[]`), `dependencies[]`. The
//! `enrichment:edge` component property is the write-back carrier for
//! code-level edges; everything else on a component is preserved opaquely in
//! `raw_properties` so serialization loses nothing.

use serde_json::{json, Map, Value};

use crate::identity::{LineageSource, Purl};
use crate::sbom::{
    Component, DependencyEdge, EdgeKind, LineageLink, MalformedSbom, SbomDocument, SbomFormat,
};

/// Component property carrying one code-level edge on its source component.
pub const ENRICHMENT_PROPERTY: &str = "enrichment:edge";
/// Prefix under which unmodeled component JSON fields are stashed in
/// `raw_properties`.
const RAW_JSON_PREFIX: &str = "cdx-json:";

/// Parses a CycloneDX JSON document into the unified model.
pub fn parse_cyclonedx(text: &str) -> Result<SbomDocument, MalformedSbom> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| MalformedSbom::new("$", format!("invalid JSON: {e}")))?;
    let obj = value
        .as_object()
        .ok_or_else(|| MalformedSbom::new("$", "document is not a JSON object"))?;

    match obj.get("bomFormat").and_then(Value::as_str) {
        Some("CycloneDX") => {}
        Some(other) => {
            return Err(MalformedSbom::new(
                "bomFormat",
                format!("expected CycloneDX, got {other:?}"),
            ))
        }
        None => return Err(MalformedSbom::new("bomFormat", "missing")),
    }

    let mut diagnostics = Vec::new();

    let root_value = obj
        .get("metadata")
        .and_then(|m| m.get("component"))
        .ok_or_else(|| MalformedSbom::new("metadata.component", "missing root component"))?;
    let (root, root_variants, root_enrichment) =
        parse_component(root_value, "metadata.component", &mut diagnostics)?;

    let mut doc = SbomDocument::new(SbomFormat::CycloneDx, root);
    let mut variant_queue = vec![(doc.root_ref.clone(), root_variants)];
    let mut enrichment_queue: Vec<(String, Vec<Value>)> =
        vec![(doc.root_ref.clone(), root_enrichment)];

    if let Some(components) = obj.get("components") {
        let list = components
            .as_array()
            .ok_or_else(|| MalformedSbom::new("components", "expected an array"))?;
        for (i, entry) in list.iter().enumerate() {
            let path = format!("components[{i}]");
            let (component, variants, enrichment) =
                parse_component(entry, &path, &mut diagnostics)?;
            // Some producers repeat the root in components[]; sameness by ref.
            if component.ref_id == doc.root_ref {
                continue;
            }
            variant_queue.push((component.ref_id.clone(), variants));
            enrichment_queue.push((component.ref_id.clone(), enrichment));
            doc.push_component(component)?;
        }
    }

    // Declared edges, tentatively: an enrichment property for the same pair
    // reclassifies the edge as code-level below.
    let mut declared: Vec<(String, String)> = Vec::new();
    if let Some(deps) = obj.get("dependencies") {
        let list = deps
            .as_array()
            .ok_or_else(|| MalformedSbom::new("dependencies", "expected an array"))?;
        for (i, entry) in list.iter().enumerate() {
            let from = entry
                .get("ref")
                .and_then(Value::as_str)
                .ok_or_else(|| MalformedSbom::new(format!("dependencies[{i}].ref"), "missing"))?;
            if doc.component(from).is_none() {
                return Err(MalformedSbom::new(
                    format!("dependencies[{i}].ref"),
                    format!("unresolvable ref {from:?}"),
                ));
            }
            let targets = entry.get("dependsOn").and_then(Value::as_array);
            for (j, target) in targets.into_iter().flatten().enumerate() {
                let to = target.as_str().ok_or_else(|| {
                    MalformedSbom::new(
                        format!("dependencies[{i}].dependsOn[{j}]"),
                        "expected a string ref",
                    )
                })?;
                if doc.component(to).is_none() {
                    return Err(MalformedSbom::new(
                        format!("dependencies[{i}].dependsOn[{j}]"),
                        format!("unresolvable ref {to:?}"),
                    ));
                }
                declared.push((from.to_string(), to.to_string()));
            }
        }
    }

    // Code-level edges from write-back properties.
    let mut code_edges: Vec<DependencyEdge> = Vec::new();
    for (from, entries) in enrichment_queue {
        for (i, entry) in entries.iter().enumerate() {
            let path = format!("component {from:?} {ENRICHMENT_PROPERTY}[{i}]");
            let to = entry
                .get("to")
                .and_then(Value::as_str)
                .ok_or_else(|| MalformedSbom::new(path.clone(), "missing \"to\""))?;
            if doc.component(to).is_none() {
                return Err(MalformedSbom::new(path, format!("unresolvable ref {to:?}")));
            }
            let kind_token = entry
                .get("kind")
                .and_then(Value::as_str)
                .unwrap_or("static-explicit");
            let kind = EdgeKind::from_token(kind_token)
                .filter(|k| k.is_code_level())
                .ok_or_else(|| {
                    MalformedSbom::new(path.clone(), format!("unknown edge kind {kind_token:?}"))
                })?;
            let site = entry
                .get("site")
                .and_then(Value::as_str)
                .unwrap_or("")
                .to_string();
            let technique = entry
                .get("technique")
                .and_then(Value::as_str)
                .unwrap_or("")
                .to_string();
            code_edges.push(DependencyEdge::code(
                from.clone(),
                to,
                kind,
                site,
                technique,
            ));
        }
    }

    for (from, to) in declared {
        if code_edges.iter().any(|e| e.from == from && e.to == to) {
            continue;
        }
        doc.edges.push(DependencyEdge::declared(from, to));
    }
    doc.edges.extend(code_edges);

    for (subject, variants) in variant_queue {
        for (i, entry) in variants.iter().enumerate() {
            // Variant entries are either component objects with a purl or
            // bare purl strings.
            let purl_text = match entry {
                Value::String(s) => Some(s.as_str()),
                Value::Object(o) => o.get("purl").and_then(Value::as_str),
                _ => None,
            };
            let Some(purl_text) = purl_text else {
                diagnostics.push(format!(
                    "component {subject:?}: pedigree.variants[{i}] has no purl; ignored"
                ));
                continue;
            };
            match Purl::parse(purl_text) {
                Ok(upstream) => doc.push_lineage(LineageLink {
                    subject: subject.clone(),
                    upstream,
                    source: LineageSource::CycloneDxPedigree,
                }),
                Err(e) => diagnostics.push(format!(
                    "component {subject:?}: pedigree.variants[{i}]: {e}; ignored"
                )),
            }
        }
    }

    doc.diagnostics.extend(diagnostics);
    doc.validate()?;
    Ok(doc)
}

type ParsedComponent = (Component, Vec<Value>, Vec<Value>);

fn parse_component(
    value: &Value,
    path: &str,
    diagnostics: &mut Vec<String>,
) -> Result<ParsedComponent, MalformedSbom> {
    let obj = value
        .as_object()
        .ok_or_else(|| MalformedSbom::new(path, "component is not an object"))?;

    let purl_text = obj.get("purl").and_then(Value::as_str);
    let name = obj.get("name").and_then(Value::as_str);
    let ref_id = obj
        .get("bom-ref")
        .and_then(Value::as_str)
        .or(purl_text)
        .or(name)
        .ok_or_else(|| MalformedSbom::new(path, "component has no bom-ref, purl or name"))?
        .to_string();
    let name = name.unwrap_or(ref_id.as_str()).to_string();

    let identity = match purl_text {
        Some(text) => match Purl::parse(text) {
            Ok(purl) => Some(purl),
            Err(e) => {
                diagnostics.push(format!(
                    "{path}: unusable purl ({e}); component is unmatchable"
                ));
                None
            }
        },
        None => {
            diagnostics.push(format!("{path}: no purl; component is unmatchable"));
            None
        }
    };

    let mut component = Component::new(ref_id, name, identity);
    let mut variants = Vec::new();
    let mut enrichment = Vec::new();

    for (key, field) in obj {
        match key.as_str() {
            "bom-ref" | "name" | "purl" => {}
            "pedigree" => {
                if let Some(list) = field.get("variants").and_then(Value::as_array) {
                    variants = list.clone();
                }
                let mut rest = field.as_object().cloned().unwrap_or_default();
                rest.remove("variants");
                if !rest.is_empty() {
                    component.raw_properties.push((
                        format!("{RAW_JSON_PREFIX}pedigree"),
                        Value::Object(rest).to_string(),
                    ));
                }
            }
            "properties" => {
                for prop in field.as_array().into_iter().flatten() {
                    let pname = prop.get("name").and_then(Value::as_str).unwrap_or("");
                    let pvalue = prop.get("value").and_then(Value::as_str).unwrap_or("");
                    if pname == ENRICHMENT_PROPERTY {
                        let parsed: Value = serde_json::from_str(pvalue).map_err(|e| {
                            MalformedSbom::new(
                                format!("{path}.properties"),
                                format!("unparsable {ENRICHMENT_PROPERTY} value: {e}"),
                            )
                        })?;
                        enrichment.push(parsed);
                    } else {
                        component
                            .raw_properties
                            .push((pname.to_string(), pvalue.to_string()));
                    }
                }
            }
            other => {
                component
                    .raw_properties
                    .push((format!("{RAW_JSON_PREFIX}{other}"), field.to_string()));
            }
        }
    }

    Ok((component, variants, enrichment))
}

/// Serializes the document back to CycloneDX JSON. Code-level edges appear in
/// `dependsOn` alongside declared edges and additionally as one
/// `enrichment:edge` property per edge on the source component;
/// `parse_cyclonedx` reproduces the same graph.
pub fn serialize_cyclonedx(doc: &SbomDocument) -> String {
    let mut out = Map::new();
    out.insert("bomFormat".to_string(), json!("CycloneDX"));
    out.insert("specVersion".to_string(), json!("1.4"));
    out.insert("version".to_string(), json!(1));
    out.insert(
        "metadata".to_string(),
        json!({ "component": component_value(doc, doc.root()) }),
    );

    let components: Vec<Value> = doc
        .components
        .iter()
        .filter(|c| c.ref_id != doc.root_ref)
        .map(|c| component_value(doc, c))
        .collect();
    out.insert("components".to_string(), Value::Array(components));

    let mut by_ref: Vec<&str> = doc
        .components
        .iter()
        .map(|c| c.ref_id.as_str())
        .filter(|r| doc.edges.iter().any(|e| &e.from == r))
        .collect();
    by_ref.sort();
    let dependencies: Vec<Value> = by_ref
        .iter()
        .map(|r| {
            let mut targets: Vec<&str> = doc
                .edges
                .iter()
                .filter(|e| &e.from == r)
                .map(|e| e.to.as_str())
                .collect();
            targets.sort();
            targets.dedup();
            json!({ "ref": r, "dependsOn": targets })
        })
        .collect();
    out.insert("dependencies".to_string(), Value::Array(dependencies));

    let mut text = serde_json::to_string_pretty(&Value::Object(out)).expect("serializable");
    text.push('\n');
    text
}

fn component_value(doc: &SbomDocument, component: &Component) -> Value {
    let mut obj = Map::new();
    obj.insert("bom-ref".to_string(), json!(component.ref_id));
    obj.insert("name".to_string(), json!(component.name));
    if let Some(identity) = &component.identity {
        obj.insert("purl".to_string(), json!(identity.primary().to_string()));
    }

    let mut properties: Vec<Value> = Vec::new();
    let mut stashed_pedigree: Option<Map<String, Value>> = None;
    for (key, value) in &component.raw_properties {
        if let Some(field) = key.strip_prefix(RAW_JSON_PREFIX) {
            let parsed: Value =
                serde_json::from_str(value).unwrap_or_else(|_| Value::String(value.clone()));
            if field == "pedigree" {
                stashed_pedigree = parsed.as_object().cloned();
            } else {
                obj.insert(field.to_string(), parsed);
            }
        } else {
            properties.push(json!({ "name": key, "value": value }));
        }
    }

    for edge in doc
        .edges
        .iter()
        .filter(|e| e.from == component.ref_id && e.kind.is_code_level())
    {
        let provenance = edge
            .provenance
            .as_ref()
            .expect("code edges carry provenance");
        let value = json!({
            "to": edge.to,
            "kind": edge.kind.token(),
            "site": provenance.site,
            "technique": provenance.technique,
        });
        properties.push(json!({ "name": ENRICHMENT_PROPERTY, "value": value.to_string() }));
    }
    if !properties.is_empty() {
        obj.insert("properties".to_string(), Value::Array(properties));
    }

    let variants: Vec<Value> = doc
        .lineage
        .iter()
        .filter(|l| l.subject == component.ref_id && l.source == LineageSource::CycloneDxPedigree)
        .map(|l| json!({ "purl": l.upstream.to_string() }))
        .collect();
    if !variants.is_empty() || stashed_pedigree.is_some() {
        let mut pedigree = stashed_pedigree.unwrap_or_default();
        if !variants.is_empty() {
            pedigree.insert("variants".to_string(), Value::Array(variants));
        }
        obj.insert("pedigree".to_string(), Value::Object(pedigree));
    }

    Value::Object(obj)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn study1_style_doc() -> &'static str {
        r#"{
          "bomFormat": "CycloneDX",
          "specVersion": "1.4",
          "version": 1,
          "metadata": {
            "component": {
              "bom-ref": "app", "type": "application", "name": "app",
              "purl": "pkg:maven/example/app@1.0-SNAPSHOT"
            }
          },
          "components": [
            { "bom-ref": "lib1", "type": "library", "name": "lib1",
              "purl": "pkg:maven/example/lib1@1.0-SNAPSHOT" },
            { "bom-ref": "log4j-core", "type": "library", "name": "log4j-core",
              "purl": "pkg:maven/org.apache.logging.log4j/log4j-core@2.8.1" }
          ],
          "dependencies": [
            { "ref": "app", "dependsOn": ["lib1"] },
            { "ref": "lib1", "dependsOn": ["log4j-core"] }
          ]
        }"#
    }

    #[test]
    fn parses_declared_chain() {
        let doc = parse_cyclonedx(study1_style_doc()).unwrap();
        assert_eq!(doc.components.len(), 3);
        assert_eq!(doc.edges.len(), 2);
        assert!(doc.edges.iter().all(|e| e.kind == EdgeKind::Declared));
        assert_eq!(doc.root_ref, "app");
        assert!(doc.diagnostics.is_empty());
    }

    #[test]
    fn parses_pedigree_variants_into_lineage() {
        let text = r#"{
          "bomFormat": "CycloneDX",
          "metadata": { "component": { "bom-ref": "app", "name": "app",
            "purl": "pkg:maven/example/app@1.0.0" } },
          "components": [
            { "bom-ref": "clone", "name": "log4j-api",
              "purl": "pkg:maven/uk.co.nichesolutions.logging.log4j/log4j-api@2.6.3-CUSTOM",
              "pedigree": { "variants": [
                { "type": "library", "name": "log4j-api",
                  "purl": "pkg:maven/org.apache.logging.log4j/log4j-api@2.10.0" }
              ] } }
          ],
          "dependencies": [ { "ref": "app", "dependsOn": ["clone"] } ]
        }"#;
        let doc = parse_cyclonedx(text).unwrap();
        assert_eq!(doc.lineage.len(), 1);
        let link = &doc.lineage[0];
        assert_eq!(link.subject, "clone");
        assert_eq!(
            link.upstream.to_string(),
            "pkg:maven/org.apache.logging.log4j/log4j-api@2.10.0"
        );
        assert_eq!(link.source, LineageSource::CycloneDxPedigree);
        let clone = doc.component("clone").unwrap();
        assert_eq!(clone.identity.as_ref().unwrap().lineage().len(), 1);
    }

    #[test]
    fn bare_purl_string_variant_accepted() {
        let text = r#"{
          "bomFormat": "CycloneDX",
          "metadata": { "component": { "bom-ref": "app", "name": "app",
            "purl": "pkg:maven/example/app@1.0.0" } },
          "components": [
            { "bom-ref": "clone", "name": "clone", "purl": "pkg:maven/x/clone@1",
              "pedigree": { "variants": ["pkg:maven/y/orig@2"] } }
          ]
        }"#;
        let doc = parse_cyclonedx(text).unwrap();
        assert_eq!(doc.lineage.len(), 1);
        assert_eq!(doc.lineage[0].upstream.to_string(), "pkg:maven/y/orig@2");
    }

    #[test]
    fn empty_inventory_yields_root_only() {
        let text = r#"{
          "bomFormat": "CycloneDX",
          "metadata": { "component": { "bom-ref": "app", "name": "app",
            "purl": "pkg:maven/example/app@1.0.0" } },
          "components": []
        }"#;
        let doc = parse_cyclonedx(text).unwrap();
        assert_eq!(doc.components.len(), 1);
        assert!(doc.edges.is_empty());
    }

    #[test]
    fn missing_bom_format_rejected() {
        let err = parse_cyclonedx(r#"{ "components": [] }"#).unwrap_err();
        assert_eq!(err.path, "bomFormat");
    }

    #[test]
    fn unresolvable_depends_on_names_path() {
        let text = r#"{
          "bomFormat": "CycloneDX",
          "metadata": { "component": { "bom-ref": "app", "name": "app",
            "purl": "pkg:maven/example/app@1.0.0" } },
          "dependencies": [ { "ref": "app", "dependsOn": ["ghost"] } ]
        }"#;
        let err = parse_cyclonedx(text).unwrap_err();
        assert_eq!(err.path, "dependencies[0].dependsOn[0]");
    }

    #[test]
    fn purl_less_component_flagged_unmatchable() {
        let text = r#"{
          "bomFormat": "CycloneDX",
          "metadata": { "component": { "bom-ref": "app", "name": "app",
            "purl": "pkg:maven/example/app@1.0.0" } },
          "components": [ { "bom-ref": "mystery", "name": "mystery" } ]
        }"#;
        let doc = parse_cyclonedx(text).unwrap();
        assert!(doc.component("mystery").unwrap().identity.is_none());
        assert_eq!(doc.diagnostics.len(), 1);
        assert!(doc.diagnostics[0].contains("unmatchable"));
    }

    #[test]
    fn code_edge_roundtrips_through_property() {
        let mut doc = parse_cyclonedx(study1_style_doc()).unwrap();
        doc.edges.push(DependencyEdge::code(
            "app",
            "log4j-core",
            EdgeKind::StaticExplicit,
            "example/app/Main -> org/apache/logging/log4j/core/Logger",
            "constant-pool-scan",
        ));
        let text = serialize_cyclonedx(&doc);
        assert!(text.contains(ENRICHMENT_PROPERTY));
        let reparsed = parse_cyclonedx(&text).unwrap();
        assert!(doc.same_graph(&reparsed));
        // Identity-only consumers see the code edge in dependsOn.
        let app_deps: Vec<&DependencyEdge> =
            reparsed.edges.iter().filter(|e| e.from == "app").collect();
        assert_eq!(app_deps.len(), 2);
        assert!(app_deps
            .iter()
            .any(|e| e.to == "log4j-core" && e.kind == EdgeKind::StaticExplicit));
    }

    #[test]
    fn serialize_without_code_edges_is_plain_roundtrip() {
        let doc = parse_cyclonedx(study1_style_doc()).unwrap();
        let text = serialize_cyclonedx(&doc);
        assert!(!text.contains(ENRICHMENT_PROPERTY));
        let reparsed = parse_cyclonedx(&text).unwrap();
        assert!(doc.same_graph(&reparsed));
    }

    #[test]
    fn unknown_component_fields_survive_roundtrip() {
        let text = r#"{
          "bomFormat": "CycloneDX",
          "metadata": { "component": { "bom-ref": "app", "name": "app",
            "purl": "pkg:maven/example/app@1.0.0", "type": "application" } },
          "components": [
            { "bom-ref": "lib", "name": "lib", "purl": "pkg:maven/example/lib@1",
              "type": "library", "scope": "required",
              "properties": [ { "name": "custom:marker", "value": "kept" } ] }
          ],
          "dependencies": [ { "ref": "app", "dependsOn": ["lib"] } ]
        }"#;
        let doc = parse_cyclonedx(text).unwrap();
        let out = serialize_cyclonedx(&doc);
        let reparsed = parse_cyclonedx(&out).unwrap();
        assert!(doc.same_graph(&reparsed));
        assert!(out.contains("\"scope\": \"required\""));
        assert!(out.contains("custom:marker"));
    }
}
