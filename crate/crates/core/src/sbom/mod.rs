//! Unified SBOM document model with a typed dependency graph.
//!
//! CycloneDX and SPDX JSON documents parse into the same [`SbomDocument`]
//! shape: one root component, a flat component list, dependency edges typed
//! by how the dependency arises, and variant-lineage links. CycloneDX
//! documents can be serialized back out, carrying bytecode-derived edges in
//! both `dependsOn` (for identity-only consumers) and an `enrichment:edge`
//! component property (for path-aware ones).

mod cyclonedx;
mod spdx;

pub use cyclonedx::{parse_cyclonedx, serialize_cyclonedx};
pub use spdx::parse_spdx;

use std::collections::{BTreeMap, BTreeSet};

use crate::identity::{ComponentIdentity, LineageSource, Purl};

/// Document rejected, with a JSON-path-style diagnostic naming the offending
/// location.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed sbom at {path}: {reason}")]
pub struct MalformedSbom {
    pub path: String,
    pub reason: String,
}

impl MalformedSbom {
    pub(crate) fn new(path: impl Into<String>, reason: impl Into<String>) -> Self {
        MalformedSbom {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SbomFormat {
    CycloneDx,
    Spdx,
}

/// How a dependency edge arises. `Declared` is the manifest-level edge every
/// SBOM generator records; the other three are code-level edges ordered by
/// how hard they are to resolve statically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeKind {
    Declared,
    StaticExplicit,
    DynamicDispatch,
    Reflective,
}

impl EdgeKind {
    pub fn is_code_level(&self) -> bool {
        !matches!(self, EdgeKind::Declared)
    }

    pub fn token(&self) -> &'static str {
        match self {
            EdgeKind::Declared => "declared",
            EdgeKind::StaticExplicit => "static-explicit",
            EdgeKind::DynamicDispatch => "dynamic-dispatch",
            EdgeKind::Reflective => "reflective",
        }
    }

    pub fn from_token(token: &str) -> Option<EdgeKind> {
        match token {
            "declared" => Some(EdgeKind::Declared),
            "static-explicit" => Some(EdgeKind::StaticExplicit),
            "dynamic-dispatch" => Some(EdgeKind::DynamicDispatch),
            "reflective" => Some(EdgeKind::Reflective),
            _ => None,
        }
    }
}

/// Call-site provenance carried by code-level edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub site: String,
    pub technique: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyEdge {
    pub from: String,
    pub to: String,
    pub kind: EdgeKind,
    pub provenance: Option<Provenance>,
}

impl DependencyEdge {
    pub fn declared(from: impl Into<String>, to: impl Into<String>) -> DependencyEdge {
        DependencyEdge {
            from: from.into(),
            to: to.into(),
            kind: EdgeKind::Declared,
            provenance: None,
        }
    }

    pub fn code(
        from: impl Into<String>,
        to: impl Into<String>,
        kind: EdgeKind,
        site: impl Into<String>,
        technique: impl Into<String>,
    ) -> DependencyEdge {
        debug_assert!(kind.is_code_level());
        DependencyEdge {
            from: from.into(),
            to: to.into(),
            kind,
            provenance: Some(Provenance {
                site: site.into(),
                technique: technique.into(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    /// Stable opaque identifier: CycloneDX bom-ref or SPDX SPDXID.
    pub ref_id: String,
    pub name: String,
    /// Absent when the component carries no usable PURL; such components stay
    /// in the graph but never match vulnerabilities.
    pub identity: Option<ComponentIdentity>,
    /// Key/value pairs preserved for write-back. CycloneDX `properties[]`
    /// entries appear under their own names; unmodeled component fields are
    /// stashed under `cdx-json:<field>` with a JSON-encoded value.
    pub raw_properties: Vec<(String, String)>,
}

impl Component {
    pub fn new(ref_id: impl Into<String>, name: impl Into<String>, purl: Option<Purl>) -> Self {
        Component {
            ref_id: ref_id.into(),
            name: name.into(),
            identity: purl.map(ComponentIdentity::new),
            raw_properties: Vec::new(),
        }
    }
}

/// Variant-lineage link: `subject` is the in-document clone/variant,
/// `upstream` the identity it derives from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineageLink {
    pub subject: String,
    pub upstream: Purl,
    pub source: LineageSource,
}

#[derive(Debug, Clone)]
pub struct SbomDocument {
    pub format: SbomFormat,
    pub root_ref: String,
    pub components: Vec<Component>,
    pub edges: Vec<DependencyEdge>,
    pub lineage: Vec<LineageLink>,
    /// Non-fatal parse observations (unmatchable components, skipped variant
    /// entries). Empty for well-formed inputs.
    pub diagnostics: Vec<String>,
}

impl SbomDocument {
    pub fn new(format: SbomFormat, root: Component) -> SbomDocument {
        SbomDocument {
            format,
            root_ref: root.ref_id.clone(),
            components: vec![root],
            edges: Vec::new(),
            lineage: Vec::new(),
            diagnostics: Vec::new(),
        }
    }

    pub fn component(&self, ref_id: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.ref_id == ref_id)
    }

    pub fn component_mut(&mut self, ref_id: &str) -> Option<&mut Component> {
        self.components.iter_mut().find(|c| c.ref_id == ref_id)
    }

    pub fn root(&self) -> &Component {
        self.component(&self.root_ref)
            .expect("root resolves by construction")
    }

    /// Refs reachable via one Declared edge out of `from`.
    pub fn declared_direct_deps(&self, from: &str) -> BTreeSet<&str> {
        self.edges
            .iter()
            .filter(|e| e.kind == EdgeKind::Declared && e.from == from)
            .map(|e| e.to.as_str())
            .collect()
    }

    /// Adds a component, rejecting duplicate refs.
    pub fn push_component(&mut self, component: Component) -> Result<(), MalformedSbom> {
        if self.component(&component.ref_id).is_some() {
            return Err(MalformedSbom::new(
                "components",
                format!("duplicate component ref {:?}", component.ref_id),
            ));
        }
        self.components.push(component);
        Ok(())
    }

    /// Adds a lineage link and mirrors it into the subject's identity set.
    pub fn push_lineage(&mut self, link: LineageLink) {
        if let Some(component) = self.component_mut(&link.subject) {
            if let Some(identity) = component.identity.as_mut() {
                identity.add_lineage(link.upstream.clone(), link.source);
            }
        }
        self.lineage.push(link);
    }

    /// Checks the structural invariants: unique refs, a resolvable root, and
    /// every edge/lineage endpoint resolving to a component.
    pub fn validate(&self) -> Result<(), MalformedSbom> {
        let mut seen = BTreeSet::new();
        for c in &self.components {
            if !seen.insert(c.ref_id.as_str()) {
                return Err(MalformedSbom::new(
                    "components",
                    format!("duplicate component ref {:?}", c.ref_id),
                ));
            }
        }
        if !seen.contains(self.root_ref.as_str()) {
            return Err(MalformedSbom::new(
                "root",
                format!("root ref {:?} is not a component", self.root_ref),
            ));
        }
        for (i, e) in self.edges.iter().enumerate() {
            for end in [&e.from, &e.to] {
                if !seen.contains(end.as_str()) {
                    return Err(MalformedSbom::new(
                        format!("edges[{i}]"),
                        format!("unresolvable ref {end:?}"),
                    ));
                }
            }
            if e.kind.is_code_level() != e.provenance.is_some() {
                return Err(MalformedSbom::new(
                    format!("edges[{i}]"),
                    "provenance present iff the edge is code-level",
                ));
            }
        }
        for (i, l) in self.lineage.iter().enumerate() {
            if !seen.contains(l.subject.as_str()) {
                return Err(MalformedSbom::new(
                    format!("lineage[{i}]"),
                    format!("unresolvable subject {:?}", l.subject),
                ));
            }
        }
        Ok(())
    }

    /// Adjacency over the union of declared and code-level edges, neighbor
    /// lists sorted and deduplicated.
    pub fn adjacency(&self) -> BTreeMap<&str, Vec<&str>> {
        let mut adj: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for c in &self.components {
            adj.entry(c.ref_id.as_str()).or_default();
        }
        for e in &self.edges {
            adj.entry(e.from.as_str())
                .or_default()
                .insert(e.to.as_str());
        }
        adj.into_iter()
            .map(|(k, v)| (k, v.into_iter().collect()))
            .collect()
    }

    /// Graph-equality helper used by roundtrip tests: compares components,
    /// edges and lineage as sets, ignoring order and diagnostics.
    pub fn same_graph(&self, other: &SbomDocument) -> bool {
        fn sorted<T: Ord + Clone>(v: &[T]) -> Vec<T> {
            let mut v = v.to_vec();
            v.sort();
            v
        }
        let comp_key = |c: &Component| {
            (
                c.ref_id.clone(),
                c.name.clone(),
                c.identity.as_ref().map(|i| {
                    (
                        i.primary().to_string(),
                        sorted(
                            &i.lineage()
                                .iter()
                                .map(|(p, s)| (p.to_string(), *s))
                                .collect::<Vec<_>>(),
                        ),
                    )
                }),
                sorted(&c.raw_properties),
            )
        };
        let edge_key = |e: &DependencyEdge| {
            (
                e.from.clone(),
                e.to.clone(),
                e.kind,
                e.provenance
                    .as_ref()
                    .map(|p| (p.site.clone(), p.technique.clone())),
            )
        };
        let lineage_key = |l: &LineageLink| (l.subject.clone(), l.upstream.to_string(), l.source);

        let mut a_comp: Vec<_> = self.components.iter().map(comp_key).collect();
        let mut b_comp: Vec<_> = other.components.iter().map(comp_key).collect();
        a_comp.sort();
        b_comp.sort();
        let mut a_edge: Vec<_> = self.edges.iter().map(edge_key).collect();
        let mut b_edge: Vec<_> = other.edges.iter().map(edge_key).collect();
        a_edge.sort();
        b_edge.sort();
        let mut a_lin: Vec<_> = self.lineage.iter().map(lineage_key).collect();
        let mut b_lin: Vec<_> = other.lineage.iter().map(lineage_key).collect();
        a_lin.sort();
        b_lin.sort();

        self.root_ref == other.root_ref && a_comp == b_comp && a_edge == b_edge && a_lin == b_lin
    }
}
